//! Geodesic segments, exponential and logarithm maps.
//!
//! Geodesics of the half-space model are vertical rays and half-circles
//! orthogonal to the ideal boundary. The circle case is solved in closed form
//! inside the vertical 2-plane spanned by the two points, and parametrized by
//! hyperbolic arclength through `sigma = log tan(theta/2)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geom::point::{dist, Model, Point, TangentVector, DEGENERATE_SEP};

#[derive(Clone, Debug)]
pub enum Arc {
    /// `gamma(s) = (foot, h0 * exp(dir * s))`.
    Vertical { foot: DVector<f64>, h0: f64, dir: f64 },
    /// Half-circle of Euclidean `radius` about `center` (on the boundary) in
    /// the vertical plane spanned by the horizontal unit `u` and the upward
    /// axis; `sigma0` is the arclength coordinate of `gamma(0)`.
    Circle {
        center: DVector<f64>,
        radius: f64,
        u: DVector<f64>,
        sigma0: f64,
        dir: f64,
    },
}

#[derive(Clone, Debug)]
pub struct GeodesicSegment {
    arc: Arc,
    length: f64,
    dim: usize,
}

fn theta_of_sigma(sigma: f64) -> f64 {
    2.0 * sigma.exp().atan()
}

impl GeodesicSegment {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn arc(&self) -> &Arc {
        &self.arc
    }

    /// Unit-speed evaluation; `s = 0` is the first endpoint.
    pub fn eval(&self, s: f64) -> Point {
        Point::halfspace_unchecked(self.eval_coords(s))
    }

    pub fn eval_coords(&self, s: f64) -> DVector<f64> {
        match &self.arc {
            Arc::Vertical { foot, h0, dir } => {
                let mut x = foot.clone();
                let n = self.dim;
                x[n - 1] = h0 * (dir * s).exp();
                x
            }
            Arc::Circle { center, radius, u, sigma0, dir } => {
                let theta = theta_of_sigma(sigma0 + dir * s);
                let n = self.dim;
                let mut x = center + u * (radius * theta.cos());
                x[n - 1] = radius * theta.sin();
                x
            }
        }
    }

    /// Hyperbolic-unit tangent at arclength `s`, pointing forward.
    pub fn tangent(&self, s: f64) -> TangentVector {
        let p = self.eval(s);
        let comps = self.tangent_coords(s);
        TangentVector::new(p, comps)
    }

    pub fn tangent_coords(&self, s: f64) -> DVector<f64> {
        let n = self.dim;
        match &self.arc {
            Arc::Vertical { h0, dir, .. } => {
                let mut v = DVector::zeros(n);
                v[n - 1] = dir * h0 * (dir * s).exp();
                v
            }
            Arc::Circle { radius, u, sigma0, dir, .. } => {
                let theta = theta_of_sigma(sigma0 + dir * s);
                let (sin_t, cos_t) = theta.sin_cos();
                // d pos / d sigma = R sin(theta) (-sin(theta) u + cos(theta) e_n)
                let mut v = u * (-radius * sin_t * sin_t);
                v[n - 1] = radius * sin_t * cos_t;
                v * *dir
            }
        }
    }

    pub fn start(&self) -> Point {
        self.eval(0.0)
    }

    pub fn end(&self) -> Point {
        self.eval(self.length)
    }
}

/// The geodesic segment from `p` to `q`.
pub fn geodesic(p: &Point, q: &Point) -> Result<GeodesicSegment> {
    if p.model() != Model::HalfSpace || q.model() != Model::HalfSpace {
        return Err(Error::ModelMismatch(p.model().name(), q.model().name()));
    }
    let n = p.dim();
    let scale = p.height().max(q.height());
    if (p.coords() - q.coords()).norm() < DEGENERATE_SEP * scale {
        return Err(Error::DegenerateSegment);
    }
    let mut dx = q.coords() - p.coords();
    dx[n - 1] = 0.0;
    let xi = dx.norm();
    if xi < 1e-13 * scale {
        let mut foot = p.coords().clone();
        let hp = p.height();
        let hq = q.height();
        foot[n - 1] = 0.0;
        let dir = if hq > hp { 1.0 } else { -1.0 };
        return Ok(GeodesicSegment {
            arc: Arc::Vertical { foot, h0: hp, dir },
            length: (hq / hp).ln().abs(),
            dim: n,
        });
    }
    let u = &dx / xi;
    let hp = p.height();
    let hq = q.height();
    // Circle center along u from the foot of p, orthogonal to the boundary.
    let t = (xi * xi + hq * hq - hp * hp) / (2.0 * xi);
    let radius = (t * t + hp * hp).sqrt();
    let mut center = p.coords() + &u * t;
    center[n - 1] = 0.0;
    let theta_p = hp.atan2(-t);
    let theta_q = hq.atan2(xi - t);
    let sigma_p = (theta_p / 2.0).tan().ln();
    let sigma_q = (theta_q / 2.0).tan().ln();
    let dir = if sigma_q > sigma_p { 1.0 } else { -1.0 };
    Ok(GeodesicSegment {
        arc: Arc::Circle { center, radius, u, sigma0: sigma_p, dir },
        length: (sigma_q - sigma_p).abs(),
        dim: n,
    })
}

/// Riemannian exponential: the point at distance `|v|` from `p` along the
/// geodesic with initial direction `v`. Returns `p` for a (near-)zero vector.
pub fn exp_map(p: &Point, v: &TangentVector) -> Result<Point> {
    if p.model() != Model::HalfSpace {
        return Err(Error::ModelMismatch(p.model().name(), Model::HalfSpace.name()));
    }
    let n = p.dim();
    let t = v.norm();
    if t < 1e-15 {
        return Ok(p.clone());
    }
    let w = &v.components / v.components.norm();
    let mut wh = w.clone();
    wh[n - 1] = 0.0;
    let horiz = wh.norm();
    if horiz < 1e-13 {
        let mut x = p.coords().clone();
        x[n - 1] = p.height() * (w[n - 1].signum() * t).exp();
        return Point::halfspace(x);
    }
    let u = &wh / horiz;
    // Angle of p on the circle: sin = |w_h|, cos = -w_n, so that the initial
    // velocity points in the direction of decreasing angle.
    let sin0 = horiz;
    let cos0 = -w[n - 1];
    let radius = p.height() / sin0;
    let mut center = p.coords() - &u * (radius * cos0);
    center[n - 1] = 0.0;
    let theta0 = sin0.atan2(cos0);
    let sigma0 = (theta0 / 2.0).tan().ln();
    let theta = theta_of_sigma(sigma0 - t);
    let mut x = center + &u * (radius * theta.cos());
    x[n - 1] = radius * theta.sin();
    Point::halfspace(x)
}

/// Riemannian logarithm: the initial velocity of the geodesic from `p` to `q`,
/// with hyperbolic norm `dist(p, q)`. Returns the zero vector for `p = q`.
pub fn log_map(p: &Point, q: &Point) -> Result<TangentVector> {
    match geodesic(p, q) {
        Ok(seg) => {
            let t0 = seg.tangent(0.0);
            Ok(TangentVector::new(p.clone(), t0.components * seg.length()))
        }
        Err(Error::DegenerateSegment) => {
            Ok(TangentVector::new(p.clone(), DVector::zeros(p.dim())))
        }
        Err(e) => Err(e),
    }
}

/// Distance helper tolerating the degenerate case.
pub fn safe_dist(p: &Point, q: &Point) -> f64 {
    dist(p, q).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn hs(coords: &[f64]) -> Point {
        Point::from_slice_halfspace(coords).unwrap()
    }

    #[test]
    fn vertical_segment_has_log_length() {
        let seg = geodesic(&hs(&[0.0, 0.0, 1.0]), &hs(&[0.0, 0.0, 2.0])).unwrap();
        assert_abs_diff_eq!(seg.length(), std::f64::consts::LN_2, epsilon = 1e-14);
        assert!(matches!(seg.arc(), Arc::Vertical { .. }));
    }

    #[test]
    fn degenerate_pair_is_an_error() {
        let p = hs(&[0.4, 0.2, 1.0]);
        assert!(matches!(geodesic(&p, &p), Err(Error::DegenerateSegment)));
    }

    #[test]
    fn symmetric_arc_has_centered_circle() {
        let h = 0.8;
        let seg = geodesic(&hs(&[1.0, 0.0, h]), &hs(&[-1.0, 0.0, h])).unwrap();
        match seg.arc() {
            Arc::Circle { center, radius, .. } => {
                assert!(center.norm() < 1e-12);
                assert_abs_diff_eq!(*radius, (1.0 + h * h).sqrt(), epsilon = 1e-12);
            }
            a => panic!("expected circle, got {a:?}"),
        }
    }

    #[test]
    fn circle_recovery_residuals() {
        let p = hs(&[0.0, 0.0, 1.0]);
        let q = hs(&[1.0, 0.0, 2.0]);
        let seg = geodesic(&p, &q).unwrap();
        match seg.arc() {
            Arc::Circle { center, radius, .. } => {
                assert!((((p.coords() - center).norm()) - radius).abs() < 1e-12);
                assert!((((q.coords() - center).norm()) - radius).abs() < 1e-12);
                assert!(center[2].abs() < 1e-15); // meets the boundary orthogonally
            }
            a => panic!("expected circle, got {a:?}"),
        }
    }

    #[test]
    fn length_matches_distance_and_midpoint_splits() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..300 {
            let p = hs(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0)]);
            let q = hs(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0)]);
            if (p.coords() - q.coords()).norm() < 1e-9 {
                continue;
            }
            let seg = geodesic(&p, &q).unwrap();
            let d = dist(&p, &q).unwrap();
            assert_abs_diff_eq!(seg.length(), d, epsilon = 1e-11 * (1.0 + d));
            assert!((seg.start().coords() - p.coords()).norm() < 1e-11);
            assert!((seg.end().coords() - q.coords()).norm() < 1e-10 * (1.0 + q.coords().norm()));
            let m = seg.eval(seg.length() / 2.0);
            assert_abs_diff_eq!(dist(&p, &m).unwrap(), d / 2.0, epsilon = 1e-10);
            assert_abs_diff_eq!(dist(&m, &q).unwrap(), d / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn unit_speed_evaluator() {
        let seg = geodesic(&hs(&[0.3, -0.4, 0.9]), &hs(&[-1.2, 0.6, 1.7])).unwrap();
        for k in 0..8 {
            let s = seg.length() * (k as f64) / 7.0;
            assert_abs_diff_eq!(seg.tangent(s).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn exp_vertical_case() {
        let p = Point::base(3);
        let v = TangentVector::new(p.clone(), DVector::from_column_slice(&[0.0, 0.0, 1.5]));
        let q = exp_map(&p, &v).unwrap();
        assert_abs_diff_eq!(q.height(), 1.5f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn exp_log_round_trip_random() {
        let mut rng = StdRng::seed_from_u64(32);
        let mut max_err: f64 = 0.0;
        for _ in 0..1000 {
            let p = hs(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0)]);
            let q = hs(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0)]);
            if (p.coords() - q.coords()).norm() < 1e-9 {
                continue;
            }
            let v = log_map(&p, &q).unwrap();
            assert_abs_diff_eq!(v.norm(), dist(&p, &q).unwrap(), epsilon = 1e-11);
            let back = exp_map(&p, &v).unwrap();
            max_err = max_err.max((back.coords() - q.coords()).norm());
        }
        assert!(max_err < 1e-9, "round-trip error {max_err}");
    }

    #[test]
    fn log_at_ball_origin_matches_radial_formula() {
        // In the ball model, log at the origin is 2 atanh(|y|) y/|y|; check by
        // converting a half-space log through the model map.
        use crate::geom::point::{to_ball, to_ball_tangent};
        let mut rng = StdRng::seed_from_u64(33);
        for _ in 0..100 {
            let p = Point::base(3);
            let q = hs(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.4..2.5)]);
            if (p.coords() - q.coords()).norm() < 1e-9 {
                continue;
            }
            let v = log_map(&p, &q).unwrap();
            let vb = to_ball_tangent(&v).unwrap();
            let yb = to_ball(&q).unwrap();
            let r = yb.coords().norm();
            let expected = yb.coords() * (2.0 * r.atanh() / r);
            // Tangent vectors at the ball origin carry a conformal factor 2.
            assert!((vb.components * 2.0 - expected).norm() < 1e-10);
        }
    }
}
