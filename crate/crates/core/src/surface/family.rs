//! Star-shaped test surfaces: geodesic spheres and radially perturbed spheres.
//!
//! A surface is the set `exp_c((r0 + eps f(u)) u)` over unit directions `u`.
//! Internally it is represented in ball-model coordinates centered at `c`,
//! where it becomes the Euclidean star-shaped surface `tanh(g(u)/2) u` with
//! `g = r0 + eps f`. In that chart the Euclidean shape operator of a radial
//! graph is explicit, and hyperbolic curvatures follow from the conformal
//! relation, so all curvature evaluators are analytic. The placement back
//! into the half-space model is an isometry and leaves curvatures unchanged.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geom::isometry::{Generator, Isometry};
use crate::geom::point::{
    to_ball, to_halfspace, to_halfspace_tangent, Model, Point, TangentVector,
};
use crate::surface::profile::Profile;

/// Specification of a (possibly perturbed) geodesic sphere.
#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    pub center: Point,
    pub radius: f64,
    pub amplitude: f64,
    pub profile: Profile,
}

impl SurfaceSpec {
    pub fn sphere(center: Point, radius: f64) -> Self {
        SurfaceSpec { center, radius, amplitude: 0.0, profile: Profile::Mixed }
    }
}

/// One surface sample: parameter direction, position, inward unit normal,
/// sorted hyperbolic principal curvatures, mean curvature and quadrature
/// weight.
#[derive(Clone, Debug)]
pub struct SurfaceSample {
    pub u: DVector<f64>,
    pub point: Point,
    pub normal: TangentVector,
    pub kappas: Vec<f64>,
    pub mean_h: f64,
    pub weight: f64,
}

/// Analytic pointwise data of the radial chart at one direction.
#[derive(Clone, Debug)]
pub struct RadialData {
    /// Radial value `g = r0 + eps f(u)`.
    pub g: f64,
    /// Euclidean radius in the centered ball chart, `tanh(g/2)`.
    pub a: f64,
    /// Tilt factor `sqrt(1 + |grad log a|^2)`.
    pub w: f64,
    /// Euclidean inward unit normal of the ball-chart surface.
    pub nu_ball: DVector<f64>,
    /// Sorted hyperbolic principal curvatures.
    pub kappas: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct StarSurface {
    spec: SurfaceSpec,
    dim: usize,
    /// Isometry taking the model base point `e_n` to the surface center.
    placement: Isometry,
    placement_inv: Isometry,
}

impl StarSurface {
    pub fn new(spec: SurfaceSpec) -> Result<Self> {
        if spec.center.model() != Model::HalfSpace {
            return Err(Error::InvalidArgument("surface center must be a half-space point".into()));
        }
        if !(spec.radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius {} <= 0", spec.radius)));
        }
        if spec.amplitude < 0.0 {
            return Err(Error::InvalidArgument("amplitude < 0".into()));
        }
        // A radial graph with positive radius is embedded; the threshold
        // keeps the radial function bounded away from zero and the curvature
        // evaluators well conditioned.
        if spec.amplitude * spec.profile.c2_bound() > 2.0 * spec.radius.min(1.0) {
            return Err(Error::InvalidArgument(format!(
                "embedding threshold violated: amplitude {} too large for radius {}",
                spec.amplitude, spec.radius
            )));
        }
        let n = spec.center.dim();
        let mut gens = Vec::new();
        if (spec.center.height() - 1.0).abs() > 0.0 {
            gens.push(Generator::Dilation(spec.center.height()));
        }
        let mut shift = spec.center.coords().clone();
        shift[n - 1] = 0.0;
        if shift.norm() > 0.0 {
            gens.push(Generator::HorizontalTranslation(shift));
        }
        let placement = Isometry::from_generators(gens);
        let placement_inv = placement.inverse();
        Ok(StarSurface { spec, dim: n, placement, placement_inv })
    }

    pub fn sphere(center: Point, radius: f64) -> Result<Self> {
        Self::new(SurfaceSpec::sphere(center, radius))
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> Point {
        self.placement.apply_point(&Point::base(self.dim)).expect("placement maps base point")
    }

    /// The same surface moved by `iso` (the isometry is folded into the
    /// placement; intrinsic quantities are untouched).
    pub fn transformed(&self, iso: &Isometry) -> StarSurface {
        let placement = self.placement.then(iso);
        let placement_inv = placement.inverse();
        let mut out = self.clone();
        out.placement = placement;
        out.placement_inv = placement_inv;
        out
    }

    pub fn radial(&self, u: &DVector<f64>) -> f64 {
        self.spec.radius + self.spec.amplitude * self.spec.profile.value(u)
    }

    /// Centered-ball coordinates of a half-space point.
    pub fn to_center_ball(&self, p: &Point) -> Result<DVector<f64>> {
        let q = self.placement_inv.apply_point(p)?;
        Ok(to_ball(&q)?.coords().clone())
    }

    pub fn from_center_ball(&self, y: &DVector<f64>) -> Result<Point> {
        let q = to_halfspace(&Point::ball(y.clone())?)?;
        self.placement.apply_point(&q)
    }

    fn push_ball_tangent(&self, y: &DVector<f64>, comps: DVector<f64>) -> Result<TangentVector> {
        let v = TangentVector::new(Point::ball(y.clone())?, comps);
        let hs = to_halfspace_tangent(&v)?;
        self.placement.apply_tangent(&hs)
    }

    /// Surface point in half-space coordinates at unit direction `u`.
    pub fn position(&self, u: &DVector<f64>) -> Result<Point> {
        let a = (self.radial(u) / 2.0).tanh();
        self.from_center_ball(&(u * a))
    }

    /// Geodesic polar coordinates `(u, t)` of an arbitrary point about the
    /// surface center.
    pub fn polar_of(&self, p: &Point) -> Result<(DVector<f64>, f64)> {
        let y = self.to_center_ball(p)?;
        let r = y.norm();
        if r < 1e-15 {
            let mut u = DVector::zeros(self.dim);
            u[0] = 1.0;
            return Ok((u, 0.0));
        }
        Ok((&y / r, 2.0 * r.atanh()))
    }

    /// Signed radial residual: geodesic distance from the center minus the
    /// radial function; negative inside the enclosed domain, zero on the
    /// surface.
    pub fn radial_residual(&self, p: &Point) -> Result<f64> {
        let (u, t) = self.polar_of(p)?;
        Ok(t - self.radial(&u))
    }

    pub fn radial_residual_coords(&self, x: &DVector<f64>) -> f64 {
        let p = Point::halfspace_unchecked(x.clone());
        self.radial_residual(&p).unwrap_or(f64::INFINITY)
    }

    pub fn inside(&self, p: &Point) -> bool {
        matches!(self.radial_residual(p), Ok(r) if r < 0.0)
    }

    /// Analytic chart data (normal, curvatures) at direction `u`.
    pub fn radial_data(&self, u: &DVector<f64>) -> RadialData {
        let n = self.dim;
        let profile = &self.spec.profile;
        let eps = self.spec.amplitude;

        let f = profile.value(u);
        let g = self.spec.radius + eps * f;
        let a = (g / 2.0).tanh();
        let sinh_g = g.sinh();
        let cosh_g = g.cosh();

        // Tangent frame of the direction sphere at u.
        let frame = tangent_frame(u);
        let m = n - 1;

        // Spherical gradient/Hessian of g in the frame, then of b = log a.
        let grad_amb = profile.gradient(u);
        let hess_amb = profile.hessian(u);
        let radial_slope = u.dot(&grad_amb);

        let mut dg = DVector::zeros(m);
        for (idx, t) in frame.iter().enumerate() {
            dg[idx] = eps * t.dot(&grad_amb);
        }
        let mut hg = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut v = frame[i].dot(&(&hess_amb * &frame[j]));
                if i == j {
                    v -= radial_slope;
                }
                hg[(i, j)] = eps * v;
            }
        }

        let phi1 = 1.0 / sinh_g;
        let phi2 = -cosh_g / (sinh_g * sinh_g);
        let db = &dg * phi1;
        let bb = &dg * dg.transpose() * phi2 + &hg * phi1;

        let w = (1.0 + db.norm_squared()).sqrt();

        // Shape operator of the Euclidean radial graph in the ball chart,
        // symmetrized through M1^(-1/2).
        let m1_inv_sqrt = {
            let s = db.norm_squared();
            if s < 1e-30 {
                DMatrix::identity(m, m)
            } else {
                DMatrix::identity(m, m) + (&db * db.transpose()) * ((1.0 / w - 1.0) / s)
            }
        };
        let m2 = DMatrix::identity(m, m) + &db * db.transpose() - bb;
        let sym = &m1_inv_sqrt * m2 * &m1_inv_sqrt;
        let eig = sym.symmetric_eigenvalues();
        let mut kappa_e: Vec<f64> = eig.iter().map(|l| l / (a * w)).collect();
        kappa_e.sort_by(|x, y| x.partial_cmp(y).unwrap());

        // Conformal correction ball -> hyperbolic.
        let corr = 2.0 * a / (w * (1.0 - a * a));
        let kappas: Vec<f64> = kappa_e
            .iter()
            .map(|k| (k + corr) * (1.0 - a * a) / 2.0)
            .collect();

        // Euclidean inward unit normal of the ball-chart surface.
        let mut grad_b_amb = DVector::zeros(n);
        for (idx, t) in frame.iter().enumerate() {
            grad_b_amb += t * db[idx];
        }
        let nu_raw = &grad_b_amb - u;
        let nu_ball = &nu_raw / nu_raw.norm();

        RadialData { g, a, w, nu_ball, kappas }
    }

    /// Inward hyperbolic unit normal at direction `u`.
    pub fn inward_normal(&self, u: &DVector<f64>) -> Result<TangentVector> {
        let data = self.radial_data(u);
        let y = u * data.a;
        let lam = 2.0 / (1.0 - data.a * data.a);
        self.push_ball_tangent(&y, &data.nu_ball / lam)
    }

    /// Sorted hyperbolic principal curvatures at direction `u`.
    pub fn principal_curvatures(&self, u: &DVector<f64>) -> Vec<f64> {
        self.radial_data(u).kappas
    }

    pub fn mean_curvature(&self, u: &DVector<f64>) -> f64 {
        let k = self.radial_data(u).kappas;
        k.iter().sum::<f64>() / k.len() as f64
    }

    /// Analytic mean curvature at a point that must lie on the surface.
    pub fn mean_curvature_at(&self, p: &Point, tol: f64) -> Result<f64> {
        let (u, t) = self.polar_of(p)?;
        if (t - self.radial(&u)).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "point is off the surface by {:.3e}",
                (t - self.radial(&u)).abs()
            )));
        }
        Ok(self.mean_curvature(&u))
    }

    /// Hyperbolic area element relative to the direction-sphere measure.
    pub fn area_element(&self, u: &DVector<f64>) -> f64 {
        let data = self.radial_data(u);
        let sinh_like = 2.0 * data.a / (1.0 - data.a * data.a);
        sinh_like.powi((self.dim - 1) as i32) * data.w
    }

    /// Deterministic quasi-uniform sample set with quadrature weights.
    pub fn sample_set(&self, count: usize) -> Result<Vec<SurfaceSample>> {
        if count == 0 {
            return Err(Error::InvalidArgument("empty sample set".into()));
        }
        let dirs = unit_directions(self.dim, count);
        let total = sphere_measure(self.dim);
        let mut out = Vec::with_capacity(dirs.len());
        for u in dirs {
            let data = self.radial_data(&u);
            let y = &u * data.a;
            let lam = 2.0 / (1.0 - data.a * data.a);
            let normal = self.push_ball_tangent(&y, &data.nu_ball / lam)?;
            let point = self.from_center_ball(&y)?;
            let mean_h = data.kappas.iter().sum::<f64>() / data.kappas.len() as f64;
            let sinh_like = 2.0 * data.a / (1.0 - data.a * data.a);
            let weight =
                total / count as f64 * sinh_like.powi((self.dim - 1) as i32) * data.w;
            out.push(SurfaceSample { u, point, normal, kappas: data.kappas, mean_h, weight });
        }
        Ok(out)
    }
}

/// Deterministic orthonormal basis of the tangent space of the unit sphere
/// at `u`.
pub fn tangent_frame(u: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = u.len();
    let mut frame = Vec::with_capacity(n - 1);
    // Seed with the coordinate axes least aligned with u, then Gram-Schmidt.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| u[i].abs().partial_cmp(&u[j].abs()).unwrap());
    for &axis in order.iter().take(n - 1) {
        let mut v = DVector::zeros(n);
        v[axis] = 1.0;
        v -= u * u[axis];
        for t in &frame {
            let c = v.dot(t);
            v -= t * c;
        }
        let norm = v.norm();
        debug_assert!(norm > 1e-8);
        frame.push(v / norm);
    }
    frame
}

/// Quasi-uniform unit directions: equal angles on the circle, a Fibonacci
/// lattice on the 2-sphere, and a deterministic low-discrepancy fallback in
/// higher dimension.
pub fn unit_directions(n: usize, count: usize) -> Vec<DVector<f64>> {
    match n {
        2 => (0..count)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
                DVector::from_column_slice(&[th.cos(), th.sin()])
            })
            .collect(),
        3 => {
            let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * (i as f64) / golden;
                    DVector::from_column_slice(&[r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            // Additive-recurrence lattice pushed through a Gaussian shaping;
            // deterministic and reasonably even for desk-scale counts.
            let mut alphas = Vec::with_capacity(n);
            let mut x = 2.0_f64;
            for _ in 0..n {
                x = (x + std::f64::consts::PI).sqrt() * 1.32471795724474602596;
                alphas.push(x.fract());
            }
            (0..count)
                .map(|i| {
                    let mut v = DVector::zeros(n);
                    for k in 0..n {
                        let t = ((i as f64 + 0.5) * alphas[k]).fract();
                        // inverse error function via Newton on erf
                        v[k] = inv_std_normal(t.clamp(1e-12, 1.0 - 1e-12));
                    }
                    let norm = v.norm();
                    if norm < 1e-12 {
                        let mut e = DVector::zeros(n);
                        e[0] = 1.0;
                        e
                    } else {
                        v / norm
                    }
                })
                .collect()
        }
    }
}

/// Surface measure of the unit sphere in R^n.
pub fn sphere_measure(n: usize) -> f64 {
    // 2 pi^(n/2) / Gamma(n/2)
    let half = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half(n)
}

/// Gamma(n/2) for integer n >= 1.
fn gamma_half(n: usize) -> f64 {
    let mut x = n as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.0 + 1e-12 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 0.5).abs() < 1e-12 {
        acc * std::f64::consts::PI.sqrt()
    } else {
        acc
    }
}

/// Acklam-style rational approximation of the standard normal quantile,
/// refined with one Newton step; only used to shape high-dimensional lattices.
fn inv_std_normal(p: f64) -> f64 {
    let a = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    let b = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    let c = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    let d = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let plow = 0.02425;
    let x = if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    };
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point::dist;
    use approx::assert_abs_diff_eq;

    fn unit_sphere_surface() -> StarSurface {
        StarSurface::sphere(Point::base(3), 1.0).unwrap()
    }

    #[test]
    fn sphere_curvature_is_coth_r() {
        let s = unit_sphere_surface();
        let coth1 = 1.0 / 1.0_f64.tanh();
        for u in unit_directions(3, 50) {
            for k in s.principal_curvatures(&u) {
                assert_abs_diff_eq!(k, coth1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_euclidean_image() {
        // In the half-space model the unit-radius sphere about e_n is the
        // Euclidean ball centered cosh(1) e_n with radius sinh(1).
        let s = unit_sphere_surface();
        let c = DVector::from_column_slice(&[0.0, 0.0, 1.0_f64.cosh()]);
        for u in unit_directions(3, 40) {
            let p = s.position(&u).unwrap();
            assert_abs_diff_eq!((p.coords() - &c).norm(), 1.0_f64.sinh(), epsilon = 1e-12);
        }
    }

    #[test]
    fn inside_predicate() {
        let s = unit_sphere_surface();
        assert!(s.inside(&Point::base(3)));
        let far = Point::from_slice_halfspace(&[0.0, 0.0, (2.5f64).exp()]).unwrap();
        assert!(!s.inside(&far));
        assert_abs_diff_eq!(dist(&Point::base(3), &far).unwrap(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn normals_are_unit_and_point_inward() {
        let spec = SurfaceSpec {
            center: Point::from_slice_halfspace(&[0.4, -0.2, 1.7]).unwrap(),
            radius: 0.9,
            amplitude: 0.02,
            profile: Profile::Mixed,
        };
        let s = StarSurface::new(spec).unwrap();
        let center = s.center();
        for u in unit_directions(3, 60) {
            let n = s.inward_normal(&u).unwrap();
            assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-10);
            // A small step along the normal must go inside.
            let p = s.position(&u).unwrap();
            let step = crate::geom::geodesic::exp_map(
                &p,
                &TangentVector::new(p.clone(), &n.components * 1e-4),
            )
            .unwrap();
            assert!(s.inside(&step), "normal step left the domain at u = {u:?}");
            let _ = center;
        }
    }

    #[test]
    fn zero_amplitude_reduces_to_sphere() {
        let spec = SurfaceSpec {
            center: Point::base(3),
            radius: 1.3,
            amplitude: 0.0,
            profile: Profile::Quadrupole,
        };
        let s = StarSurface::new(spec).unwrap();
        let samples = s.sample_set(500).unwrap();
        let osc = crate::surface::osc_h(&samples);
        assert!(osc < 1e-13);
    }

    #[test]
    fn embedding_threshold_enforced() {
        let spec = SurfaceSpec {
            center: Point::base(3),
            radius: 1.0,
            amplitude: 0.2,
            profile: Profile::Mixed,
        };
        assert!(StarSurface::new(spec).is_err());
    }

    #[test]
    fn circle_length_matches_closed_form() {
        // n = 2: hyperbolic circle of radius r has length 2 pi sinh r.
        let s = StarSurface::sphere(Point::base(2), 0.8).unwrap();
        let samples = s.sample_set(2000).unwrap();
        let len: f64 = samples.iter().map(|s| s.weight).sum();
        let exact = 2.0 * std::f64::consts::PI * 0.8_f64.sinh();
        assert!((len - exact).abs() / exact < 5e-3, "len {len} vs {exact}");
    }

    #[test]
    fn sphere_area_matches_closed_form() {
        let s = unit_sphere_surface();
        let samples = s.sample_set(4000).unwrap();
        let area: f64 = samples.iter().map(|s| s.weight).sum();
        let exact = 4.0 * std::f64::consts::PI * 1.0_f64.sinh().powi(2);
        assert!((area - exact).abs() / exact < 5e-3, "area {area} vs {exact}");
    }

    #[test]
    fn transformed_surface_keeps_intrinsic_data() {
        let s = unit_sphere_surface();
        let iso = Isometry::from_generators(vec![
            Generator::Dilation(1.7),
            Generator::HorizontalTranslation(DVector::from_column_slice(&[0.5, -0.3, 0.0])),
            Generator::Inversion { center: DVector::from_column_slice(&[2.0, 1.0, 0.0]), radius: 1.4 },
        ]);
        let moved = s.transformed(&iso);
        let u = DVector::from_column_slice(&[0.6, -0.64, 0.48]).normalize();
        assert_abs_diff_eq!(
            moved.mean_curvature(&u),
            s.mean_curvature(&u),
            epsilon = 1e-14
        );
        // Positions move with the isometry.
        let p = s.position(&u).unwrap();
        let q = moved.position(&u).unwrap();
        assert!((iso.apply_point(&p).unwrap().coords() - q.coords()).norm() < 1e-11);
    }
}
