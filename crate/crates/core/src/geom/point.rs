//! Points and tangent vectors in the half-space and ball models.
//!
//! The half-space model is `{p : p_n > 0}` with metric `p_n^{-2} (dp_1^2 + ... + dp_n^2)`;
//! the ball model is `{|p| < 1}` with metric `4 (1-|p|^2)^{-2} (dp_1^2 + ... + dp_n^2)`.
//! Distances use the `2 asinh` form of the arccosh formulas, which stays accurate
//! for nearby points.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Points with height below this are rejected as numerically degenerate.
pub const MIN_HEIGHT: f64 = 1e-300;

/// Pairs closer than this are treated as a single point.
pub const DEGENERATE_SEP: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    HalfSpace,
    Ball,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::HalfSpace => "half-space",
            Model::Ball => "ball",
        }
    }
}

/// A point of hyperbolic n-space in one of the two supported models.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: DVector<f64>,
    model: Model,
}

impl Point {
    pub fn halfspace(coords: DVector<f64>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::InvalidPoint(format!("dimension {n} < 2")));
        }
        let h = coords[n - 1];
        if !h.is_finite() || h < MIN_HEIGHT {
            return Err(Error::InvalidPoint(format!("nonpositive height {h}")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        Ok(Point { coords, model: Model::HalfSpace })
    }

    pub fn ball(coords: DVector<f64>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::InvalidPoint(format!("dimension {n} < 2")));
        }
        let r = coords.norm();
        if !r.is_finite() || r >= 1.0 {
            return Err(Error::InvalidPoint(format!("ball norm {r} >= 1")));
        }
        Ok(Point { coords, model: Model::Ball })
    }

    /// The base point `e_n` of the half-space model.
    pub fn base(n: usize) -> Self {
        let mut c = DVector::zeros(n);
        c[n - 1] = 1.0;
        Point { coords: c, model: Model::HalfSpace }
    }

    /// Origin of the ball model.
    pub fn ball_origin(n: usize) -> Self {
        Point { coords: DVector::zeros(n), model: Model::Ball }
    }

    pub fn from_slice_halfspace(coords: &[f64]) -> Result<Self> {
        Self::halfspace(DVector::from_column_slice(coords))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Height (last coordinate); only meaningful in the half-space model.
    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    /// Horizontal part (all but the last coordinate).
    pub fn horizontal(&self) -> DVector<f64> {
        let n = self.dim();
        DVector::from_fn(n - 1, |i, _| self.coords[i])
    }

    pub(crate) fn halfspace_unchecked(coords: DVector<f64>) -> Self {
        debug_assert!(coords[coords.len() - 1] > 0.0);
        Point { coords, model: Model::HalfSpace }
    }

    pub(crate) fn ball_unchecked(coords: DVector<f64>) -> Self {
        debug_assert!(coords.norm() < 1.0);
        Point { coords, model: Model::Ball }
    }
}

/// A tangent vector anchored at a base point, stored as ambient Euclidean
/// components.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: Point,
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: DVector<f64>) -> Self {
        assert_eq!(base.dim(), components.len());
        TangentVector { base, components }
    }

    /// Hyperbolic norm at the base point.
    pub fn norm(&self) -> f64 {
        match self.base.model {
            Model::HalfSpace => self.components.norm() / self.base.height(),
            Model::Ball => {
                let lam = 2.0 / (1.0 - self.base.coords.norm_squared());
                lam * self.components.norm()
            }
        }
    }

    /// Hyperbolic inner product with another vector at the same base point.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        debug_assert_eq!(self.base.model, other.base.model);
        match self.base.model {
            Model::HalfSpace => {
                let h = self.base.height();
                self.components.dot(&other.components) / (h * h)
            }
            Model::Ball => {
                let lam = 2.0 / (1.0 - self.base.coords.norm_squared());
                lam * lam * self.components.dot(&other.components)
            }
        }
    }

    /// Rescale to hyperbolic unit length.
    pub fn normalized(&self) -> Result<TangentVector> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(Error::ZeroVector);
        }
        Ok(TangentVector::new(self.base.clone(), &self.components / n))
    }
}

/// Hyperbolic distance between two points of the same model.
pub fn dist(p: &Point, q: &Point) -> Result<f64> {
    if p.model != q.model {
        return Err(Error::ModelMismatch(p.model.name(), q.model.name()));
    }
    if p.dim() != q.dim() {
        return Err(Error::InvalidPoint("dimension mismatch".into()));
    }
    let sep = (p.coords() - q.coords()).norm();
    match p.model {
        Model::HalfSpace => {
            let hp = p.height();
            let hq = q.height();
            if hp < MIN_HEIGHT || hq < MIN_HEIGHT {
                return Err(Error::InvalidPoint("nonpositive height".into()));
            }
            // d = arccosh(1 + |p-q|^2 / (2 p_n q_n)), rewritten via asinh.
            Ok(2.0 * (sep / (2.0 * (hp * hq).sqrt())).asinh())
        }
        Model::Ball => {
            let ap = 1.0 - p.coords().norm_squared();
            let aq = 1.0 - q.coords().norm_squared();
            Ok(2.0 * (sep / (ap * aq).sqrt()).asinh())
        }
    }
}

/// Half-space -> ball model map, fixing `e_n -> O`.
///
/// Composition of the inversion centered at `-e_n` with radius sqrt(2) and the
/// Euclidean reflection flipping the last coordinate, so the composite is
/// orientation preserving. Correctness (round trip, distance preservation) is
/// pinned by tests rather than a transcribed formula.
pub fn to_ball(p: &Point) -> Result<Point> {
    match p.model {
        Model::Ball => Ok(p.clone()),
        Model::HalfSpace => {
            let n = p.dim();
            let mut w = p.coords().clone();
            w[n - 1] += 1.0; // p + e_n
            let s = 2.0 / w.norm_squared();
            let mut y = &w * s;
            y[n - 1] -= 1.0; // inversion: -e_n + 2 (p+e_n)/|p+e_n|^2
            y[n - 1] = -y[n - 1];
            Point::ball(y)
        }
    }
}

/// Ball -> half-space model map, inverse of [`to_ball`].
pub fn to_halfspace(p: &Point) -> Result<Point> {
    match p.model {
        Model::HalfSpace => Ok(p.clone()),
        Model::Ball => {
            let n = p.dim();
            let mut y = p.coords().clone();
            y[n - 1] = -y[n - 1];
            y[n - 1] += 1.0; // y' + e_n
            let s = 2.0 / y.norm_squared();
            let mut x = &y * s;
            x[n - 1] -= 1.0;
            Point::halfspace(x)
        }
    }
}

/// Pushforward of a tangent vector under the half-space -> ball map.
pub fn to_ball_tangent(v: &TangentVector) -> Result<TangentVector> {
    match v.base.model {
        Model::Ball => Ok(v.clone()),
        Model::HalfSpace => {
            let n = v.base.dim();
            let mut w = v.base.coords().clone();
            w[n - 1] += 1.0;
            let r2 = w.norm_squared();
            let what = &w / w.norm();
            // Jacobian of the inversion at the base point, then the flip.
            let mut out = (&v.components - &what * (2.0 * what.dot(&v.components))) * (2.0 / r2);
            out[n - 1] = -out[n - 1];
            Ok(TangentVector::new(to_ball(&v.base)?, out))
        }
    }
}

/// Pushforward of a tangent vector under the ball -> half-space map.
pub fn to_halfspace_tangent(v: &TangentVector) -> Result<TangentVector> {
    match v.base.model {
        Model::HalfSpace => Ok(v.clone()),
        Model::Ball => {
            let n = v.base.dim();
            let mut y = v.base.coords().clone();
            y[n - 1] = -y[n - 1];
            y[n - 1] += 1.0;
            let r2 = y.norm_squared();
            let yhat = &y / y.norm();
            let mut comps = v.components.clone();
            comps[n - 1] = -comps[n - 1];
            let out = (&comps - &yhat * (2.0 * yhat.dot(&comps))) * (2.0 / r2);
            Ok(TangentVector::new(to_halfspace(&v.base)?, out))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hs(coords: &[f64]) -> Point {
        Point::from_slice_halfspace(coords).unwrap()
    }

    #[test]
    fn vertical_distance_is_log_ratio() {
        let p = hs(&[0.0, 0.0, 1.0]);
        let q = hs(&[0.0, 0.0, std::f64::consts::E]);
        assert_abs_diff_eq!(dist(&p, &q).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dist(&p, &p).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn unit_horizontal_offset_distance() {
        // arccosh(1.5) for e_n vs e_1 + e_n.
        let p = hs(&[0.0, 0.0, 1.0]);
        let q = hs(&[1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(dist(&p, &q).unwrap(), 0.9624236501192069, epsilon = 1e-12);
    }

    #[test]
    fn nonpositive_height_rejected() {
        assert!(Point::from_slice_halfspace(&[0.0, 0.0, 0.0]).is_err());
        assert!(Point::from_slice_halfspace(&[0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn base_point_maps_to_ball_origin() {
        let o = to_ball(&Point::base(3)).unwrap();
        assert!(o.coords().norm() < 1e-15);
    }

    #[test]
    fn model_round_trip() {
        let p = hs(&[0.3, -0.7, 2.5]);
        let b = to_ball(&p).unwrap();
        let back = to_halfspace(&b).unwrap();
        assert!((p.coords() - back.coords()).norm() < 1e-13);
    }

    #[test]
    fn distance_preserved_across_models() {
        let p = hs(&[0.2, 0.1, 0.8]);
        let q = hs(&[-1.0, 0.4, 1.9]);
        let d_hs = dist(&p, &q).unwrap();
        let d_b = dist(&to_ball(&p).unwrap(), &to_ball(&q).unwrap()).unwrap();
        assert_abs_diff_eq!(d_hs, d_b, epsilon = 1e-12);
    }

    #[test]
    fn mixed_models_rejected() {
        let p = Point::base(3);
        let q = Point::ball_origin(3);
        assert!(matches!(dist(&p, &q), Err(Error::ModelMismatch(_, _))));
    }
}
