//! One-parameter families of hyperplanes orthogonal to a geodesic.
//!
//! The family is conjugated so that its axis is the vertical geodesic through
//! the base point image `e_n`; there the level-`s` hyperplane is the
//! half-sphere `{|p| = exp(s)}` and the side coordinate of a point is
//! `log |p|`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geom::hyperplane::Hyperplane;
use crate::geom::isometry::{normalize_to_standard, Isometry};
use crate::geom::point::{Point, TangentVector};

#[derive(Clone, Debug)]
pub struct PlaneFamily {
    base: Point,
    direction: TangentVector,
    conj: Isometry,
    conj_inv: Isometry,
}

impl PlaneFamily {
    pub fn new(base: &Point, direction: &TangentVector) -> Result<Self> {
        let unit = direction.normalized()?;
        if (direction.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument("plane family direction must be unit".into()));
        }
        let conj = normalize_to_standard(base, &unit)?;
        let conj_inv = conj.inverse();
        Ok(PlaneFamily { base: base.clone(), direction: unit, conj, conj_inv })
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn direction(&self) -> &TangentVector {
        &self.direction
    }

    pub fn conjugation(&self) -> &Isometry {
        &self.conj
    }

    /// The hyperplane through `gamma(s)` orthogonal to the axis.
    pub fn hyperplane_at(&self, s: f64) -> Hyperplane {
        let n = self.base.dim();
        let sphere = Hyperplane::HalfSphere { center: DVector::zeros(n), radius: s.exp() };
        self.conj_inv.apply_hyperplane(&sphere)
    }

    /// Axis geodesic `gamma(s)`.
    pub fn axis_point(&self, s: f64) -> Result<Point> {
        let n = self.base.dim();
        let mut c = DVector::zeros(n);
        c[n - 1] = s.exp();
        self.conj_inv.apply_point(&Point::halfspace(c)?)
    }

    /// Unit tangent of the axis at `gamma(s)`.
    pub fn axis_tangent(&self, s: f64) -> Result<TangentVector> {
        let n = self.base.dim();
        let mut c = DVector::zeros(n);
        c[n - 1] = s.exp();
        let mut v = DVector::zeros(n);
        v[n - 1] = s.exp();
        self.conj_inv.apply_tangent(&TangentVector::new(Point::halfspace(c)?, v))
    }

    /// Level of `p` within the family.
    pub fn side_coordinate(&self, p: &Point) -> Result<f64> {
        Ok(self.conj.apply_point(p)?.coords().norm().ln())
    }

    pub fn side_of_coords(&self, conj_coords: &DVector<f64>) -> f64 {
        conj_coords.norm().ln()
    }

    /// Conjugated coordinates of a point (the frame where the family is the
    /// concentric half-sphere pencil).
    pub fn conjugate(&self, p: &Point) -> Result<DVector<f64>> {
        Ok(self.conj.apply_point(p)?.coords().clone())
    }

    /// Pull a conjugated coordinate vector back to the original frame.
    pub fn unconjugate(&self, coords: &DVector<f64>) -> Result<Point> {
        self.conj_inv.apply_point(&Point::halfspace(coords.clone())?)
    }

    /// Reflection about the level-`s` hyperplane, applied in conjugated
    /// coordinates (an inversion about `|p| = exp(s)`).
    pub fn reflect_conjugated(&self, coords: &DVector<f64>, s: f64) -> DVector<f64> {
        let factor = (2.0 * s).exp() / coords.norm_squared();
        coords * factor
    }

    /// Reflection about the level-`s` hyperplane as an isometry in the
    /// original frame. Built as conjugation with the exact inversion rather
    /// than by reflecting about the pulled-back hyperplane, whose sphere
    /// representation can be badly conditioned near vertical limits.
    pub fn reflection_at(&self, s: f64) -> Isometry {
        let n = self.base.dim();
        let inv = Isometry::from_generators(vec![crate::geom::isometry::Generator::Inversion {
            center: DVector::zeros(n),
            radius: s.exp(),
        }]);
        self.conj.then(&inv).then(&self.conj_inv)
    }

    /// Signed hyperbolic distance from `p` to the level-`s` hyperplane,
    /// positive on the far side. Evaluated in the conjugated frame, where it
    /// is well conditioned for every level.
    pub fn signed_level_distance(&self, p: &Point, s: f64) -> Result<f64> {
        let z = self.conj.apply_point(p)?;
        let r = s.exp();
        let n = z.dim();
        let w = z.coords().norm_squared();
        Ok(((w - r * r) / (2.0 * r * z.coords()[n - 1])).asinh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn family_at_base() -> PlaneFamily {
        let b = Point::base(3);
        let up = TangentVector::new(b.clone(), DVector::from_column_slice(&[0.0, 0.0, 1.0]));
        PlaneFamily::new(&b, &up).unwrap()
    }

    #[test]
    fn vertical_family_is_concentric_spheres() {
        let f = family_at_base();
        for s in [-0.7, 0.0, 1.3] {
            match f.hyperplane_at(s) {
                Hyperplane::HalfSphere { center, radius } => {
                    assert!(center.norm() < 1e-12);
                    assert_abs_diff_eq!(radius, s.exp(), epsilon = 1e-12);
                }
                h => panic!("expected half-sphere, got {h:?}"),
            }
        }
    }

    #[test]
    fn planes_pass_through_axis_orthogonally() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..20 {
            let mut c = DVector::from_fn(3, |_, _| rng.random_range(-1.5..1.5));
            c[2] = rng.random_range(0.3..2.0);
            let b = Point::halfspace(c).unwrap();
            let raw = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let dir = match TangentVector::new(b.clone(), raw).normalized() {
                Ok(v) => v,
                Err(_) => continue,
            };
            let f = PlaneFamily::new(&b, &dir).unwrap();
            for s in [-0.9, 0.0, 0.4, 1.1] {
                let pi = f.hyperplane_at(s);
                let g = f.axis_point(s).unwrap();
                assert!(pi.distance(&g) < 1e-10, "axis point off its plane");
                // Orthogonality: the plane normal at gamma(s) is parallel to
                // the axis tangent.
                let nrm = pi.unit_normal_at(&g);
                let tan = f.axis_tangent(s).unwrap();
                let cosine = nrm.inner(&tan).abs();
                assert_abs_diff_eq!(cosine, 1.0, epsilon = 1e-10);
                // Side coordinate of the axis point is s.
                assert_abs_diff_eq!(f.side_coordinate(&g).unwrap(), s, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn side_coordinate_reflects_to_mirror_value() {
        let f = family_at_base();
        let mut rng = StdRng::seed_from_u64(78);
        for _ in 0..50 {
            let mut c = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            c[2] = rng.random_range(0.2..2.0);
            let p = Point::halfspace(c).unwrap();
            let s0 = 0.35;
            let refl = f.reflection_at(s0).apply_point(&p).unwrap();
            let side_p = f.side_coordinate(&p).unwrap();
            let side_r = f.side_coordinate(&refl).unwrap();
            assert_abs_diff_eq!(side_r, 2.0 * s0 - side_p, epsilon = 1e-10);
        }
    }

    #[test]
    fn reflection_is_involutive_on_random_points() {
        let mut rng = StdRng::seed_from_u64(79);
        let b = Point::from_slice_halfspace(&[0.4, 0.1, 1.2]).unwrap();
        let dir = TangentVector::new(b.clone(), DVector::from_column_slice(&[0.96, 0.0, 0.6]))
            .normalized()
            .unwrap();
        let f = PlaneFamily::new(&b, &dir).unwrap();
        let refl = f.reflection_at(0.2);
        for _ in 0..100 {
            let mut c = DVector::from_fn(3, |_, _| rng.random_range(-1.5..1.5));
            c[2] = rng.random_range(0.2..2.5);
            let p = Point::halfspace(c).unwrap();
            let back = refl.apply_point(&refl.apply_point(&p).unwrap()).unwrap();
            assert!((back.coords() - p.coords()).norm() < 1e-10);
        }
    }
}
