//! Totally geodesic hypersurfaces of the half-space model: vertical planes
//! and half-spheres centered on the ideal boundary.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geom::isometry::{Generator, Isometry};
use crate::geom::point::{Point, TangentVector};

#[derive(Clone, Debug)]
pub enum Hyperplane {
    /// `{x : x . normal = offset}` with `normal` a horizontal unit vector.
    Vertical { normal: DVector<f64>, offset: f64 },
    /// Euclidean half-sphere `{|x - center| = radius}` with `center` on the
    /// ideal boundary (last coordinate zero).
    HalfSphere { center: DVector<f64>, radius: f64 },
}

impl Hyperplane {
    pub fn vertical(normal: DVector<f64>, offset: f64) -> Result<Self> {
        let n = normal.len();
        if normal[n - 1].abs() > 1e-12 {
            return Err(Error::InvalidArgument("vertical plane normal must be horizontal".into()));
        }
        let nn = normal.norm();
        if nn < 1e-14 {
            return Err(Error::ZeroVector);
        }
        Ok(Hyperplane::Vertical { normal: normal / nn, offset: offset / nn })
    }

    pub fn half_sphere(center: DVector<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        if center[n - 1].abs() > 1e-12 {
            return Err(Error::InvalidArgument("half-sphere center must lie on the boundary".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("half-sphere radius {radius} <= 0")));
        }
        Ok(Hyperplane::HalfSphere { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Hyperplane::Vertical { normal, .. } => normal.len(),
            Hyperplane::HalfSphere { center, .. } => center.len(),
        }
    }

    /// Euclidean signed side function (zero on the hyperplane). For the
    /// half-sphere variant positive means outside the sphere.
    pub fn signed_side(&self, p: &Point) -> f64 {
        self.signed_side_coords(p.coords())
    }

    pub fn signed_side_coords(&self, x: &DVector<f64>) -> f64 {
        match self {
            Hyperplane::Vertical { normal, offset } => normal.dot(x) - offset,
            Hyperplane::HalfSphere { center, radius } => (x - center).norm() - radius,
        }
    }

    /// Signed hyperbolic distance from `p` to the hyperplane; the sign agrees
    /// with [`Hyperplane::signed_side`].
    pub fn signed_distance(&self, p: &Point) -> f64 {
        let h = p.height();
        match self {
            Hyperplane::Vertical { normal, offset } => ((normal.dot(p.coords()) - offset) / h).asinh(),
            Hyperplane::HalfSphere { center, radius } => {
                let w = (p.coords() - center).norm_squared();
                ((w - radius * radius) / (2.0 * radius * h)).asinh()
            }
        }
    }

    pub fn distance(&self, p: &Point) -> f64 {
        self.signed_distance(p).abs()
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Hyperbolic unit normal field of the hyperplane at a point on it.
    pub fn unit_normal_at(&self, p: &Point) -> TangentVector {
        let h = p.height();
        let comps = match self {
            Hyperplane::Vertical { normal, .. } => normal * h,
            Hyperplane::HalfSphere { center, radius } => (p.coords() - center) * (h / radius),
        };
        TangentVector::new(p.clone(), comps)
    }

    /// The reflection about this hyperplane, as an isometry.
    pub fn reflection(&self) -> Isometry {
        match self {
            Hyperplane::Vertical { normal, offset } => {
                let n = normal.len();
                let q = DMatrix::identity(n, n) - 2.0 * normal * normal.transpose();
                let mut gens = Vec::new();
                if offset.abs() > 0.0 {
                    gens.push(Generator::HorizontalTranslation(normal * -*offset));
                    gens.push(Generator::HorizontalRotation(q));
                    gens.push(Generator::HorizontalTranslation(normal * *offset));
                } else {
                    gens.push(Generator::HorizontalRotation(q));
                }
                Isometry::from_generators(gens)
            }
            Hyperplane::HalfSphere { center, radius } => Isometry::from_generators(vec![
                Generator::Inversion { center: center.clone(), radius: *radius },
            ]),
        }
    }

    pub fn reflect_point(&self, p: &Point) -> Result<Point> {
        self.reflection().apply_point(p)
    }

    pub fn reflect_tangent(&self, v: &TangentVector) -> Result<TangentVector> {
        self.reflection().apply_tangent(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point::dist;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn hs(coords: &[f64]) -> Point {
        Point::from_slice_halfspace(coords).unwrap()
    }

    #[test]
    fn unit_half_sphere_reflection_is_inversion() {
        let pi = Hyperplane::half_sphere(DVector::zeros(3), 1.0).unwrap();
        let p = hs(&[0.0, 0.0, 2.0]);
        let r = pi.reflect_point(&p).unwrap();
        assert!((r.coords() - hs(&[0.0, 0.0, 0.5]).coords()).norm() < 1e-15);
    }

    #[test]
    fn vertical_reflection_flips_coordinate() {
        let pi = Hyperplane::vertical(DVector::from_column_slice(&[1.0, 0.0, 0.0]), 0.0).unwrap();
        let p = hs(&[0.7, -0.3, 1.1]);
        let r = pi.reflect_point(&p).unwrap();
        assert!((r.coords() - hs(&[-0.7, -0.3, 1.1]).coords()).norm() < 1e-15);
    }

    #[test]
    fn reflection_is_involutive_isometry() {
        let mut rng = StdRng::seed_from_u64(21);
        let planes = vec![
            Hyperplane::half_sphere(DVector::from_column_slice(&[0.4, -0.2, 0.0]), 1.3).unwrap(),
            Hyperplane::vertical(DVector::from_column_slice(&[0.6, 0.8, 0.0]), 0.5).unwrap(),
        ];
        for pi in &planes {
            for _ in 0..200 {
                let mut c = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
                c[2] = rng.random_range(0.1..3.0);
                let a = Point::halfspace(c).unwrap();
                let mut c2 = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
                c2[2] = rng.random_range(0.1..3.0);
                let b = Point::halfspace(c2).unwrap();
                let ra = pi.reflect_point(&a).unwrap();
                let rb = pi.reflect_point(&b).unwrap();
                assert_abs_diff_eq!(
                    dist(&ra, &rb).unwrap(),
                    dist(&a, &b).unwrap(),
                    epsilon = 1e-11 * (1.0 + dist(&a, &b).unwrap())
                );
                let back = pi.reflect_point(&ra).unwrap();
                assert!((back.coords() - a.coords()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn signed_distance_on_axis() {
        let pi = Hyperplane::half_sphere(DVector::zeros(3), 1.0).unwrap();
        for t in [-1.2f64, -0.3, 0.0, 0.5, 2.0] {
            let p = hs(&[0.0, 0.0, t.exp()]);
            assert_abs_diff_eq!(pi.signed_distance(&p), t, epsilon = 1e-13);
        }
    }

    #[test]
    fn fixes_hyperplane_pointwise() {
        let pi = Hyperplane::half_sphere(DVector::from_column_slice(&[0.5, 0.0, 0.0]), 2.0).unwrap();
        // Points on the sphere with positive height.
        for ang in [0.3f64, 1.0, 1.8, 2.6] {
            let p = hs(&[0.5 + 2.0 * ang.cos(), 0.0, 2.0 * ang.sin().abs().max(0.1)]);
            let q = {
                // project onto the sphere
                let mut x = p.coords().clone();
                let c = DVector::from_column_slice(&[0.5, 0.0, 0.0]);
                let w = &x - &c;
                x = &c + &w * (2.0 / w.norm());
                Point::halfspace(x).unwrap()
            };
            let r = pi.reflect_point(&q).unwrap();
            assert!((r.coords() - q.coords()).norm() < 1e-12);
        }
    }
}
