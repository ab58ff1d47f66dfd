//! Isometries of the half-space model as ordered compositions of generator
//! moves: horizontal translations, dilations about the origin, horizontal
//! rotations (orthogonal maps fixing `e_n`) and inversions centered on the
//! ideal boundary.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geom::hyperplane::Hyperplane;
use crate::geom::point::{Model, Point, TangentVector};

#[derive(Clone, Debug)]
pub enum Generator {
    /// `p -> p + t` with `t` in the ideal boundary plane (last component 0).
    HorizontalTranslation(DVector<f64>),
    /// `p -> lambda p`, `lambda > 0`.
    Dilation(f64),
    /// `p -> Q p` with `Q` orthogonal and `Q e_n = e_n`. Improper maps
    /// (horizontal reflections) are allowed; parity is tracked.
    HorizontalRotation(DMatrix<f64>),
    /// Euclidean inversion `p -> c + r^2 (p - c)/|p - c|^2` with `c` on the
    /// ideal boundary.
    Inversion { center: DVector<f64>, radius: f64 },
}

impl Generator {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Generator::HorizontalTranslation(t) => x + t,
            Generator::Dilation(l) => x * *l,
            Generator::HorizontalRotation(q) => q * x,
            Generator::Inversion { center, radius } => {
                let w = x - center;
                center + &w * (radius * radius / w.norm_squared())
            }
        }
    }

    /// Pushforward of a tangent vector with components `v` at point `x`.
    fn push(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Generator::HorizontalTranslation(_) => v.clone(),
            Generator::Dilation(l) => v * *l,
            Generator::HorizontalRotation(q) => q * v,
            Generator::Inversion { center, radius } => {
                let w = x - center;
                let r2 = w.norm_squared();
                let what = &w / r2.sqrt();
                (v - &what * (2.0 * what.dot(v))) * (radius * radius / r2)
            }
        }
    }

    fn inverse(&self) -> Generator {
        match self {
            Generator::HorizontalTranslation(t) => Generator::HorizontalTranslation(-t),
            Generator::Dilation(l) => Generator::Dilation(1.0 / l),
            Generator::HorizontalRotation(q) => Generator::HorizontalRotation(q.transpose()),
            Generator::Inversion { center, radius } => {
                Generator::Inversion { center: center.clone(), radius: *radius }
            }
        }
    }

    fn orientation_preserving(&self) -> bool {
        match self {
            Generator::HorizontalTranslation(_) | Generator::Dilation(_) => true,
            Generator::HorizontalRotation(q) => q.determinant() > 0.0,
            Generator::Inversion { .. } => false,
        }
    }

    fn map_hyperplane(&self, h: &Hyperplane) -> Hyperplane {
        match self {
            Generator::HorizontalTranslation(t) => match h {
                Hyperplane::Vertical { normal, offset } => Hyperplane::Vertical {
                    normal: normal.clone(),
                    offset: offset + normal.dot(t),
                },
                Hyperplane::HalfSphere { center, radius } => {
                    Hyperplane::HalfSphere { center: center + t, radius: *radius }
                }
            },
            Generator::Dilation(l) => match h {
                Hyperplane::Vertical { normal, offset } => {
                    Hyperplane::Vertical { normal: normal.clone(), offset: offset * l }
                }
                Hyperplane::HalfSphere { center, radius } => {
                    Hyperplane::HalfSphere { center: center * *l, radius: radius * l }
                }
            },
            Generator::HorizontalRotation(q) => match h {
                Hyperplane::Vertical { normal, offset } => {
                    Hyperplane::Vertical { normal: q * normal, offset: *offset }
                }
                Hyperplane::HalfSphere { center, radius } => {
                    Hyperplane::HalfSphere { center: q * center, radius: *radius }
                }
            },
            Generator::Inversion { center: c, radius: r } => {
                let r2 = r * r;
                // Near-degenerate branches (hyperplane almost through the
                // inversion center) trade a tiny geometric error for the
                // catastrophic cancellation of a giant image sphere; the
                // 1e-8 crossover balances the two.
                match h {
                    Hyperplane::Vertical { normal, offset } => {
                        let gap = offset - normal.dot(c);
                        if gap.abs() < 1e-8 * (r + offset.abs()) {
                            // Plane through the inversion center maps to itself.
                            h.clone()
                        } else {
                            let center = c + normal * (r2 / (2.0 * gap));
                            Hyperplane::HalfSphere { center, radius: r2 / (2.0 * gap.abs()) }
                        }
                    }
                    Hyperplane::HalfSphere { center: m, radius: rs } => {
                        let w = m - c;
                        let d = w.norm();
                        let disc = d * d - rs * rs;
                        if disc.abs() < 1e-8 * (d * d + rs * rs) {
                            // Sphere through the inversion center maps to a vertical plane.
                            let u = &w / d;
                            let offset = u.dot(c) + r2 / (2.0 * d);
                            Hyperplane::Vertical { normal: u, offset }
                        } else {
                            let center = c + &w * (r2 / disc);
                            Hyperplane::HalfSphere { center, radius: r2 * rs / disc.abs() }
                        }
                    }
                }
            }
        }
    }
}

/// An isometry of hyperbolic space, stored as the ordered list of generator
/// moves to apply (first entry acts first).
#[derive(Clone, Debug, Default)]
pub struct Isometry {
    generators: Vec<Generator>,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry { generators: Vec::new() }
    }

    pub fn from_generators(generators: Vec<Generator>) -> Self {
        Isometry { generators }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn push(&mut self, g: Generator) {
        self.generators.push(g);
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Isometry) -> Isometry {
        let mut generators = self.generators.clone();
        generators.extend(next.generators.iter().cloned());
        Isometry { generators }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry {
            generators: self.generators.iter().rev().map(Generator::inverse).collect(),
        }
    }

    pub fn orientation_preserving(&self) -> bool {
        self.generators.iter().filter(|g| !g.orientation_preserving()).count() % 2 == 0
    }

    pub fn apply_point(&self, p: &Point) -> Result<Point> {
        if p.model() != Model::HalfSpace {
            return Err(Error::ModelMismatch(p.model().name(), Model::HalfSpace.name()));
        }
        let mut x = p.coords().clone();
        for g in &self.generators {
            x = g.apply(&x);
        }
        Point::halfspace(x)
    }

    pub fn apply_coords(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = x.clone();
        for g in &self.generators {
            y = g.apply(&y);
        }
        y
    }

    pub fn apply_tangent(&self, v: &TangentVector) -> Result<TangentVector> {
        if v.base.model() != Model::HalfSpace {
            return Err(Error::ModelMismatch(v.base.model().name(), Model::HalfSpace.name()));
        }
        let mut x = v.base.coords().clone();
        let mut comps = v.components.clone();
        for g in &self.generators {
            comps = g.push(&x, &comps);
            x = g.apply(&x);
        }
        Ok(TangentVector::new(Point::halfspace(x)?, comps))
    }

    /// Image of a totally geodesic hyperplane.
    pub fn apply_hyperplane(&self, h: &Hyperplane) -> Hyperplane {
        let mut cur = h.clone();
        for g in &self.generators {
            cur = g.map_hyperplane(&cur);
        }
        cur
    }

    /// Translation moving `a` to the vertical axis, then dilation moving it
    /// to `e_n`. Building block for normalizations.
    pub fn move_to_base(a: &Point) -> Isometry {
        let n = a.dim();
        let mut t = -a.coords().clone();
        t[n - 1] = 0.0;
        let mut gens = Vec::new();
        if t.norm() > 0.0 {
            gens.push(Generator::HorizontalTranslation(t));
        }
        if (a.height() - 1.0).abs() > 0.0 {
            gens.push(Generator::Dilation(1.0 / a.height()));
        }
        Isometry { generators: gens }
    }
}

/// Orthogonal map sending unit vector `a` to unit vector `b` (a single
/// Householder reflection when they differ; identity otherwise).
pub fn reflection_aligning(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let n = a.len();
    let diff = b - a;
    let d = diff.norm();
    if d < 1e-14 {
        return DMatrix::identity(n, n);
    }
    let c = diff / d;
    DMatrix::identity(n, n) - 2.0 * &c * c.transpose()
}

/// Orientation-preserving isometry sending the point `p` to `e_n` and the
/// unit tangent `v` at `p` to the upward direction `e_n`. The residual
/// freedom is a rotation about the vertical axis.
pub fn normalize_to_standard(p: &Point, v: &TangentVector) -> Result<Isometry> {
    let n = p.dim();
    let norm = v.norm();
    if norm < 1e-14 {
        return Err(Error::ZeroVector);
    }
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "normalize_to_standard expects a unit vector, |v| = {norm}"
        )));
    }
    let mut iso = Isometry::move_to_base(p);
    // After recentering the vector has unit Euclidean components.
    let w = iso.apply_tangent(v)?.components;
    let mut en = DVector::zeros(n);
    en[n - 1] = 1.0;
    let diff = &w - &en;
    if diff.norm() > 1e-13 {
        let m = &diff / diff.norm();
        if m[n - 1].abs() < 1e-13 {
            // Horizontal mirror: reflection in the vertical plane x.m = 0.
            let q = DMatrix::identity(n, n) - 2.0 * &m * m.transpose();
            iso.push(Generator::HorizontalRotation(q));
        } else {
            // Reflection in the half-sphere through e_n with unit normal m there.
            let mn = m[n - 1];
            let mut center = -&m / mn;
            center[n - 1] = 0.0;
            iso.push(Generator::Inversion { center, radius: 1.0 / mn.abs() });
        }
    }
    if !iso.orientation_preserving() {
        // Restore orientation with a horizontal mirror fixing e_n and the
        // upward direction.
        let mut u = DVector::zeros(n);
        u[0] = 1.0;
        let q = DMatrix::identity(n, n) - 2.0 * &u * u.transpose();
        iso.push(Generator::HorizontalRotation(q));
    }
    Ok(iso)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point::dist;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_point(rng: &mut StdRng, n: usize) -> Point {
        let mut c = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        c[n - 1] = rng.random_range(0.2..3.0);
        Point::halfspace(c).unwrap()
    }

    fn random_isometry(rng: &mut StdRng, n: usize) -> Isometry {
        let mut gens = Vec::new();
        for _ in 0..4 {
            match rng.random_range(0..4) {
                0 => {
                    let mut t = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                    t[n - 1] = 0.0;
                    gens.push(Generator::HorizontalTranslation(t));
                }
                1 => gens.push(Generator::Dilation(rng.random_range(0.3..3.0))),
                2 => {
                    let mut a = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                    a[n - 1] = 0.0;
                    let mut b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                    b[n - 1] = 0.0;
                    if a.norm() > 1e-6 && b.norm() > 1e-6 {
                        let q = reflection_aligning(&(&a / a.norm()), &(&b / b.norm()));
                        gens.push(Generator::HorizontalRotation(q));
                    }
                }
                _ => {
                    let mut c = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                    c[n - 1] = 0.0;
                    gens.push(Generator::Inversion { center: c, radius: rng.random_range(0.5..2.0) });
                }
            }
        }
        Isometry::from_generators(gens)
    }

    #[test]
    fn generators_preserve_distance() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let iso = random_isometry(&mut rng, 3);
            let p = random_point(&mut rng, 3);
            let q = random_point(&mut rng, 3);
            let d0 = dist(&p, &q).unwrap();
            let d1 = dist(&iso.apply_point(&p).unwrap(), &iso.apply_point(&q).unwrap()).unwrap();
            assert_abs_diff_eq!(d0, d1, epsilon = 1e-10 * (1.0 + d0));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..100 {
            let iso = random_isometry(&mut rng, 4);
            let p = random_point(&mut rng, 4);
            let back = iso.inverse().apply_point(&iso.apply_point(&p).unwrap()).unwrap();
            assert!((p.coords() - back.coords()).norm() < 1e-10);
        }
    }

    #[test]
    fn pushforward_preserves_norm() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..100 {
            let iso = random_isometry(&mut rng, 3);
            let p = random_point(&mut rng, 3);
            let v = TangentVector::new(p.clone(), DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)));
            let w = iso.apply_tangent(&v).unwrap();
            assert_abs_diff_eq!(v.norm(), w.norm(), epsilon = 1e-10 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn normalize_identity_and_dilation_cases() {
        let p = Point::base(3);
        let up = TangentVector::new(p.clone(), DVector::from_column_slice(&[0.0, 0.0, 1.0]));
        let iso = normalize_to_standard(&p, &up).unwrap();
        assert!(iso.generators().is_empty());

        let p2 = Point::from_slice_halfspace(&[0.0, 0.0, 2.0]).unwrap();
        let up2 = TangentVector::new(p2.clone(), DVector::from_column_slice(&[0.0, 0.0, 2.0]));
        let iso2 = normalize_to_standard(&p2, &up2).unwrap();
        assert_eq!(iso2.generators().len(), 1);
        match &iso2.generators()[0] {
            Generator::Dilation(l) => assert_abs_diff_eq!(*l, 0.5, epsilon = 1e-15),
            g => panic!("expected dilation, got {g:?}"),
        }
    }

    #[test]
    fn normalize_random_pairs() {
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..200 {
            let p = random_point(&mut rng, 3);
            let raw = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let v = match TangentVector::new(p.clone(), raw).normalized() {
                Ok(v) => v,
                Err(_) => continue,
            };
            let iso = normalize_to_standard(&p, &v).unwrap();
            assert!(iso.orientation_preserving());
            let img = iso.apply_point(&p).unwrap();
            assert!((img.coords() - Point::base(3).coords()).norm() < 1e-12);
            let w = iso.apply_tangent(&v).unwrap();
            let mut en = DVector::zeros(3);
            en[2] = 1.0;
            assert!((w.components - en).norm() < 1e-10);
        }
    }
}
