//! Approximate center of symmetry from critical hyperplanes, and the
//! Monte Carlo center of mass.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::geodesic::{exp_map, log_map};
use crate::geom::hyperplane::Hyperplane;
use crate::geom::point::{Point, TangentVector};
use crate::surface::family::StarSurface;
use crate::surface::sample_domain;

/// Hyperbolic distance from a point to a hyperplane (foot-point distance).
pub fn plane_distance(p: &Point, plane: &Hyperplane) -> f64 {
    plane.distance(p)
}

fn pairwise_intersection_check(planes: &[Hyperplane]) -> Result<()> {
    for i in 0..planes.len() {
        for j in (i + 1)..planes.len() {
            let ok = match (&planes[i], &planes[j]) {
                (
                    Hyperplane::Vertical { normal: a, offset: ca },
                    Hyperplane::Vertical { normal: b, offset: cb },
                ) => {
                    let cosang = a.dot(b).abs();
                    // Parallel verticals meet only if they coincide.
                    if cosang > 1.0 - 1e-12 {
                        (ca - a.dot(b).signum() * cb).abs() < 1e-12
                    } else {
                        true
                    }
                }
                (
                    Hyperplane::Vertical { normal, offset },
                    Hyperplane::HalfSphere { center, radius },
                )
                | (
                    Hyperplane::HalfSphere { center, radius },
                    Hyperplane::Vertical { normal, offset },
                ) => (normal.dot(center) - offset).abs() <= *radius,
                (
                    Hyperplane::HalfSphere { center: c1, radius: r1 },
                    Hyperplane::HalfSphere { center: c2, radius: r2 },
                ) => {
                    let d = (c1 - c2).norm();
                    d <= r1 + r2 && d >= (r1 - r2).abs()
                }
            };
            if !ok {
                return Err(Error::NonIntersecting(format!(
                    "hyperplanes {i} and {j} have empty intersection"
                )));
            }
        }
    }
    Ok(())
}

/// Least-squares intersection point of a set of hyperplanes: minimizes the
/// sum of squared hyperbolic distances by Gauss-Newton from `seed`.
/// Returns the point and the per-plane distance residuals.
pub fn approximate_center(
    planes: &[Hyperplane],
    seed: &Point,
) -> Result<(Point, Vec<f64>)> {
    if planes.len() < 2 {
        return Err(Error::InvalidArgument("need at least two hyperplanes".into()));
    }
    pairwise_intersection_check(planes)?;
    let n = seed.dim();
    let mut x = seed.coords().clone();
    let residuals = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let p = Point::halfspace(x.clone())?;
        Ok(DVector::from_fn(planes.len(), |i, _| planes[i].signed_distance(&p)))
    };
    let mut r = residuals(&x)?;
    let mut cost = r.norm_squared();
    for _ in 0..200 {
        // Finite-difference Jacobian; the problem is tiny and smooth.
        let mut jac = DMatrix::zeros(planes.len(), n);
        let h = 1e-7 * (1.0 + x.norm());
        for c in 0..n {
            let mut xp = x.clone();
            xp[c] += h;
            let mut xm = x.clone();
            xm[c] -= h;
            if xm[n - 1] <= 0.0 {
                xm[n - 1] = x[n - 1];
            }
            let rp = residuals(&xp)?;
            let rm = residuals(&xm)?;
            for i in 0..planes.len() {
                jac[(i, c)] = (rp[i] - rm[i]) / (xp[c] - xm[c]);
            }
        }
        let jt = jac.transpose();
        let mut lhs = &jt * &jac;
        for d in 0..n {
            lhs[(d, d)] += 1e-14;
        }
        let rhs = &jt * &r;
        let step = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NoConvergence("singular normal equations".into()))?;
        let mut lambda = 1.0;
        let mut advanced = false;
        for _ in 0..20 {
            let mut cand = &x - &step * lambda;
            if cand[n - 1] <= 1e-6 {
                cand[n - 1] = x[n - 1] * 0.5;
            }
            let rc = residuals(&cand)?;
            let cc = rc.norm_squared();
            if cc < cost {
                x = cand;
                r = rc;
                cost = cc;
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if !advanced || step.norm() < 1e-14 * (1.0 + x.norm()) {
            break;
        }
    }
    let point = Point::halfspace(x)?;
    let res = planes.iter().map(|pl| pl.distance(&point)).collect();
    Ok((point, res))
}

/// In- and circum-radius of the sampled surface about `center`.
pub fn radii(samples: &[crate::surface::family::SurfaceSample], center: &Point) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for s in samples {
        let d = crate::geom::point::dist(center, &s.point)?;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug)]
pub struct CenterOfMassResult {
    pub point: Point,
    pub grad_norm: f64,
    pub iterations: usize,
    pub standard_error: f64,
    pub samples: usize,
}

/// Riemannian mean of a fixed point cloud by the intrinsic fixed-point
/// iteration with step halving. With `stat_factor > 0` the iteration stops
/// once the gradient is statistically indistinguishable from zero
/// (`stat_factor` times the Monte Carlo standard error); with zero it runs
/// to numerical convergence.
pub fn karcher_mean(
    points: &[Point],
    start: &Point,
    max_iter: usize,
    stat_factor: f64,
) -> Result<CenterOfMassResult> {
    if points.is_empty() {
        return Err(Error::SamplerStarvation("no points for the mean".into()));
    }
    let m = points.len() as f64;
    let mut p = start.clone();
    let mut iterations = 0;
    loop {
        let mut mean = DVector::zeros(p.dim());
        let mut sq = 0.0;
        let mut logs = Vec::with_capacity(points.len());
        for a in points {
            let l = log_map(&p, a)?;
            sq += l.norm().powi(2);
            mean += &l.components;
            logs.push(l);
        }
        mean /= m;
        let mean_t = TangentVector::new(p.clone(), mean.clone());
        let grad_norm = mean_t.norm();
        let mut var = 0.0;
        for l in &logs {
            let d = TangentVector::new(p.clone(), &l.components - &mean);
            var += d.norm().powi(2);
        }
        let se = (var / (m * (m - 1.0))).sqrt();
        let stop = stat_factor * se;
        if grad_norm < stop || grad_norm < 1e-12 || iterations >= max_iter {
            if iterations >= max_iter && grad_norm >= stop.max(1e-12) {
                return Err(Error::NoConvergence(format!(
                    "karcher mean: gradient {grad_norm:.3e} vs stopping level {:.3e} after {iterations} iterations",
                    stop.max(1e-12)
                )));
            }
            return Ok(CenterOfMassResult {
                point: p,
                grad_norm,
                iterations,
                standard_error: se,
                samples: points.len(),
            });
        }
        // Step halving on the empirical objective.
        let cost = sq / (2.0 * m);
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..20 {
            let cand = exp_map(&p, &TangentVector::new(p.clone(), &mean * lambda))?;
            let mut cost_c = 0.0;
            for a in points {
                cost_c += crate::geom::point::dist(&cand, a)?.powi(2);
            }
            cost_c /= 2.0 * m;
            if cost_c < cost {
                p = cand;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            return Ok(CenterOfMassResult {
                point: p,
                grad_norm,
                iterations,
                standard_error: se,
                samples: points.len(),
            });
        }
        iterations += 1;
    }
}

/// Monte Carlo center of mass of the domain enclosed by `surface`.
pub fn center_of_mass(
    surface: &StarSurface,
    mc_samples: usize,
    seed: u64,
    start: &Point,
) -> Result<CenterOfMassResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = sample_domain(surface, mc_samples, &mut rng)?;
    karcher_mean(&pts, start, 100, 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point::dist;
    use nalgebra::DVector;

    #[test]
    fn foot_distance_examples() {
        let pi = Hyperplane::half_sphere(DVector::zeros(3), 1.0).unwrap();
        let p = Point::from_slice_halfspace(&[0.0, 0.0, (0.7f64).exp()]).unwrap();
        assert!((plane_distance(&p, &pi) - 0.7).abs() < 1e-12);
        let q = Point::from_slice_halfspace(&[1.0, 0.0, 0.00001]).unwrap();
        assert!(plane_distance(&q, &pi) < 1e-3); // near the ideal rim
    }

    #[test]
    fn center_of_concurrent_planes() {
        // Three planes through exp-level 0.3 on three axes around a common
        // point.
        let c = Point::from_slice_halfspace(&[0.2, -0.1, 1.3]).unwrap();
        let mut planes = Vec::new();
        for raw in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            let dir = TangentVector::new(c.clone(), DVector::from_column_slice(&raw))
                .normalized()
                .unwrap();
            let fam = crate::planes::family::PlaneFamily::new(&c, &dir).unwrap();
            planes.push(fam.hyperplane_at(0.0));
        }
        let seed = Point::from_slice_halfspace(&[0.5, 0.3, 0.9]).unwrap();
        let (o, res) = approximate_center(&planes, &seed).unwrap();
        assert!(dist(&o, &c).unwrap() < 1e-7, "center off by {}", dist(&o, &c).unwrap());
        for r in res {
            assert!(r < 1e-7);
        }
    }

    #[test]
    fn parallel_planes_are_rejected() {
        let a = Hyperplane::vertical(DVector::from_column_slice(&[1.0, 0.0, 0.0]), 0.0).unwrap();
        let b = Hyperplane::vertical(DVector::from_column_slice(&[1.0, 0.0, 0.0]), 1.0).unwrap();
        let seed = Point::base(3);
        assert!(matches!(
            approximate_center(&[a, b], &seed),
            Err(Error::NonIntersecting(_))
        ));
    }

    #[test]
    fn karcher_mean_of_symmetric_cloud() {
        // Antipodal pairs at equal geodesic distance from e_n along the three
        // frame directions; every reflection fixing e_n permutes the cloud.
        use crate::geom::geodesic::exp_map;
        let base = Point::base(3);
        let mut pts = Vec::new();
        for (axis, t) in [(0usize, 0.6f64), (1, 0.6), (2, 0.7)] {
            for sign in [-1.0, 1.0] {
                let mut c = DVector::zeros(3);
                c[axis] = sign * t;
                pts.push(exp_map(&base, &TangentVector::new(base.clone(), c)).unwrap());
            }
        }
        let got = karcher_mean(&pts, &Point::from_slice_halfspace(&[0.3, 0.2, 0.7]).unwrap(), 200, 0.0)
            .unwrap();
        // The cloud is symmetric about e_n, so the exact mean sits there.
        assert!(dist(&got.point, &Point::base(3)).unwrap() < 1e-9);
        assert!(got.grad_norm < 1e-11);
    }

    #[test]
    fn ball_center_of_mass_within_noise() {
        let c = Point::from_slice_halfspace(&[0.4, 0.1, 1.2]).unwrap();
        let s = crate::surface::family::StarSurface::sphere(c.clone(), 0.8).unwrap();
        let got = center_of_mass(&s, 20_000, 11, &Point::base(3)).unwrap();
        let err = dist(&got.point, &c).unwrap();
        assert!(
            err < 4.0 * got.standard_error + 1e-6,
            "center of mass off by {err}, se {}",
            got.standard_error
        );
    }
}
