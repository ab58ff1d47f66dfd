//! Two independent mean-curvature evaluation paths used to cross-check the
//! analytic evaluators: a normalized-chart route through the graph formula,
//! and an ambient route through the Euclidean mean curvature of the
//! parametrization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geom::geodesic::log_map;
use crate::geom::isometry::{normalize_to_standard, Isometry};
use crate::geom::point::Point;
use crate::surface::family::{tangent_frame, StarSurface};
use crate::surface::{rho_one, rho_zero};

/// Chart finite-difference step, relative to the normalized chart scale.
/// Smaller steps run into the roundoff floor of the height solver.
const CHART_STEP_REL: f64 = 4e-3;
/// Parameter-space step for the ambient finite differences.
const AMBIENT_STEP: f64 = 1e-3;

/// Mean curvature from the graph expression given chart derivatives.
pub fn mean_curvature_from_derivatives(v: f64, grad: &DVector<f64>, hess: &DMatrix<f64>) -> f64 {
    let m = grad.len() as f64;
    let w2 = 1.0 + grad.norm_squared();
    let w = w2.sqrt();
    let div_term = hess.trace() / w - grad.dot(&(hess * grad)) / (w2 * w);
    v / m * div_term + 1.0 / w
}

/// Height of the normalized surface chart above boundary point `x`: solves
/// for the surface point on the vertical line through `x` in the conjugated
/// frame.
fn chart_height(surface: &StarSurface, from_chart: &Isometry, x: &DVector<f64>, guess: f64) -> Result<f64> {
    let n = x.len() + 1;
    let residual = |t: f64| -> Result<f64> {
        let mut z = DVector::zeros(n);
        for i in 0..n - 1 {
            z[i] = x[i];
        }
        z[n - 1] = t;
        let p = from_chart.apply_point(&Point::halfspace(z)?)?;
        surface.radial_residual(&p)
    };
    let mut t = guess;
    let mut f = residual(t)?;
    for _ in 0..60 {
        if f.abs() < 1e-15 {
            return Ok(t);
        }
        let dt = 1e-7 * t.max(1e-3);
        let fp = residual(t + dt)?;
        let fm = residual(t - dt)?;
        let deriv = (fp - fm) / (2.0 * dt);
        if deriv.abs() < 1e-14 {
            break;
        }
        let step = f / deriv;
        t -= step;
        if !(t > 1e-6 && t < 1e6) {
            return Err(Error::NoConvergence("chart height solve left the admissible range".into()));
        }
        f = residual(t)?;
        if step.abs() < 1e-15 * t.abs() {
            return Ok(t);
        }
    }
    if f.abs() < 1e-11 {
        Ok(t)
    } else {
        Err(Error::NoConvergence(format!("chart height solve stalled, residual {f:.3e}")))
    }
}

/// Path (a): normalize the point to `e_n` with horizontal tangent plane, fit
/// the local height chart by finite differences and apply the graph formula.
pub fn mean_curvature_chart(surface: &StarSurface, p: &Point) -> Result<f64> {
    let (u, t) = surface.polar_of(p)?;
    if (t - surface.radial(&u)).abs() > 1e-9 {
        return Err(Error::InvalidArgument("point is off the surface".into()));
    }
    let normal = surface.inward_normal(&u)?;
    let phi = normalize_to_standard(p, &normal)?;
    let from_chart = phi.inverse();
    let m = p.dim() - 1;

    let h0 = CHART_STEP_REL * rho_one(surface.spec().radius.min(1.0));
    let v_at = |x: &DVector<f64>, guess: f64| chart_height(surface, &from_chart, x, guess);

    // Gradient and Hessian by central differences at steps h and h/2,
    // Richardson-combined to fourth order.
    let fd = |h: f64| -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let center = v_at(&DVector::zeros(m), 1.0)?;
        let mut grad = DVector::zeros(m);
        let mut hess = DMatrix::zeros(m, m);
        let mut plus = vec![0.0; m];
        let mut minus = vec![0.0; m];
        for i in 0..m {
            let mut xp = DVector::zeros(m);
            xp[i] = h;
            let vp = v_at(&xp, center)?;
            xp[i] = -h;
            let vm = v_at(&xp, center)?;
            plus[i] = vp;
            minus[i] = vm;
            grad[i] = (vp - vm) / (2.0 * h);
            hess[(i, i)] = (vp - 2.0 * center + vm) / (h * h);
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let mut x = DVector::zeros(m);
                x[i] = h;
                x[j] = h;
                let vpp = v_at(&x, plus[i])?;
                x[j] = -h;
                let vpm = v_at(&x, plus[i])?;
                x[i] = -h;
                x[j] = h;
                let vmp = v_at(&x, minus[i])?;
                x[j] = -h;
                let vmm = v_at(&x, minus[i])?;
                let mixed = (vpp + vmm - vpm - vmp) / (4.0 * h * h);
                hess[(i, j)] = mixed;
                hess[(j, i)] = mixed;
            }
        }
        Ok((center, grad, hess))
    };

    let (v0, g1, h1) = fd(h0)?;
    let (_, g2, h2) = fd(h0 / 2.0)?;
    let grad = (&g2 * 4.0 - &g1) / 3.0;
    let hess = (&h2 * 4.0 - &h1) / 3.0;
    Ok(mean_curvature_from_derivatives(v0, &grad, &hess))
}

/// Path (b): Euclidean mean curvature of the ambient parametrization by
/// finite differences, converted through `H = nu_n + p_n H_E`.
pub fn mean_curvature_ambient(surface: &StarSurface, p: &Point) -> Result<f64> {
    let (kappas, _) = ambient_principal_curvatures(surface, p)?;
    Ok(kappas.iter().sum::<f64>() / kappas.len() as f64)
}

/// Finite-difference hyperbolic principal curvatures (sorted) from the
/// ambient parametrization, plus the Euclidean inward unit normal used.
pub fn ambient_principal_curvatures(
    surface: &StarSurface,
    p: &Point,
) -> Result<(Vec<f64>, DVector<f64>)> {
    let n = p.dim();
    let m = n - 1;
    let (u0, t) = surface.polar_of(p)?;
    if (t - surface.radial(&u0)).abs() > 1e-9 {
        return Err(Error::InvalidArgument("point is off the surface".into()));
    }
    let frame = tangent_frame(&u0);
    let pos = |xi: &DVector<f64>| -> Result<DVector<f64>> {
        let mut u = u0.clone();
        for (idx, tv) in frame.iter().enumerate() {
            u += tv * xi[idx];
        }
        let norm = u.norm();
        u /= norm;
        Ok(surface.position(&u)?.coords().clone())
    };

    let h = AMBIENT_STEP;
    let center = pos(&DVector::zeros(m))?;

    // First derivatives: fourth-order five-point stencil.
    let mut jac: Vec<DVector<f64>> = Vec::with_capacity(m);
    for a in 0..m {
        let mut x = DVector::zeros(m);
        x[a] = 2.0 * h;
        let p2 = pos(&x)?;
        x[a] = h;
        let p1 = pos(&x)?;
        x[a] = -h;
        let m1 = pos(&x)?;
        x[a] = -2.0 * h;
        let m2 = pos(&x)?;
        jac.push((-&p2 + &p1 * 8.0 - &m1 * 8.0 + &m2) / (12.0 * h));
    }

    // Second derivatives: five-point diagonal, Richardson-extrapolated cross.
    let mut second: Vec<Vec<DVector<f64>>> = vec![vec![DVector::zeros(n); m]; m];
    for a in 0..m {
        let mut x = DVector::zeros(m);
        x[a] = 2.0 * h;
        let p2 = pos(&x)?;
        x[a] = h;
        let p1 = pos(&x)?;
        x[a] = -h;
        let m1 = pos(&x)?;
        x[a] = -2.0 * h;
        let m2 = pos(&x)?;
        second[a][a] =
            (-&p2 + &p1 * 16.0 - &center * 30.0 + &m1 * 16.0 - &m2) / (12.0 * h * h);
    }
    for a in 0..m {
        for b in (a + 1)..m {
            let cross_at = |hh: f64| -> Result<DVector<f64>> {
                let mut x = DVector::zeros(m);
                x[a] = hh;
                x[b] = hh;
                let pp = pos(&x)?;
                x[b] = -hh;
                let pm = pos(&x)?;
                x[a] = -hh;
                x[b] = hh;
                let mp = pos(&x)?;
                x[b] = -hh;
                let mm = pos(&x)?;
                Ok((pp + mm - pm - mp) / (4.0 * hh * hh))
            };
            let c1 = cross_at(h)?;
            let c2 = cross_at(h / 2.0)?;
            let val = (&c2 * 4.0 - &c1) / 3.0;
            second[a][b] = val.clone();
            second[b][a] = val;
        }
    }

    // Euclidean unit normal: complete the (orthonormalized) tangent columns,
    // oriented inward via the log toward the center.
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
    for j in &jac {
        let mut v = j.clone();
        for b in &basis {
            let c = v.dot(b);
            v -= b * c;
        }
        let norm = v.norm();
        if norm < 1e-12 {
            return Err(Error::Resolution("degenerate ambient Jacobian".into()));
        }
        basis.push(v / norm);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let span = |k: usize| -> f64 { basis.iter().map(|b| b[k] * b[k]).sum::<f64>() };
        span(i).partial_cmp(&span(j)).unwrap()
    });
    let mut nu = DVector::zeros(n);
    nu[order[0]] = 1.0;
    for b in &basis {
        let c = nu.dot(b);
        nu -= b * c;
    }
    nu /= nu.norm();
    let toward_center = log_map(p, &surface.center())?;
    if nu.dot(&toward_center.components) < 0.0 {
        nu = -nu;
    }

    // First and second fundamental forms; Euclidean curvatures from the
    // symmetrized generalized eigenproblem.
    let mut gram = DMatrix::zeros(m, m);
    let mut two = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            gram[(a, b)] = jac[a].dot(&jac[b]);
            two[(a, b)] = nu.dot(&second[a][b]);
        }
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Resolution("singular first fundamental form".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Resolution("singular first fundamental form".into()))?;
    let sym = &l_inv * &two * l_inv.transpose();
    let mut kappa_e: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    kappa_e.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let height = p.height();
    let nu_n = nu[n - 1];
    let kappas: Vec<f64> = kappa_e.iter().map(|k| height * k + nu_n).collect();
    Ok((kappas, nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point::Point;
    use crate::surface::family::{unit_directions, StarSurface, SurfaceSpec};
    use crate::surface::profile::Profile;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sphere_dual_paths_agree_with_coth() {
        let s = StarSurface::sphere(Point::base(3), 1.0).unwrap();
        let coth1 = 1.0 / 1.0_f64.tanh();
        for u in unit_directions(3, 7) {
            let p = s.position(&u).unwrap();
            let hc = mean_curvature_chart(&s, &p).unwrap();
            let ha = mean_curvature_ambient(&s, &p).unwrap();
            assert_abs_diff_eq!(hc, coth1, epsilon = 1e-7);
            assert_abs_diff_eq!(ha, coth1, epsilon = 1e-8);
        }
    }

    #[test]
    fn perturbed_sphere_paths_agree_with_analytic() {
        let spec = SurfaceSpec {
            center: Point::from_slice_halfspace(&[0.3, -0.1, 1.4]).unwrap(),
            radius: 1.0,
            amplitude: 0.01,
            profile: Profile::Mixed,
        };
        let s = StarSurface::new(spec).unwrap();
        for u in unit_directions(3, 9) {
            let p = s.position(&u).unwrap();
            let analytic = s.mean_curvature(&u);
            let hc = mean_curvature_chart(&s, &p).unwrap();
            let ha = mean_curvature_ambient(&s, &p).unwrap();
            assert_abs_diff_eq!(hc, analytic, epsilon = 1e-6);
            assert_abs_diff_eq!(ha, analytic, epsilon = 1e-7);
            assert_abs_diff_eq!(hc, ha, epsilon = 1e-6);
        }
    }

    #[test]
    fn fd_principal_curvatures_match_analytic_on_sphere() {
        let s = StarSurface::sphere(Point::base(3), 0.7).unwrap();
        let coth = 1.0 / 0.7_f64.tanh();
        for u in unit_directions(3, 5) {
            let p = s.position(&u).unwrap();
            let (kappas, _) = ambient_principal_curvatures(&s, &p).unwrap();
            for k in kappas {
                assert_abs_diff_eq!(k, coth, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn off_surface_points_are_rejected() {
        let s = StarSurface::sphere(Point::base(3), 1.0).unwrap();
        assert!(mean_curvature_chart(&s, &Point::base(3)).is_err());
        assert!(mean_curvature_ambient(&s, &Point::base(3)).is_err());
    }
}
