//! Parallel transport along geodesics: a closed form obtained by conjugating
//! into the vertical 2-plane configuration, and an independent 4th-order ODE
//! integrator used as a differential oracle.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geom::geodesic::geodesic;
use crate::geom::isometry::{reflection_aligning, Generator, Isometry};
use crate::geom::point::{Model, Point, TangentVector, DEGENERATE_SEP};

fn check_base(q: &Point, v: &TangentVector) -> Result<()> {
    if (q.coords() - v.base.coords()).norm() > 1e-9 * (1.0 + q.coords().norm()) {
        return Err(Error::InvalidArgument("vector is not based at the source point".into()));
    }
    Ok(())
}

/// Parallel transport of `v` (based at `q`) to `p`, in closed form.
///
/// Vertical configurations scale by the height ratio; the general position is
/// conjugated so that the target is `e_n` and the source lies in the last
/// vertical coordinate 2-plane, where the transport matrix is explicit.
pub fn parallel_transport(q: &Point, p: &Point, v: &TangentVector) -> Result<TangentVector> {
    if q.model() != Model::HalfSpace || p.model() != Model::HalfSpace {
        return Err(Error::ModelMismatch(q.model().name(), p.model().name()));
    }
    check_base(q, v)?;
    let n = q.dim();
    let scale = p.height().max(q.height());
    if (p.coords() - q.coords()).norm() < DEGENERATE_SEP * scale {
        return Ok(TangentVector::new(p.clone(), v.components.clone()));
    }

    // Conjugate the target to e_n.
    let mut psi = Isometry::move_to_base(p);
    let q1 = psi.apply_point(q)?;
    let mut qh = q1.coords().clone();
    qh[n - 1] = 0.0;
    let horiz = qh.norm();
    if horiz < 1e-13 {
        // Vertical after recentering: scale by the height ratio.
        let v1 = psi.apply_tangent(v)?;
        let w = TangentVector::new(Point::base(n), v1.components / q1.height());
        return psi.inverse().apply_tangent(&w);
    }
    let mut target = DVector::zeros(n);
    target[n - 2] = 1.0;
    psi.push(Generator::HorizontalRotation(reflection_aligning(&(&qh / horiz), &target)));

    let q2 = psi.apply_point(q)?;
    let v2 = psi.apply_tangent(v)?;
    let qm = q2.coords()[n - 2];
    let qn = q2.coords()[n - 1];
    debug_assert!(qm.abs() > 1e-14);

    let a = (q2.coords().norm_squared() - 1.0) / (2.0 * qm);
    let den = 1.0 + a * a;
    let m11 = (a * (a - qm) + qn) / den;
    let m12 = (a - qm - a * qn) / den;
    let m21 = (a * qn - a + qm) / den;

    let mut w = v2.components.clone();
    let vm = w[n - 2];
    let vn = w[n - 1];
    w[n - 2] = m11 * vm + m12 * vn;
    w[n - 1] = m21 * vm + m11 * vn;
    w /= qn;

    psi.inverse().apply_tangent(&TangentVector::new(Point::base(n), w))
}

/// Parallel transport by integrating the transport ODE along the geodesic
/// with classical Runge-Kutta; `steps >= 16`.
pub fn parallel_transport_ode(
    q: &Point,
    p: &Point,
    v: &TangentVector,
    steps: usize,
) -> Result<TangentVector> {
    if steps < 16 {
        return Err(Error::InvalidArgument(format!("steps = {steps} < 16")));
    }
    check_base(q, v)?;
    let seg = match geodesic(q, p) {
        Ok(seg) => seg,
        Err(Error::DegenerateSegment) => {
            return Ok(TangentVector::new(p.clone(), v.components.clone()))
        }
        Err(e) => return Err(e),
    };
    let n = q.dim();
    let len = seg.length();
    let h = len / steps as f64;

    let deriv = |s: f64, x: &DVector<f64>| -> DVector<f64> {
        let pos = seg.eval_coords(s);
        let vel = seg.tangent_coords(s);
        let height = pos[n - 1];
        let mut dx = DVector::zeros(n);
        let mut cross = 0.0;
        for i in 0..n - 1 {
            dx[i] = (x[n - 1] * vel[i] + x[i] * vel[n - 1]) / height;
            cross += x[i] * vel[i];
        }
        dx[n - 1] = (x[n - 1] * vel[n - 1] - cross) / height;
        dx
    };

    let mut x = v.components.clone();
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = deriv(s, &x);
        let k2 = deriv(s + 0.5 * h, &(&x + &k1 * (0.5 * h)));
        let k3 = deriv(s + 0.5 * h, &(&x + &k2 * (0.5 * h)));
        let k4 = deriv(s + h, &(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(TangentVector::new(seg.end(), x))
}
