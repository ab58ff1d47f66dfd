//! Closed test hypersurfaces with analytic evaluators, sample sets with
//! quadrature weights, oscillation of the mean curvature, and touching-ball
//! radius estimation.

pub mod curvature;
pub mod family;
pub mod graph;
pub mod profile;

pub use curvature::{ambient_principal_curvatures, mean_curvature_ambient, mean_curvature_chart};
pub use family::{
    sphere_measure, tangent_frame, unit_directions, RadialData, StarSurface, SurfaceSample,
    SurfaceSpec,
};
pub use graph::{mean_curvature_graph, GraphPatch};
pub use profile::Profile;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::geodesic::log_map;
use crate::geom::point::{dist, Point};

/// Oscillation of the mean curvature over a sample set.
pub fn osc_h(samples: &[SurfaceSample]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in samples {
        lo = lo.min(s.mean_h);
        hi = hi.max(s.mean_h);
    }
    if samples.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Quadrature area of the sample set.
pub fn area(samples: &[SurfaceSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    Ok(samples.iter().map(|s| s.weight).sum())
}

/// Maximal pairwise sampled distance, over an evenly strided subsample of at
/// most `cap` points. A certified lower bound of the true diameter, monotone
/// in the sample count.
pub fn diameter(samples: &[SurfaceSample], cap: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let stride = (samples.len() / cap.max(1)).max(1);
    let pts: Vec<_> = samples.iter().step_by(stride).map(|s| &s.point).collect();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = dist(pts[i], pts[j])?;
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Euclidean radius of a hyperbolic ball of radius `rho` whose top touches
/// unit height: `exp(-rho) sinh(rho)`.
pub fn rho_zero(rho: f64) -> f64 {
    (-rho).exp() * rho.sinh()
}

/// The interior chart radius `(1 - rho_zero) rho_zero`.
pub fn rho_one(rho: f64) -> f64 {
    let r0 = rho_zero(rho);
    (1.0 - r0) * r0
}

/// Touching-ball radius estimate: the curvature bound `arcoth(|kappa|)` where
/// it binds, combined with a sampled two-point reach proxy. The curvature part
/// is a certified upper bound; the reach part is sampled.
pub fn touching_radius(samples: &[SurfaceSample], pair_cap: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let arcoth = |x: f64| 0.5 * ((x + 1.0) / (x - 1.0)).ln();
    let mut rho = f64::INFINITY;
    for s in samples {
        for &k in &s.kappas {
            if k > 1.0 + 1e-12 {
                rho = rho.min(arcoth(k));
            }
            if k < -1.0 - 1e-12 {
                rho = rho.min(arcoth(-k));
            }
        }
        if !rho.is_finite() {
            continue;
        }
    }
    let stride = (samples.len() / pair_cap.max(1)).max(1);
    let sub: Vec<_> = samples.iter().step_by(stride).collect();
    for (i, p) in sub.iter().enumerate() {
        for q in sub.iter().skip(i + 1) {
            let t = dist(&p.point, &q.point)?;
            if t < 1e-6 {
                continue;
            }
            let v = log_map(&p.point, &q.point)?;
            let cos = p.normal.inner(&v) / t;
            let val = t.sinh() * cos / (t.cosh() - 1.0);
            if val > 1.0 + 1e-12 {
                rho = rho.min(arcoth(val));
            } else if val < -1.0 - 1e-12 {
                rho = rho.min(arcoth(-val));
            }
        }
    }
    if !rho.is_finite() {
        return Err(Error::Resolution("degenerate curvature data: no touching bound found".into()));
    }
    Ok(rho)
}

/// Upper diameter bound `delta * N_delta` from the chain-of-balls count
/// `N_delta = max(4, 2^k |M| / (c delta^k))`, with the disk constant `c`
/// fitted from sampled intrinsic ball areas.
pub fn chain_diameter_bound(samples: &[SurfaceSample], delta: f64) -> Result<f64> {
    if samples.is_empty() || !(delta > 0.0) {
        return Err(Error::InvalidArgument("empty samples or nonpositive delta".into()));
    }
    let kdim = (samples[0].point.dim() - 1) as f64;
    let total: f64 = samples.iter().map(|s| s.weight).sum();
    let stride = (samples.len() / 64).max(1);
    let mut c_fit = f64::INFINITY;
    for z in samples.iter().step_by(stride) {
        let mut ball = 0.0;
        for s in samples {
            if dist(&z.point, &s.point)? < delta {
                ball += s.weight;
            }
        }
        c_fit = c_fit.min(ball / delta.powf(kdim));
    }
    if !(c_fit > 0.0) {
        return Err(Error::Resolution("ball-area fit degenerate".into()));
    }
    let n_delta = (2.0f64.powf(kdim) * total / (c_fit * delta.powf(kdim))).max(4.0);
    Ok(delta * n_delta)
}

/// One standard normal variate by Box-Muller.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        if u1 > 1e-300 {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

/// Inverse radial CDF for the hyperbolic volume density `sinh^(n-1)`.
struct RadialCdf {
    n: usize,
    t_max: f64,
    table: Option<(Vec<f64>, Vec<f64>)>,
}

impl RadialCdf {
    fn new(n: usize, t_max: f64) -> Self {
        let table = if n <= 3 {
            None
        } else {
            let steps = 1024;
            let mut ts = Vec::with_capacity(steps + 1);
            let mut fs = Vec::with_capacity(steps + 1);
            let h = t_max / steps as f64;
            let dens = |t: f64| t.sinh().powi(n as i32 - 1);
            let mut acc = 0.0;
            ts.push(0.0);
            fs.push(0.0);
            for k in 1..=steps {
                let a = (k - 1) as f64 * h;
                let b = k as f64 * h;
                acc += h / 6.0 * (dens(a) + 4.0 * dens(0.5 * (a + b)) + dens(b));
                ts.push(b);
                fs.push(acc);
            }
            Some((ts, fs))
        };
        RadialCdf { n, t_max, table }
    }

    fn total(&self) -> f64 {
        self.eval(self.t_max)
    }

    fn eval(&self, t: f64) -> f64 {
        match self.n {
            2 => t.cosh() - 1.0,
            3 => (t.sinh() * t.cosh() - t) / 2.0,
            _ => {
                let (ts, fs) = self.table.as_ref().unwrap();
                let h = self.t_max / (ts.len() - 1) as f64;
                let idx = ((t / h) as usize).min(ts.len() - 2);
                let frac = (t - ts[idx]) / h;
                fs[idx] + frac * (fs[idx + 1] - fs[idx])
            }
        }
    }

    /// Solve `eval(t) = target` by safeguarded Newton.
    fn invert(&self, target: f64) -> f64 {
        let mut lo = 0.0;
        let mut hi = self.t_max;
        let mut t = 0.5 * self.t_max;
        let dens = |t: f64| t.sinh().powi(self.n as i32 - 1);
        for _ in 0..80 {
            let f = self.eval(t) - target;
            if f.abs() < 1e-13 * (1.0 + target) {
                return t;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = dens(t);
            let mut next = if d > 1e-300 { t - f / d } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            t = next;
        }
        t
    }
}

/// Uniform (with respect to hyperbolic volume) points of the enclosed domain,
/// by exact radial inversion and star-shaped rejection.
pub fn sample_domain<R: Rng>(
    surface: &StarSurface,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    let n = surface.dim();
    let spec = surface.spec();
    let t_max = spec.radius + spec.amplitude * spec.profile.c2_bound();
    let cdf = RadialCdf::new(n, t_max);
    let total = cdf.total();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let cap = count.saturating_mul(10_000).max(100_000);
    while out.len() < count {
        attempts += 1;
        if attempts > cap {
            return Err(Error::SamplerStarvation(format!(
                "accepted {} of {count} after {attempts} draws",
                out.len()
            )));
        }
        let mut u = nalgebra::DVector::from_fn(n, |_, _| standard_normal(rng));
        let norm = u.norm();
        if norm < 1e-8 {
            continue;
        }
        u /= norm;
        let t = cdf.invert(rng.random::<f64>() * total);
        if t < surface.radial(&u) {
            let y = &u * (t / 2.0).tanh();
            out.push(surface.from_center_ball(&y)?);
        }
    }
    Ok(out)
}
