//! Numeric checks for curvatures of transversal hyperplane sections and of
//! their Euclidean boundary projections (exercised in dimension 3, where
//! sections are curves).
//!
//! Section curves are extracted by marching the zero set of the plane's side
//! function over the parameter sphere with Newton projection. Curve
//! curvatures are measured from local stencils of exact curve points: wide
//! spacing keeps the second-difference roundoff floor below the equality-case
//! slack, a cubic chord-to-arc correction removes the parametrization bias,
//! and a degree-six local polynomial fit supplies the derivatives.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::geom::hyperplane::Hyperplane;
use crate::geom::point::{dist, Point, TangentVector};
use crate::planes::family::PlaneFamily;
use crate::surface::family::{tangent_frame, unit_directions, StarSurface};
use crate::surface::profile::Profile;
use crate::surface::SurfaceSpec;

/// Arclength spacing of the local curvature stencil.
const STENCIL_STEP: f64 = 0.02;
/// Newton projection tolerance on the side function.
const PROJECT_TOL: f64 = 1e-14;

/// One section-curve sample with everything the three bound checks need.
#[derive(Clone, Debug)]
pub struct SectionSample {
    pub point: Point,
    /// Unit tangent of the curve.
    pub tangent: TangentVector,
    /// Unit normal of the curve within the hyperplane, oriented towards the
    /// surface normal.
    pub n_prime: TangentVector,
    /// Unit normal of the hyperplane at the point.
    pub omega: TangentVector,
    /// Sorted hyperbolic principal curvatures of the host surface.
    pub surface_kappas: Vec<f64>,
    pub g_n_nprime: f64,
    pub g_omega_n: f64,
    /// Curvature of the section within the hyperplane.
    pub kappa_prime: f64,
    /// Curvature of the section seen as a hypersurface of the host surface.
    pub kappa_check: f64,
    /// Euclidean curvature of the boundary projection (zero for vertical
    /// planes).
    pub kappa_proj: f64,
    /// Height and Euclidean section-normal vertical component, used by the
    /// projection bound.
    pub height: f64,
    pub nu_prime_vertical: f64,
}

#[derive(Clone, Debug)]
pub struct SectionCurve {
    pub plane: Hyperplane,
    pub samples: Vec<SectionSample>,
    /// Minimal transversality margin `1 - g(omega, N)^2` over the samples.
    pub min_margin: f64,
    /// Worst unit/orthogonality residual of the section normal fields.
    pub frame_residual: f64,
    /// Worst orthogonality residual of the projected orientation field.
    pub projection_residual: f64,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub bound_id: &'static str,
    pub worst_slack: f64,
    pub n_samples: usize,
    pub violated: bool,
}

fn side_at(surface: &StarSurface, plane: &Hyperplane, u: &DVector<f64>) -> Result<f64> {
    Ok(plane.signed_side(&surface.position(u)?))
}

fn sphere_grad(
    surface: &StarSurface,
    plane: &Hyperplane,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    let frame = tangent_frame(u);
    let h = 1e-6;
    let mut g = DVector::zeros(u.len());
    for t in &frame {
        let up = (u + t * h).normalize();
        let dn = (u - t * h).normalize();
        let d = (side_at(surface, plane, &up)? - side_at(surface, plane, &dn)?) / (2.0 * h);
        g += t * d;
    }
    Ok(g)
}

/// Newton projection of a direction onto the zero set of the side function.
fn project_to_curve(
    surface: &StarSurface,
    plane: &Hyperplane,
    mut u: DVector<f64>,
) -> Result<DVector<f64>> {
    for _ in 0..40 {
        let f = side_at(surface, plane, &u)?;
        if f.abs() < PROJECT_TOL {
            return Ok(u);
        }
        let g = sphere_grad(surface, plane, &u)?;
        let n2 = g.norm_squared();
        if n2 < 1e-18 {
            return Err(Error::Transversality("vanishing side gradient on the zero set".into()));
        }
        u = (&u - &g * (f / n2)).normalize();
    }
    let f = side_at(surface, plane, &u)?;
    if f.abs() < 1e-10 {
        Ok(u)
    } else {
        Err(Error::Transversality(format!("projection stalled at side {f:.3e}")))
    }
}

/// Marching tangent on the parameter sphere (3d only).
fn march_dir(u: &DVector<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let t = DVector::from_column_slice(&[
        u[1] * grad[2] - u[2] * grad[1],
        u[2] * grad[0] - u[0] * grad[2],
        u[0] * grad[1] - u[1] * grad[0],
    ]);
    let n = t.norm();
    t / n
}

fn step_on_curve(
    surface: &StarSurface,
    plane: &Hyperplane,
    u: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    let g = sphere_grad(surface, plane, u)?;
    let t = march_dir(u, &g);
    project_to_curve(surface, plane, (u + t * h).normalize())
}

/// Parameter step that advances the curve by about `target` hyperbolic
/// arclength.
fn param_step_for(
    surface: &StarSurface,
    plane: &Hyperplane,
    u: &DVector<f64>,
    target: f64,
) -> Result<f64> {
    let probe = 1e-4;
    let u2 = step_on_curve(surface, plane, u, probe)?;
    let moved = dist(&surface.position(u)?, &surface.position(&u2)?)?;
    if moved < 1e-12 {
        return Err(Error::Transversality("curve is stationary".into()));
    }
    Ok(probe * target / moved)
}

/// Local stencil of exact curve points at near-uniform hyperbolic arclength
/// spacing around `u0`, with the center at index `half`.
fn local_stencil(
    surface: &StarSurface,
    plane: &Hyperplane,
    u0: &DVector<f64>,
    half: usize,
    step: f64,
) -> Result<Vec<Point>> {
    let h = param_step_for(surface, plane, u0, step)?;
    let mut fwd = Vec::with_capacity(half);
    let mut cur = u0.clone();
    for _ in 0..half {
        cur = step_on_curve(surface, plane, &cur, h)?;
        fwd.push(surface.position(&cur)?);
    }
    let mut bwd = Vec::with_capacity(half);
    cur = u0.clone();
    for _ in 0..half {
        cur = step_on_curve(surface, plane, &cur, -h)?;
        bwd.push(surface.position(&cur)?);
    }
    let mut pts = Vec::with_capacity(2 * half + 1);
    for p in bwd.iter().rev() {
        pts.push(p.clone());
    }
    pts.push(surface.position(u0)?);
    pts.extend(fwd);
    Ok(pts)
}

/// Derivatives `dx/ds`, `d2x/ds2` at the center of a stencil from a local
/// polynomial fit against (chord-corrected) arclengths.
fn fit_derivatives(pts: &[Point], arcs: &[f64]) -> (DVector<f64>, DVector<f64>) {
    let k = pts.len();
    let half = k / 2;
    // Signed arclength coordinates with the center at zero.
    let mut s = vec![0.0; k];
    for j in (0..half).rev() {
        s[j] = s[j + 1] - arcs[j];
    }
    for j in half..k - 1 {
        s[j + 1] = s[j] + arcs[j];
    }
    let scale = s[k - 1].max(-s[0]);
    let deg = k - 1;
    let mut v = DMatrix::zeros(k, deg + 1);
    for i in 0..k {
        let z = s[i] / scale;
        let mut pw = 1.0;
        for j in 0..=deg {
            v[(i, j)] = pw;
            pw *= z;
        }
    }
    let lu = v.lu();
    let n = pts[0].dim();
    let mut d1 = DVector::zeros(n);
    let mut d2 = DVector::zeros(n);
    for c in 0..n {
        let rhs = DVector::from_fn(k, |i, _| pts[i].coords()[c]);
        let coef = lu.solve(&rhs).expect("Vandermonde solve");
        d1[c] = coef[1] / scale;
        d2[c] = 2.0 * coef[2] / (scale * scale);
    }
    (d1, d2)
}

/// Covariant acceleration of a unit-speed curve from its Euclidean
/// derivatives in the half-space model.
fn covariant_acceleration(p: &Point, d1: &DVector<f64>, d2: &DVector<f64>) -> DVector<f64> {
    let n = p.dim();
    let h = p.height();
    let mut out = DVector::zeros(n);
    let mut horiz = 0.0;
    for i in 0..n - 1 {
        out[i] = d2[i] - 2.0 * d1[i] * d1[n - 1] / h;
        horiz += d1[i] * d1[i];
    }
    out[n - 1] = d2[n - 1] + (horiz - d1[n - 1] * d1[n - 1]) / h;
    out
}

/// Curve derivatives at a node: unit tangent and covariant acceleration, by
/// iterated chord-to-arc correction.
fn curve_derivatives(
    surface: &StarSurface,
    plane: &Hyperplane,
    u0: &DVector<f64>,
) -> Result<(Point, DVector<f64>, DVector<f64>)> {
    let half = 3usize;
    let pts = local_stencil(surface, plane, u0, half, STENCIL_STEP)?;
    let k = pts.len();
    let mut arcs: Vec<f64> = (0..k - 1).map(|j| dist(&pts[j], &pts[j + 1]).unwrap()) .collect();
    let center = pts[half].clone();
    let mut d1 = DVector::zeros(3);
    let mut d2 = DVector::zeros(3);
    for _pass in 0..3 {
        let (a, b) = fit_derivatives(&pts, &arcs);
        d1 = a;
        d2 = b;
        let acc = covariant_acceleration(&center, &d1, &d2);
        let kappa2 = acc.norm_squared() / center.height().powi(2) / 1.0;
        // chord = arc - arc^3 kappa^2 / 24 + ...
        let chords: Vec<f64> = (0..k - 1).map(|j| dist(&pts[j], &pts[j + 1]).unwrap()).collect();
        for j in 0..k - 1 {
            let c = chords[j];
            arcs[j] = c * (1.0 + c * c * kappa2 / 24.0);
        }
    }
    let acc = covariant_acceleration(&center, &d1, &d2);
    Ok((center, d1, acc))
}

/// Extract the section of `surface` by `plane` as a closed sampled curve with
/// curvature data at `nodes` points.
pub fn section(
    surface: &StarSurface,
    plane: &Hyperplane,
    nodes: usize,
    margin_threshold: f64,
) -> Result<SectionCurve> {
    if surface.dim() != 3 {
        return Err(Error::InvalidArgument("section checks run in dimension 3".into()));
    }
    // Transversality scan: the side function must change sign.
    let coarse = unit_directions(3, 600);
    let mut pos = None;
    let mut neg = None;
    for u in &coarse {
        let f = side_at(surface, plane, u)?;
        if f > 0.0 && pos.is_none() {
            pos = Some(u.clone());
        }
        if f < 0.0 && neg.is_none() {
            neg = Some(u.clone());
        }
        if pos.is_some() && neg.is_some() {
            break;
        }
    }
    let (pos, neg) = match (pos, neg) {
        (Some(p), Some(n)) => (p, n),
        _ => {
            return Err(Error::Transversality(
                "hyperplane does not separate the parameter sphere".into(),
            ))
        }
    };
    // Bisect along the connecting arc for a seed, then project.
    let mut lo = neg;
    let mut hi = pos;
    for _ in 0..60 {
        let mid = (&lo + &hi).normalize();
        if side_at(surface, plane, &mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let seed = project_to_curve(surface, plane, hi)?;

    // Discovery lap to measure the parameter length of the curve.
    let lap_step = 0.02;
    let mut u = seed.clone();
    let mut lap_len = 0.0;
    let mut steps = 0usize;
    loop {
        let next = step_on_curve(surface, plane, &u, lap_step)?;
        lap_len += angle_between(&u, &next);
        u = next;
        steps += 1;
        if steps > 4 && angle_between(&u, &seed) < 0.75 * lap_step {
            break;
        }
        if steps > 100_000 {
            return Err(Error::Transversality("section marching never closed".into()));
        }
    }

    // Final lap at the requested resolution.
    let h = lap_len / nodes as f64;
    let mut node_params = Vec::with_capacity(nodes);
    u = seed.clone();
    for _ in 0..nodes {
        node_params.push(u.clone());
        u = step_on_curve(surface, plane, &u, h)?;
    }

    let is_vertical = matches!(plane, Hyperplane::Vertical { .. });
    let mut samples = Vec::with_capacity(nodes);
    let mut min_margin = f64::INFINITY;
    let mut frame_residual = 0.0f64;
    let mut projection_residual = 0.0f64;

    for up in &node_params {
        let (p, d1, acc) = curve_derivatives(surface, plane, up)?;
        let height = p.height();
        let normal = surface.inward_normal(up)?;
        let omega = plane.unit_normal_at(&p);
        // The tangent is orthogonal to both normals: exact up to rounding,
        // where the fitted first derivative only reaches the chord-correction
        // order. The fit still fixes the orientation.
        let mut tan = DVector::from_column_slice(&[
            normal.components[1] * omega.components[2] - normal.components[2] * omega.components[1],
            normal.components[2] * omega.components[0] - normal.components[0] * omega.components[2],
            normal.components[0] * omega.components[1] - normal.components[1] * omega.components[0],
        ]);
        if tan.dot(&d1) < 0.0 {
            tan = -tan;
        }
        let tan_norm = tan.norm() / height;
        let tangent = TangentVector::new(p.clone(), tan / tan_norm);
        let g_omega_n = omega.inner(&normal);
        let margin = 1.0 - g_omega_n * g_omega_n;
        min_margin = min_margin.min(margin);

        // Section normal within the plane: component of N orthogonal to
        // omega, renormalized.
        let mut np = &normal.components - &omega.components * g_omega_n;
        let np_norm = np.norm() / height;
        np /= np_norm;
        let n_prime = TangentVector::new(p.clone(), np);
        // In-surface normal of the curve: component of omega orthogonal to N.
        let mut nc = &omega.components - &normal.components * g_omega_n;
        let nc_norm = nc.norm() / height;
        nc /= nc_norm;
        let n_check = TangentVector::new(p.clone(), nc);

        let g_n_nprime = normal.inner(&n_prime);
        frame_residual = frame_residual
            .max((n_prime.norm() - 1.0).abs())
            .max(n_prime.inner(&tangent).abs())
            .max(n_prime.inner(&omega).abs());

        let acc_t = TangentVector::new(p.clone(), acc.clone());
        let kappa_prime = n_prime.inner(&acc_t);
        let kappa_check = n_check.inner(&acc_t);

        // Euclidean curvature of the boundary projection.
        let kappa_proj = if is_vertical {
            0.0
        } else {
            let pts = local_stencil(surface, plane, up, 3, STENCIL_STEP)?;
            projected_curvature(&pts, &mut projection_residual)
        };

        let nu_prime_vertical = n_prime.components[2] / height;
        samples.push(SectionSample {
            point: p,
            tangent,
            n_prime,
            omega,
            surface_kappas: surface.principal_curvatures(up),
            g_n_nprime,
            g_omega_n,
            kappa_prime,
            kappa_check,
            kappa_proj,
            height,
            nu_prime_vertical,
        });
    }

    if min_margin < margin_threshold {
        return Err(Error::Transversality(format!(
            "transversality margin {min_margin:.3} below threshold {margin_threshold}"
        )));
    }

    Ok(SectionCurve {
        plane: plane.clone(),
        samples,
        min_margin,
        frame_residual,
        projection_residual,
    })
}

fn angle_between(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Signed Euclidean curvature of the boundary projection of a curve stencil,
/// with the orientation normal `vers(*(tangent ^ e_n))`.
fn projected_curvature(pts: &[Point], residual: &mut f64) -> f64 {
    let k = pts.len();
    let half = k / 2;
    let flat: Vec<DVector<f64>> = pts
        .iter()
        .map(|p| DVector::from_column_slice(&[p.coords()[0], p.coords()[1]]))
        .collect();
    let mut arcs: Vec<f64> = (0..k - 1).map(|j| (&flat[j + 1] - &flat[j]).norm()).collect();
    let chords = arcs.clone();
    let mut d1 = DVector::zeros(2);
    let mut d2 = DVector::zeros(2);
    for _ in 0..3 {
        let (a, b) = fit_planar(&flat, &arcs, half);
        d1 = a;
        d2 = b;
        let kappa2 = d2.norm_squared();
        for j in 0..k - 1 {
            let c = chords[j];
            arcs[j] = c * (1.0 + c * c * kappa2 / 24.0);
        }
    }
    // defnu2 orientation: rotate the tangent by the Hodge pairing with e_n.
    let t_norm = d1.norm();
    let nu = DVector::from_column_slice(&[d1[1] / t_norm, -d1[0] / t_norm]);
    *residual = residual.max((nu.norm() - 1.0).abs()).max(nu.dot(&d1).abs() / t_norm);
    nu.dot(&d2)
}

fn fit_planar(flat: &[DVector<f64>], arcs: &[f64], half: usize) -> (DVector<f64>, DVector<f64>) {
    let k = flat.len();
    let mut s = vec![0.0; k];
    for j in (0..half).rev() {
        s[j] = s[j + 1] - arcs[j];
    }
    for j in half..k - 1 {
        s[j + 1] = s[j] + arcs[j];
    }
    let scale = s[k - 1].max(-s[0]);
    let deg = k - 1;
    let mut v = DMatrix::zeros(k, deg + 1);
    for i in 0..k {
        let z = s[i] / scale;
        let mut pw = 1.0;
        for j in 0..=deg {
            v[(i, j)] = pw;
            pw *= z;
        }
    }
    let lu = v.lu();
    let mut d1 = DVector::zeros(2);
    let mut d2 = DVector::zeros(2);
    for c in 0..2 {
        let rhs = DVector::from_fn(k, |i, _| flat[i][c]);
        let coef = lu.solve(&rhs).expect("Vandermonde solve");
        d1[c] = coef[1] / scale;
        d2[c] = 2.0 * coef[2] / (scale * scale);
    }
    (d1, d2)
}

impl SectionCurve {
    /// Deliberately corrupt the stored surface curvatures; negative-control
    /// hook for the bound checks.
    pub fn scale_surface_curvatures(&mut self, factor: f64) {
        for s in &mut self.samples {
            for k in &mut s.surface_kappas {
                *k *= factor;
            }
        }
    }

    /// Two-sided bound of the section curvature by the extreme surface
    /// curvatures over the normal alignment `g(N, N')`.
    pub fn check_section_bound(&self) -> BoundReport {
        self.bound_generic("I", |s| s.g_n_nprime)
    }

    /// Same bound with the `sqrt(1 - g(omega, N)^2)` denominator.
    pub fn check_section_bound_sine(&self) -> BoundReport {
        self.bound_generic("Iprime", |s| (1.0 - s.g_omega_n * s.g_omega_n).sqrt())
    }

    fn bound_generic(
        &self,
        id: &'static str,
        denom: impl Fn(&SectionSample) -> f64,
    ) -> BoundReport {
        let mut worst = f64::INFINITY;
        let mut violated = false;
        for s in &self.samples {
            let d = denom(s);
            let lo = s.surface_kappas.first().copied().unwrap_or(0.0) / d;
            let hi = s.surface_kappas.last().copied().unwrap_or(0.0) / d;
            let tol = 1e-6 * (1.0 + s.kappa_prime.abs());
            let slack = (s.kappa_prime - lo).min(hi - s.kappa_prime);
            worst = worst.min(slack);
            if slack < -tol {
                violated = true;
            }
        }
        BoundReport { bound_id: id, worst_slack: worst, n_samples: self.samples.len(), violated }
    }

    /// Bound on the curvature of the section seen as a hypersurface of the
    /// host surface.
    pub fn check_in_surface_bound(&self) -> BoundReport {
        let mut worst = f64::INFINITY;
        let mut violated = false;
        for s in &self.samples {
            let g = s.g_omega_n;
            let kmax = s
                .surface_kappas
                .iter()
                .fold(0.0f64, |acc, k| acc.max(k.abs()));
            let rhs = g.abs() / (1.0 - g * g).sqrt() * kmax;
            let tol = 1e-6 * (1.0 + s.kappa_check.abs());
            let slack = rhs - s.kappa_check.abs();
            worst = worst.min(slack);
            if slack < -tol {
                violated = true;
            }
        }
        BoundReport { bound_id: "III", worst_slack: worst, n_samples: self.samples.len(), violated }
    }

    /// Bound on the Euclidean curvature of the boundary projection; vertical
    /// planes short-circuit to the trivial zero-curvature case.
    pub fn check_projection_bound(&self) -> BoundReport {
        let radius = match &self.plane {
            Hyperplane::Vertical { .. } => {
                return BoundReport {
                    bound_id: "II",
                    worst_slack: 0.0,
                    n_samples: self.samples.len(),
                    violated: false,
                };
            }
            Hyperplane::HalfSphere { radius, .. } => *radius,
        };
        let mut worst = f64::INFINITY;
        let mut violated = false;
        for s in &self.samples {
            let a = s.nu_prime_vertical;
            let b = s.height / radius;
            let rhs = (a * a + b * b).powf(-1.5) / radius * (s.kappa_prime.abs() + 3.0);
            let tol = 1e-6 * (1.0 + s.kappa_proj.abs());
            let slack = rhs - s.kappa_proj.abs();
            worst = worst.min(slack);
            if slack < -tol {
                violated = true;
            }
        }
        BoundReport { bound_id: "II", worst_slack: worst, n_samples: self.samples.len(), violated }
    }

    /// The simplified projection bound under a uniform lower bound `c` on the
    /// vertical component of the section normal.
    pub fn check_projection_bound_simplified(&self, c_min: f64) -> Option<BoundReport> {
        let radius = match &self.plane {
            Hyperplane::Vertical { .. } => return None,
            Hyperplane::HalfSphere { radius, .. } => *radius,
        };
        if c_min <= 0.0 {
            return None;
        }
        let mut worst = f64::INFINITY;
        let mut violated = false;
        for s in &self.samples {
            if s.nu_prime_vertical < c_min {
                return None;
            }
            let rhs = (s.kappa_prime.abs() + 3.0) / (c_min.powi(3) * radius);
            let tol = 1e-6 * (1.0 + s.kappa_proj.abs());
            let slack = rhs - s.kappa_proj.abs();
            worst = worst.min(slack);
            if slack < -tol {
                violated = true;
            }
        }
        Some(BoundReport {
            bound_id: "II-simplified",
            worst_slack: worst,
            n_samples: self.samples.len(),
            violated,
        })
    }
}

/// One row of the batch property run.
#[derive(Clone, Debug)]
pub struct BatchRow {
    pub config_id: usize,
    pub bound_id: String,
    pub worst_slack: f64,
    pub n_samples: usize,
    pub violated: bool,
}

#[derive(Clone, Debug, Default)]
pub struct BatchSummary {
    pub configs_run: usize,
    pub skipped_tangential: usize,
    pub violations: usize,
}

/// Random transversal configurations of the built-in families against the
/// four bound checks.
pub fn run_section_batch(
    configs: usize,
    nodes: usize,
    seed: u64,
    margin_threshold: f64,
    negative_control: bool,
) -> Result<(Vec<BatchRow>, BatchSummary)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut summary = BatchSummary::default();
    let mut config_id = 0;
    while summary.configs_run < configs {
        config_id += 1;
        if config_id > configs * 20 {
            return Err(Error::Resolution("too many tangential configurations skipped".into()));
        }
        let center = Point::from_slice_halfspace(&[
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(0.8..1.5),
        ])?;
        let radius = rng.random_range(0.7..1.3);
        let amplitude = rng.random_range(0.0..0.015);
        let profile = match rng.random_range(0..3) {
            0 => Profile::Quadrupole,
            1 => Profile::Octupole,
            _ => Profile::Mixed,
        };
        let surface = StarSurface::new(SurfaceSpec { center, radius, amplitude, profile })?;
        // A plane orthogonal to a random geodesic through the bulk.
        let c = surface.center();
        let raw = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0f64));
        if raw.norm() < 1e-3 {
            continue;
        }
        let dir = TangentVector::new(c.clone(), raw).normalized()?;
        let family = PlaneFamily::new(&c, &dir)?;
        let level = rng.random_range(-0.45..0.45) * radius;
        let plane = family.hyperplane_at(level);
        let curve = match section(&surface, &plane, nodes, margin_threshold) {
            Ok(c) => c,
            Err(Error::Transversality(_)) => {
                summary.skipped_tangential += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut curve = curve;
        if negative_control {
            curve.scale_surface_curvatures(0.2);
        }
        summary.configs_run += 1;
        for rep in [
            curve.check_section_bound(),
            curve.check_section_bound_sine(),
            curve.check_in_surface_bound(),
            curve.check_projection_bound(),
        ] {
            if rep.violated {
                summary.violations += 1;
            }
            rows.push(BatchRow {
                config_id,
                bound_id: rep.bound_id.to_string(),
                worst_slack: rep.worst_slack,
                n_samples: rep.n_samples,
                violated: rep.violated,
            });
        }
    }
    Ok((rows, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_sphere() -> StarSurface {
        StarSurface::sphere(Point::base(3), 1.0).unwrap()
    }

    #[test]
    fn equator_section_is_equality_case() {
        let s = unit_sphere();
        // Plane through the center orthogonal to a horizontal direction.
        let dir = TangentVector::new(
            Point::base(3),
            DVector::from_column_slice(&[1.0, 0.0, 0.0]),
        )
        .normalized()
        .unwrap();
        let family = PlaneFamily::new(&Point::base(3), &dir).unwrap();
        let plane = family.hyperplane_at(0.0);
        let curve = section(&s, &plane, 24, 0.05).unwrap();
        let coth1 = 1.0 / 1.0_f64.tanh();
        for smp in &curve.samples {
            assert_abs_diff_eq!(smp.kappa_prime, coth1, epsilon = 8e-9);
            assert!(smp.g_omega_n.abs() < 1e-9);
            assert_abs_diff_eq!(smp.g_n_nprime, 1.0, epsilon = 1e-12);
            assert!(smp.kappa_check.abs() < 1e-8);
        }
        let rep = curve.check_section_bound();
        assert!(!rep.violated);
        assert!(rep.worst_slack.abs() < 1e-8, "slack {}", rep.worst_slack);
        let rep3 = curve.check_in_surface_bound();
        assert!(!rep3.violated);
        assert!(curve.frame_residual < 1e-10);
    }

    #[test]
    fn missing_plane_is_transversality_error() {
        let s = unit_sphere();
        let plane = Hyperplane::half_sphere(
            DVector::from_column_slice(&[40.0, 0.0, 0.0]),
            1.0,
        )
        .unwrap();
        assert!(matches!(section(&s, &plane, 16, 0.05), Err(Error::Transversality(_))));
    }

    #[test]
    fn tilted_section_bounds_hold_with_positive_slack() {
        let s = unit_sphere();
        let dir = TangentVector::new(
            Point::base(3),
            DVector::from_column_slice(&[0.8, 0.0, 0.6]),
        )
        .normalized()
        .unwrap();
        let family = PlaneFamily::new(&Point::base(3), &dir).unwrap();
        let plane = family.hyperplane_at(0.35);
        let curve = section(&s, &plane, 24, 0.05).unwrap();
        for rep in [
            curve.check_section_bound(),
            curve.check_section_bound_sine(),
            curve.check_in_surface_bound(),
            curve.check_projection_bound(),
        ] {
            assert!(!rep.violated, "bound {} violated", rep.bound_id);
        }
    }

    #[test]
    fn vertical_plane_projection_short_circuits() {
        let s = unit_sphere();
        let plane = Hyperplane::vertical(DVector::from_column_slice(&[1.0, 0.0, 0.0]), 0.0).unwrap();
        let curve = section(&s, &plane, 16, 0.05).unwrap();
        let rep = curve.check_projection_bound();
        assert!(!rep.violated);
        for smp in &curve.samples {
            assert_eq!(smp.kappa_proj, 0.0);
        }
    }

    #[test]
    fn negative_control_flags_violations() {
        let s = unit_sphere();
        let dir = TangentVector::new(
            Point::base(3),
            DVector::from_column_slice(&[0.0, 1.0, 0.0]),
        )
        .normalized()
        .unwrap();
        let family = PlaneFamily::new(&Point::base(3), &dir).unwrap();
        let plane = family.hyperplane_at(0.2);
        let mut curve = section(&s, &plane, 16, 0.05).unwrap();
        curve.scale_surface_curvatures(0.2);
        assert!(curve.check_section_bound().violated);
    }

    #[test]
    fn section_normal_field_residuals() {
        let s = unit_sphere();
        let dir = TangentVector::new(Point::base(3), DVector::from_column_slice(&[0.6, 0.2, 0.5]))
            .normalized()
            .unwrap();
        let family = PlaneFamily::new(&Point::base(3), &dir).unwrap();
        let plane = family.hyperplane_at(0.17);
        let curve = section(&s, &plane, 20, 0.05).unwrap();
        for smp in &curve.samples {
            assert!((smp.n_prime.norm() - 1.0).abs() < 1e-12);
            assert!(smp.n_prime.inner(&smp.tangent).abs() < 1e-10);
            assert!(smp.n_prime.inner(&smp.omega).abs() < 1e-12);
            assert!((smp.tangent.norm() - 1.0).abs() < 1e-12);
        }
        assert!(curve.projection_residual < 1e-10);
    }

    #[test]
    fn small_batch_has_no_violations() {
        let (rows, summary) = run_section_batch(12, 20, 9, 0.05, false).unwrap();
        assert_eq!(summary.violations, 0);
        assert_eq!(summary.configs_run, 12);
        assert_eq!(rows.len(), 12 * 4);
    }
}
