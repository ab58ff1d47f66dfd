//! The full stability pipeline: per-direction moving-planes runs, the
//! approximate center and annulus radii, symmetry defects, the radial graph
//! and the amplitude sweep with its log-log slope.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::point::{dist, Point, TangentVector};
use crate::planes::caps::{extract_caps, sample_graph};
use crate::planes::defect::{symmetry_defect, DefectOptions};
use crate::planes::engine::{Engine, EngineOptions, TangencyKind};
use crate::planes::family::PlaneFamily;
use crate::stability::center::{approximate_center, center_of_mass, radii};
use crate::stability::graph::sphere_graph;
use crate::surface::family::{StarSurface, SurfaceSample, SurfaceSpec};
use crate::surface::{diameter, osc_h, touching_radius};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub samples: usize,
    pub directions: usize,
    pub engine: EngineOptions,
    pub probes: usize,
    pub mc_samples: usize,
    pub graph_directions: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            samples: 10_000,
            directions: 12,
            engine: EngineOptions::default(),
            probes: 256,
            mc_samples: 0,
            graph_directions: 600,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionRecord {
    pub index: usize,
    pub direction: Vec<f64>,
    pub m: f64,
    pub boundary_tangency: bool,
    pub plane_dist: f64,
    pub sup_defect: f64,
    pub neighborhood_defect: f64,
    pub margin_min: f64,
    pub certificate: bool,
    pub monotonicity_violations: usize,
    pub flagged: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub eps: f64,
    pub osc_h: f64,
    pub center: Vec<f64>,
    pub r_in: f64,
    pub r_out: f64,
    pub gap: f64,
    pub c_emp: f64,
    pub max_plane_dist: f64,
    pub sup_defect: f64,
    pub neighborhood_defect: f64,
    pub psi_inf: f64,
    pub psi_lipschitz: f64,
    pub center_residuals: Vec<f64>,
    pub cm_distance: f64,
    pub cm_standard_error: f64,
    pub area: f64,
    pub diameter: f64,
    pub touching_rho: f64,
    pub directions: Vec<DirectionRecord>,
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 round
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Direction set: the coordinate frame at the surface center first (used for
/// the approximate center), then seeded random unit tangents.
pub fn direction_set(center: &Point, k: usize, seed: u64) -> Vec<TangentVector> {
    let n = center.dim();
    let h = center.height();
    let mut out = Vec::with_capacity(k);
    for i in 0..n.min(k) {
        let mut c = DVector::zeros(n);
        c[i] = h;
        out.push(TangentVector::new(center.clone(), c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xD1EC7));
    while out.len() < k {
        let raw = DVector::from_fn(n, |_, _| {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            (-2.0 * u1.max(1e-300).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        });
        if raw.norm() < 1e-6 {
            continue;
        }
        out.push(
            TangentVector::new(center.clone(), raw * h)
                .normalized()
                .expect("nonzero direction"),
        );
    }
    out
}

struct DirectionOutcome {
    record: DirectionRecord,
    family: PlaneFamily,
}

/// Run the moving-planes analysis of one surface.
pub fn analyze_surface(surface: &StarSurface, cfg: &PipelineConfig) -> Result<StabilityReport> {
    let n = surface.dim();
    if cfg.directions < n {
        return Err(Error::Config(format!(
            "need at least {n} directions for the approximate center, got {}",
            cfg.directions
        )));
    }
    let samples = surface.sample_set(cfg.samples)?;
    let osc = osc_h(&samples);
    let area: f64 = samples.iter().map(|s| s.weight).sum();
    let diam = diameter(&samples, 400)?;
    let rho = touching_radius(&samples, 300)?;
    let center = surface.center();
    let graph = sample_graph(&samples);
    let dirs = direction_set(&center, cfg.directions, cfg.seed);

    let outcomes: Vec<Result<DirectionOutcome>> = dirs
        .par_iter()
        .enumerate()
        .map(|(idx, dir)| {
            let family = PlaneFamily::new(&center, dir)?;
            let engine = Engine::new(surface, &samples, family, cfg.engine.clone())?;
            let crit = engine.critical_value()?;
            let caps = extract_caps(&engine, &crit, &graph)?;
            let defects = symmetry_defect(
                &engine,
                &crit,
                &caps,
                &graph,
                diam,
                &DefectOptions {
                    probes: cfg.probes,
                    seed: mix_seed(cfg.seed, idx as u64 + 1),
                    ..DefectOptions::default()
                },
            )?;
            let margin_min = crit
                .profile
                .iter()
                .map(|(_, m)| *m)
                .fold(f64::INFINITY, f64::min);
            let record = DirectionRecord {
                index: idx,
                direction: dir.components.iter().cloned().collect(),
                m: crit.m,
                boundary_tangency: crit.kind == TangencyKind::Boundary,
                plane_dist: f64::NAN, // filled once the center is known
                sup_defect: defects.sup_defect,
                neighborhood_defect: defects.neighborhood_defect,
                margin_min,
                certificate: crit.certificate,
                monotonicity_violations: crit.monotonicity_violations,
                flagged: defects.flagged,
            };
            Ok(DirectionOutcome { record, family: engine.family })
        })
        .collect();

    let mut records = Vec::with_capacity(cfg.directions);
    let mut families = Vec::with_capacity(cfg.directions);
    for o in outcomes {
        let o = o?;
        records.push(o.record);
        families.push(o.family);
    }

    // Approximate center from the frame directions, then distances of every
    // critical hyperplane to it (evaluated in the well-conditioned
    // conjugated frame of each family).
    let frame_planes: Vec<_> = (0..n).map(|i| families[i].hyperplane_at(records[i].m)).collect();
    let (o_center, center_residuals) = approximate_center(&frame_planes, &center)?;
    let mut max_plane_dist = 0.0f64;
    for (rec, fam) in records.iter_mut().zip(families.iter()) {
        let d = fam.signed_level_distance(&o_center, rec.m)?.abs();
        rec.plane_dist = d;
        max_plane_dist = max_plane_dist.max(d);
    }

    let (r_in, r_out) = radii(&samples, &o_center)?;
    let gap = r_out - r_in;
    let c_emp = if osc > 0.0 { gap / osc } else { f64::NAN };

    let graph_rep = sphere_graph(surface, &o_center, r_in, cfg.graph_directions, r_out + 1.0)?;

    let (cm_distance, cm_se) = if cfg.mc_samples > 0 {
        let cm = center_of_mass(surface, cfg.mc_samples, mix_seed(cfg.seed, 0xC0FFEE), &center)?;
        (dist(&cm.point, &o_center)?, cm.standard_error)
    } else {
        (f64::NAN, f64::NAN)
    };

    let sup_defect = records.iter().map(|r| r.sup_defect).fold(0.0f64, f64::max);
    let neighborhood_defect = records
        .iter()
        .map(|r| r.neighborhood_defect)
        .fold(0.0f64, f64::max);

    Ok(StabilityReport {
        eps: surface.spec().amplitude,
        osc_h: osc,
        center: o_center.coords().iter().cloned().collect(),
        r_in,
        r_out,
        gap,
        c_emp,
        max_plane_dist,
        sup_defect,
        neighborhood_defect,
        psi_inf: graph_rep.psi_inf,
        psi_lipschitz: graph_rep.psi_lipschitz,
        center_residuals,
        cm_distance,
        cm_standard_error: cm_se,
        area,
        diameter: diam,
        touching_rho: rho,
        directions: records,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<StabilityReport>,
    /// Log-log slope of gap against oscillation over the valid rows.
    pub slope: f64,
    /// Slope fitted over rows up to and including each index.
    pub slope_so_far: Vec<f64>,
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Sweep of the perturbation amplitude over a grid; each row runs the full
/// analysis with a row-specific seed derived from the master seed.
pub fn run_sweep(
    template: &SurfaceSpec,
    eps_grid: &[f64],
    cfg: &PipelineConfig,
) -> Result<SweepReport> {
    if eps_grid.is_empty() {
        return Err(Error::Config("empty amplitude grid".into()));
    }
    let rows: Vec<Result<StabilityReport>> = eps_grid
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let spec = SurfaceSpec { amplitude: eps, ..template.clone() };
            let surface = StarSurface::new(spec)?;
            let row_cfg = PipelineConfig { seed: mix_seed(cfg.seed, 1000 + i as u64), ..cfg.clone() };
            analyze_surface(&surface, &row_cfg)
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    for (i, r) in rows.into_iter().enumerate() {
        out.push(r.map_err(|e| Error::Engine(format!("amplitude {}: {e}", eps_grid[i])))?);
    }
    let mut slope_so_far = Vec::with_capacity(out.len());
    let mut pts = Vec::new();
    for row in &out {
        if row.osc_h > 0.0 && row.gap > 0.0 {
            pts.push((row.osc_h, row.gap));
        }
        slope_so_far.push(fit_slope(&pts));
    }
    let slope = fit_slope(&pts);
    Ok(SweepReport { rows: out, slope, slope_so_far })
}
