//! The quantitative moving-planes sweep: containment of the reflected cap,
//! bisection to the critical level, and the bracket certificate.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geom::point::Point;
use crate::planes::family::PlaneFamily;
use crate::surface::family::{tangent_frame, StarSurface, SurfaceSample};

#[derive(Clone, Debug)]
pub struct EngineOptions {
    /// Bisection tolerance on the level coordinate.
    pub tol_s: f64,
    /// Containment depth tolerance (a reflected sample may sit this far
    /// outside and still count as on-surface).
    pub tol_contain: f64,
    /// Levels in the initial downward scan.
    pub scan_steps: usize,
    /// Multiple of `tol_s` within which a tangency counts as a boundary
    /// (rim) tangency.
    pub boundary_tol_factor: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            tol_s: 1e-9,
            tol_contain: 1e-11,
            scan_steps: 48,
            boundary_tol_factor: 100.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TangencyKind {
    Interior,
    Boundary,
}

/// Result of one containment query.
#[derive(Clone, Debug)]
pub struct Containment {
    pub contained: bool,
    /// Minimal signed depth of the reflected cap inside the domain; `None`
    /// for an empty cap (vacuously contained).
    pub margin: Option<f64>,
    pub cap_size: usize,
}

#[derive(Clone, Debug)]
pub struct CriticalResult {
    /// Critical level of the family.
    pub m: f64,
    /// Tangency point (on the reflected cap, in the original frame).
    pub tangency: Point,
    /// Parameter direction of the tangency source sample.
    pub tangency_u: DVector<f64>,
    pub kind: TangencyKind,
    /// `(s, margin)` pairs collected during the scan and bisection, sorted
    /// by level.
    pub profile: Vec<(f64, f64)>,
    /// Certified bracket: contained at `m + tol_s`, not contained at
    /// `m - tol_s`.
    pub certificate: bool,
    /// Margin-profile monotonicity violations (beyond noise), reported, not
    /// hidden.
    pub monotonicity_violations: usize,
}

pub struct Engine<'a> {
    pub surface: &'a StarSurface,
    pub samples: &'a [SurfaceSample],
    pub family: PlaneFamily,
    conj_pts: Vec<DVector<f64>>,
    sides: Vec<f64>,
    opts: EngineOptions,
}

impl<'a> Engine<'a> {
    pub fn new(
        surface: &'a StarSurface,
        samples: &'a [SurfaceSample],
        family: PlaneFamily,
        opts: EngineOptions,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("engine needs a nonempty sample set".into()));
        }
        let mut conj_pts = Vec::with_capacity(samples.len());
        let mut sides = Vec::with_capacity(samples.len());
        for s in samples {
            let z = family.conjugate(&s.point)?;
            sides.push(family.side_of_coords(&z));
            conj_pts.push(z);
        }
        Ok(Engine { surface, samples, family, conj_pts, sides, opts })
    }

    pub fn options(&self) -> &EngineOptions {
        &self.opts
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    /// Signed depth of the level-`s` reflection of sample `i` inside the
    /// domain (positive inside).
    fn reflected_depth(&self, i: usize, s: f64) -> Result<f64> {
        let z = self.family.reflect_conjugated(&self.conj_pts[i], s);
        let p = self.family.unconjugate(&z)?;
        Ok(-self.surface.radial_residual(&p)?)
    }

    /// Containment of the reflected cap at level `s`, with its margin.
    pub fn cap_contained(&self, s: f64) -> Result<Containment> {
        let mut margin = f64::INFINITY;
        let mut cap_size = 0;
        for i in 0..self.samples.len() {
            if self.sides[i] >= s {
                cap_size += 1;
                let d = self.reflected_depth(i, s)?;
                if d < margin {
                    margin = d;
                }
            }
        }
        if cap_size == 0 {
            return Ok(Containment { contained: true, margin: None, cap_size });
        }
        Ok(Containment { contained: margin >= -self.opts.tol_contain, margin: Some(margin), cap_size })
    }

    /// Scan downward from above the surface, bracket the loss of containment
    /// and bisect to the critical level.
    pub fn critical_value(&self) -> Result<CriticalResult> {
        let s_max = self.sides.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s_min = self.sides.iter().cloned().fold(f64::INFINITY, f64::min);
        let span = (s_max - s_min).max(1e-6);
        let step = span / self.opts.scan_steps as f64;

        let mut profile: Vec<(f64, f64)> = Vec::new();
        let mut hi = s_max; // contained here (cap empty or tiny)
        let mut lo = None;
        let limit = 2 * self.opts.scan_steps;
        for k in 1..=limit {
            let s = s_max - k as f64 * step;
            let c = self.cap_contained(s)?;
            if let Some(m) = c.margin {
                profile.push((s, m));
            }
            if c.contained {
                hi = s;
            } else {
                lo = Some(s);
                break;
            }
        }
        let mut lo = lo.ok_or_else(|| {
            let worst = profile
                .iter()
                .map(|(_, m)| *m)
                .fold(f64::INFINITY, f64::min);
            Error::Engine(format!(
                "containment never fails while scanning down to {:.6} (worst margin {:.3e}); \
                 margin profile has {} entries",
                s_max - limit as f64 * step,
                worst,
                profile.len()
            ))
        })?;

        while hi - lo > self.opts.tol_s {
            let mid = 0.5 * (hi + lo);
            let c = self.cap_contained(mid)?;
            if let Some(m) = c.margin {
                profile.push((mid, m));
            }
            if c.contained {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let m = 0.5 * (hi + lo);

        // Bracket certificate at m +/- tol_s.
        let plus = self.cap_contained(m + self.opts.tol_s)?;
        let minus = self.cap_contained(m - self.opts.tol_s)?;
        let certificate = plus.contained && !minus.contained;

        // The margin value itself jitters at rim scale (reflected near-rim
        // samples sit at depth about zero for every level), so monotonicity
        // is validated on the containment predicate: sorted by level it must
        // flip from false to true exactly once.
        profile.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut monotonicity_violations = 0;
        for w in profile.windows(2) {
            let lo_ok = w[0].1 >= -self.opts.tol_contain;
            let hi_ok = w[1].1 >= -self.opts.tol_contain;
            if lo_ok && !hi_ok {
                monotonicity_violations += 1;
            }
        }

        // Tangency: the sample whose reflection overshoots first just below
        // the critical level; rim samples reflect onto themselves and stay
        // neutral, so the overshoot singles out the true touching point.
        let probe = m - 5.0 * self.opts.tol_s;
        let mut best = None;
        let mut best_depth = f64::INFINITY;
        for i in 0..self.samples.len() {
            if self.sides[i] >= probe {
                let d = self.reflected_depth(i, probe)?;
                if d < best_depth {
                    best_depth = d;
                    best = Some(i);
                }
            }
        }
        let seed = best.ok_or_else(|| Error::Engine("empty cap at the critical level".into()))?;
        let u_star = self.refine_tangency(self.samples[seed].u.clone(), m)?;
        let z = self.family.conjugate(&self.surface.position(&u_star)?)?;
        let tangency = self.family.unconjugate(&self.family.reflect_conjugated(&z, m))?;
        let side_t = self.family.side_coordinate(&tangency)?;
        let kind = if (side_t - m).abs() <= self.opts.boundary_tol_factor * self.opts.tol_s {
            TangencyKind::Boundary
        } else {
            TangencyKind::Interior
        };

        Ok(CriticalResult {
            m,
            tangency,
            tangency_u: u_star,
            kind,
            profile,
            certificate,
            monotonicity_violations,
        })
    }

    /// Local pattern search minimizing the reflected depth over the cap
    /// parameters, refining the discrete tangency seed.
    fn refine_tangency(&self, seed: DVector<f64>, m: f64) -> Result<DVector<f64>> {
        let probe = m - 5.0 * self.opts.tol_s;
        let depth_at = |u: &DVector<f64>| -> Result<f64> {
            let p = self.surface.position(u)?;
            let z = self.family.conjugate(&p)?;
            if self.family.side_of_coords(&z) < probe {
                return Ok(f64::INFINITY); // outside the cap
            }
            let r = self.family.reflect_conjugated(&z, probe);
            Ok(-self.surface.radial_residual(&self.family.unconjugate(&r)?)?)
        };
        let mut u = seed;
        let mut best = depth_at(&u)?;
        let mut step = (4.0 * std::f64::consts::PI / self.samples.len() as f64).sqrt();
        for _ in 0..48 {
            let frame = tangent_frame(&u);
            let mut improved = false;
            for t in &frame {
                for sign in [-1.0, 1.0] {
                    let cand_raw = &u + t * (sign * step);
                    let cand = &cand_raw / cand_raw.norm();
                    let d = depth_at(&cand)?;
                    if d < best {
                        best = d;
                        u = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.6;
                if step < 1e-9 {
                    break;
                }
            }
        }
        Ok(u)
    }
}
