//! Cap extraction: adjacency on the parameter sphere and flood fill of the
//! connected components seeded at the tangency point.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geom::point::{Point, TangentVector};
use crate::planes::engine::{CriticalResult, Engine};
use crate::surface::family::SurfaceSample;

/// Convenience: adjacency over the parameter directions of a sample set.
pub fn sample_graph(samples: &[SurfaceSample]) -> ParamGraph {
    let dirs: Vec<DVector<f64>> = samples.iter().map(|s| s.u.clone()).collect();
    ParamGraph::build(&dirs)
}

/// Neighbor lists over sample parameter directions.
pub struct ParamGraph {
    pub adj: Vec<Vec<u32>>,
    /// Angular adjacency radius.
    pub radius: f64,
    dirs: Vec<DVector<f64>>,
}

impl ParamGraph {
    pub fn build(directions: &[DVector<f64>]) -> ParamGraph {
        let n = directions[0].len();
        let count = directions.len();
        let dirs: Vec<DVector<f64>> = directions.to_vec();
        match n {
            2 => {
                // Directions are ordered by angle; the graph is a ring.
                let mut adj = vec![Vec::new(); count];
                for i in 0..count {
                    adj[i].push(((i + 1) % count) as u32);
                    adj[i].push(((i + count - 1) % count) as u32);
                }
                let radius = 2.0 * std::f64::consts::PI / count as f64 * 1.6;
                ParamGraph { adj, radius, dirs }
            }
            3 => {
                let radius = 2.2 * (4.0 * std::f64::consts::PI / count as f64).sqrt();
                let cos_r = radius.cos();
                let bands = ((std::f64::consts::PI / radius).ceil() as usize).max(1);
                let sectors = (2 * bands).max(1);
                let cell = |u: &DVector<f64>| -> (usize, usize) {
                    let band = (((u[2].clamp(-1.0, 1.0).acos()) / std::f64::consts::PI
                        * bands as f64) as usize)
                        .min(bands - 1);
                    let phi = u[1].atan2(u[0]) + std::f64::consts::PI;
                    let sector = ((phi / (2.0 * std::f64::consts::PI) * sectors as f64) as usize)
                        .min(sectors - 1);
                    (band, sector)
                };
                let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); bands * sectors];
                for (i, u) in dirs.iter().enumerate() {
                    let (b, s) = cell(u);
                    buckets[b * sectors + s].push(i as u32);
                }
                let mut adj = vec![Vec::new(); count];
                for (i, u) in dirs.iter().enumerate() {
                    let (b, s) = cell(u);
                    for db in -1i64..=1 {
                        let bb = b as i64 + db;
                        if bb < 0 || bb >= bands as i64 {
                            continue;
                        }
                        // Near the poles sectors shrink; scan the full ring
                        // there, otherwise the three neighboring sectors.
                        let wide = bb == 0 || bb == bands as i64 - 1;
                        let range: Vec<i64> = if wide {
                            (0..sectors as i64).collect()
                        } else {
                            vec![s as i64 - 1, s as i64, s as i64 + 1]
                        };
                        for ds in range {
                            let ss = (ds + sectors as i64) % sectors as i64;
                            for &j in &buckets[bb as usize * sectors + ss as usize] {
                                if j as usize != i && u.dot(&dirs[j as usize]) > cos_r {
                                    adj[i].push(j);
                                }
                            }
                        }
                    }
                }
                ParamGraph { adj, radius, dirs }
            }
            _ => {
                // Brute force for the rarely used higher dimensions.
                let per = (count as f64).powf(-1.0 / (n as f64 - 1.0));
                let radius = 2.5 * per * std::f64::consts::PI;
                let cos_r = radius.cos();
                let mut adj = vec![Vec::new(); count];
                for i in 0..count {
                    for j in (i + 1)..count {
                        if dirs[i].dot(&dirs[j]) > cos_r {
                            adj[i].push(j as u32);
                            adj[j].push(i as u32);
                        }
                    }
                }
                ParamGraph { adj, radius, dirs }
            }
        }
    }

    /// Index of the sample direction closest to `u`.
    pub fn nearest(&self, u: &DVector<f64>) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, d) in self.dirs.iter().enumerate() {
            let c = d.dot(u);
            if c > best_dot {
                best_dot = c;
                best = i;
            }
        }
        best
    }

    fn flood(&self, member: &[bool], seed: usize) -> Vec<usize> {
        let mut seen = vec![false; member.len()];
        let mut stack = vec![seed];
        let mut out = Vec::new();
        seen[seed] = true;
        while let Some(i) = stack.pop() {
            out.push(i);
            for &j in &self.adj[i] {
                let j = j as usize;
                if member[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        out
    }
}

/// A point of the reflected maximal cap with its pushed-forward inward
/// normal and the index of its source sample.
#[derive(Clone, Debug)]
pub struct CapSample {
    pub src: usize,
    pub point: Point,
    pub normal: TangentVector,
}

/// The two caps at the critical configuration: `sigma` is the connected
/// component of the reflected cap through the tangency point, `sigma_hat`
/// the component of the untouched side containing it.
pub struct Caps {
    pub sigma: Vec<CapSample>,
    pub sigma_hat: Vec<usize>,
    pub sigma_hat_member: Vec<bool>,
}

pub fn extract_caps(
    engine: &Engine<'_>,
    crit: &CriticalResult,
    graph: &ParamGraph,
) -> Result<Caps> {
    let m = crit.m;
    let samples = engine.samples;
    let sides = engine.sides();
    let count = samples.len();

    let high: Vec<bool> = sides.iter().map(|&s| s >= m).collect();
    let low: Vec<bool> = sides.iter().map(|&s| s <= m).collect();
    if !high.iter().any(|&b| b) || !low.iter().any(|&b| b) {
        return Err(Error::Resolution("critical level leaves an empty side".into()));
    }

    // Seed the reflected-cap component at the tangency source parameter.
    let seed_high = graph.nearest(&crit.tangency_u);
    if !high[seed_high] {
        return Err(Error::Resolution(
            "tangency parameter has no cap sample nearby; increase the sample count".into(),
        ));
    }
    let comp_high = graph.flood(&high, seed_high);

    // Seed the untouched-side component at the tangency point itself.
    let (u_t, _) = engine.surface.polar_of(&crit.tangency)?;
    let seed_low_raw = graph.nearest(&u_t);
    let seed_low = if low[seed_low_raw] {
        seed_low_raw
    } else {
        // The nearest sample may sit just across the rim; look one ring out.
        let mut found = None;
        for &j in &graph.adj[seed_low_raw] {
            if low[j as usize] {
                found = Some(j as usize);
                break;
            }
        }
        found.ok_or_else(|| {
            Error::Resolution("tangency point isolated from the untouched side".into())
        })?
    };
    let comp_low = graph.flood(&low, seed_low);

    let reflection = engine.family.reflection_at(m);
    let mut sigma = Vec::with_capacity(comp_high.len());
    for i in comp_high {
        let point = reflection.apply_point(&samples[i].point)?;
        let normal = reflection.apply_tangent(&samples[i].normal)?;
        sigma.push(CapSample { src: i, point, normal });
    }
    let mut sigma_hat_member = vec![false; count];
    for &i in &comp_low {
        sigma_hat_member[i] = true;
    }
    Ok(Caps { sigma, sigma_hat: comp_low, sigma_hat_member })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planes::engine::EngineOptions;
    use crate::planes::family::PlaneFamily;
    use crate::surface::family::StarSurface;

    #[test]
    fn sphere_caps_are_hemispheres() {
        let s = StarSurface::sphere(Point::base(3), 1.0).unwrap();
        let samples = s.sample_set(3000).unwrap();
        let dir = TangentVector::new(
            Point::base(3),
            DVector::from_column_slice(&[1.0, 0.0, 0.0]),
        )
        .normalized()
        .unwrap();
        let f = PlaneFamily::new(&Point::base(3), &dir).unwrap();
        let engine = Engine::new(&s, &samples, f, EngineOptions::default()).unwrap();
        let crit = engine.critical_value().unwrap();
        let graph = sample_graph(&samples);
        let caps = extract_caps(&engine, &crit, &graph).unwrap();
        // Both components should capture roughly half the samples.
        let frac_sigma = caps.sigma.len() as f64 / samples.len() as f64;
        let frac_hat = caps.sigma_hat.len() as f64 / samples.len() as f64;
        assert!((frac_sigma - 0.5).abs() < 0.05, "sigma fraction {frac_sigma}");
        assert!((frac_hat - 0.5).abs() < 0.05, "sigma-hat fraction {frac_hat}");
        // Reflected cap points lie on the sphere (the reflection is a
        // symmetry of it).
        for cs in caps.sigma.iter().step_by(97) {
            // On the sphere the critical reflection is a symmetry up to the
            // bisection tolerance on the level.
            assert!(s.radial_residual(&cs.point).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn component_count_stable_under_doubling() {
        use crate::surface::{Profile, SurfaceSpec};
        let spec = SurfaceSpec {
            center: Point::base(3),
            radius: 1.0,
            amplitude: 0.01,
            profile: Profile::Mixed,
        };
        let s = StarSurface::new(spec).unwrap();
        let dir = TangentVector::new(
            Point::base(3),
            DVector::from_column_slice(&[0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2]),
        )
        .normalized()
        .unwrap();
        let mut fractions = Vec::new();
        for count in [2000usize, 4000] {
            let samples = s.sample_set(count).unwrap();
            let f = PlaneFamily::new(&Point::base(3), &dir).unwrap();
            let engine = Engine::new(&s, &samples, f, EngineOptions::default()).unwrap();
            let crit = engine.critical_value().unwrap();
            let graph = sample_graph(&samples);
            let caps = extract_caps(&engine, &crit, &graph).unwrap();
            fractions.push(caps.sigma.len() as f64 / count as f64);
        }
        assert!(
            (fractions[0] - fractions[1]).abs() < 0.03,
            "component fractions {fractions:?}"
        );
    }
}

