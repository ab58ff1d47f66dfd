//! Radial graph of the surface over a geodesic sphere about the approximate
//! center: the signed normal-ray displacement field and its size.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geom::geodesic::exp_map;
use crate::geom::point::{Point, TangentVector};
use crate::planes::caps::ParamGraph;
use crate::surface::family::{unit_directions, StarSurface};

#[derive(Clone, Debug)]
pub struct RadialGraphReport {
    /// Sup norm of the displacement field.
    pub psi_inf: f64,
    /// Divided-difference Lipschitz estimate over neighboring directions.
    pub psi_lipschitz: f64,
    pub directions: usize,
    pub r: f64,
}

/// Build the displacement field `psi(x) = (first surface hit along the ray
/// from the center through x) - r` over the geodesic sphere of radius `r`
/// about `center`, verifying that every ray meets the surface exactly once.
pub fn sphere_graph(
    surface: &StarSurface,
    center: &Point,
    r: f64,
    directions: usize,
    t_max: f64,
) -> Result<RadialGraphReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let n = surface.dim();
    let dirs = unit_directions(n, directions);
    let h = center.height();
    let grid = 96;
    let mut values = Vec::with_capacity(dirs.len());
    for u in &dirs {
        let dir = TangentVector::new(center.clone(), u * h);
        let f = |t: f64| -> Result<f64> {
            let p = exp_map(center, &TangentVector::new(center.clone(), &dir.components * t))?;
            surface.radial_residual(&p)
        };
        let mut crossings = Vec::new();
        let mut prev = f(1e-9)?;
        if prev >= 0.0 {
            return Err(Error::NotAGraph("center lies outside the enclosed domain".into()));
        }
        for k in 1..=grid {
            let t = t_max * k as f64 / grid as f64;
            let cur = f(t)?;
            if prev < 0.0 && cur >= 0.0 {
                crossings.push((t_max * (k - 1) as f64 / grid as f64, t));
            }
            if prev >= 0.0 && cur < 0.0 {
                return Err(Error::NotAGraph(
                    "ray re-enters the domain: surface is not radial about this center".into(),
                ));
            }
            prev = cur;
        }
        if crossings.len() != 1 {
            return Err(Error::NotAGraph(format!(
                "ray crosses the surface {} times",
                crossings.len()
            )));
        }
        let (mut lo, mut hi) = crossings[0];
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        values.push(0.5 * (lo + hi) - r);
    }

    let psi_inf = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let graph = ParamGraph::build(&dirs);
    let mut lip = 0.0f64;
    for (i, u) in dirs.iter().enumerate() {
        for &j in &graph.adj[i] {
            let j = j as usize;
            let angle = u.dot(&dirs[j]).clamp(-1.0, 1.0).acos();
            if angle > 1e-12 {
                let d_sphere = r.sinh() * angle;
                lip = lip.max((values[i] - values[j]).abs() / d_sphere);
            }
        }
    }
    Ok(RadialGraphReport { psi_inf, psi_lipschitz: lip, directions: dirs.len(), r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{Profile, SurfaceSpec};

    #[test]
    fn exact_sphere_has_zero_field() {
        let s = StarSurface::sphere(Point::base(3), 1.0).unwrap();
        let rep = sphere_graph(&s, &Point::base(3), 1.0, 400, 2.0).unwrap();
        assert!(rep.psi_inf < 1e-12, "psi_inf {}", rep.psi_inf);
        assert!(rep.psi_lipschitz < 1e-9, "lip {}", rep.psi_lipschitz);
    }

    #[test]
    fn perturbed_sphere_field_scales_with_amplitude() {
        let mut last = f64::INFINITY;
        for eps in [0.02, 0.01, 0.005] {
            let spec = SurfaceSpec {
                center: Point::base(3),
                radius: 1.0,
                amplitude: eps,
                profile: Profile::Mixed,
            };
            let s = StarSurface::new(spec).unwrap();
            let rep = sphere_graph(&s, &Point::base(3), 1.0, 300, 2.5).unwrap();
            assert!(rep.psi_inf < last);
            assert!(rep.psi_inf > 0.2 * eps && rep.psi_inf < 3.0 * eps);
            last = rep.psi_inf;
        }
    }

    #[test]
    fn off_center_ray_misses_graph_condition() {
        // A center outside the domain is rejected.
        let s = StarSurface::sphere(Point::base(3), 0.5).unwrap();
        let far = Point::from_slice_halfspace(&[0.0, 0.0, 8.0]).unwrap();
        assert!(matches!(
            sphere_graph(&s, &far, 0.5, 50, 2.0),
            Err(Error::NotAGraph(_))
        ));
    }
}
