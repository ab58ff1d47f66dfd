//! Graph patches over the ideal boundary and the mean curvature of a graph.
//!
//! For a chart `v : B_r subset pi_infinity -> (0, inf)` the hyperbolic mean
//! curvature of its graph with respect to the upward normal is
//!
//! ```text
//! H = v/(n-1) * div( grad v / sqrt(1 + |grad v|^2) ) + 1 / sqrt(1 + |grad v|^2)
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

type ValueFn = Box<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type HessFn = Box<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// A positive chart over a boundary ball with analytic derivative evaluators.
pub struct GraphPatch {
    pub radius: f64,
    value: ValueFn,
    gradient: GradFn,
    hessian: HessFn,
}

impl GraphPatch {
    pub fn from_parts(radius: f64, value: ValueFn, gradient: GradFn, hessian: HessFn) -> Self {
        GraphPatch { radius, value, gradient, hessian }
    }

    /// The flat chart `v = height`; a horosphere for `height = 1`.
    pub fn horosphere(chart_dim: usize, height: f64) -> Self {
        let d = chart_dim;
        GraphPatch {
            radius: f64::INFINITY,
            value: Box::new(move |_| height),
            gradient: Box::new(move |_| DVector::zeros(d)),
            hessian: Box::new(move |_| DMatrix::zeros(d, d)),
        }
    }

    /// Upper half of the Euclidean sphere `|x|^2 + v^2 = R^2`: a totally
    /// geodesic hyperplane.
    pub fn half_sphere(chart_dim: usize, big_r: f64) -> Self {
        let d = chart_dim;
        GraphPatch {
            radius: big_r,
            value: Box::new(move |x| (big_r * big_r - x.norm_squared()).sqrt()),
            gradient: Box::new(move |x| {
                let v = (big_r * big_r - x.norm_squared()).sqrt();
                -x / v
            }),
            hessian: Box::new(move |x| {
                let v2 = big_r * big_r - x.norm_squared();
                let v = v2.sqrt();
                -(DMatrix::identity(d, d) / v + x * x.transpose() / (v2 * v))
            }),
        }
    }

    /// Lower cap of the Euclidean sphere of radius `sinh r` centered at
    /// `cosh r * e_n`: a geodesic sphere chart with `v(0) = exp(-r)`.
    pub fn sphere_lower_cap(chart_dim: usize, r: f64) -> Self {
        let d = chart_dim;
        let sr = r.sinh();
        let cr = r.cosh();
        GraphPatch {
            radius: sr,
            value: Box::new(move |x| cr - (sr * sr - x.norm_squared()).sqrt()),
            gradient: Box::new(move |x| {
                let q = (sr * sr - x.norm_squared()).sqrt();
                x / q
            }),
            hessian: Box::new(move |x| {
                let q2 = sr * sr - x.norm_squared();
                let q = q2.sqrt();
                DMatrix::identity(d, d) / q + x * x.transpose() / (q2 * q)
            }),
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.hessian)(x)
    }

    /// Upward Euclidean unit normal `(-grad v, 1)/sqrt(1+|grad v|^2)` of the
    /// graph at chart point `x`, returned as ambient components.
    pub fn upward_normal(&self, x: &DVector<f64>) -> DVector<f64> {
        let g = self.gradient(x);
        let w = (1.0 + g.norm_squared()).sqrt();
        let mut nu = DVector::zeros(g.len() + 1);
        for i in 0..g.len() {
            nu[i] = -g[i] / w;
        }
        nu[g.len()] = 1.0 / w;
        nu
    }
}

/// Hyperbolic mean curvature of the graph at chart point `x`, with respect to
/// the upward normal.
pub fn mean_curvature_graph(patch: &GraphPatch, x: &DVector<f64>) -> Result<f64> {
    if x.norm() >= patch.radius {
        return Err(Error::InvalidArgument(format!(
            "chart point |x| = {} outside the chart ball of radius {}",
            x.norm(),
            patch.radius
        )));
    }
    let m = x.len() as f64; // chart dimension = n - 1
    let v = patch.value(x);
    let g = patch.gradient(x);
    let h = patch.hessian(x);
    let w2 = 1.0 + g.norm_squared();
    let w = w2.sqrt();
    let lap = h.trace();
    let ghg = g.dot(&(&h * &g));
    let div_term = lap / w - ghg / (w2 * w);
    Ok(v / m * div_term + 1.0 / w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn horosphere_has_unit_mean_curvature() {
        let patch = GraphPatch::horosphere(2, 1.0);
        for x in [[0.0, 0.0], [0.4, -0.7], [3.0, 2.0]] {
            let h = mean_curvature_graph(&patch, &DVector::from_column_slice(&x)).unwrap();
            assert_eq!(h, 1.0);
        }
    }

    #[test]
    fn half_sphere_is_minimal() {
        let patch = GraphPatch::half_sphere(2, 1.7);
        for x in [[0.0, 0.0], [0.3, 0.2], [-0.8, 0.5], [1.0, -0.9]] {
            let h = mean_curvature_graph(&patch, &DVector::from_column_slice(&x)).unwrap();
            assert!(h.abs() < 1e-8, "H = {h} at {x:?}");
        }
    }

    #[test]
    fn sphere_cap_curvature_at_center_and_generic_points() {
        for r in [0.5, 1.0, 2.0] {
            let patch = GraphPatch::sphere_lower_cap(2, r);
            let coth = 1.0 / r.tanh();
            let h0 = mean_curvature_graph(&patch, &DVector::zeros(2)).unwrap();
            assert_abs_diff_eq!(h0, coth, epsilon = 1e-9);
            let x = DVector::from_column_slice(&[0.3 * r.sinh(), -0.2 * r.sinh()]);
            let h = mean_curvature_graph(&patch, &x).unwrap();
            assert_abs_diff_eq!(h, coth, epsilon = 1e-6);
        }
    }

    #[test]
    fn chart_boundary_rejected() {
        let patch = GraphPatch::half_sphere(2, 1.0);
        assert!(mean_curvature_graph(&patch, &DVector::from_column_slice(&[1.0, 0.3])).is_err());
    }
}
