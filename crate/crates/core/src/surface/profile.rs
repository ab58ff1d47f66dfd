//! Perturbation profiles: smooth functions on the unit direction sphere with
//! analytic ambient gradients and Hessians. All built-ins are restrictions of
//! low-degree polynomials and have no first-harmonic component, so they do not
//! translate the surface at first order.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `u_1^2 - u_2^2`.
    Quadrupole,
    /// `u_1 u_2 u_3` for dimension >= 3, `u_1^3 - 3 u_1 u_2^2` in the plane.
    Octupole,
    /// Quadrupole plus half an octupole; the default experiment profile.
    Mixed,
}

impl Profile {
    pub fn value(&self, u: &DVector<f64>) -> f64 {
        match self {
            Profile::Quadrupole => u[0] * u[0] - u[1] * u[1],
            Profile::Octupole => {
                if u.len() >= 3 {
                    u[0] * u[1] * u[2]
                } else {
                    u[0] * u[0] * u[0] - 3.0 * u[0] * u[1] * u[1]
                }
            }
            Profile::Mixed => {
                Profile::Quadrupole.value(u) + 0.5 * Profile::Octupole.value(u)
            }
        }
    }

    pub fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        let n = u.len();
        match self {
            Profile::Quadrupole => {
                let mut g = DVector::zeros(n);
                g[0] = 2.0 * u[0];
                g[1] = -2.0 * u[1];
                g
            }
            Profile::Octupole => {
                let mut g = DVector::zeros(n);
                if n >= 3 {
                    g[0] = u[1] * u[2];
                    g[1] = u[0] * u[2];
                    g[2] = u[0] * u[1];
                } else {
                    g[0] = 3.0 * (u[0] * u[0] - u[1] * u[1]);
                    g[1] = -6.0 * u[0] * u[1];
                }
                g
            }
            Profile::Mixed => {
                Profile::Quadrupole.gradient(u) + 0.5 * Profile::Octupole.gradient(u)
            }
        }
    }

    pub fn hessian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = u.len();
        match self {
            Profile::Quadrupole => {
                let mut h = DMatrix::zeros(n, n);
                h[(0, 0)] = 2.0;
                h[(1, 1)] = -2.0;
                h
            }
            Profile::Octupole => {
                let mut h = DMatrix::zeros(n, n);
                if n >= 3 {
                    h[(0, 1)] = u[2];
                    h[(1, 0)] = u[2];
                    h[(0, 2)] = u[1];
                    h[(2, 0)] = u[1];
                    h[(1, 2)] = u[0];
                    h[(2, 1)] = u[0];
                } else {
                    h[(0, 0)] = 6.0 * u[0];
                    h[(0, 1)] = -6.0 * u[1];
                    h[(1, 0)] = -6.0 * u[1];
                    h[(1, 1)] = -6.0 * u[0];
                }
                h
            }
            Profile::Mixed => {
                Profile::Quadrupole.hessian(u) + 0.5 * Profile::Octupole.hessian(u)
            }
        }
    }

    /// Crude upper bound on `|f| + |grad f| + |Hess f|` over the sphere, used
    /// by the embedding-threshold check.
    pub fn c2_bound(&self) -> f64 {
        match self {
            Profile::Quadrupole => 7.0,
            Profile::Octupole => 10.0,
            Profile::Mixed => 12.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Quadrupole => "quadrupole",
            Profile::Octupole => "octupole",
            Profile::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quadrupole" => Ok(Profile::Quadrupole),
            "octupole" => Ok(Profile::Octupole),
            "mixed" => Ok(Profile::Mixed),
            other => Err(format!("unknown profile '{other}'")),
        }
    }
}
