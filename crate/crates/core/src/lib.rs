//! alexlab: a numerical laboratory for quantitative rigidity of
//! near-constant-mean-curvature hypersurfaces in hyperbolic space.
//!
//! The crate provides a half-space-model geometry kernel (`geom`), analytic
//! star-shaped test surfaces with curvature evaluators (`surface`), numeric
//! checks for curvatures of plane sections and their boundary projections
//! (`sections`), a quantitative moving-planes engine (`planes`), the stability
//! pipeline measuring the annulus gap against the mean-curvature oscillation
//! (`stability`), and the experiment configuration/reporting layer used by the
//! `alexlab` binary.

pub mod error;
pub mod geom;
pub mod planes;
pub mod sections;
pub mod stability;
pub mod surface;

pub use error::{Error, Result};
