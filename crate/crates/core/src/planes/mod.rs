//! The quantitative moving-planes engine: hyperplane families along a
//! geodesic, reflected-cap containment, the critical level with a bracket
//! certificate, cap components and approximate-symmetry defects.

pub mod caps;
pub mod defect;
pub mod engine;
pub mod family;

pub use caps::{extract_caps, sample_graph, CapSample, Caps, ParamGraph};
pub use defect::{symmetry_defect, DefectOptions, DefectReport};
pub use engine::{Containment, CriticalResult, Engine, EngineOptions, TangencyKind};
pub use family::PlaneFamily;
