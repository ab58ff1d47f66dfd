//! Stability measurements: approximate center of symmetry, annulus radii and
//! gap, Monte Carlo center of mass, radial graph, and the amplitude sweep.

pub mod center;
pub mod graph;
pub mod pipeline;

pub use center::{
    approximate_center, center_of_mass, karcher_mean, plane_distance, radii, CenterOfMassResult,
};
pub use graph::{sphere_graph, RadialGraphReport};
pub use pipeline::{
    analyze_surface, direction_set, run_sweep, DirectionRecord, PipelineConfig, StabilityReport,
    SweepReport,
};
