//! Half-space model primitives: points, tangent vectors, isometries,
//! totally geodesic hyperplanes, geodesics, exponential/log maps and
//! parallel transport.

pub mod geodesic;
pub mod hyperplane;
pub mod isometry;
pub mod point;
pub mod transport;

pub use geodesic::{exp_map, geodesic, log_map, Arc, GeodesicSegment};
pub use hyperplane::Hyperplane;
pub use isometry::{normalize_to_standard, reflection_aligning, Generator, Isometry};
pub use point::{dist, to_ball, to_ball_tangent, to_halfspace, to_halfspace_tangent, Model, Point, TangentVector};
pub use transport::{parallel_transport, parallel_transport_ode};
