use thiserror::Error;

/// Errors surfaced by the geometry kernel and the experiment engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("points are in different models ({0} vs {1})")]
    ModelMismatch(&'static str, &'static str),

    #[error("degenerate geodesic segment: endpoints coincide")]
    DegenerateSegment,

    #[error("zero tangent vector where a direction is required")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hyperplane does not intersect the surface transversally: {0}")]
    Transversality(String),

    #[error("normal ray misses the surface or hits it more than once: {0}")]
    NotAGraph(String),

    #[error("critical hyperplanes do not pairwise intersect: {0}")]
    NonIntersecting(String),

    #[error("sample resolution too low: {0}")]
    Resolution(String),

    #[error("moving-planes engine failure: {0}")]
    Engine(String),

    #[error("sampler failed to produce points: {0}")]
    SamplerStarvation(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
