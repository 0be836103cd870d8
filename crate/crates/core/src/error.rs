use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("face index {index} out of range (domain has {faces} faces)")]
    InvalidFaceIndex { index: usize, faces: usize },

    #[error("face normal {index} has norm {norm}, expected 1")]
    NonUnitNormal { index: usize, norm: f64 },

    #[error("faces {first} and {second} have identical normals")]
    DuplicateNormal { first: usize, second: usize },

    #[error("polyhedral domain has empty interior (best margin {margin:e})")]
    EmptyInterior { margin: f64 },

    #[error("face subset is empty")]
    EmptySubset,

    #[error("face hyperplanes {indices:?} have empty intersection")]
    EmptyIntersection { indices: Vec<usize> },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("potential argument {u} outside the domain of {potential}")]
    PotentialDomain { potential: String, u: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scale function integrand overflows on [{lo}, {hi}]")]
    QuadratureOverflow { lo: f64, hi: f64 },

    #[error("face {face}: estimated zero exponent {estimate:.4} is within the near-critical band around 1/2; an analytic hint is required")]
    Indeterminate { face: String, estimate: f64 },

    #[error("initial point is not strictly interior (min gap {min_gap:e})")]
    InitialPointNotInterior { min_gap: f64 },

    #[error("unknown potential id {0}")]
    UnknownPotential(usize),

    #[error("non-finite state at step {step}")]
    NonFiniteState { step: u64 },

    #[error("trajectory {index} (seed {seed}) failed: {source}")]
    Trajectory {
        index: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
