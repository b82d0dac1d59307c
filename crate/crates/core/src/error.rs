use thiserror::Error;

use crate::geometry::GeometryKind;

pub type Result<T, E = RcmError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RcmError {
    #[error("identifier length d must be in 1..={max}, got {d}")]
    InvalidDimension { d: u32, max: u32 },

    #[error("symphony requires k_n >= 1 and k_s >= 1 (got k_n={k_n}, k_s={k_s})")]
    InvalidSymphonyDegree { k_n: u32, k_s: u32 },

    #[error("failure probability must lie in {range}, got {q}")]
    InvalidFailureProbability { q: f64, range: &'static str },

    #[error("phase index {m} outside 1..={d}")]
    PhaseOutOfRange { m: u32, d: u32 },

    #[error("hop count must be at least 1")]
    ZeroHops,

    #[error("degenerate denominator: (1-q)*2^d = {expected_survivors} <= 1")]
    DegenerateDenominator { expected_survivors: f64 },

    #[error("simulator supports d <= {max}, got {d}")]
    SimulationTooLarge { d: u32, max: u32 },

    #[error("{kind} overlay with {nodes} nodes cannot hold {k_n} near neighbors")]
    TooManyNearNeighbors { kind: GeometryKind, nodes: u64, k_n: u32 },

    #[error("malformed neighbor table: {0}")]
    MalformedOverlay(String),

    #[error("overlay invariant violated at node {node}: {reason}")]
    OverlayInvariant { node: u32, reason: String },

    #[error("invalid route request: {0}")]
    InvalidRoute(String),

    #[error("{what} must be at least 1")]
    ZeroCount { what: &'static str },

    #[error("gave up after {attempts} failure draws with fewer than two survivors")]
    TooFewSurvivors { attempts: u32 },

    #[error("q = 0 is not a failure regime: scalability needs 0 < q < 1")]
    ZeroFailureProbability,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for RcmError {
    fn from(err: std::io::Error) -> Self {
        RcmError::Io(err.to_string())
    }
}
