use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("{op}: matrix must be square, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The drift matrix has spectral radius >= 1.
    #[error("no stationary distribution (spectral radius {spectral_radius} >= 1)")]
    NoStationaryDistribution { spectral_radius: f64 },

    #[error("series diverged after {iterations} terms")]
    Divergent { iterations: usize },

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    /// `c^T S_N c == 0`: noise cannot move `c^T x` within the horizon.
    #[error("unreachable constraint at horizon {horizon}")]
    Unreachable { horizon: usize },

    #[error("no exits observed: all {n_paths} paths censored at {max_steps} steps")]
    NoExits { n_paths: usize, max_steps: u64 },
}
