use std::path::PathBuf;

use crate::allocator::Schedule;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("failed to parse configuration: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("activation vector has no active antenna")]
    EmptyActivation,

    #[error("negative input power {0} W")]
    NegativePower(f64),

    #[error(
        "refusing to enumerate 2^{n} - 1 antenna subsets (limit N = {max}); \
         cost grows exponentially with the number of antennas"
    )]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("grid oracle supports at most {max} duration variables, problem has {dims}")]
    OracleTooLarge { dims: usize, max: usize },

    #[error("invalid allocation problem: {0}")]
    InvalidProblem(String),

    #[error(
        "solver did not converge within {iterations} iterations \
         (best min-rate {:.6e}, residual {residual:.3e})", best.min_rate
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Box<Schedule>,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
