use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Domain or geometry construction failed (empty mask, bad ranges, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An input failed a structural validation check.
    #[error("validation error: {0}")]
    Validation(String),

    /// Vector or operator dimensions do not conform.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    /// The material/weight combination has no positive lower bound, so the
    /// solution operator has no finite norm bound. Reports the offending DOF.
    #[error(
        "model invalid: {kind} DOF {dof} has non-positive coefficient {value} ({detail}); \
         a conducting region needs sigma > 0 wherever eps vanishes"
    )]
    ModelInvalid {
        kind: &'static str,
        dof: usize,
        value: f64,
        detail: String,
    },

    /// The inner linear solver failed to reach the requested residual.
    #[error("linear solver failed at step {step}: residual {residual:.3e} > tolerance {tolerance:.3e}")]
    SolverFailure {
        step: usize,
        residual: f64,
        tolerance: f64,
    },

    /// A quantity that must be nonzero (e.g. a trajectory norm) vanished.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(expected: usize, got: usize, context: &str) -> Self {
        Error::DimensionMismatch {
            expected,
            got,
            context: context.to_string(),
        }
    }
}
