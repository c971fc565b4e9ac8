use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("cell index ({i}, {j}) outside 1..={nx} x 1..={nz}")]
    Index { i: usize, j: usize, nx: usize, nz: usize },

    #[error("inadmissible state: {0}")]
    State(String),

    #[error("inadmissible state in cell ({i}, {j}): {reason}")]
    CellState { i: usize, j: usize, reason: String },

    #[error("boundary closure: {0}")]
    Boundary(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("tableau {name}: {reason}")]
    Tableau { name: String, reason: String },

    #[error("Krylov solver did not converge after {iterations} iterations (residual {residual:.3e}, target {target:.3e})")]
    SolverFailure { iterations: usize, residual: f64, target: f64 },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("subdomain {index}: {source}")]
    Subdomain {
        index: u8,
        #[source]
        source: Box<Error>,
    },

    #[error("dense output parameter theta = {0} outside [0, 1]")]
    Range(f64),

    #[error("shape mismatch: {0}")]
    Mismatch(String),

    #[error("observed order undefined: {0}")]
    UndefinedOrder(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True for solver-side failures (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::SolverFailure { .. } | Error::CellState { .. } | Error::State(_) => true,
            Error::Stage { source, .. } | Error::Subdomain { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
