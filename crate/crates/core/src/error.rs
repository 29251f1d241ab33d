use thiserror::Error;

/// Errors raised by the simulator and its front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("grid mismatch: {left} vs {right} angular nodes")]
    GridMismatch { left: usize, right: usize },

    #[error("curve reached the obstacle: min rho {min_rho} <= {limit}")]
    GapViolation { min_rho: f64, limit: f64 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("radial trajectory hit the singularity at t = {t} (R = {radius})")]
    Integration { t: f64, radius: f64 },

    #[error("numerical failure at t = {t}: {detail}")]
    NumericalFailure { t: f64, detail: String },

    #[error("initial curve violates H > u_nu^2 (min margin {min_condition:e}); use force to run anyway")]
    ConditionViolated { min_condition: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Config(_)
            | Error::InvalidCurve(_)
            | Error::Precondition(_)
            | Error::ConditionViolated { .. }
            | Error::Domain(_) => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
