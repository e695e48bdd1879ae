//! Error type shared by every stage of the construction.

use thiserror::Error;

/// Failure classes, used by the CLI and the C interface to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// A theorem-backed inequality failed beyond its slack.
    Violation,
    /// Malformed input, configuration, or data outside an operation's domain.
    Input,
    /// A solver did not converge or a flow broke down.
    Nonconvergence,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Violation => 1,
            ErrorKind::Input => 2,
            ErrorKind::Nonconvergence => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid misconfiguration: {0}")]
    Grid(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("singular discretization: zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonNonConvergence { iterations: usize, residual: f64 },

    #[error("ODE step size underflow at r = {r}")]
    StepUnderflow { r: f64 },

    #[error("flow breakdown at r = {r}: {reason}")]
    FlowBreakdown { r: f64, reason: String },

    #[error("Jang breakdown: {0}")]
    JangBreakdown(String),

    #[error("apparent horizon present at s = {radius}")]
    HorizonPresent { radius: f64 },

    #[error("mean curvature vector not spacelike (H = {h}, P = {p})")]
    NotSpacelike { h: f64, p: f64 },

    #[error("Gauss curvature not positive at theta = {theta} (K = {k})")]
    NonPositiveCurvature { theta: f64, k: f64 },

    #[error("not realizable as a surface of revolution with this axis (theta = {theta})")]
    NotEmbeddable { theta: f64 },

    #[error("conformal factor not positive (min u = {min_u})")]
    ConformalNotPositive { min_u: f64 },

    #[error("local energy condition violated (min margin {margin:.3e} at s = {radius})")]
    EnergyCondition { margin: f64, radius: f64 },

    #[error("{check} violated: margin {margin:.3e}")]
    Violation { check: String, margin: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Violation { .. } => ErrorKind::Violation,
            Error::NewtonNonConvergence { .. }
            | Error::StepUnderflow { .. }
            | Error::FlowBreakdown { .. }
            | Error::JangBreakdown(_)
            | Error::SingularSystem { .. } => ErrorKind::Nonconvergence,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
