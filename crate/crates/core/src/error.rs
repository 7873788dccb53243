use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("degenerate steady state: null space has dimension {dim}")]
    DegenerateSteadyState { dim: usize },

    #[error("degenerate dressed basis (a Rabi frequency vanishes)")]
    DegenerateDressedBasis,

    #[error("no steady-state convergence by tau = {t}: residual {residual:e} > tol {tol:e}")]
    NoConvergence { t: f64, residual: f64, tol: f64 },

    #[error("state invariant violated at tau = {t}: {detail}")]
    InvariantViolation { t: f64, detail: String },

    #[error("adaptive step size underflow at tau = {t}")]
    StepUnderflow { t: f64 },

    #[error("corrupted state: eigenvalue {min_eig:e} below -1e-9")]
    CorruptedState { min_eig: f64 },

    #[error("degenerate analytic coherence at omega = 0")]
    DegenerateCoherence,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
