use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero function: v^T M v = 0")]
    ZeroFunction,
    #[error("trace vanishes identically on the boundary")]
    DegenerateTrace,
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("eigensolver did not converge after {iterations} iterations (residual history tail {history:?})")]
    EigenNotConverged { iterations: usize, history: Vec<f64> },
    #[error("functional increased at iteration {iteration}: {previous:e} -> {current:e}")]
    NonDescent { iteration: usize, previous: f64, current: f64 },
    #[error("mass identity violated: integral {got:e} vs declared {expected:e}")]
    MassIdentity { expected: f64, got: f64 },
    #[error("no root in bracket [{lo:e}, {hi:e}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("no critical mass: beta = {beta} does not exceed beta* = {beta_star}")]
    NoThreshold { beta: f64, beta_star: f64 },
    #[error("argument {x} outside supported range [0, {max}]")]
    OutOfRange { x: f64, max: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
