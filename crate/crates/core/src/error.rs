use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("{function}({value}) overflows the floating point range")]
    Overflow { function: &'static str, value: f64 },

    #[error("cot({0}) is at a pole")]
    Pole(f64),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("q0 is not monotone on [{from}, {to}]")]
    NonMonotone { from: f64, to: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid potential specification: {0}")]
    InvalidSpec(String),

    #[error("truncation margin violated: q0(L) = {q_at_l} but lambda + 25 = {required}")]
    TruncationMargin { q_at_l: f64, required: f64 },

    #[error("grid step {h} too coarse: {reason}")]
    GridTooCoarse { h: f64, reason: String },

    #[error("eigenvalue index {n} missed: {reason}")]
    MissedIndex { n: usize, reason: String },

    #[error("eigenfunction data at x = 0 is degenerate for lambda = {0}")]
    DegenerateEigenfunction(f64),

    #[error("Picard iteration did not contract after {iterations} iterations (lambda = {lambda})")]
    NoContraction { iterations: usize, lambda: f64 },

    #[error("regression is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:.3e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("ODE integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
