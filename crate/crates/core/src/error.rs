use thiserror::Error;

/// Errors raised by the kernel, problem, certificate and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),

    #[error("shift m = {m} outside the positivity window (0, {m_max})")]
    MOutOfRange { m: f64, m_max: f64 },

    #[error("radii must satisfy 0 < R1 < R2, got R1 = {r1}, R2 = {r2}")]
    BadRadii { r1: f64, r2: f64 },

    #[error("kappa must be positive, got {0}")]
    KappaNonpositive(f64),

    #[error("negative state x = {x} at t = {t}")]
    NegativeState { t: f64, x: f64 },

    #[error("nonpositive pipe level u = {u} at t = {t}")]
    NonpositiveLevel { t: f64, u: f64 },

    #[error("Green's function property violated: {0}")]
    PropertyViolation(String),

    #[error("invalid periodic function: {0}")]
    InvalidFunction(String),

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    #[error("Newton iteration did not converge after {iterations} steps (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("iterate left the positive cone at step {iteration} and damping could not recover")]
    LeftPositiveCone { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
