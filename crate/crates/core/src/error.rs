use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("min-norm subproblem did not converge after {iterations} iterations (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("search direction is not a descent direction (psi = {psi_d:e})")]
    NonDescent { psi_d: f64 },
    #[error("line search rejected {trials} trial steps")]
    LineSearchFail { trials: usize },
    #[error("trace index mismatch: expected k = {expected}, got {found}")]
    IndexMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Config(#[from] crate::config::ConfigErrors),
    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
