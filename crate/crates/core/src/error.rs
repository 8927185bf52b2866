use thiserror::Error;

/// Errors raised by the numeric kernels and the constructions built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid exponent {0}: must be positive")]
    InvalidExponent(f64),

    #[error("invalid piecewise linear function: {0}")]
    InvalidFunction(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("{solver} did not converge within {iterations} iterations")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
    },

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("interval ({a}, {b}) is not contained in the domain [{lo}, {hi}]")]
    DomainViolation { a: f64, b: f64, lo: f64, hi: f64 },

    #[error("functions are defined on different domains")]
    DomainMismatch,

    #[error("function is not a quasiminimizer: a subinterval has zero comparison energy")]
    NotQuasiminimizer,

    #[error("pasted function is discontinuous at x = {at} (u1 = {inner}, u2 = {outer})")]
    DiscontinuousPaste { at: f64, inner: f64, outer: f64 },
}

impl QmError {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QmError::NoSignChange { .. }
                | QmError::NonConvergence { .. }
                | QmError::SingularMatrix
                | QmError::Infeasible
                | QmError::Unbounded
                | QmError::NotQuasiminimizer
        )
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        QmError::InvalidParam(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, QmError>;
