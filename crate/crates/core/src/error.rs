use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("root list is empty")]
    EmptyRoots,

    #[error("root {root} at index {index} lies outside the {class} class")]
    RootOutOfClass {
        index: usize,
        root: Complex64,
        class: &'static str,
    },

    #[error("quadrature did not converge: error estimate {error:e} above target {target:e}")]
    QuadratureNoConvergence { error: f64, target: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("{id} does not accept polynomials of class {class}")]
    ClassMismatch { id: String, class: &'static str },

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("objective failed in every start: {0}")]
    ObjectiveFailure(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

impl Error {
    /// Numerical failures (as opposed to usage or precondition errors).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNoConvergence { .. } | Error::ObjectiveFailure(_)
        )
    }
}
