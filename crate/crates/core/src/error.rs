use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A point or parameter lies outside the domain of the weight model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point is not covered by any lattice disk.
    #[error("point {re}+{im}i is not covered by the lattice")]
    Coverage { re: f64, im: f64 },

    /// A symbol returned a non-finite value.
    #[error("symbol `{name}` is not finite at {re}+{im}i")]
    SymbolEval { name: String, re: f64, im: f64 },

    /// An iterative method ran out of iterations.
    #[error("no convergence: {0}")]
    NotConverged(String),

    /// A numerical invariant (PSD-ness, overflow guard, ...) was violated.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl LabError {
    pub(crate) fn symbol_eval(name: &str, at: Complex64) -> Self {
        LabError::SymbolEval {
            name: name.to_string(),
            re: at.re,
            im: at.im,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
