use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation
    /// (degenerate lattice, parameter range, wrong branch, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation requested too close to a pole of a meromorphic function.
    #[error("argument within {tol:e} of a pole of {function}")]
    Pole { function: &'static str, tol: f64 },

    /// A computed object failed one of its defining residual checks.
    #[error("{what}: residual {residual:e} exceeds tolerance {tol:e}")]
    Residual {
        what: String,
        residual: f64,
        tol: f64,
    },

    /// An iterative solver failed to converge.
    #[error("no convergence in {what}: {detail}")]
    NoConvergence { what: String, detail: String },

    /// A geometric degeneracy (vanishing determinant, collinear data) made
    /// a construction impossible.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn residual(what: impl Into<String>, residual: f64, tol: f64) -> Self {
        Error::Residual {
            what: what.into(),
            residual,
            tol,
        }
    }
}
