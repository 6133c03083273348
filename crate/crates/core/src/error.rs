use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// `(alpha, delta)` does not define a valid copula.
    #[error("infeasible parameters: |delta| = {delta_abs} exceeds delta*({alpha}) = {bound}")]
    Infeasible {
        alpha: f64,
        delta_abs: f64,
        bound: f64,
    },

    /// Successive quadrature refinements disagreed by more than the tolerance.
    #[error(
        "quadrature tolerance {abs_tol:e} not reached (last change {change:e} at {nodes} nodes)"
    )]
    ToleranceNotReached {
        abs_tol: f64,
        change: f64,
        nodes: usize,
    },

    /// A series hit its term cap or lost too much precision to cancellation.
    #[error("series did not converge: {0}")]
    Truncation(String),

    /// Sample cannot be ranked (constant column or too few points).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// No optimizer restart met the stopping rule.
    #[error("optimizer did not converge after {restarts} restart(s); best simplex diameter {diameter:e}")]
    NonConvergence { restarts: usize, diameter: f64 },

    /// Observations violate the model's support or size requirements.
    #[error("invalid observations: {0}")]
    InvalidData(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed CSV input or bad column selection.
    #[error("CSV error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        func,
        msg: msg.into(),
    }
}
