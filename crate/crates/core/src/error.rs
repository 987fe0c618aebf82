use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an input parameter failed. `what` names the violated condition.
    #[error("invalid parameter: {what}")]
    Domain { what: String },

    #[error("Gamma has a pole at x = {x}")]
    Pole { x: f64 },

    #[error("quadrature did not converge within {budget} evaluations (error estimate {estimate:.3e})")]
    NonConvergence { budget: usize, estimate: f64 },

    #[error("scaled bumps overlap: width {width} is not below the minimal atom spacing {spacing}")]
    Overlap { width: f64, spacing: f64 },

    #[error("data leaves the open band (-k, k): {what}")]
    Support { what: String },

    #[error("truncation tail {tail:.3e} exceeds the allowed fraction of the value {value:.3e}")]
    TailTooLarge { tail: f64, value: f64 },

    #[error("missing derivative for the scattering density")]
    MissingDerivative,

    #[error("degenerate input: {what}")]
    Degenerate { what: String },

    #[error("atom budget exceeded: {count} > {budget}")]
    Budget { count: usize, budget: usize },

    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: impl Into<String>) -> Error {
    Error::Domain { what: what.into() }
}
