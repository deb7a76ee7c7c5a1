use thiserror::Error;

/// Failures reported by the simulator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Physical parameters violate their domain (see [`crate::model::validate`]).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// Non-parameter input rejected (grid, probe, truncation, fit request).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Singular solve, step-size underflow, non-convergence.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// The frequency grid does not contain the feature being measured.
    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),
    /// A closed-form result was requested outside its domain.
    #[error("analytic form inapplicable: {0}")]
    Inapplicable(String),
    /// Configured memory cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<V> = std::result::Result<V, Error>;
