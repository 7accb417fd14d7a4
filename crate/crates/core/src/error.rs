use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A distribution failed validation (masses, ordering, degeneracy).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Market primitives failed validation.
    #[error("invalid primitives: {0}")]
    InvalidPrimitives(String),

    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The exact regime solver found no (or several) validating regimes.
    /// Carries the bracket that was searched; reaching this on valid inputs
    /// is a bug signal, not a user error.
    #[error("solver error: {message} (searched thresholds in [{lo}, {hi}])")]
    Solver { message: String, lo: f64, hi: f64 },

    /// A policy request exceeded a feasibility cap.
    #[error("policy error: requested {requested} exceeds {cap_name} = {cap}")]
    Policy {
        requested: f64,
        cap: f64,
        cap_name: String,
    },

    /// An operation was called outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An internal invariant failed on computed outputs (bug signal).
    #[error("internal invariant breach: {0}")]
    Invariant(String),

    /// I/O error while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
