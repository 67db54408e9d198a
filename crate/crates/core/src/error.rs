use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of a physical formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario, beam or profile violated one of its invariants.
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    /// No scattering branch is admissible for the given scenario and beam.
    #[error("no admissible scattering branch (characteristic length too large for the geometry)")]
    EmptyBranches,

    /// Weights left nothing (or only the undeflected beam) to sample from.
    #[error("degenerate branch weights: {0}")]
    DegenerateWeights(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

/// Checks that `value` is a strictly positive finite number.
pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            field,
            format!("must be a positive finite number (got {value})"),
        ))
    }
}
