//! Error type shared by every module.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite integrand value {value} at node {node}")]
    NonFinite { node: f64, value: f64 },

    #[error("minimiser hit the bracket boundary at {at} (half-width {half_width})")]
    BracketBoundary { at: f64, half_width: f64 },

    #[error("integral diverges where a finite value is required")]
    Divergent,

    #[error("population {size} exceeds the exact-arithmetic cap at generation {generation}")]
    PopulationOverflow { generation: usize, size: u64 },

    #[error("norming constant underflows for n = {n}")]
    NormingUnderflow { n: usize },

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("parameter {theta} outside the model region ({region})")]
    ParameterRegion { theta: f64, region: &'static str },

    #[error("{degenerate} of {reps} replicates were degenerate (limit 0.1%)")]
    TooManyDegenerate { degenerate: usize, reps: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::ParameterRegion { .. })
    }
}
