use thiserror::Error;

use crate::analysis::Region;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("values at [{t_lo}, {t_hi}] do not bracket a crossing")]
    NotBracketing { t_lo: f64, t_hi: f64 },

    #[error("blow-up tail is not a diverging sequence: {0}")]
    NonDivergingTail(String),

    #[error("bracket endpoints both classify on the same side: {lo:?} at lo, {hi:?} at hi")]
    BracketInvalid { lo: Region, hi: Region },

    #[error("region ordering along the axis is not monotone near {at}: {before:?} followed by {after:?}")]
    NonMonotone { at: f64, before: Region, after: Region },

    #[error("numerical integration collapsed (step below h_min) at t = {t} without growth")]
    Indeterminate { t: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
