use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` out of domain: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("{operation} is not supported: {reason}")]
    Unsupported {
        operation: &'static str,
        reason: String,
    },

    #[error("kernel Taylor data with G1 = {g1} > 0 implies a growing envelope")]
    GrowingEnvelope { g1: String },

    #[error(
        "numerical instability at t = {t}: |C| = {magnitude} exceeds the physical bound; reduce dt"
    )]
    Instability { t: f64, magnitude: f64 },

    #[error("half-step refinement estimates an error of {estimate:e}, above the tolerance {tolerance:e}; reduce dt")]
    NotConverged { estimate: f64, tolerance: f64 },

    #[error("dissipator is singular at t = {at} (evaluated at t = {t})")]
    Singularity { t: f64, at: f64 },

    #[error("method `{found}` passed where `{expected}` was required")]
    MethodMismatch {
        expected: &'static str,
        found: &'static str,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn unsupported(operation: &'static str, reason: impl Into<String>) -> Self {
        Error::Unsupported {
            operation,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the integrator rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Instability { .. } | Error::NotConverged { .. })
    }
}
