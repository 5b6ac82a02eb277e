use thiserror::Error;

/// Errors raised by the core library.
///
/// Every variant maps onto a stable machine-readable [`Error::kind`] string,
/// which the command-line front end forwards in its structured error output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite coefficient {value} at order {order}")]
    NonFinite { order: i32, value: f64 },

    #[error("empty coefficient list")]
    EmptyCoefficients,

    #[error("order {order} is outside the reliable window [{min}, {max}]")]
    OutOfRange { order: i32, min: i32, max: i32 },

    #[error("{name} = {value} is outside its domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "channel invariant {rsq} is outside the supported kinematic region (requires r^2 > 0)"
    )]
    Kinematic { rsq: f64 },

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("no real factorization: discriminant {discriminant} < 0")]
    NoRealFactorization { discriminant: f64 },

    #[error("degenerate loop structure: {0}")]
    DegenerateLoop(&'static str),

    #[error("gauge parameter must be finite and positive, got {0}")]
    Gauge(f64),

    #[error("internal consistency check failed for {what}: {left} vs {right}")]
    InternalConsistency {
        what: &'static str,
        left: f64,
        right: f64,
    },

    #[error("numerical failure at mu = {mu}, value = {value}: {reason}")]
    NumericalFailure { mu: f64, value: f64, reason: String },

    #[error("Landau pole at ln(mu) = {ln_mu}")]
    LandauPole { ln_mu: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("empty validity domain: {0}")]
    EmptyDomain(&'static str),
}

impl Error {
    /// Stable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } | Error::EmptyCoefficients => "construction",
            Error::OutOfRange { .. } => "out_of_range",
            Error::Domain { .. } => "domain",
            Error::Kinematic { .. } => "kinematic_domain",
            Error::Capability(_) => "capability",
            Error::NoRealFactorization { .. } => "no_real_factorization",
            Error::DegenerateLoop(_) => "degenerate_loop",
            Error::Gauge(_) => "gauge",
            Error::InternalConsistency { .. } => "internal_consistency",
            Error::NumericalFailure { .. } => "numerical_failure",
            Error::LandauPole { .. } => "landau_pole",
            Error::Degenerate(_) => "degenerate",
            Error::EmptyDomain(_) => "empty_domain",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}
