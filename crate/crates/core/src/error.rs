use thiserror::Error;

/// Errors raised by the measure, transform and convolution routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("integrand is not integrable against the measure: {0}")]
    NonIntegrable(String),

    #[error("z = {z} lies inside the closed support [{lower}, {upper}]")]
    InsideSupport { z: f64, lower: f64, upper: f64 },

    #[error("z = {z} is not strictly left of the support (lower edge {lower})")]
    InsideOrRightOfSupport { z: f64, lower: f64 },

    #[error("g = {g} is outside the invertible range (0, {g_star})")]
    OutOfRange { g: f64, g_star: f64 },

    #[error("{what}: argument {value} is outside the domain")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("g = {g} is outside the domain of the energy functional")]
    OutOfEDomain { g: f64 },

    #[error("the first measure must be non-degenerate (more than one support point)")]
    DegenerateMu,

    #[error("z = {z} is not left of the convolution edge z* = {z_star}")]
    BeyondEdge { z: f64, z_star: f64 },

    #[error("z = {z} is not below the smallest eigenvalue {min_eig}")]
    ZInsideSpectrum { z: f64, min_eig: f64 },

    #[error("matrix dimension {n} exceeds the configured maximum {max}")]
    ResourceLimit { n: usize, max: usize },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("{0}")]
    Convergence(String),

    #[error("verification mismatch: variational value {primary} vs bounded minimization {check}")]
    VerificationMismatch { primary: f64, check: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors that indicate a valid request outside the mathematical
    /// domain, as opposed to malformed or unsupported input.
    pub fn is_domain_error(&self) -> bool {
        !matches!(
            self,
            Error::InvalidMeasure(_)
                | Error::InvalidEnsemble(_)
                | Error::ResourceLimit { .. }
                | Error::DegenerateMu
        )
    }
}
