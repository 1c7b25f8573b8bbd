use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} = {value} is outside {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: String,
    },

    #[error("invalid length interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error(
        "shortness hypothesis violated: curve {curve} has upper length {hi} > epsilon {epsilon}"
    )]
    ShortnessViolated {
        curve: String,
        hi: f64,
        epsilon: f64,
    },

    #[error("estimates not valid: {0}")]
    EstimatesNotValid(String),

    #[error("bounding annulus exits collar: psi(R) = {psi} >= theta = {theta}")]
    BoundingAnnulusExitsCollar { psi: f64, theta: f64 },

    #[error("moduli too small for kappa = {kappa}: denominator {denominator}")]
    ModuliTooSmall { kappa: f64, denominator: f64 },

    #[error("not a sense-preserving homeomorphism at this resolution: |mu| = {abs_mu} at (t, x) = ({t}, {x})")]
    NotSensePreserving { t: f64, x: f64, abs_mu: f64 },

    #[error("unknown curve {0}")]
    UnknownCurve(String),

    #[error("duplicate curve {0}")]
    DuplicateCurve(String),

    #[error("curve {curve} has role {actual}, expected {expected}")]
    RoleMismatch {
        curve: String,
        actual: &'static str,
        expected: &'static str,
    },

    #[error("multicurve supports differ")]
    SupportMismatch,

    #[error("multicurve supports overlap on {0}")]
    OverlappingSupport(String),

    #[error("lattice error: {0}")]
    Lattice(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}
