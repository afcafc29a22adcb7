use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Variants split into two families: input validation problems (bad
/// values, malformed files) and numerical failures (no convergence,
/// singular systems, unreachable targets). [`Error::is_numerical`] tells
/// them apart so front ends can map them to different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("fluence {fluence} ions/nm^2 exhausts the film: effective thickness vanishes at {limit} ions/nm^2")]
    ThicknessExhausted { fluence: f64, limit: f64 },

    #[error("no calibrated a_over_vD entry for d0 = {d0} nm")]
    UnknownThickness { d0: f64 },

    #[error("sheet resistance must be positive, got {0}")]
    NonPositiveResistance(f64),

    #[error("{field} must be positive, got {value}")]
    NonPositiveInput { field: &'static str, value: f64 },

    #[error("invalid {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit did not converge after {iterations} iterations (gradient inf-norm {gradient_norm:e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },

    #[error("singular normal equations: {0}")]
    SingularJacobian(String),

    #[error("resistance never drops below {threshold} ohm: no superconducting transition in sweep")]
    NoTransition { threshold: f64 },

    #[error("resistance crosses the {level} ohm criterion {} times, at T = {crossings:?} K", crossings.len())]
    NonMonotonicAmbiguity { level: f64, crossings: Vec<f64> },

    #[error("dB_c2/dT slope must be negative, got {0} T/K")]
    NonNegativeSlope(f64),

    #[error("Hall slope is zero: electron density undefined")]
    ZeroSlope,

    #[error("target {target} is outside the reachable range [{low}, {high}]")]
    Unreachable { target: f64, low: f64, high: f64 },

    #[error("metric is not monotone in fluence on [0, {f_max}] ions/nm^2")]
    NotMonotone { f_max: f64 },

    #[error("{file}:{line}: column `{column}`: {message}")]
    Schema {
        file: String,
        line: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical procedure on otherwise valid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::SingularJacobian(_)
                | Error::NoTransition { .. }
                | Error::NonMonotonicAmbiguity { .. }
                | Error::ZeroSlope
                | Error::Unreachable { .. }
                | Error::NotMonotone { .. }
                | Error::ThicknessExhausted { .. }
        )
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ThicknessExhausted { .. } => "ThicknessExhausted",
            Error::UnknownThickness { .. } => "UnknownThickness",
            Error::NonPositiveResistance(_) => "NonPositiveResistance",
            Error::NonPositiveInput { .. } => "NonPositiveInput",
            Error::InvalidInput { .. } => "InvalidInput",
            Error::InsufficientData(_) => "InsufficientData",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::SingularJacobian(_) => "SingularJacobian",
            Error::NoTransition { .. } => "NoTransition",
            Error::NonMonotonicAmbiguity { .. } => "NonMonotonicAmbiguity",
            Error::NonNegativeSlope(_) => "NonNegativeSlope",
            Error::ZeroSlope => "ZeroSlope",
            Error::Unreachable { .. } => "Unreachable",
            Error::NotMonotone { .. } => "NotMonotone",
            Error::Schema { .. } => "Schema",
            Error::Io { .. } => "Io",
        }
    }
}

pub(crate) fn ensure_positive(field: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositiveInput { field, value })
    }
}
