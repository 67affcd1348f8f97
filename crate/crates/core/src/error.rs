use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why an orbit could not be treated as bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnboundKind {
    /// No classically allowed region exists at this energy.
    Forbidden,
    /// The allowed region extends to infinity.
    Escapes,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the validated domain: {0}")]
    Domain(String),
    #[error("kinetic kernel is not admissible: {0}")]
    Admissibility(String),
    #[error("velocity map 4xK'(x)^2 is not invertible on the validated domain")]
    NonInvertibleVelocityMap,
    #[error("trajectory reached a singularity: {0}")]
    Singularity(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("no recurrence found: {0}")]
    NotPeriodic(String),
    #[error("averaging window [{start}, {end}] exceeds trajectory span [{span_start}, {span_end}]")]
    Range {
        start: f64,
        end: f64,
        span_start: f64,
        span_end: f64,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("orbit is not bound ({kind:?}): {detail}")]
    Unbound { kind: UnboundKind, detail: String },
    #[error("effective potential has several wells; sign-change brackets {brackets:?}")]
    AmbiguousWell { brackets: Vec<(f64, f64)> },
    #[error("target outside the bracketed range: {0}")]
    Bracket(String),
    #[error("dominance violated: {quantity} at {witness} (margin {margin:e})")]
    Dominance {
        quantity: &'static str,
        witness: String,
        margin: f64,
    },
    #[error("unknown parameter: {0}")]
    UnknownParameter(String),
    #[error("unknown registry entry `{name}` in {registry}")]
    UnknownEntry { registry: &'static str, name: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not supported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Stable name used in reports and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Admissibility(_) => "AdmissibilityError",
            Error::NonInvertibleVelocityMap => "NonInvertibleVelocityMap",
            Error::Singularity(_) => "SingularityError",
            Error::Numerical(_) => "NumericalError",
            Error::NotPeriodic(_) => "NotPeriodicError",
            Error::Range { .. } => "RangeError",
            Error::Dimension(_) => "DimensionError",
            Error::Unbound { .. } => "UnboundError",
            Error::AmbiguousWell { .. } => "AmbiguousWellError",
            Error::Bracket(_) => "BracketError",
            Error::Dominance { .. } => "DominanceError",
            Error::UnknownParameter(_) => "UnknownParameter",
            Error::UnknownEntry { .. } => "UnknownEntry",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Unsupported(_) => "Unsupported",
        }
    }

    pub(crate) fn unbound(kind: UnboundKind, detail: impl Into<String>) -> Self {
        Error::Unbound {
            kind,
            detail: detail.into(),
        }
    }
}
