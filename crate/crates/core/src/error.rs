use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("InsufficientMoments: {needed} moments required, {available} available")]
    InsufficientMoments { needed: usize, available: usize },

    /// A Hankel determinant is not strictly positive: the moments belong to a
    /// measure with finite support (or to no measure at all).
    #[error("DegenerateHankel: D_{index} is not strictly positive")]
    DegenerateHankel { index: usize },

    #[error("PrecisionLoss: only {agreeing_bits:.1} bits agree between {bits} and {doubled} bit runs")]
    PrecisionLoss { agreeing_bits: f64, bits: u32, doubled: u32 },

    #[error("CoefficientExhausted: coefficient index {requested} requested, {available} stored and no generator")]
    CoefficientExhausted { requested: usize, available: usize },

    #[error("RealPoint: the Weyl radius needs a nonreal point")]
    RealPoint,

    #[error("FiniteSupport: {requested} recurrence coefficients requested, measure has {support} support points")]
    FiniteSupport { requested: usize, support: usize },

    #[error("QuadratureFailure: {0}")]
    QuadratureFailure(String),

    #[error("NonFinite: {0}")]
    NonFinite(String),

    #[error("ZeroMass: measure has zero total mass")]
    ZeroMass,

    #[error("InfiniteMass: {0}")]
    InfiniteMass(String),

    #[error("TruncationTooSmall: {0}")]
    TruncationTooSmall(String),

    #[error("Malformed: {0}")]
    Malformed(String),
}

impl Error {
    /// Variant name as used in machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InsufficientMoments { .. } => "InsufficientMoments",
            Error::DegenerateHankel { .. } => "DegenerateHankel",
            Error::PrecisionLoss { .. } => "PrecisionLoss",
            Error::CoefficientExhausted { .. } => "CoefficientExhausted",
            Error::RealPoint => "RealPoint",
            Error::FiniteSupport { .. } => "FiniteSupport",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::NonFinite(_) => "NonFinite",
            Error::ZeroMass => "ZeroMass",
            Error::InfiniteMass(_) => "InfiniteMass",
            Error::TruncationTooSmall(_) => "TruncationTooSmall",
            Error::Malformed(_) => "Malformed",
        }
    }

    /// True for failures of the numerics on otherwise valid input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InsufficientMoments { .. } | Error::RealPoint | Error::Malformed(_))
    }
}

/// Conditions that are reported but do not stop a computation.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Damping exponent below the order at which Stone vectors are known to
    /// be cyclic and to produce limit-point Jacobi matrices.
    AlphaBelowThreshold { alpha: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::AlphaBelowThreshold { alpha } => {
                write!(f, "AlphaBelowThreshold: alpha={alpha} < 1/2, the limit-point guarantee does not apply")
            }
        }
    }
}
