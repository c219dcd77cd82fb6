use thiserror::Error;

/// Errors surfaced by the construction and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown simple type label `{0}` (expected A, B, C, D, E6, E7, E8, F4 or G2)")]
    UnknownTypeLabel(String),

    #[error("rank {rank} out of range for type {family} (allowed {min}..={max})")]
    RankOutOfRange {
        family: String,
        rank: usize,
        min: usize,
        max: usize,
    },

    #[error("elements belong to different algebra models")]
    ModelMismatch,

    #[error("root string undefined: second root is proportional to the first")]
    ProportionalRoots,

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("invalid isotropy data: {0}")]
    InvalidIsotropy(String),

    #[error("layer coefficient {index} is not positive (got {value})")]
    NonPositiveCoefficient { index: usize, value: f64 },

    #[error(
        "k-parameter normalization violated on layer {layer}: |k|^2 = {got}, required {required}"
    )]
    KNormalization {
        layer: usize,
        got: f64,
        required: f64,
    },

    #[error("su(2) triple bracket relations fail on layer {layer} (residual {residual:.3e})")]
    TripleBracketResidual { layer: usize, residual: f64 },

    #[error(
        "metric is not hyperhermitian (residual {residual:.3e} exceeds tolerance {tolerance:.3e})"
    )]
    NotHyperhermitian { residual: f64, tolerance: f64 },

    #[error("metric is not HKT (residual {residual:.3e} exceeds tolerance {tolerance:.3e})")]
    NotHkt { residual: f64, tolerance: f64 },

    #[error("operation requires a layer-diagonal metric")]
    NotLayerMetric,

    #[error("torsion 3-form is not totally skew-symmetric (residual {residual:.3e})")]
    TorsionNotSkew { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
