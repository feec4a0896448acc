use thiserror::Error;

/// Errors raised by the Krein-space routines.
///
/// Solver failures that correspond to a theorem hypothesis (range sign,
/// range inclusion, complementability) get their own variants so callers and
/// the verification harness can tell *why* an instance was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KreinError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid Krein space: {0}")]
    InvalidSpace(String),

    #[error("operator is not Krein-selfadjoint (residual {residual:.3e})")]
    NotKreinSelfadjoint { residual: f64 },

    #[error("not a signature operator: {0}")]
    NotASignature(String),

    #[error("numerical rank is ambiguous: singular value {sigma:.3e} is within a decade of threshold {threshold:.3e}")]
    RankThresholdAmbiguous { sigma: f64, threshold: f64 },

    #[error("weight is not complementable with respect to the subspace")]
    NotComplementable,

    #[error("weight is not weakly complementable with respect to the subspace (residual {residual:.3e})")]
    NotWeaklyComplementable { residual: f64 },

    #[error("range is not W-nonnegative (smallest compressed eigenvalue {min_eigenvalue:.3e})")]
    RangeNotNonnegative { min_eigenvalue: f64 },

    #[error("range is not W-nonpositive (largest compressed eigenvalue {max_eigenvalue:.3e})")]
    RangeNotNonpositive { max_eigenvalue: f64 },

    #[error("normal equation B#W(BX - C) = 0 has no solution (range residual {residual:.3e})")]
    NormalEquationUnsolvable { residual: f64 },

    #[error("min-max problem has no solution (range residual {residual:.3e})")]
    MinMaxUnsolvable { residual: f64 },

    #[error("internal certificate failed: {0}")]
    InternalCertificateFailure(String),

    #[error("unknown suite '{0}'")]
    UnknownSuite(String),

    #[error("unsatisfiable generator spec: {0}")]
    UnsatisfiableSpec(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),
}

impl KreinError {
    /// Stable short name, used in reports and by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            KreinError::DimensionMismatch { .. } => "DimensionMismatch",
            KreinError::InvalidSpace(_) => "InvalidSpace",
            KreinError::NotKreinSelfadjoint { .. } => "NotKreinSelfadjoint",
            KreinError::NotASignature(_) => "NotASignature",
            KreinError::RankThresholdAmbiguous { .. } => "RankThresholdAmbiguous",
            KreinError::NotComplementable => "NotComplementable",
            KreinError::NotWeaklyComplementable { .. } => "NotWeaklyComplementable",
            KreinError::RangeNotNonnegative { .. } => "RangeNotNonnegative",
            KreinError::RangeNotNonpositive { .. } => "RangeNotNonpositive",
            KreinError::NormalEquationUnsolvable { .. } => "NormalEquationUnsolvable",
            KreinError::MinMaxUnsolvable { .. } => "MinMaxUnsolvable",
            KreinError::InternalCertificateFailure(_) => "InternalCertificateFailure",
            KreinError::UnknownSuite(_) => "UnknownSuite",
            KreinError::UnsatisfiableSpec(_) => "UnsatisfiableSpec",
            KreinError::MalformedInput(_) => "MalformedInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, KreinError>;
