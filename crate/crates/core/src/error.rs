use thiserror::Error;

/// Errors produced while building or analyzing excitation matrices.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("site arrays have mismatched lengths: {field} has {got}, expected {expected}")]
    LengthMismatch { field: &'static str, got: usize, expected: usize },

    #[error("quadratic form is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular similarity transform: {0}")]
    SingularTransform(String),

    #[error("eigensolver failed for {source_label}: {reason}")]
    Eigensolver { source_label: String, reason: String },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("gap closed: min |h(k)| = {min_abs:e} on the k-grid")]
    GapClosed { min_abs: f64 },

    #[error("winding phase is not an integer multiple of 2π (residue {residue})")]
    NonIntegerWinding { residue: f64 },

    #[error("on a phase boundary: |Δ̃₁| = |Δ̃₂| = {modulus}")]
    PhaseBoundary { modulus: f64 },

    #[error("zero vector has no spatial profile")]
    ZeroVector,

    #[error("all {0} disorder realizations failed")]
    AllRealizationsFailed(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
