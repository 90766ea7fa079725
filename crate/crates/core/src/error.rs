use thiserror::Error;

/// Errors raised by the numerical layers (hilbert, optics, weak values, meter, dynamics).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signature conflict: factor label `{0}` appears more than once")]
    SignatureConflict(String),

    #[error("factor `{0}` is not present in the target signature")]
    MissingFactor(String),

    #[error("signature mismatch: expected [{expected}], found [{found}]")]
    SignatureMismatch { expected: String, found: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),

    #[error("centered transform requires odd length 2N+1, got {0}")]
    EvenLength(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate post-selection: |<post|pre>| = {overlap:.3e} is below the threshold")]
    DegeneratePostSelection { overlap: f64 },

    #[error("post-selection annihilated the meter state (norm {norm:.3e})")]
    Annihilated { norm: f64 },

    #[error("state vector is zero")]
    ZeroState,

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    #[error("unknown state id `{0}`")]
    UnknownState(String),

    #[error("unknown observable id `{0}`")]
    UnknownObservable(String),

    #[error("unknown optical component `{0}`")]
    UnknownComponent(String),

    #[error("unknown coupling variant `{0}`")]
    UnknownVariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
