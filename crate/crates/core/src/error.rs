use alloc::string::String;

/// Errors raised by the dual Drazin machinery.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dual number is not appreciable (|std| = {0:e})")]
    NotAppreciable(f64),
    #[error("matrix is not dual Drazin invertible (projector residual {residual:e})")]
    NotDualDrazinInvertible { residual: f64 },
    #[error("index {index} exceeds 1; group inverse does not exist")]
    IndexTooLarge { index: usize },
    #[error("hypothesis `{name}` violated (residual {residual:e})")]
    HypothesisViolated { name: String, residual: f64 },
    #[error("invalid graph spec: {0}")]
    SpecInvalid(String),
    #[error("non-finite entry in input")]
    NonFinite,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::ShapeMismatch(msg.into())
}
