use thiserror::Error;

pub type Result<T, E = QntError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QntError {
    /// A parameter or precondition was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("state dimension {requested} exceeds the cap of {cap}")]
    DimensionCap { requested: u128, cap: usize },

    #[error("recorded sequence contains a measurement and has no adjoint")]
    NonUnitary,
}

impl QntError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QntError::InvalidArgument(msg.into())
    }

    /// True for errors caused by the simulation size rather than the inputs.
    pub fn is_capacity(&self) -> bool {
        matches!(self, QntError::DimensionCap { .. })
    }
}
