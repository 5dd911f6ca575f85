use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown entity type `{0}`")]
    UnknownType(String),

    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),

    #[error("cannot bind {var} to {object}: `{object_type}` is not a subtype of `{var_type}`")]
    TypeMismatch { var: String, var_type: String, object: String, object_type: String },

    #[error("action {0} is not applicable in the given state")]
    NotApplicable(String),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("precondition difference has {0} atoms; candidate enumeration is capped at 20")]
    PreconditionBlowup(usize),

    #[error("invalid schema {name}: {reason}")]
    InvalidSchema { name: String, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
