use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolError {
    /// A computation produced a non-finite value (overflow of an
    /// exponential factor, usually).
    #[error("non-finite result in {context}")]
    NonFinite { context: &'static str },

    /// An argument was outside the mathematical domain of the operation.
    #[error("domain error in {context}: {reason}")]
    Domain {
        context: &'static str,
        reason: String,
    },

    /// A configuration failed validation; `field` is the dotted path of
    /// the offending entry.
    #[error("invalid config at `{field}`: {reason}")]
    Config { field: String, reason: String },
}

impl SolError {
    pub fn domain(context: &'static str, reason: impl Into<String>) -> Self {
        SolError::Domain {
            context,
            reason: reason.into(),
        }
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SolError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SolError>;
