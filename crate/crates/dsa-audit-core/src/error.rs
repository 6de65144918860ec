//! Error type shared by every module in the engine.

use thiserror::Error;

/// All failure modes surfaced by parsing, taxonomy resolution and rule
/// evaluation. Findings are not errors: a detected inconsistency is a
/// successful result.
#[derive(Debug, Error)]
pub enum AuditError {
    /// A category id or label is unknown in the addressed vocabulary.
    #[error("vocabulary error: {0}")]
    Vocabulary(String),

    /// A raw label matched more than one category; the resolver never guesses.
    #[error("ambiguous label: {0}")]
    Ambiguity(String),

    /// A document does not conform to the interchange schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A value is structurally valid but semantically out of range.
    #[error("value error: {0}")]
    Value(String),

    /// A key or name that must be unique appeared twice.
    #[error("duplicate entry: {0}")]
    Duplicate(String),

    /// A malformed row in a delimiter-separated dump (strict mode only).
    #[error("malformed row {row}: {message}")]
    Row { row: u64, message: String },

    /// Periods that must align do not.
    #[error("period error: {0}")]
    Period(String),

    /// Metric keys that must address the same quantity do not.
    #[error("key error: {0}")]
    Key(String),

    /// Required input is missing or unusable.
    #[error("input error: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl AuditError {
    /// Stable machine-readable code for diagnostics and tests.
    pub fn code(&self) -> &'static str {
        match self {
            AuditError::Vocabulary(_) => "VOCABULARY_ERROR",
            AuditError::Ambiguity(_) => "AMBIGUITY_ERROR",
            AuditError::Schema(_) => "SCHEMA_ERROR",
            AuditError::Value(_) => "VALUE_ERROR",
            AuditError::Duplicate(_) => "DUPLICATE_ERROR",
            AuditError::Row { .. } => "ROW_ERROR",
            AuditError::Period(_) => "PERIOD_ERROR",
            AuditError::Key(_) => "KEY_ERROR",
            AuditError::Input(_) => "INPUT_ERROR",
            AuditError::Io(_) => "IO_ERROR",
        }
    }
}

pub type Result<T, E = AuditError> = std::result::Result<T, E>;
