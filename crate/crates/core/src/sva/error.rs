use serde::{Deserialize, Serialize};

use super::ast::LayerError;

/// Parse failure with the byte offset of the offending token and the set of
/// tokens that would have been accepted there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("syntax error at byte {offset}: {message}{}", expected_suffix(.expected))]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl SyntaxError {
    pub(crate) fn new(offset: usize, message: impl Into<String>, expected: &[&str]) -> Self {
        SyntaxError {
            offset,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SvaError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("layer error at byte {offset}: {source}")]
    Layer {
        offset: usize,
        #[source]
        source: LayerError,
    },
    #[error("undeclared signal `{0}`")]
    UnknownSignal(String),
    #[error("bit select {select} out of range for `{signal}` ({width} bits)")]
    SelectOutOfRange {
        signal: String,
        select: String,
        width: u32,
    },
}

impl SvaError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            SvaError::Syntax(e) => Some(e.offset),
            SvaError::Layer { offset, .. } => Some(*offset),
            _ => None,
        }
    }

    /// Machine-readable `{offset, message, expected}` record.
    pub fn to_record(&self) -> SyntaxError {
        match self {
            SvaError::Syntax(e) => e.clone(),
            other => SyntaxError {
                offset: other.offset().unwrap_or(0),
                message: other.to_string(),
                expected: vec![],
            },
        }
    }
}
