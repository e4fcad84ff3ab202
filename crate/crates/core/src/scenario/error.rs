use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    ParseError,
    UnresolvedReference,
    UnitMismatch,
    InvariantViolation,
    InvalidUnit,
    RangeSelectionRequired,
    UnresolvedFile,
    InvalidOverride,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 8] = [
        ErrorCode::ParseError,
        ErrorCode::UnresolvedReference,
        ErrorCode::UnitMismatch,
        ErrorCode::InvariantViolation,
        ErrorCode::InvalidUnit,
        ErrorCode::RangeSelectionRequired,
        ErrorCode::UnresolvedFile,
        ErrorCode::InvalidOverride,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::ParseError => "parse-error",
            ErrorCode::UnresolvedReference => "unresolved-reference",
            ErrorCode::UnitMismatch => "unit-mismatch",
            ErrorCode::InvariantViolation => "invariant-violation",
            ErrorCode::InvalidUnit => "invalid-unit",
            ErrorCode::RangeSelectionRequired => "range-selection-required",
            ErrorCode::UnresolvedFile => "unresolved-file",
            ErrorCode::InvalidOverride => "invalid-override",
        }
    }

    /// Finds a `[code]` tag embedded in a message.
    fn from_tagged(message: &str) -> Option<ErrorCode> {
        ErrorCode::ALL
            .into_iter()
            .find(|c| message.contains(&format!("[{}]", c.as_str())))
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scenario problem with its machine-readable category and where it was found.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub struct ScenarioError {
    pub code: ErrorCode,
    /// Dotted path into the document; empty for whole-document problems.
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub message: String,
}

impl ScenarioError {
    pub fn new(code: ErrorCode, path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError {
            code,
            path: path.into(),
            line: None,
            column: None,
            message: message.into(),
        }
    }

    pub(crate) fn from_json(err: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let path = err.path().to_string();
        Self::from_parts(path, err.into_inner())
    }

    pub(crate) fn from_syntax(err: serde_json::Error) -> Self {
        Self::from_parts(String::new(), err)
    }

    fn from_parts(path: String, inner: serde_json::Error) -> Self {
        let (line, column) = if inner.line() > 0 {
            (Some(inner.line()), Some(inner.column()))
        } else {
            (None, None)
        };
        let raw = inner.to_string();
        let code = ErrorCode::from_tagged(&raw).unwrap_or(ErrorCode::ParseError);
        let mut message = strip_location(&raw);
        for c in ErrorCode::ALL {
            message = message.replace(&format!("[{}] ", c.as_str()), "");
        }
        ScenarioError {
            code,
            path: if path == "." { String::new() } else { path },
            line,
            column,
            message,
        }
    }
}

fn strip_location(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.code)?;
        if !self.path.is_empty() {
            write!(f, " at {}", self.path)?;
        }
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        write!(f, ": {}", self.message)
    }
}
