//! CLI-level errors.  Every failure funnels into one (kind, message)
//! pair that prints as a single-line JSON document on the diagnostic
//! stream; the kind strings of the library pass through unchanged so
//! callers can branch on them without parsing prose.

use std::path::Path;

#[derive(Debug)]
pub struct CliError {
    kind: String,
    message: String,
}

impl CliError {
    pub fn new(kind: impl Into<String>, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.into(),
            message: message.into(),
        }
    }

    /// A scene-file validation failure at a named field.
    pub fn config(path: &str, message: impl std::fmt::Display) -> Self {
        CliError::new("config", format!("{path}: {message}"))
    }

    /// A library error raised while handling a named scene field; the
    /// library kind is kept (a profile parse error stays "parse").
    pub fn at_path(path: &str, err: pseudoliouville::Error) -> Self {
        CliError::new(err.kind(), format!("{path}: {err}"))
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::new("io", format!("{}: {err}", path.display()))
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn message(&self) -> &str {
        &self.message
    }

    /// One-line machine-readable form for stderr.
    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "error": { "kind": self.kind(), "message": self.message() }
        });
        doc.to_string()
    }
}

impl From<pseudoliouville::Error> for CliError {
    fn from(err: pseudoliouville::Error) -> Self {
        CliError::new(err.kind(), err.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}
