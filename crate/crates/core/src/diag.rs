//! Located messages shared by the codecs, the verifier and the optimizer.

use std::fmt;

/// Position of an element in its source document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceLocation {
    pub document_id: String,
    /// 1-based.
    pub line: u32,
    /// 1-based.
    pub column: u32,
}

impl SourceLocation {
    pub fn new(document_id: impl Into<String>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceLocation {
            document_id: document_id.into(),
            line,
            column,
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.document_id, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Hint,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Hint => "hint",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Option<SourceLocation>,
    pub text: String,
    /// Short identifier of the rule that produced the message, if any
    /// (the verifier uses `C1`..`C5`, `E1`, `E2`, `W1`..`W4`).
    pub code: Option<&'static str>,
}

impl Diagnostic {
    pub fn new(severity: Severity, location: Option<SourceLocation>, text: impl Into<String>) -> Self {
        Diagnostic {
            severity,
            location,
            text: text.into(),
            code: None,
        }
    }

    pub fn error(location: Option<SourceLocation>, text: impl Into<String>) -> Self {
        Self::new(Severity::Error, location, text)
    }

    pub fn warning(location: Option<SourceLocation>, text: impl Into<String>) -> Self {
        Self::new(Severity::Warning, location, text)
    }

    pub fn hint(location: Option<SourceLocation>, text: impl Into<String>) -> Self {
        Self::new(Severity::Hint, location, text)
    }

    pub fn with_code(mut self, code: &'static str) -> Self {
        self.code = Some(code);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{}: {}: {}", self.severity, loc, self.text),
            None => write!(f, "{}: {}", self.severity, self.text),
        }
    }
}

/// Number of critical (error) messages in `diags`.
pub fn critical_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.is_error()).count()
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
