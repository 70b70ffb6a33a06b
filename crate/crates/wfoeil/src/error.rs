use std::fmt;

use thiserror::Error;

/// Byte range plus the line and column of its start, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(text: &str, start: usize, end: usize) -> SourceSpan {
        let start = start.min(text.len());
        let end = end.clamp(start, text.len());
        let before = &text[..start];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(start, |i| start - i - 1) + 1;
        SourceSpan { start, end, line, column }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("syntax error at {span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("validation error: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("alphabet error: {0}")]
    Alphabet(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("evaluation error: {0}")]
    Eval(String),
}

impl Error {
    pub fn syntax(text: &str, start: usize, end: usize, message: impl Into<String>) -> Error {
        Error::Syntax { span: SourceSpan::new(text, start, end), message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Error {
        Error::Validation(vec![message.into()])
    }
}

pub type Result<T> = std::result::Result<T, Error>;
