use std::fmt;

/// Parse failures from the frame grammar, session files and config files.
///
/// Each kind is distinct so callers (and the CLI exit codes) can tell a
/// wiring fault apart from a truncated capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedFrame,
    RangeViolation,
    MalformedHeader,
    OrderViolation,
    MalformedConfig,
    MalformedTable,
}

impl ParseErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ParseErrorKind::MalformedFrame => "MalformedFrame",
            ParseErrorKind::RangeViolation => "RangeViolation",
            ParseErrorKind::MalformedHeader => "MalformedHeader",
            ParseErrorKind::OrderViolation => "OrderViolation",
            ParseErrorKind::MalformedConfig => "MalformedConfig",
            ParseErrorKind::MalformedTable => "MalformedTable",
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// 1-based line number within the stream, when known.
    pub line: Option<usize>,
    pub detail: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            line: None,
            detail: detail.into(),
        }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{} at line {}: {}", self.kind, line, self.detail),
            None => write!(f, "{}: {}", self.kind, self.detail),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("OutOfRange: {0}")]
    OutOfRange(String),
    #[error("DomainError: {0}")]
    Domain(String),
    #[error("ArgumentError: {0}")]
    Argument(String),
    #[error("PreconditionViolation: {0}")]
    Precondition(String),
    #[error("DegenerateRange: {0}")]
    DegenerateRange(String),
    #[error("SchemaError: {0}")]
    Schema(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// The parse error kind, if this is a parse failure.
    pub fn parse_kind(&self) -> Option<ParseErrorKind> {
        match self {
            Error::Parse(e) => Some(e.kind),
            _ => None,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                _ => unreachable!(),
            }
        } else {
            let line = e.position().map(|p| p.line() as usize);
            let mut pe = ParseError::new(ParseErrorKind::MalformedTable, e.to_string());
            pe.line = line;
            Error::Parse(pe)
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
