use std::fmt;
use std::path::PathBuf;

use misaw_core::{Component, Track};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] ParseErrors),
    #[error(transparent)]
    Core(#[from] misaw_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IssueKind {
    MissingHeader,
    BadHeader {
        expected: String,
        found: String,
    },
    ColumnCount {
        expected: usize,
        found: usize,
    },
    BadTimestamp(String),
    NonMonotoneTimestamp {
        expected: u64,
        found: u64,
    },
    UnknownLabel {
        component: Component,
        label: String,
        suggestion: Option<String>,
    },
    EmptyLabel(Track),
    UnknownComponent(String),
    BadNumber {
        column: String,
        value: String,
    },
    NonFinite {
        column: String,
    },
    EmptySegment {
        begin_ms: i64,
        end_ms: i64,
    },
    Overlap {
        track: Track,
        previous_line: usize,
    },
    BadDirective(String),
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IssueKind::MissingHeader => write!(f, "missing header"),
            IssueKind::BadHeader { expected, found } => {
                write!(f, "bad header: expected {expected:?}, found {found:?}")
            }
            IssueKind::ColumnCount { expected, found } => {
                write!(f, "expected {expected} columns, found {found}")
            }
            IssueKind::BadTimestamp(v) => write!(f, "timestamp {v:?} is not a non-negative integer"),
            IssueKind::NonMonotoneTimestamp { expected, found } => {
                write!(f, "timestamp {found} out of sequence (expected {expected})")
            }
            IssueKind::UnknownLabel {
                component,
                label,
                suggestion,
            } => {
                write!(f, "unknown {} label {label:?}", component.name())?;
                if let Some(s) = suggestion {
                    write!(f, " (did you mean {s:?}?)")?;
                }
                Ok(())
            }
            IssueKind::EmptyLabel(track) => write!(f, "empty {} label", track.name()),
            IssueKind::UnknownComponent(c) => write!(f, "unknown component {c:?}"),
            IssueKind::BadNumber { column, value } => write!(f, "{column}: {value:?} is not a number"),
            IssueKind::NonFinite { column } => write!(f, "{column}: value is not finite"),
            IssueKind::EmptySegment { begin_ms, end_ms } => {
                write!(f, "segment [{begin_ms}, {end_ms}) is empty")
            }
            IssueKind::Overlap { track, previous_line } => {
                write!(f, "{} segment overlaps the one on line {previous_line}", track.name())
            }
            IssueKind::BadDirective(d) => write!(f, "unrecognized directive {d:?}"),
        }
    }
}

/// One problem found while parsing, with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub line: usize,
    pub kind: IssueKind,
}

/// Every problem found in one file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseErrors {
    pub source: String,
    pub issues: Vec<Issue>,
}

impl ParseErrors {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            issues: Vec::new(),
        }
    }

    pub fn push(&mut self, line: usize, kind: IssueKind) {
        self.issues.push(Issue { line, kind });
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result<T>(self, value: T) -> Result<T, ParseErrors> {
        if self.issues.is_empty() {
            Ok(value)
        } else {
            Err(self)
        }
    }
}

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}:{}: {}", self.source, issue.line, issue.kind)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}
