//! Line and header helpers shared by the tab-separated formats.

use std::path::Path;

use misaw_core::LabelVocabulary;

use crate::error::{CliError, IssueKind, ParseErrors};

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
pub fn rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn fields(line: &str) -> Vec<&str> {
    line.split('\t').collect()
}

/// Checks `line` against a fixed header. Returns false (and records why)
/// when it does not match.
pub fn expect_header(errors: &mut ParseErrors, line_no: usize, line: &str, columns: &[&str]) -> bool {
    let expected = columns.join("\t");
    if line.trim_end() == expected {
        return true;
    }
    errors.push(
        line_no,
        IssueKind::BadHeader {
            expected,
            found: line.to_string(),
        },
    );
    false
}

/// Canonical label for `raw`, or an unknown-label issue with the nearest
/// vocabulary entry as a hint.
pub fn label(vocab: &LabelVocabulary, raw: &str) -> Result<String, IssueKind> {
    match vocab.index_of(raw) {
        Some(i) => Ok(vocab.labels()[i].clone()),
        None => Err(IssueKind::UnknownLabel {
            component: vocab.component(),
            label: raw.to_string(),
            suggestion: vocab.suggest(raw).map(str::to_string),
        }),
    }
}

pub fn number(column: &str, raw: &str) -> Result<f64, IssueKind> {
    let v: f64 = raw.trim().parse().map_err(|_| IssueKind::BadNumber {
        column: column.to_string(),
        value: raw.to_string(),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(IssueKind::NonFinite {
            column: column.to_string(),
        })
    }
}

pub fn integer(column: &str, raw: &str) -> Result<i64, IssueKind> {
    raw.trim().parse().map_err(|_| IssueKind::BadNumber {
        column: column.to_string(),
        value: raw.to_string(),
    })
}
