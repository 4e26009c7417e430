//! Frame-synchronous annotation files: a header line, then one row per
//! frame with the timestamp number and the eight track labels.

use std::path::Path;

use misaw_core::timeline::{DiscreteSequence, FrameRecord};
use misaw_core::{Track, VocabularySet};

use crate::error::{CliError, IssueKind, ParseErrors};
use crate::tsv;

pub const TIMESTAMP_COLUMN: &str = "timestamp_number";

pub fn header_columns() -> Vec<&'static str> {
    std::iter::once(TIMESTAMP_COLUMN)
        .chain(Track::ALL.iter().map(|t| t.name()))
        .collect()
}

pub fn parse_discrete_str(
    text: &str,
    source: &str,
    vocabularies: &VocabularySet,
    rate_hz: f64,
) -> Result<DiscreteSequence, ParseErrors> {
    let columns = header_columns();
    let mut errors = ParseErrors::new(source);
    let mut rows = tsv::rows(text);
    match rows.next() {
        Some((n, line)) => {
            tsv::expect_header(&mut errors, n, line, &columns);
        }
        None => errors.push(1, IssueKind::MissingHeader),
    }

    let mut frames = Vec::new();
    let mut expected: u64 = 0;
    for (n, line) in rows {
        let cells = tsv::fields(line);
        if cells.len() != columns.len() {
            errors.push(
                n,
                IssueKind::ColumnCount {
                    expected: columns.len(),
                    found: cells.len(),
                },
            );
            expected += 1;
            continue;
        }
        match cells[0].trim().parse::<u64>() {
            Ok(ts) if ts == expected => {}
            Ok(ts) => errors.push(n, IssueKind::NonMonotoneTimestamp { expected, found: ts }),
            Err(_) => errors.push(n, IssueKind::BadTimestamp(cells[0].to_string())),
        }
        let mut frame = FrameRecord::idle(expected);
        for (&track, raw) in Track::ALL.iter().zip(&cells[1..]) {
            if raw.trim().is_empty() {
                errors.push(n, IssueKind::EmptyLabel(track));
                continue;
            }
            match tsv::label(vocabularies.for_track(track), raw) {
                Ok(l) => frame.set(track, l),
                Err(kind) => errors.push(n, kind),
            }
        }
        frames.push(frame);
        expected += 1;
    }
    errors.into_result(DiscreteSequence::new(rate_hz, frames))
}

pub fn parse_discrete(path: &Path, vocabularies: &VocabularySet, rate_hz: f64) -> Result<DiscreteSequence, CliError> {
    let text = tsv::read(path)?;
    Ok(parse_discrete_str(
        &text,
        &path.display().to_string(),
        vocabularies,
        rate_hz,
    )?)
}

pub fn serialize_discrete(seq: &DiscreteSequence) -> String {
    let mut out = header_columns().join("\t");
    out.push('\n');
    for f in &seq.frames {
        out.push_str(&f.timestamp.to_string());
        for l in &f.labels {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DiscreteSequence, ParseErrors> {
        parse_discrete_str(text, "t.tsv", &VocabularySet::misaw(), 30.0)
    }

    fn header() -> String {
        header_columns().join("\t")
    }

    fn row(ts: &str, phase: &str) -> String {
        format!("{ts}\t{phase}\tIdle\tIdle\tIdle\tIdle\tIdle\tIdle\tIdle")
    }

    #[test]
    fn three_rows() {
        let text = format!(
            "{}\n{}\n{}\n{}\n",
            header(),
            row("0", "Idle"),
            row("1", "Suturing"),
            row("2", "Suturing")
        );
        let seq = parse(&text).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.track_labels(Track::Phase), ["Idle", "Suturing", "Suturing"]);
        assert_eq!(serialize_discrete(&seq), text);
    }

    #[test]
    fn every_problem_is_reported() {
        let short = "1\tIdle\tIdle\tIdle\tIdle\tIdle\tIdle\tIdle";
        let text = format!(
            "{}\n{}\n{}\n{}\n{}\n",
            header(),
            row("0", "Idle"),
            short,
            row("x", "Idle"),
            row("9", "Sutureing")
        );
        let err = parse(&text).unwrap_err();
        let kinds: Vec<_> = err.issues.iter().map(|i| (i.line, i.kind.clone())).collect();
        assert_eq!(kinds[0], (3, IssueKind::ColumnCount { expected: 9, found: 8 }));
        assert_eq!(kinds[1], (4, IssueKind::BadTimestamp("x".into())));
        assert_eq!(kinds[2], (5, IssueKind::NonMonotoneTimestamp { expected: 3, found: 9 }));
        match &kinds[3].1 {
            IssueKind::UnknownLabel { suggestion, .. } => assert_eq!(suggestion.as_deref(), Some("Suturing")),
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("t.tsv:3:"));
    }

    #[test]
    fn header_is_mandatory() {
        let err = parse(&format!("{}\n", row("0", "Idle"))).unwrap_err();
        assert!(matches!(err.issues[0].kind, IssueKind::BadHeader { .. }));
        assert_eq!(parse("").unwrap_err().issues[0].kind, IssueKind::MissingHeader);
    }

    #[test]
    fn empty_label() {
        let err = parse(&format!("{}\n{}\n", header(), row("0", " "))).unwrap_err();
        assert_eq!(err.issues[0].kind, IssueKind::EmptyLabel(Track::Phase));
    }
}
