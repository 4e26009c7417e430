//! Interval annotation files: one row per segment with the track name,
//! label and half-open millisecond bounds.

use std::path::Path;

use misaw_core::timeline::{IntervalTimeline, Segment, TimelineSet};
use misaw_core::{Track, VocabularySet};

use crate::error::{CliError, IssueKind, ParseErrors};
use crate::tsv;

pub const HEADER: [&str; 4] = ["component", "label", "begin_ms", "end_ms"];

/// True when `text` starts with the interval header.
pub fn looks_like_interval(text: &str) -> bool {
    tsv::rows(text)
        .next()
        .is_some_and(|(_, l)| l.trim_end() == HEADER.join("\t"))
}

pub fn parse_interval_str(text: &str, source: &str, vocabularies: &VocabularySet) -> Result<TimelineSet, ParseErrors> {
    let mut errors = ParseErrors::new(source);
    let mut rows = tsv::rows(text);
    match rows.next() {
        Some((n, line)) => {
            tsv::expect_header(&mut errors, n, line, &HEADER);
        }
        None => errors.push(1, IssueKind::MissingHeader),
    }

    let mut per_track: [Vec<(usize, Segment)>; 8] = Default::default();
    for (n, line) in rows {
        let cells = tsv::fields(line);
        if cells.len() != HEADER.len() {
            errors.push(
                n,
                IssueKind::ColumnCount {
                    expected: HEADER.len(),
                    found: cells.len(),
                },
            );
            continue;
        }
        let track = Track::from_name(cells[0].trim());
        if track.is_none() {
            errors.push(n, IssueKind::UnknownComponent(cells[0].to_string()));
        }
        let label = track.map(|t| tsv::label(vocabularies.for_track(t), cells[1]));
        let begin = tsv::integer("begin_ms", cells[2]);
        let end = tsv::integer("end_ms", cells[3]);
        let mut ok = track.is_some();
        for r in [&begin, &end] {
            if let Err(kind) = r {
                errors.push(n, kind.clone());
                ok = false;
            }
        }
        if let Some(Err(kind)) = &label {
            errors.push(n, kind.clone());
            ok = false;
        }
        if !ok {
            continue;
        }
        let (track, label, begin_ms, end_ms) = (track.unwrap(), label.unwrap().unwrap(), begin.unwrap(), end.unwrap());
        if begin_ms >= end_ms {
            errors.push(n, IssueKind::EmptySegment { begin_ms, end_ms });
            continue;
        }
        per_track[track.index()].push((n, Segment::new(label, begin_ms, end_ms)));
    }

    let mut set = TimelineSet::new();
    for (&track, segments) in Track::ALL.iter().zip(per_track.iter_mut()) {
        segments.sort_by_key(|(_, s)| (s.begin_ms, s.end_ms));
        for pair in segments.windows(2) {
            if pair[1].1.begin_ms < pair[0].1.end_ms {
                errors.push(
                    pair[1].0,
                    IssueKind::Overlap {
                        track,
                        previous_line: pair[0].0,
                    },
                );
            }
        }
        if errors.is_empty() {
            match IntervalTimeline::new(track, segments.iter().map(|(_, s)| s.clone()).collect()) {
                Ok(t) => set.insert(t),
                Err(e) => unreachable!("segments were checked: {e}"),
            }
        }
    }
    errors.into_result(set)
}

pub fn parse_interval(path: &Path, vocabularies: &VocabularySet) -> Result<TimelineSet, CliError> {
    let text = tsv::read(path)?;
    Ok(parse_interval_str(&text, &path.display().to_string(), vocabularies)?)
}

/// Tracks in canonical order, segments by start time.
pub fn serialize_interval(set: &TimelineSet) -> String {
    let mut out = HEADER.join("\t");
    out.push('\n');
    for timeline in set.iter() {
        for s in timeline.segments() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                timeline.track().name(),
                s.label,
                s.begin_ms,
                s.end_ms
            ));
        }
    }
    out
}
