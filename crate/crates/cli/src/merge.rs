//! JSON rendering of two-observer harmonization results.

use misaw_core::harmonize::{
    Boundary, HarmonizationReport, MergeOutcome, MergedTrack, ResolvedBoundary, Side, StructuralDisagreement,
    UncertainTransition,
};
use misaw_core::timeline::Segment;
use serde::Serialize;

#[derive(Serialize)]
#[serde(untagged)]
enum BoundaryJson {
    Resolved(i64),
    Unresolved { a_ms: i64, b_ms: i64 },
}

impl From<Boundary> for BoundaryJson {
    fn from(b: Boundary) -> Self {
        match b {
            Boundary::Resolved(t) => BoundaryJson::Resolved(t),
            Boundary::Unresolved { a_ms, b_ms } => BoundaryJson::Unresolved { a_ms, b_ms },
        }
    }
}

fn side(s: Side) -> &'static str {
    match s {
        Side::Begin => "begin",
        Side::End => "end",
    }
}

#[derive(Serialize)]
struct SegmentJson<'a> {
    label: &'a str,
    begin_ms: BoundaryJson,
    end_ms: BoundaryJson,
    source: (usize, usize),
}

#[derive(Serialize)]
struct TrackJson<'a> {
    track: &'static str,
    segments: Vec<SegmentJson<'a>>,
}

#[derive(Serialize)]
struct ResolvedJson {
    track: &'static str,
    source: (usize, usize),
    side: &'static str,
    a_ms: i64,
    b_ms: i64,
    merged_ms: i64,
}

#[derive(Serialize)]
struct UncertainJson<'a> {
    track: &'static str,
    source: (usize, usize),
    side: &'static str,
    a_ms: i64,
    b_ms: i64,
    label_before: &'a str,
    label_after: &'a str,
}

#[derive(Serialize)]
struct SideSegment<'a> {
    index: usize,
    label: &'a str,
    begin_ms: i64,
    end_ms: i64,
}

#[derive(Serialize)]
struct StructuralJson<'a> {
    track: &'static str,
    a: Option<SideSegment<'a>>,
    b: Option<SideSegment<'a>>,
}

#[derive(Serialize)]
struct ViolationJson {
    track: &'static str,
    segment: usize,
    begin_ms: i64,
    end_ms: i64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    complete: bool,
    merged: Vec<TrackJson<'a>>,
    first_pass: Vec<ResolvedJson>,
    second_pass: Vec<ResolvedJson>,
    consensus: Vec<UncertainJson<'a>>,
    structural: Vec<StructuralJson<'a>>,
    violations: Vec<ViolationJson>,
}

fn tracks(merged: &[MergedTrack]) -> Vec<TrackJson<'_>> {
    merged
        .iter()
        .map(|t| TrackJson {
            track: t.track.name(),
            segments: t
                .segments
                .iter()
                .map(|s| SegmentJson {
                    label: &s.label,
                    begin_ms: s.begin.into(),
                    end_ms: s.end.into(),
                    source: s.source,
                })
                .collect(),
        })
        .collect()
}

fn resolved(list: &[ResolvedBoundary]) -> Vec<ResolvedJson> {
    list.iter()
        .map(|r| ResolvedJson {
            track: r.track.name(),
            source: r.source,
            side: side(r.side),
            a_ms: r.a_ms,
            b_ms: r.b_ms,
            merged_ms: r.merged_ms,
        })
        .collect()
}

fn uncertain(list: &[UncertainTransition]) -> Vec<UncertainJson<'_>> {
    list.iter()
        .map(|u| UncertainJson {
            track: u.track.name(),
            source: u.source,
            side: side(u.side),
            a_ms: u.a_ms,
            b_ms: u.b_ms,
            label_before: &u.label_before,
            label_after: &u.label_after,
        })
        .collect()
}

fn side_segment(s: &Option<(usize, Segment)>) -> Option<SideSegment<'_>> {
    s.as_ref().map(|(i, seg)| SideSegment {
        index: *i,
        label: &seg.label,
        begin_ms: seg.begin_ms,
        end_ms: seg.end_ms,
    })
}

fn structural(list: &[StructuralDisagreement]) -> Vec<StructuralJson<'_>> {
    list.iter()
        .map(|d| StructuralJson {
            track: d.track.name(),
            a: side_segment(&d.a),
            b: side_segment(&d.b),
        })
        .collect()
}

pub fn render_pipeline(report: &HarmonizationReport) -> String {
    let json = ReportJson {
        complete: report.timelines().is_some(),
        merged: tracks(&report.merged),
        first_pass: resolved(&report.first_pass),
        second_pass: resolved(&report.second_pass),
        consensus: uncertain(&report.consensus),
        structural: structural(&report.structural),
        violations: report
            .violations
            .iter()
            .map(|v| ViolationJson {
                track: v.track.name(),
                segment: v.segment,
                begin_ms: v.begin_ms,
                end_ms: v.end_ms,
            })
            .collect(),
    };
    crate::report::render_json(&json)
}

/// A single first-pass merge in the same layout as the full pipeline;
/// every unresolved boundary is listed for consensus.
pub fn render_single_pass(outcome: &MergeOutcome) -> String {
    let report = HarmonizationReport {
        merged: outcome.merged.clone(),
        first_pass: outcome.resolved.clone(),
        second_pass: Vec::new(),
        consensus: outcome.uncertain.clone(),
        structural: outcome.structural.clone(),
        violations: outcome.violations.clone(),
    };
    render_pipeline(&report)
}
