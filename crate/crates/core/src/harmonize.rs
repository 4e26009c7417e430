//! Two-observer annotation harmonization.
//!
//! Segments of both observers are paired by a label edit-distance
//! alignment. Paired boundaries closer than the merge threshold are
//! replaced by their rounded mean; the others stay unresolved. A second
//! pass over the observers' refined timelines uses a tighter threshold, and
//! whatever remains goes to a consensus list together with the segments
//! the alignment could not pair.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::timeline::{IntervalTimeline, Segment, TimelineSet};
use crate::vocab::{Track, IDLE};

pub const FIRST_PASS_THRESHOLD_MS: f64 = 1000.0;
pub const SECOND_PASS_THRESHOLD_MS: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverTimeline {
    pub observer: String,
    pub timelines: TimelineSet,
}

impl ObserverTimeline {
    pub fn new(observer: impl Into<String>, timelines: TimelineSet) -> Self {
        Self {
            observer: observer.into(),
            timelines,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeConfig {
    pub threshold_ms: f64,
}

impl MergeConfig {
    pub fn new(threshold_ms: f64) -> Result<Self> {
        if threshold_ms.is_finite() && threshold_ms > 0.0 {
            Ok(Self { threshold_ms })
        } else {
            Err(Error::InvalidConfig("merge threshold must be positive"))
        }
    }

    pub fn first_pass() -> Self {
        Self {
            threshold_ms: FIRST_PASS_THRESHOLD_MS,
        }
    }

    pub fn second_pass() -> Self {
        Self {
            threshold_ms: SECOND_PASS_THRESHOLD_MS,
        }
    }
}

/// One edit operation of a segment alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignOp {
    Match(usize, usize),
    /// Both observers have a segment here but with different labels.
    Substitute(usize, usize),
    OnlyA(usize),
    OnlyB(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackAlignment {
    pub track: Track,
    pub ops: Vec<AlignOp>,
}

impl TrackAlignment {
    pub fn matched(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.ops.iter().filter_map(|op| match *op {
            AlignOp::Match(a, b) => Some((a, b)),
            _ => None,
        })
    }

    pub fn distance(&self) -> usize {
        self.ops.iter().filter(|op| !matches!(op, AlignOp::Match(..))).count()
    }
}

fn segment_key(s: &Segment) -> (i64, i64, &str) {
    (s.end_ms, s.begin_ms, s.label.as_str())
}

/// Minimal edit-distance alignment of the two label sequences.
///
/// Among optimal alignments, matches are preferred over substitutions,
/// and substitutions over insertions/deletions. Between skipping the last
/// segment of A or of B, the later-ending one is skipped, so swapping the
/// observers mirrors the alignment.
pub fn align_track(a: &IntervalTimeline, b: &IntervalTimeline) -> Result<TrackAlignment> {
    if a.track() != b.track() {
        return Err(Error::TrackMismatch {
            a: a.track(),
            b: b.track(),
        });
    }
    let (sa, sb) = (a.segments(), b.segments());
    let (n, m) = (sa.len(), sb.len());
    let mut cost = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in cost.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, c) in cost[0].iter_mut().enumerate() {
        *c = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = cost[i - 1][j - 1] + usize::from(sa[i - 1].label != sb[j - 1].label);
            cost[i][j] = diag.min(cost[i - 1][j] + 1).min(cost[i][j - 1] + 1);
        }
    }

    let mut ops = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let c = cost[i][j];
        if i > 0 && j > 0 {
            let same = sa[i - 1].label == sb[j - 1].label;
            if same && c == cost[i - 1][j - 1] {
                ops.push(AlignOp::Match(i - 1, j - 1));
                i -= 1;
                j -= 1;
                continue;
            }
            if !same && c == cost[i - 1][j - 1] + 1 {
                ops.push(AlignOp::Substitute(i - 1, j - 1));
                i -= 1;
                j -= 1;
                continue;
            }
        }
        let skip_a = i > 0 && c == cost[i - 1][j] + 1;
        let skip_b = j > 0 && c == cost[i][j - 1] + 1;
        let take_a = match (skip_a, skip_b) {
            (true, true) => segment_key(&sa[i - 1]).cmp(&segment_key(&sb[j - 1])) != Ordering::Less,
            (a_only, _) => a_only,
        };
        if take_a {
            ops.push(AlignOp::OnlyA(i - 1));
            i -= 1;
        } else {
            ops.push(AlignOp::OnlyB(j - 1));
            j -= 1;
        }
    }
    ops.reverse();
    Ok(TrackAlignment { track: a.track(), ops })
}

/// Aligns every track of the two observers.
pub fn align_segments(a: &ObserverTimeline, b: &ObserverTimeline) -> Result<Vec<TrackAlignment>> {
    Track::ALL
        .iter()
        .map(|&t| align_track(a.timelines.get(t), b.timelines.get(t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Begin,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Resolved(i64),
    Unresolved { a_ms: i64, b_ms: i64 },
}

impl Boundary {
    pub fn resolved(self) -> Option<i64> {
        match self {
            Boundary::Resolved(t) => Some(t),
            Boundary::Unresolved { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedSegment {
    pub label: String,
    pub begin: Boundary,
    pub end: Boundary,
    /// Segment indices in observer A's and B's timelines.
    pub source: (usize, usize),
}

impl MergedSegment {
    fn boundary_mut(&mut self, side: Side) -> &mut Boundary {
        match side {
            Side::Begin => &mut self.begin,
            Side::End => &mut self.end,
        }
    }

    fn boundary(&self, side: Side) -> Boundary {
        match side {
            Side::Begin => self.begin,
            Side::End => self.end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedTrack {
    pub track: Track,
    pub segments: Vec<MergedSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncertainTransition {
    pub track: Track,
    pub source: (usize, usize),
    pub side: Side,
    pub a_ms: i64,
    pub b_ms: i64,
    /// Labels on each side of the transition, from observer A's timeline.
    pub label_before: String,
    pub label_after: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedBoundary {
    pub track: Track,
    pub source: (usize, usize),
    pub side: Side,
    pub a_ms: i64,
    pub b_ms: i64,
    pub merged_ms: i64,
}

/// A segment the alignment could not pair with the other observer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralDisagreement {
    pub track: Track,
    pub a: Option<(usize, Segment)>,
    pub b: Option<(usize, Segment)>,
}

/// Merged boundaries that do not form a valid timeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeViolation {
    pub track: Track,
    /// Index into the merged track's segments.
    pub segment: usize,
    pub begin_ms: i64,
    pub end_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeOutcome {
    pub merged: Vec<MergedTrack>,
    pub resolved: Vec<ResolvedBoundary>,
    pub uncertain: Vec<UncertainTransition>,
    pub structural: Vec<StructuralDisagreement>,
    pub violations: Vec<MergeViolation>,
}

impl MergeOutcome {
    /// The merged timelines, when every boundary is resolved and nothing
    /// needs a consensus decision.
    pub fn timelines(&self) -> Option<TimelineSet> {
        if !self.uncertain.is_empty() || !self.structural.is_empty() || !self.violations.is_empty() {
            return None;
        }
        try_timelines(&self.merged)
    }
}

fn try_timelines(merged: &[MergedTrack]) -> Option<TimelineSet> {
    let mut set = TimelineSet::new();
    for t in merged {
        let segments = t
            .segments
            .iter()
            .map(|s| Some(Segment::new(s.label.clone(), s.begin.resolved()?, s.end.resolved()?)))
            .collect::<Option<Vec<_>>>()?;
        set.insert(IntervalTimeline::new(t.track, segments).ok()?);
    }
    Some(set)
}

/// Half-away-from-zero rounded mean of two integer times.
pub fn mean_ms(a: i64, b: i64) -> i64 {
    let s = a + b;
    if s >= 0 {
        (s + 1) / 2
    } else {
        (s - 1) / 2
    }
}

fn neighbour_label(segments: &[Segment], i: usize, side: Side) -> String {
    let neighbour = match side {
        Side::Begin => i
            .checked_sub(1)
            .map(|p| &segments[p])
            .filter(|p| p.end_ms == segments[i].begin_ms),
        Side::End => segments.get(i + 1).filter(|n| n.begin_ms == segments[i].end_ms),
    };
    neighbour.map_or(IDLE.to_string(), |s| s.label.clone())
}

fn boundary_time(s: &Segment, side: Side) -> i64 {
    match side {
        Side::Begin => s.begin_ms,
        Side::End => s.end_ms,
    }
}

fn merge_track(a: &IntervalTimeline, b: &IntervalTimeline, cfg: &MergeConfig, out: &mut MergeOutcome) -> Result<()> {
    let alignment = align_track(a, b)?;
    let track = alignment.track;
    let (sa, sb) = (a.segments(), b.segments());
    let mut segments = Vec::new();
    for op in &alignment.ops {
        match *op {
            AlignOp::Match(i, j) => {
                let mut merged = MergedSegment {
                    label: sa[i].label.clone(),
                    begin: Boundary::Resolved(0),
                    end: Boundary::Resolved(0),
                    source: (i, j),
                };
                for side in [Side::Begin, Side::End] {
                    let (ta, tb) = (boundary_time(&sa[i], side), boundary_time(&sb[j], side));
                    if ((ta - tb).abs() as f64) < cfg.threshold_ms {
                        let m = mean_ms(ta, tb);
                        *merged.boundary_mut(side) = Boundary::Resolved(m);
                        out.resolved.push(ResolvedBoundary {
                            track,
                            source: (i, j),
                            side,
                            a_ms: ta,
                            b_ms: tb,
                            merged_ms: m,
                        });
                    } else {
                        *merged.boundary_mut(side) = Boundary::Unresolved { a_ms: ta, b_ms: tb };
                        let (before, after) = match side {
                            Side::Begin => (neighbour_label(sa, i, side), sa[i].label.clone()),
                            Side::End => (sa[i].label.clone(), neighbour_label(sa, i, side)),
                        };
                        out.uncertain.push(UncertainTransition {
                            track,
                            source: (i, j),
                            side,
                            a_ms: ta,
                            b_ms: tb,
                            label_before: before,
                            label_after: after,
                        });
                    }
                }
                segments.push(merged);
            }
            AlignOp::Substitute(i, j) => out.structural.push(StructuralDisagreement {
                track,
                a: Some((i, sa[i].clone())),
                b: Some((j, sb[j].clone())),
            }),
            AlignOp::OnlyA(i) => out.structural.push(StructuralDisagreement {
                track,
                a: Some((i, sa[i].clone())),
                b: None,
            }),
            AlignOp::OnlyB(j) => out.structural.push(StructuralDisagreement {
                track,
                a: None,
                b: Some((j, sb[j].clone())),
            }),
        }
    }
    out.merged.push(MergedTrack { track, segments });
    Ok(())
}

/// Reports resolved boundaries that cross: a segment ending at or before
/// its begin, or starting before the previous resolved end.
pub fn check_merged(merged: &[MergedTrack]) -> Vec<MergeViolation> {
    let mut out = Vec::new();
    for t in merged {
        let mut last_end: Option<i64> = None;
        for (k, s) in t.segments.iter().enumerate() {
            let (begin, end) = (s.begin.resolved(), s.end.resolved());
            let crosses_self = matches!((begin, end), (Some(b), Some(e)) if b >= e);
            let crosses_prev = matches!((last_end, begin), (Some(p), Some(b)) if b < p);
            if crosses_self || crosses_prev {
                out.push(MergeViolation {
                    track: t.track,
                    segment: k,
                    begin_ms: begin.unwrap_or(i64::MIN),
                    end_ms: end.unwrap_or(i64::MAX),
                });
            }
            if end.is_some() {
                last_end = end;
            }
        }
    }
    out
}

/// One automatic merging pass over all tracks.
pub fn auto_merge(a: &ObserverTimeline, b: &ObserverTimeline, cfg: &MergeConfig) -> Result<MergeOutcome> {
    let mut out = MergeOutcome {
        merged: Vec::new(),
        resolved: Vec::new(),
        uncertain: Vec::new(),
        structural: Vec::new(),
        violations: Vec::new(),
    };
    for track in Track::ALL {
        merge_track(a.timelines.get(track), b.timelines.get(track), cfg, &mut out)?;
    }
    out.violations = check_merged(&out.merged);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonizationReport {
    pub merged: Vec<MergedTrack>,
    pub first_pass: Vec<ResolvedBoundary>,
    pub second_pass: Vec<ResolvedBoundary>,
    /// Boundaries left for a consensus decision between the observers.
    pub consensus: Vec<UncertainTransition>,
    pub structural: Vec<StructuralDisagreement>,
    pub violations: Vec<MergeViolation>,
}

impl HarmonizationReport {
    pub fn timelines(&self) -> Option<TimelineSet> {
        if !self.consensus.is_empty() || !self.structural.is_empty() || !self.violations.is_empty() {
            return None;
        }
        try_timelines(&self.merged)
    }
}

/// Full two-pass protocol: a first merge with the one-second threshold,
/// then a half-second merge of the refined timelines for the boundaries the
/// first pass left unresolved. Refined timelines should keep the original
/// segment structure; a boundary whose segment pair is no longer matched in
/// the refined alignment goes to the consensus list.
pub fn harmonization_pipeline(
    a: &ObserverTimeline,
    b: &ObserverTimeline,
    refined_a: &ObserverTimeline,
    refined_b: &ObserverTimeline,
) -> Result<HarmonizationReport> {
    let first = auto_merge(a, b, &MergeConfig::first_pass())?;
    let second = auto_merge(refined_a, refined_b, &MergeConfig::second_pass())?;

    let mut merged = first.merged.clone();
    let mut second_pass = Vec::new();
    let mut consensus = Vec::new();
    for u in &first.uncertain {
        let refined_segment = second
            .merged
            .iter()
            .find(|t| t.track == u.track)
            .and_then(|t| t.segments.iter().find(|s| s.source == u.source));
        match refined_segment.map(|s| s.boundary(u.side)) {
            Some(Boundary::Resolved(m)) => {
                let r = second
                    .resolved
                    .iter()
                    .find(|r| r.track == u.track && r.source == u.source && r.side == u.side)
                    .expect("resolved boundaries are recorded")
                    .clone();
                let seg = merged
                    .iter_mut()
                    .find(|t| t.track == u.track)
                    .and_then(|t| t.segments.iter_mut().find(|s| s.source == u.source))
                    .expect("first-pass uncertainty refers to a merged segment");
                *seg.boundary_mut(u.side) = Boundary::Resolved(m);
                second_pass.push(r);
            }
            Some(Boundary::Unresolved { a_ms, b_ms }) => {
                let refined = second
                    .uncertain
                    .iter()
                    .find(|r| r.track == u.track && r.source == u.source && r.side == u.side);
                consensus.push(refined.cloned().unwrap_or(UncertainTransition {
                    a_ms,
                    b_ms,
                    ..u.clone()
                }));
            }
            None => consensus.push(u.clone()),
        }
    }
    let violations = check_merged(&merged);
    Ok(HarmonizationReport {
        merged,
        first_pass: first.resolved,
        second_pass,
        consensus,
        structural: first.structural,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn observer(name: &str, track: Track, segs: &[(&str, i64, i64)]) -> ObserverTimeline {
        let segments = segs.iter().map(|&(l, b, e)| Segment::new(l, b, e)).collect();
        ObserverTimeline::new(
            name,
            TimelineSet::new().with(IntervalTimeline::new(track, segments).unwrap()),
        )
    }

    fn phase(name: &str, segs: &[(&str, i64, i64)]) -> ObserverTimeline {
        observer(name, Track::Phase, segs)
    }

    #[test]
    fn rounded_mean() {
        assert_eq!(mean_ms(1000, 1400), 1200);
        assert_eq!(mean_ms(1000, 1001), 1001);
        assert_eq!(mean_ms(-3, 0), -2);
        assert_eq!(mean_ms(-4, 0), -2);
        assert_eq!(mean_ms(0, 0), 0);
    }

    #[test]
    fn close_boundaries_merge_to_mean() {
        let a = phase("A", &[("Suturing", 0, 1000), ("Knot Tying", 1000, 5000)]);
        let b = phase("B", &[("Suturing", 0, 1400), ("Knot Tying", 1400, 5000)]);
        let out = auto_merge(&a, &b, &MergeConfig::first_pass()).unwrap();
        assert!(out.uncertain.is_empty());
        let t = out.timelines().unwrap();
        assert_eq!(t.get(Track::Phase).segments()[0].end_ms, 1200);
        assert_eq!(t.get(Track::Phase).segments()[1].begin_ms, 1200);
    }

    #[test]
    fn distant_boundaries_are_uncertain() {
        let a = phase("A", &[("Suturing", 0, 1000), ("Knot Tying", 1000, 5000)]);
        let b = phase("B", &[("Suturing", 0, 2400), ("Knot Tying", 2400, 5000)]);
        let out = auto_merge(&a, &b, &MergeConfig::first_pass()).unwrap();
        assert_eq!(out.uncertain.len(), 2);
        let u = &out.uncertain[0];
        assert_eq!((u.a_ms, u.b_ms, u.side), (1000, 2400, Side::End));
        assert_eq!(
            (u.label_before.as_str(), u.label_after.as_str()),
            ("Suturing", "Knot Tying")
        );
        assert_eq!(
            out.merged[0].segments[0].end,
            Boundary::Unresolved { a_ms: 1000, b_ms: 2400 }
        );
        assert!(out.timelines().is_none());
    }

    #[test]
    fn threshold_is_strict() {
        let a = phase("A", &[("Suturing", 0, 1000)]);
        let b = phase("B", &[("Suturing", 0, 2000)]);
        let out = auto_merge(&a, &b, &MergeConfig::first_pass()).unwrap();
        assert_eq!(out.uncertain.len(), 1);
    }

    #[test]
    fn alignment_cases() {
        let a = phase("A", &[("Suturing", 0, 100), ("Knot Tying", 100, 200)]);
        let b = phase("B", &[("Suturing", 3, 98), ("Knot Tying", 98, 210)]);
        let al = align_track(a.timelines.get(Track::Phase), b.timelines.get(Track::Phase)).unwrap();
        assert_eq!(al.ops, [AlignOp::Match(0, 0), AlignOp::Match(1, 1)]);

        // B has an extra segment in the middle
        let a = observer(
            "A",
            Track::Step,
            &[
                ("Needle holding", 0, 10),
                ("Suture making", 10, 20),
                ("1° knot", 30, 40),
            ],
        );
        let b = observer(
            "B",
            Track::Step,
            &[
                ("Needle holding", 0, 10),
                ("Suture making", 10, 20),
                ("Suture handling", 20, 30),
                ("1° knot", 30, 40),
            ],
        );
        let al = align_track(a.timelines.get(Track::Step), b.timelines.get(Track::Step)).unwrap();
        assert_eq!(
            al.ops,
            [
                AlignOp::Match(0, 0),
                AlignOp::Match(1, 1),
                AlignOp::OnlyB(2),
                AlignOp::Match(2, 3)
            ]
        );
        let out = auto_merge(&a, &b, &MergeConfig::first_pass()).unwrap();
        assert_eq!(out.structural.len(), 1);
        assert_eq!(out.structural[0].b.as_ref().unwrap().0, 2);

        let e = IntervalTimeline::empty(Track::Phase);
        assert!(align_track(&e, &e).unwrap().ops.is_empty());
        assert!(align_track(&e, &IntervalTimeline::empty(Track::Step)).is_err());
    }

    #[test]
    fn pipeline_second_pass_and_consensus() {
        let a = phase("A", &[("Suturing", 0, 1000), ("Knot Tying", 1000, 9000)]);
        let b = phase("B", &[("Suturing", 0, 2400), ("Knot Tying", 2400, 9000)]);
        // refined to 300 ms apart: resolved in the second pass
        let ra = phase("A", &[("Suturing", 0, 1500), ("Knot Tying", 1500, 9000)]);
        let rb = phase("B", &[("Suturing", 0, 1800), ("Knot Tying", 1800, 9000)]);
        let report = harmonization_pipeline(&a, &b, &ra, &rb).unwrap();
        assert_eq!(report.first_pass.len(), 2);
        assert_eq!(report.second_pass.len(), 2);
        assert!(report.consensus.is_empty());
        let t = report.timelines().unwrap();
        assert_eq!(t.get(Track::Phase).segments()[0].end_ms, 1650);

        // still 800 ms apart after refinement: consensus
        let rb = phase("B", &[("Suturing", 0, 2300), ("Knot Tying", 2300, 9000)]);
        let report = harmonization_pipeline(&a, &b, &ra, &rb).unwrap();
        assert!(report.second_pass.is_empty());
        assert_eq!(report.consensus.len(), 2);
        assert_eq!((report.consensus[0].a_ms, report.consensus[0].b_ms), (1500, 2300));
        assert!(report.timelines().is_none());
    }

    #[test]
    fn pipeline_all_close() {
        let a = phase("A", &[("Suturing", 0, 1000), ("Knot Tying", 1000, 9000)]);
        let b = phase("B", &[("Suturing", 0, 1300), ("Knot Tying", 1300, 9100)]);
        let report = harmonization_pipeline(&a, &b, &a, &b).unwrap();
        assert_eq!(report.first_pass.len(), 4);
        assert!(report.consensus.is_empty() && report.second_pass.is_empty());
    }

    #[test]
    fn crossing_boundaries_are_reported() {
        let seg = |label: &str, begin, end, k| MergedSegment {
            label: label.to_string(),
            begin,
            end,
            source: (k, k),
        };
        let merged = [MergedTrack {
            track: Track::Phase,
            segments: vec![
                seg("Suturing", Boundary::Resolved(0), Boundary::Resolved(500), 0),
                seg(
                    "Knot Tying",
                    Boundary::Resolved(400),
                    Boundary::Unresolved { a_ms: 0, b_ms: 9 },
                    1,
                ),
                seg("Suturing", Boundary::Resolved(700), Boundary::Resolved(700), 2),
            ],
        }];
        let v = check_merged(&merged);
        assert_eq!(v.len(), 2);
        assert_eq!((v[0].segment, v[1].segment), (1, 2));
    }

    fn arb_observer() -> impl Strategy<Value = ObserverTimeline> {
        let labels: Vec<&'static str> = vec!["Needle holding", "Suture making", "Suture handling", "1° knot"];
        prop::collection::vec((0i64..3000, 1i64..5000, 0usize..4), 0..10).prop_map(move |parts| {
            let mut t = 0;
            let mut segments = Vec::new();
            for (gap, len, li) in parts {
                let begin = t + gap;
                segments.push(Segment::new(labels[li], begin, begin + len));
                t = begin + len;
            }
            ObserverTimeline::new(
                "x",
                TimelineSet::new().with(IntervalTimeline::new(Track::Step, segments).unwrap()),
            )
        })
    }

    fn jitter(x: &ObserverTimeline, deltas: &[i64]) -> ObserverTimeline {
        let segs = x.timelines.get(Track::Step).segments();
        let mut out: Vec<Segment> = Vec::new();
        for (k, s) in segs.iter().enumerate() {
            let d = deltas.get(k).copied().unwrap_or(0);
            let lo = out.last().map_or(0, |p| p.end_ms);
            let begin = (s.begin_ms + d).max(lo);
            let end = (s.end_ms + d).max(begin + 1);
            out.push(Segment::new(s.label.clone(), begin, end));
        }
        ObserverTimeline::new(
            "y",
            TimelineSet::new().with(IntervalTimeline::new(Track::Step, out).unwrap()),
        )
    }

    proptest! {
        #[test]
        fn self_merge_is_identity(x in arb_observer()) {
            let out = auto_merge(&x, &x, &MergeConfig::first_pass()).unwrap();
            prop_assert!(out.uncertain.is_empty());
            prop_assert_eq!(out.timelines(), Some(x.timelines.clone()));
        }

        #[test]
        fn merge_is_symmetric_and_between(x in arb_observer(), y in arb_observer(), deltas in prop::collection::vec(-1500i64..1500, 10)) {
            let cfg = MergeConfig::first_pass();
            for (a, b) in [(x.clone(), y.clone()), (x.clone(), jitter(&x, &deltas))] {
                let ab = auto_merge(&a, &b, &cfg).unwrap();
                let ba = auto_merge(&b, &a, &cfg).unwrap();
                prop_assert_eq!(ab.merged.len(), ba.merged.len());
                for (ta, tb) in ab.merged.iter().zip(&ba.merged) {
                    prop_assert_eq!(ta.segments.len(), tb.segments.len());
                    for (sa, sb) in ta.segments.iter().zip(&tb.segments) {
                        prop_assert_eq!(sa.source, (sb.source.1, sb.source.0));
                        prop_assert_eq!(sa.begin.resolved(), sb.begin.resolved());
                        prop_assert_eq!(sa.end.resolved(), sb.end.resolved());
                    }
                }
                prop_assert_eq!(ab.uncertain.len(), ba.uncertain.len());
                for (u, v) in ab.uncertain.iter().zip(&ba.uncertain) {
                    prop_assert_eq!((u.a_ms, u.b_ms), (v.b_ms, v.a_ms));
                    prop_assert!(((u.a_ms - u.b_ms).abs() as f64) >= cfg.threshold_ms);
                }
                for r in &ab.resolved {
                    prop_assert!(r.merged_ms >= r.a_ms.min(r.b_ms) && r.merged_ms <= r.a_ms.max(r.b_ms));
                }
            }
        }
    }
}
