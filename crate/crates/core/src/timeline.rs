//! Interval annotations and their frame-synchronous discretization.
//!
//! Segments are half-open `[begin_ms, end_ms)`. A frame `k` of a sequence
//! sampled at `rate_hz` sits at `k * 1000 / rate_hz` ms and takes the label
//! of the segment covering that instant, or `Idle`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vocab::{Track, VocabularySet, IDLE};

pub const DEFAULT_RATE_HZ: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub label: String,
    pub begin_ms: i64,
    pub end_ms: i64,
}

impl Segment {
    pub fn new(label: impl Into<String>, begin_ms: i64, end_ms: i64) -> Self {
        Self {
            label: label.into(),
            begin_ms,
            end_ms,
        }
    }
}

/// Sorted, non-overlapping labeled segments of one track. Gaps are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalTimeline {
    track: Track,
    segments: Vec<Segment>,
}

impl IntervalTimeline {
    pub fn empty(track: Track) -> Self {
        Self {
            track,
            segments: Vec::new(),
        }
    }

    /// Validates ordering and non-overlap. Labels are trimmed.
    pub fn new(track: Track, mut segments: Vec<Segment>) -> Result<Self> {
        for s in &mut segments {
            let trimmed = s.label.trim();
            if trimmed.len() != s.label.len() {
                s.label = trimmed.to_string();
            }
            if s.begin_ms >= s.end_ms {
                return Err(Error::EmptySegment {
                    track,
                    begin_ms: s.begin_ms,
                    end_ms: s.end_ms,
                });
            }
        }
        for w in segments.windows(2) {
            if w[1].begin_ms < w[0].end_ms {
                return Err(Error::Overlap {
                    track,
                    first: (w[0].begin_ms, w[0].end_ms),
                    second: (w[1].begin_ms, w[1].end_ms),
                });
            }
        }
        Ok(Self { track, segments })
    }

    pub fn track(&self) -> Track {
        self.track
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn max_end_ms(&self) -> Option<i64> {
        self.segments.last().map(|s| s.end_ms)
    }

    /// Label at instant `t_ms`, `None` inside a gap.
    pub fn label_at(&self, t_ms: f64) -> Option<&str> {
        self.segments
            .iter()
            .find(|s| s.begin_ms as f64 <= t_ms && t_ms < s.end_ms as f64)
            .map(|s| s.label.as_str())
    }
}

/// One timeline per track.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimelineSet {
    timelines: [IntervalTimeline; 8],
}

impl TimelineSet {
    pub fn new() -> Self {
        Self {
            timelines: Track::ALL.map(IntervalTimeline::empty),
        }
    }

    pub fn insert(&mut self, timeline: IntervalTimeline) {
        let i = timeline.track().index();
        self.timelines[i] = timeline;
    }

    pub fn with(mut self, timeline: IntervalTimeline) -> Self {
        self.insert(timeline);
        self
    }

    pub fn get(&self, track: Track) -> &IntervalTimeline {
        &self.timelines[track.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &IntervalTimeline> {
        self.timelines.iter()
    }

    pub fn max_end_ms(&self) -> i64 {
        self.iter().filter_map(IntervalTimeline::max_end_ms).max().unwrap_or(0)
    }
}

impl Default for TimelineSet {
    fn default() -> Self {
        Self::new()
    }
}

/// Labels of one frame, indexed by [`Track`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub timestamp: u64,
    pub labels: [String; 8],
}

impl FrameRecord {
    pub fn idle(timestamp: u64) -> Self {
        Self {
            timestamp,
            labels: core::array::from_fn(|_| IDLE.to_string()),
        }
    }

    pub fn label(&self, track: Track) -> &str {
        &self.labels[track.index()]
    }

    pub fn set(&mut self, track: Track, label: impl Into<String>) {
        self.labels[track.index()] = label.into();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSequence {
    pub rate_hz: f64,
    pub frames: Vec<FrameRecord>,
}

impl DiscreteSequence {
    /// Builds a sequence without checking frame invariants; see
    /// [`validate_sequence`].
    pub fn new(rate_hz: f64, frames: Vec<FrameRecord>) -> Self {
        Self { rate_hz, frames }
    }

    /// `len` idle frames.
    pub fn idle(rate_hz: f64, len: usize) -> Self {
        Self {
            rate_hz,
            frames: (0..len as u64).map(FrameRecord::idle).collect(),
        }
    }

    /// Builds a sequence where `track` carries `labels` and every other
    /// track is idle.
    pub fn from_track<S: AsRef<str>>(rate_hz: f64, track: Track, labels: &[S]) -> Self {
        let mut seq = Self::idle(rate_hz, labels.len());
        for (f, l) in seq.frames.iter_mut().zip(labels) {
            f.set(track, l.as_ref());
        }
        seq
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn track_labels(&self, track: Track) -> Vec<&str> {
        self.frames.iter().map(|f| f.label(track)).collect()
    }

    /// Shortest integer duration that discretizes back to `len()` frames.
    pub fn duration_ms(&self) -> i64 {
        let n = self.frames.len() as f64;
        let mut d = libm::ceil(n * 1000.0 / self.rate_hz) as i64;
        while d > 0 && frame_count(d - 1, self.rate_hz) >= self.frames.len() {
            d -= 1;
        }
        while frame_count(d, self.rate_hz) < self.frames.len() {
            d += 1;
        }
        d
    }

    /// Merges runs of equal non-idle labels into segments. Discretizing the
    /// result at the same rate with [`duration_ms`](Self::duration_ms)
    /// reproduces this sequence whenever frames are at least 1 ms apart.
    pub fn to_intervals(&self) -> TimelineSet {
        let mut set = TimelineSet::new();
        for track in Track::ALL {
            let mut segments = Vec::new();
            let mut start = 0usize;
            for k in 1..=self.frames.len() {
                let run_ends = k == self.frames.len() || self.frames[k].label(track) != self.frames[start].label(track);
                if run_ends {
                    let label = self.frames[start].label(track);
                    if label != IDLE {
                        segments.push(Segment::new(
                            label,
                            frame_start_ms(start, self.rate_hz),
                            frame_start_ms(k, self.rate_hz),
                        ));
                    }
                    start = k;
                }
            }
            let timeline = IntervalTimeline::new(track, segments).expect("runs of consecutive frames never overlap");
            set.insert(timeline);
        }
        set
    }
}

fn frame_count(duration_ms: i64, rate_hz: f64) -> usize {
    let n = libm::floor(duration_ms as f64 * rate_hz / 1000.0);
    if n <= 0.0 {
        0
    } else {
        n as usize
    }
}

/// Largest integer millisecond not after frame `k`'s sampling instant.
fn frame_start_ms(k: usize, rate_hz: f64) -> i64 {
    let kk = k as f64 * 1000.0;
    let mut t = libm::floor(kk / rate_hz) as i64;
    while t as f64 * rate_hz > kk {
        t -= 1;
    }
    while (t + 1) as f64 * rate_hz <= kk {
        t += 1;
    }
    t
}

fn check_rate(rate_hz: f64) -> Result<()> {
    if rate_hz.is_finite() && rate_hz > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRate(rate_hz))
    }
}

/// Point-samples every track at `k * 1000 / rate_hz` ms.
///
/// Produces `floor(duration_ms * rate_hz / 1000)` frames. `duration_ms`
/// defaults to the latest segment end over all tracks.
pub fn discretize(
    timelines: &TimelineSet,
    vocabularies: &VocabularySet,
    rate_hz: f64,
    duration_ms: Option<i64>,
) -> Result<DiscreteSequence> {
    check_rate(rate_hz)?;
    let max_end_ms = timelines.max_end_ms();
    let duration_ms = duration_ms.unwrap_or(max_end_ms);
    if duration_ms < max_end_ms {
        return Err(Error::DurationTooShort {
            duration_ms,
            max_end_ms,
        });
    }
    for timeline in timelines.iter() {
        let vocab = vocabularies.for_track(timeline.track());
        for s in timeline.segments() {
            vocab.lookup(&s.label)?;
        }
    }

    let n = frame_count(duration_ms, rate_hz);
    let mut frames: Vec<FrameRecord> = (0..n as u64).map(FrameRecord::idle).collect();
    for timeline in timelines.iter() {
        let track = timeline.track();
        // Segments are sorted, so a single cursor walks them alongside frames.
        let mut cursor = 0;
        let segments = timeline.segments();
        for (k, frame) in frames.iter_mut().enumerate() {
            let scaled = k as f64 * 1000.0;
            while cursor < segments.len() && segments[cursor].end_ms as f64 * rate_hz <= scaled {
                cursor += 1;
            }
            if cursor == segments.len() {
                break;
            }
            let s = &segments[cursor];
            if s.begin_ms as f64 * rate_hz <= scaled {
                frame.set(track, s.label.as_str());
            }
        }
    }
    Ok(DiscreteSequence::new(rate_hz, frames))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownLabel(String),
    EmptyLabel,
    NonConsecutiveTimestamp { expected: u64, found: u64 },
    InvalidRate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Position of the frame in the sequence.
    pub frame: usize,
    pub track: Option<Track>,
    pub kind: ViolationKind,
}

impl Violation {
    pub fn message(&self) -> String {
        match &self.kind {
            ViolationKind::UnknownLabel(l) => format!("unknown label \"{l}\""),
            ViolationKind::EmptyLabel => "empty label".to_string(),
            ViolationKind::NonConsecutiveTimestamp { expected, found } => {
                format!("timestamp {found}, expected {expected}")
            }
            ViolationKind::InvalidRate => "rate must be positive".to_string(),
        }
    }
}

/// Collects every invariant violation of `seq`. An empty report means the
/// sequence is well-formed.
pub fn validate_sequence(seq: &DiscreteSequence, vocabularies: &VocabularySet) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(seq.rate_hz.is_finite() && seq.rate_hz > 0.0) {
        out.push(Violation {
            frame: 0,
            track: None,
            kind: ViolationKind::InvalidRate,
        });
    }
    for (i, frame) in seq.frames.iter().enumerate() {
        let expected = if i == 0 { 0 } else { seq.frames[i - 1].timestamp + 1 };
        if frame.timestamp != expected {
            out.push(Violation {
                frame: i,
                track: None,
                kind: ViolationKind::NonConsecutiveTimestamp {
                    expected,
                    found: frame.timestamp,
                },
            });
        }
        for track in Track::ALL {
            let label = frame.label(track);
            if label.trim().is_empty() {
                out.push(Violation {
                    frame: i,
                    track: Some(track),
                    kind: ViolationKind::EmptyLabel,
                });
            } else if !vocabularies.for_track(track).contains(label) {
                out.push(Violation {
                    frame: i,
                    track: Some(track),
                    kind: ViolationKind::UnknownLabel(label.to_string()),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub gt_len: usize,
    pub pred_len: usize,
}

/// Frame-aligned view of a ground-truth/prediction pair.
#[derive(Debug, Clone, Copy)]
pub struct AlignedPair<'a> {
    pub gt: &'a [FrameRecord],
    pub pred: &'a [FrameRecord],
    pub rate_hz: f64,
    /// Set when the longer sequence was cut to the shorter one.
    pub truncation: Option<Truncation>,
}

impl AlignedPair<'_> {
    pub fn len(&self) -> usize {
        self.gt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gt.is_empty()
    }

    pub fn labels(&self, track: Track) -> (Vec<&str>, Vec<&str>) {
        (
            self.gt.iter().map(|f| f.label(track)).collect(),
            self.pred.iter().map(|f| f.label(track)).collect(),
        )
    }
}

pub fn align_pair<'a>(gt: &'a DiscreteSequence, pred: &'a DiscreteSequence) -> Result<AlignedPair<'a>> {
    if (gt.rate_hz - pred.rate_hz).abs() > 1e-9 {
        return Err(Error::RateMismatch {
            gt: gt.rate_hz,
            pred: pred.rate_hz,
        });
    }
    let n = gt.len().min(pred.len());
    let truncation = (gt.len() != pred.len()).then_some(Truncation {
        gt_len: gt.len(),
        pred_len: pred.len(),
    });
    Ok(AlignedPair {
        gt: &gt.frames[..n],
        pred: &pred.frames[..n],
        rate_hz: gt.rate_hz,
        truncation,
    })
}
