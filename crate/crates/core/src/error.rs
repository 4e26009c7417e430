use alloc::string::String;

use crate::vocab::{Component, Track};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{track}: segment [{begin_ms}, {end_ms}) must satisfy begin < end")]
    EmptySegment { track: Track, begin_ms: i64, end_ms: i64 },
    #[error("{track}: segments [{}, {}) and [{}, {}) overlap or are out of order", .first.0, .first.1, .second.0, .second.1)]
    Overlap {
        track: Track,
        first: (i64, i64),
        second: (i64, i64),
    },
    #[error("unknown {component} label \"{label}\"")]
    UnknownLabel { component: Component, label: String },
    #[error("duplicate {component} label \"{label}\"")]
    DuplicateLabel { component: Component, label: String },
    #[error("duration {duration_ms} ms is shorter than the last segment end {max_end_ms} ms")]
    DurationTooShort { duration_ms: i64, max_end_ms: i64 },
    #[error("rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("sampling rates differ: {gt} Hz vs {pred} Hz")]
    RateMismatch { gt: f64, pred: f64 },
    #[error("sequence lengths differ: {gt} vs {pred}")]
    LengthMismatch { gt: usize, pred: usize },
    #[error("cannot align track {a} with track {b}")]
    TrackMismatch { a: Track, b: Track },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("expected {expected} values, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("results mix tasks {expected} and {found}")]
    HeterogeneousTasks {
        expected: crate::ranking::Task,
        found: crate::ranking::Task,
    },
    #[error("team {team} has no {track} score for sequence {sequence}")]
    MissingScore {
        team: String,
        sequence: String,
        track: Track,
    },
    #[error("team {team} reports sequence {sequence} outside the test set")]
    UnknownSequence { team: String, sequence: String },
    #[error("score {value} for team {team} is outside [0, 100]")]
    ScoreOutOfRange { team: String, value: f64 },
    #[error("non-finite value in field {0}")]
    NonFinite(&'static str),
    #[error("rate {rate_hz} Hz is not an integer multiple of {target_hz} Hz")]
    NonIntegerStride { rate_hz: f64, target_hz: f64 },
    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(&'static str),
}
