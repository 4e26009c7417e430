//! Evaluation reports: per-sequence and per-track scores rendered as JSON
//! (full precision, fixed key order) or as tab-separated tables with two
//! decimals and a trailing Mean row.

use misaw_core::metrics::{evaluate_track, AdConfig, ScoreSet, TrackScores};
use misaw_core::ranking::Task;
use misaw_core::timeline::{align_pair, DiscreteSequence};
use misaw_core::{Track, VocabularySet};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<ScoreSet> for Scores {
    fn from(s: ScoreSet) -> Self {
        Self {
            accuracy: s.accuracy,
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub frame: Scores,
    pub ad: Scores,
}

impl From<TrackScores> for ScoreRow {
    fn from(s: TrackScores) -> Self {
        Self {
            frame: s.frame.into(),
            ad: s.ad.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackEntry {
    pub track: &'static str,
    pub scores: ScoreRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationNote {
    pub gt_frames: usize,
    pub pred_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceReport {
    pub sequence: String,
    pub frames: usize,
    pub truncated: Option<TruncationNote>,
    pub tracks: Vec<TrackEntry>,
    /// The task's combined score (equal to the only track for phase and
    /// step).
    pub task: ScoreRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanReport {
    pub tracks: Vec<TrackEntry>,
    pub task: ScoreRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub task: &'static str,
    pub acceptable_delay_ms: f64,
    pub rate_hz: f64,
    pub sequences: Vec<SequenceReport>,
    pub mean: MeanReport,
}

pub struct SequencePair {
    pub id: String,
    pub gt: DiscreteSequence,
    pub pred: DiscreteSequence,
}

fn task_row(task: Task, per_track: &[(Track, TrackScores)]) -> TrackScores {
    let of = |t: Track| {
        per_track
            .iter()
            .find(|(k, _)| *k == t)
            .map(|(_, s)| *s)
            .unwrap_or_default()
    };
    match task {
        Task::Phase => of(Track::Phase),
        Task::Step => of(Track::Step),
        Task::Activity | Task::Multi => {
            let parts: Vec<TrackScores> = Track::ACTIVITY.iter().map(|&t| of(t)).collect();
            let activity = TrackScores::mean(&parts);
            if task == Task::Activity {
                activity
            } else {
                TrackScores::mean(&[of(Track::Phase), of(Track::Step), activity])
            }
        }
    }
}

/// Scores every pair on the task's tracks. Pairs are reported in the
/// given order.
pub fn evaluate(
    pairs: &[SequencePair],
    task: Task,
    vocabularies: &VocabularySet,
    cfg: &AdConfig,
) -> misaw_core::Result<EvaluationReport> {
    let mut sequences = Vec::with_capacity(pairs.len());
    let mut track_rows: Vec<Vec<TrackScores>> = vec![Vec::new(); task.tracks().len()];
    let mut task_rows = Vec::with_capacity(pairs.len());
    for p in pairs {
        let aligned = align_pair(&p.gt, &p.pred)?;
        let per_track = task
            .tracks()
            .iter()
            .map(|&t| Ok((t, evaluate_track(&aligned, t, vocabularies, cfg)?)))
            .collect::<misaw_core::Result<Vec<_>>>()?;
        for (rows, (_, s)) in track_rows.iter_mut().zip(&per_track) {
            rows.push(*s);
        }
        let combined = task_row(task, &per_track);
        task_rows.push(combined);
        sequences.push(SequenceReport {
            sequence: p.id.clone(),
            frames: aligned.len(),
            truncated: aligned.truncation.map(|t| TruncationNote {
                gt_frames: t.gt_len,
                pred_frames: t.pred_len,
            }),
            tracks: per_track
                .iter()
                .map(|(t, s)| TrackEntry {
                    track: t.name(),
                    scores: (*s).into(),
                })
                .collect(),
            task: combined.into(),
        });
    }
    let mean = MeanReport {
        tracks: task
            .tracks()
            .iter()
            .zip(&track_rows)
            .map(|(t, rows)| TrackEntry {
                track: t.name(),
                scores: TrackScores::mean(rows).into(),
            })
            .collect(),
        task: TrackScores::mean(&task_rows).into(),
    };
    Ok(EvaluationReport {
        task: task.name(),
        acceptable_delay_ms: cfg.acceptable_delay_ms,
        rate_hz: cfg.rate_hz,
        sequences,
        mean,
    })
}

pub const TABLE_COLUMNS: [&str; 9] = [
    "sequence",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "ad_accuracy",
    "ad_precision",
    "ad_recall",
    "ad_f1",
];

fn table_row(out: &mut String, name: &str, row: &ScoreRow) {
    out.push_str(name);
    for s in [&row.frame, &row.ad] {
        for v in [s.accuracy, s.precision, s.recall, s.f1] {
            out.push_str(&format!("\t{v:.2}"));
        }
    }
    out.push('\n');
}

fn table(out: &mut String, title: &str, rows: Vec<(&str, &ScoreRow)>, mean: &ScoreRow) {
    if !out.is_empty() {
        out.push('\n');
    }
    out.push_str(&format!("# {title}\n"));
    out.push_str(&TABLE_COLUMNS.join("\t"));
    out.push('\n');
    for (name, row) in rows {
        table_row(out, name, row);
    }
    table_row(out, "Mean", mean);
}

/// One table per track, plus a combined table for multi-track tasks.
pub fn render_tsv(report: &EvaluationReport) -> String {
    let mut out = String::new();
    for (i, entry) in report.mean.tracks.iter().enumerate() {
        let rows = report
            .sequences
            .iter()
            .map(|s| (s.sequence.as_str(), &s.tracks[i].scores))
            .collect();
        table(&mut out, entry.track, rows, &entry.scores);
    }
    if report.mean.tracks.len() > 1 {
        let rows = report
            .sequences
            .iter()
            .map(|s| (s.sequence.as_str(), &s.task))
            .collect();
        table(&mut out, report.task, rows, &report.mean.task);
    }
    out
}

pub fn render_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(labels: &[&str]) -> DiscreteSequence {
        DiscreteSequence::from_track(30.0, Track::Phase, labels)
    }

    #[test]
    fn identical_sequences_score_100() {
        let labels = ["Idle", "Suturing", "Suturing", "Knot Tying"];
        let pairs = [SequencePair {
            id: "1_1".into(),
            gt: seq(&labels),
            pred: seq(&labels),
        }];
        let r = evaluate(&pairs, Task::Phase, &VocabularySet::misaw(), &AdConfig::challenge()).unwrap();
        assert_eq!(r.mean.task.ad.accuracy, 100.0);
        let tsv = render_tsv(&r);
        assert_eq!(
            tsv,
            "# phase\n\
             sequence\taccuracy\tprecision\trecall\tf1\tad_accuracy\tad_precision\tad_recall\tad_f1\n\
             1_1\t100.00\t100.00\t100.00\t100.00\t100.00\t100.00\t100.00\t100.00\n\
             Mean\t100.00\t100.00\t100.00\t100.00\t100.00\t100.00\t100.00\t100.00\n"
        );
        let json = render_json(&r);
        let task = json.find("\"task\"").unwrap();
        let delay = json.find("\"acceptable_delay_ms\"").unwrap();
        assert!(task < delay);
    }

    #[test]
    fn multi_task_combines_components() {
        let gt = DiscreteSequence::idle(30.0, 10);
        let pairs = [SequencePair {
            id: "a".into(),
            gt: gt.clone(),
            pred: gt,
        }];
        let r = evaluate(&pairs, Task::Multi, &VocabularySet::misaw(), &AdConfig::challenge()).unwrap();
        assert_eq!(r.sequences[0].tracks.len(), 8);
        assert_eq!(r.mean.task.frame.f1, 100.0);
        let tsv = render_tsv(&r);
        assert_eq!(tsv.matches("# ").count(), 9);
        assert!(tsv.contains("# multi\n"));
    }
}
