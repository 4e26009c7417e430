//! Balanced frame-by-frame and application-dependent (AD) scores.
//!
//! Scores are macro averages over the classes present in the ground truth,
//! reported in percent. AD scores relabel the prediction around every
//! ground-truth transition that the prediction reproduces within the
//! acceptable delay, see [`ad_relabel`].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::timeline::AlignedPair;
use crate::vocab::{LabelVocabulary, Track, VocabularySet};

pub const DEFAULT_ACCEPTABLE_DELAY_MS: f64 = 500.0;

/// Rows are ground truth, columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: Vec<String>) -> Self {
        let n = classes.len();
        Self {
            classes,
            counts: vec![0; n * n],
        }
    }

    /// Builds a matrix from class indices; every index must be below
    /// `classes.len()`.
    pub fn from_indices(classes: Vec<String>, gt: &[usize], pred: &[usize]) -> Result<Self> {
        if gt.len() != pred.len() {
            return Err(Error::LengthMismatch {
                gt: gt.len(),
                pred: pred.len(),
            });
        }
        let mut cm = Self::zeros(classes);
        let n = cm.classes.len();
        for (&g, &p) in gt.iter().zip(pred) {
            assert!(g < n && p < n, "class index out of range");
            cm.counts[g * n + p] += 1;
        }
        Ok(cm)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn get(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.classes.len() + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, gt: usize) -> u64 {
        let n = self.classes.len();
        self.counts[gt * n..(gt + 1) * n].iter().sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        let n = self.classes.len();
        (0..n).map(|i| self.counts[i * n + pred]).sum()
    }
}

/// Tallies gt/pred label pairs over `vocab`'s classes.
pub fn confusion<S: AsRef<str>>(gt: &[S], pred: &[S], vocab: &LabelVocabulary) -> Result<ConfusionMatrix> {
    if gt.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gt: gt.len(),
            pred: pred.len(),
        });
    }
    let g = gt
        .iter()
        .map(|l| vocab.lookup(l.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let p = pred
        .iter()
        .map(|l| vocab.lookup(l.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    ConfusionMatrix::from_indices(vocab.labels().to_vec(), &g, &p)
}

/// Accuracy, precision, recall and F1 in percent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreSet {
    pub const PERFECT: ScoreSet = ScoreSet {
        accuracy: 100.0,
        precision: 100.0,
        recall: 100.0,
        f1: 100.0,
    };

    pub fn as_array(&self) -> [f64; 4] {
        [self.accuracy, self.precision, self.recall, self.f1]
    }

    /// Unweighted mean of each field; zeros for an empty slice.
    pub fn mean(sets: &[ScoreSet]) -> ScoreSet {
        if sets.is_empty() {
            return ScoreSet::default();
        }
        let n = sets.len() as f64;
        let sum = |f: fn(&ScoreSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
        ScoreSet {
            accuracy: sum(|s| s.accuracy),
            precision: sum(|s| s.precision),
            recall: sum(|s| s.recall),
            f1: sum(|s| s.f1),
        }
    }
}

/// Macro-averaged scores over the classes that occur in the ground truth.
///
/// A present class that is never predicted has precision 0 and F1 0.
/// Balanced accuracy is the mean per-class recall. A matrix without any
/// ground-truth frame scores 0 everywhere.
pub fn balanced_scores(cm: &ConfusionMatrix) -> ScoreSet {
    let mut present = 0usize;
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    for c in 0..cm.num_classes() {
        let support = cm.row_sum(c);
        if support == 0 {
            continue;
        }
        present += 1;
        let tp = cm.get(c, c) as f64;
        let predicted = cm.col_sum(c);
        let r = tp / support as f64;
        let p = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        recall += r;
        precision += p;
        if p + r > 0.0 {
            f1 += 2.0 * p * r / (p + r);
        }
    }
    if present == 0 {
        return ScoreSet::default();
    }
    let scale = 100.0 / present as f64;
    ScoreSet {
        accuracy: recall * scale,
        precision: precision * scale,
        recall: recall * scale,
        f1: f1 * scale,
    }
}

/// Acceptable delay `d` (full window width, centered on a ground-truth
/// transition) and the frame rate it is converted with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdConfig {
    pub acceptable_delay_ms: f64,
    pub rate_hz: f64,
}

impl AdConfig {
    pub fn new(acceptable_delay_ms: f64, rate_hz: f64) -> Result<Self> {
        if !(acceptable_delay_ms.is_finite() && acceptable_delay_ms >= 0.0) {
            return Err(Error::InvalidConfig("acceptable delay must be finite and >= 0"));
        }
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::InvalidRate(rate_hz));
        }
        Ok(Self {
            acceptable_delay_ms,
            rate_hz,
        })
    }

    /// Challenge setting: 500 ms at 30 Hz.
    pub fn challenge() -> Self {
        Self {
            acceptable_delay_ms: DEFAULT_ACCEPTABLE_DELAY_MS,
            rate_hz: 30.0,
        }
    }

    /// `floor((d / 2) * rate / 1000)` frames on each side of a transition.
    pub fn half_width(&self) -> usize {
        let w = libm::floor(self.acceptable_delay_ms / 2.0 * self.rate_hz / 1000.0);
        if w > 0.0 {
            w as usize
        } else {
            0
        }
    }
}

/// Rewrites the prediction inside every tolerance window whose ground-truth
/// transition the prediction reproduces.
///
/// For a ground-truth transition `X -> Y` between frames `t-1` and `t`, the
/// window is `[t-w, t+w]` clipped to the sequence. If the prediction has an
/// `X -> Y` transition at some boundary `b` in `[t-w, t+w]`, every frame of
/// the window takes its ground-truth label. All windows are matched
/// against the same prediction and their rewrites are applied in temporal
/// order; the pass repeats on the rewritten prediction until nothing
/// changes, so the result is a fixed point (and the function idempotent).
pub fn ad_relabel<T: PartialEq + Clone>(gt: &[T], pred: &[T], cfg: &AdConfig) -> Result<Vec<T>> {
    if gt.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gt: gt.len(),
            pred: pred.len(),
        });
    }
    let n = gt.len();
    let w = cfg.half_width();
    let mut adjusted = pred.to_vec();
    if n < 2 || w == 0 {
        // a zero-width window can only rewrite frames that already match
        return Ok(adjusted);
    }
    let windows: Vec<(usize, usize, usize)> = (1..n)
        .filter(|&t| gt[t - 1] != gt[t])
        .map(|t| (t, t.saturating_sub(w), (t + w).min(n - 1)))
        .collect();

    let mut matched = vec![false; windows.len()];
    loop {
        for (m, &(t, lo, hi)) in matched.iter_mut().zip(&windows) {
            if !*m {
                *m = (lo.max(1)..=hi).any(|b| adjusted[b - 1] == gt[t - 1] && adjusted[b] == gt[t]);
            }
        }
        let mut changed = false;
        for (_, lo, hi) in windows.iter().zip(&matched).filter(|(_, m)| **m).map(|(w, _)| *w) {
            for k in lo..=hi {
                if adjusted[k] != gt[k] {
                    adjusted[k] = gt[k].clone();
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(adjusted);
        }
    }
}

/// Balanced scores without any delay tolerance.
pub fn frame_scores<S: AsRef<str>>(gt: &[S], pred: &[S], vocab: &LabelVocabulary) -> Result<ScoreSet> {
    Ok(balanced_scores(&confusion(gt, pred, vocab)?))
}

/// Balanced scores of `gt` against the AD-relabeled prediction.
pub fn ad_scores<S: AsRef<str>>(gt: &[S], pred: &[S], vocab: &LabelVocabulary, cfg: &AdConfig) -> Result<ScoreSet> {
    let g: Vec<&str> = gt.iter().map(|s| s.as_ref().trim()).collect();
    let p: Vec<&str> = pred.iter().map(|s| s.as_ref().trim()).collect();
    let adjusted = ad_relabel(&g, &p, cfg)?;
    Ok(balanced_scores(&confusion(&g, &adjusted, vocab)?))
}

/// Frame-by-frame and AD scores of one track.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackScores {
    pub frame: ScoreSet,
    pub ad: ScoreSet,
}

impl TrackScores {
    pub fn mean(all: &[TrackScores]) -> TrackScores {
        let frame: Vec<ScoreSet> = all.iter().map(|s| s.frame).collect();
        let ad: Vec<ScoreSet> = all.iter().map(|s| s.ad).collect();
        TrackScores {
            frame: ScoreSet::mean(&frame),
            ad: ScoreSet::mean(&ad),
        }
    }
}

pub fn evaluate_track(
    pair: &AlignedPair<'_>,
    track: Track,
    vocabularies: &VocabularySet,
    cfg: &AdConfig,
) -> Result<TrackScores> {
    if (pair.rate_hz - cfg.rate_hz).abs() > 1e-9 {
        return Err(Error::RateMismatch {
            gt: pair.rate_hz,
            pred: cfg.rate_hz,
        });
    }
    let (gt, pred) = pair.labels(track);
    let vocab = vocabularies.for_track(track);
    Ok(TrackScores {
        frame: frame_scores(&gt, &pred, vocab)?,
        ad: ad_scores(&gt, &pred, vocab, cfg)?,
    })
}

/// Mean of the six per-arm verb/target/instrument scores.
pub fn activity_scores(pair: &AlignedPair<'_>, vocabularies: &VocabularySet, cfg: &AdConfig) -> Result<TrackScores> {
    let parts = Track::ACTIVITY
        .iter()
        .map(|&t| evaluate_track(pair, t, vocabularies, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackScores::mean(&parts))
}

/// AD score set of the activity task.
pub fn activity_score_set(pair: &AlignedPair<'_>, vocabularies: &VocabularySet, cfg: &AdConfig) -> Result<ScoreSet> {
    Ok(activity_scores(pair, vocabularies, cfg)?.ad)
}
