//! Seeded generator of ground-truth/prediction label sequences with
//! controlled boundary jitter and label substitutions.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::timeline::DiscreteSequence;
use crate::vocab::{LabelVocabulary, Track};

/// SplitMix64 (Steele, Lea and Flood). State advances by the golden-ratio
/// increment `0x9E3779B97F4A7C15`; output is mixed with the multipliers
/// `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB` and shifts 30, 27, 31.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform-ish in `[0, n)` by multiply-shift (`n > 0`).
    pub fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Inclusive range `[lo, hi]`.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo) as u64 + 1;
        lo + self.below(span) as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub num_segments: usize,
    /// Inclusive segment length range in frames.
    pub segment_len: (usize, usize),
    pub labels: Vec<String>,
    /// Inclusive signed jitter range in frames, applied per transition.
    pub jitter: (i64, i64),
    pub substitution_prob: f64,
}

impl SynthSpec {
    pub fn new(seed: u64, labels: Vec<String>) -> Self {
        Self {
            seed,
            num_segments: 10,
            segment_len: (20, 60),
            labels,
            jitter: (0, 0),
            substitution_prob: 0.0,
        }
    }

    /// Draws labels from `vocab`, Idle included.
    pub fn for_vocabulary(seed: u64, vocab: &LabelVocabulary) -> Self {
        Self::new(seed, vocab.labels().to_vec())
    }

    pub fn with_segments(mut self, num_segments: usize, min_len: usize, max_len: usize) -> Self {
        self.num_segments = num_segments;
        self.segment_len = (min_len, max_len);
        self
    }

    pub fn with_jitter(mut self, lo: i64, hi: i64) -> Self {
        self.jitter = (lo, hi);
        self
    }

    pub fn with_substitution(mut self, prob: f64) -> Self {
        self.substitution_prob = prob;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (min_len, max_len) = self.segment_len;
        if self.num_segments == 0 {
            return Err(Error::InvalidConfig("at least one segment is required"));
        }
        if min_len == 0 || min_len > max_len {
            return Err(Error::InvalidConfig("segment lengths must satisfy 1 <= min <= max"));
        }
        if !(0.0..=1.0).contains(&self.substitution_prob) {
            return Err(Error::InvalidConfig("substitution probability must lie in [0, 1]"));
        }
        if self.labels.len() < 2 {
            return Err(Error::InvalidConfig("at least two labels are required"));
        }
        if self
            .labels
            .iter()
            .enumerate()
            .any(|(i, l)| self.labels[..i].contains(l))
        {
            return Err(Error::InvalidConfig("labels must be distinct"));
        }
        let (jlo, jhi) = self.jitter;
        if jlo > jhi {
            return Err(Error::InvalidConfig("jitter range must satisfy min <= max"));
        }
        // shifted boundaries must stay ordered and strictly inside the sequence
        let min_len = min_len as i64;
        if jhi - jlo >= min_len || jlo.abs().max(jhi.abs()) >= min_len {
            return Err(Error::InfeasibleSpec("jitter exceeds the shortest segment length"));
        }
        Ok(())
    }
}

/// One ground-truth transition and how the prediction reproduces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    /// First frame of the new ground-truth segment.
    pub gt_frame: usize,
    pub jitter: i64,
    pub gt_labels: (String, String),
    pub pred_labels: (String, String),
}

impl Transition {
    /// True when an AD window of half-width `w` frames must absorb this
    /// transition: the shift is within the window and the prediction's
    /// label pair equals the ground truth's.
    pub fn absorbed_by(&self, w: usize) -> bool {
        self.jitter.unsigned_abs() <= w as u64 && self.gt_labels == self.pred_labels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPair {
    pub gt: Vec<String>,
    pub pred: Vec<String>,
    pub transitions: Vec<Transition>,
}

impl SynthPair {
    pub fn len(&self) -> usize {
        self.gt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gt.is_empty()
    }

    pub fn absorbed_count(&self, w: usize) -> usize {
        self.transitions.iter().filter(|t| t.absorbed_by(w)).count()
    }

    /// Places both label sequences on `track`, all other tracks idle.
    pub fn to_sequences(&self, track: Track, rate_hz: f64) -> (DiscreteSequence, DiscreteSequence) {
        (
            DiscreteSequence::from_track(rate_hz, track, &self.gt),
            DiscreteSequence::from_track(rate_hz, track, &self.pred),
        )
    }
}

fn pick_other(rng: &mut SplitMix64, labels: &[String], avoid: usize) -> usize {
    let k = rng.below(labels.len() as u64 - 1) as usize;
    if k >= avoid {
        k + 1
    } else {
        k
    }
}

/// Draws segment lengths and labels (consecutive labels distinct), then one
/// jitter per transition, then one substitution decision per segment.
pub fn generate_pair(spec: &SynthSpec) -> Result<SynthPair> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let (min_len, max_len) = spec.segment_len;
    let labels = &spec.labels;

    let mut lengths = Vec::with_capacity(spec.num_segments);
    let mut gt_idx: Vec<usize> = Vec::with_capacity(spec.num_segments);
    for i in 0..spec.num_segments {
        lengths.push(rng.range_i64(min_len as i64, max_len as i64) as usize);
        let label = if i == 0 {
            rng.below(labels.len() as u64) as usize
        } else {
            pick_other(&mut rng, labels, gt_idx[i - 1])
        };
        gt_idx.push(label);
    }
    let jitters: Vec<i64> = (1..spec.num_segments)
        .map(|_| rng.range_i64(spec.jitter.0, spec.jitter.1))
        .collect();
    let pred_idx: Vec<usize> = gt_idx
        .iter()
        .map(|&g| {
            if rng.next_f64() < spec.substitution_prob {
                pick_other(&mut rng, labels, g)
            } else {
                g
            }
        })
        .collect();

    let n: usize = lengths.iter().sum();
    let mut gt = Vec::with_capacity(n);
    for (&len, &g) in lengths.iter().zip(&gt_idx) {
        gt.extend(core::iter::repeat_n(labels[g].clone(), len));
    }

    let mut boundaries = Vec::with_capacity(jitters.len());
    let mut acc = 0;
    for &len in &lengths[..lengths.len() - 1] {
        acc += len;
        boundaries.push(acc);
    }
    let mut pred = Vec::with_capacity(n);
    let mut start = 0usize;
    for (seg, &p) in pred_idx.iter().enumerate() {
        let end = if seg < boundaries.len() {
            (boundaries[seg] as i64 + jitters[seg]) as usize
        } else {
            n
        };
        pred.extend(core::iter::repeat_n(labels[p].clone(), end - start));
        start = end;
    }

    let transitions = boundaries
        .iter()
        .enumerate()
        .map(|(i, &b)| Transition {
            gt_frame: b,
            jitter: jitters[i],
            gt_labels: (labels[gt_idx[i]].clone(), labels[gt_idx[i + 1]].clone()),
            pred_labels: (labels[pred_idx[i]].clone(), labels[pred_idx[i + 1]].clone()),
        })
        .collect();
    Ok(SynthPair { gt, pred, transitions })
}
