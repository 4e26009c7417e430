//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails unexpectedly.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use misaw::discrete::serialize_discrete;
use misaw_core::harmonize::{auto_merge, MergeConfig, ObserverTimeline};
use misaw_core::kinematics::{
    homogeneous_left, homogeneous_right, znormalize, ArmSample, KinematicSample, KinematicSeries,
};
use misaw_core::metrics::{ad_relabel, ad_scores, balanced_scores, confusion, frame_scores, AdConfig, ScoreSet};
use misaw_core::ranking::{
    impute_missing, rank_table, s_multi, s_uni, RankingMethod, StabilityVerdict, Task, TeamResult,
};
use misaw_core::synth::{generate_pair, SplitMix64, SynthSpec};
use misaw_core::timeline::{IntervalTimeline, Segment, TimelineSet};
use misaw_core::{Component, LabelVocabulary, Track, VocabularySet};

const MEAN_TOLERANCE: f64 = 0.005;
// room for the binary representation of values like 66.945
const REPRESENTATION_SLACK: f64 = 1e-9;

/// Tables whose printed AD-accuracy mean cannot be reproduced from the
/// printed per-sequence values, as (team, table). The printed mean was rounded from unrounded per-sequence values, so the
/// two-decimal rows average to 52.394 while the table shows 52.40.
const EXPECTED_MISMATCHES: &[(&str, &str)] = &[("SK", "activity_multi")];

enum Outcome {
    Pass(String),
    Fail(String),
    ExpectedFail(String),
}

struct FixtureRow {
    team: String,
    table: String,
    sequence: String,
    values: [f64; 8],
}

fn fixture() -> Vec<FixtureRow> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/challenge_results.tsv");
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            let mut values = [0.0; 8];
            for (v, raw) in values.iter_mut().zip(&c[3..]) {
                *v = raw.parse().unwrap();
            }
            FixtureRow {
                team: c[0].into(),
                table: c[1].into(),
                sequence: c[2].into(),
                values,
            }
        })
        .collect()
}

const AD_ACCURACY: usize = 4;

fn criterion_1() -> Outcome {
    let rows = fixture();
    let mut tables: BTreeMap<(String, String), (Vec<f64>, Option<f64>)> = BTreeMap::new();
    for r in &rows {
        let entry = tables.entry((r.team.clone(), r.table.clone())).or_default();
        if r.sequence == "Mean" {
            entry.1 = Some(r.values[AD_ACCURACY]);
        } else {
            entry.0.push(r.values[AD_ACCURACY]);
        }
    }
    let mut mismatches = Vec::new();
    let mut means = BTreeMap::new();
    for ((team, table), (values, printed)) in &tables {
        let printed = printed.expect("every table has a Mean row");
        let got = s_uni(values).unwrap();
        means.insert((team.as_str(), table.as_str()), got);
        if (got - printed).abs() > MEAN_TOLERANCE + REPRESENTATION_SLACK {
            mismatches.push((team.clone(), table.clone(), got, printed));
        }
    }
    let mut notes = Vec::new();
    let medair_phase = means[&("MedAIR", "phase")];
    let medair_step = means[&("MedAIR", "step")];
    let multi = s_multi(94.10, 74.64, 61.69);
    let examples_ok = (medair_phase - 96.53).abs() <= MEAN_TOLERANCE
        && (medair_step - 84.02).abs() <= MEAN_TOLERANCE
        && (multi - 76.81).abs() <= MEAN_TOLERANCE;
    notes.push(format!(
        "{} tables; MedAIR phase {medair_phase:.4}, step {medair_step:.4}; NUSControlLab multi {multi:.4}",
        tables.len()
    ));
    for (team, table, got, printed) in &mismatches {
        notes.push(format!("{team}/{table}: mean {got:.4} vs printed {printed:.2}"));
    }
    let detail = notes.join("; ");
    let found: Vec<(&str, &str)> = mismatches.iter().map(|(t, k, _, _)| (t.as_str(), k.as_str())).collect();
    if !examples_ok || tables.len() != 31 {
        Outcome::Fail(detail)
    } else if found.is_empty() {
        Outcome::Pass(detail)
    } else if found == EXPECTED_MISMATCHES {
        Outcome::ExpectedFail(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_2() -> Outcome {
    let three = impute_missing(3).unwrap();
    let twelve = impute_missing(12).unwrap();
    let detail = format!("impute_missing(3) = {three:.4}, impute_missing(12) = {twelve:.4}");
    if (three - 33.33).abs() <= MEAN_TOLERANCE && (twelve - 8.33).abs() <= MEAN_TOLERANCE {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

/// Rewrites windows by scanning them one frame at a time, repeating until
/// neither the set of reproduced transitions nor the labels change.
fn window_scan_oracle(gt: &[String], pred: &[String], w: usize) -> Vec<String> {
    let n = gt.len();
    let mut out = pred.to_vec();
    if w == 0 {
        return out;
    }
    let mut reproduced = vec![false; n];
    loop {
        let mut changed = false;
        for t in 1..n {
            if gt[t - 1] == gt[t] || reproduced[t] {
                continue;
            }
            let lo = t.saturating_sub(w);
            let hi = (t + w).min(n - 1);
            let mut b = lo.max(1);
            while b <= hi {
                if out[b - 1] == gt[t - 1] && out[b] == gt[t] {
                    reproduced[t] = true;
                    changed = true;
                    break;
                }
                b += 1;
            }
        }
        let snapshot = out.clone();
        for (t, _) in reproduced.iter().enumerate().filter(|(_, r)| **r) {
            let lo = t.saturating_sub(w);
            let hi = (t + w).min(n - 1);
            out[lo..=hi].clone_from_slice(&gt[lo..=hi]);
        }
        if out != snapshot {
            changed = true;
        }
        if !changed {
            return out;
        }
    }
}

/// Per-class tallies straight from the label lists; macro averages over the
/// classes present in the ground truth.
fn tally_oracle(gt: &[String], pred: &[String], classes: &[String]) -> ScoreSet {
    let mut recall_sum = 0.0;
    let mut precision_sum = 0.0;
    let mut f1_sum = 0.0;
    let mut present = 0.0;
    for c in classes {
        let mut tp = 0u64;
        let mut fn_ = 0u64;
        let mut fp = 0u64;
        for (g, p) in gt.iter().zip(pred) {
            match (g == c, p == c) {
                (true, true) => tp += 1,
                (true, false) => fn_ += 1,
                (false, true) => fp += 1,
                _ => {}
            }
        }
        if tp + fn_ == 0 {
            continue;
        }
        present += 1.0;
        let r = tp as f64 / (tp + fn_) as f64;
        let p = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        recall_sum += r;
        precision_sum += p;
        f1_sum += f;
    }
    if present == 0.0 {
        return ScoreSet::default();
    }
    ScoreSet {
        accuracy: 100.0 * recall_sum / present,
        precision: 100.0 * precision_sum / present,
        recall: 100.0 * recall_sum / present,
        f1: 100.0 * f1_sum / present,
    }
}

fn close(a: &ScoreSet, b: &ScoreSet, tol: f64) -> bool {
    a.as_array().iter().zip(b.as_array()).all(|(x, y)| (x - y).abs() <= tol)
}

fn vocabulary(classes: usize) -> LabelVocabulary {
    LabelVocabulary::new(Component::Verb, (1..classes).map(|i| format!("c{i}"))).unwrap()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0xAD);
    let mut failures = Vec::new();
    let mut longest = 0;
    for pair_no in 0..1000 {
        let classes = rng.range_i64(2, 11) as usize;
        let vocab = vocabulary(classes);
        let segments = rng.range_i64(1, 30) as usize;
        let max_len = (600 / segments).min(60);
        let min_len = rng.range_i64(1, max_len as i64) as usize;
        let j = rng.range_i64(0, (min_len as i64 - 1) / 2);
        let spec = SynthSpec::for_vocabulary(rng.next_u64(), &vocab)
            .with_segments(segments, min_len, max_len)
            .with_jitter(-j, j)
            .with_substitution(rng.next_f64() * 0.5);
        let pair = generate_pair(&spec).unwrap();
        longest = longest.max(pair.len());
        let delay = rng.range_i64(0, 2000) as f64;
        let cfg = AdConfig::new(delay, 30.0).unwrap();
        let zero = AdConfig::new(0.0, 30.0).unwrap();

        let fbf = frame_scores(&pair.gt, &pair.pred, &vocab).unwrap();
        let ad = ad_scores(&pair.gt, &pair.pred, &vocab, &cfg).unwrap();
        if ad.accuracy + 1e-12 < fbf.accuracy {
            failures.push(format!(
                "pair {pair_no}: AD accuracy {} < {}",
                ad.accuracy, fbf.accuracy
            ));
        }
        if ad_scores(&pair.gt, &pair.pred, &vocab, &zero).unwrap() != fbf {
            failures.push(format!("pair {pair_no}: d=0 differs from frame-by-frame"));
        }
        let relabeled = window_scan_oracle(&pair.gt, &pair.pred, cfg.half_width());
        let oracle = tally_oracle(&pair.gt, &relabeled, vocab.labels());
        if !close(&ad, &oracle, 1e-9) {
            failures.push(format!("pair {pair_no}: {ad:?} vs oracle {oracle:?}"));
        }
        let once = ad_relabel(&pair.gt, &pair.pred, &cfg).unwrap();
        if ad_relabel(&pair.gt, &once, &cfg).unwrap() != once {
            failures.push(format!("pair {pair_no}: relabel not idempotent"));
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "1000 pairs up to {longest} frames in {:.2} s{}",
        elapsed.as_secs_f64(),
        failures.first().map(|f| format!("; {f}")).unwrap_or_default()
    );
    if failures.is_empty() && elapsed.as_secs_f64() < 10.0 && longest <= 600 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_4() -> Outcome {
    let mut rng = SplitMix64::new(0xBA1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let classes = rng.range_i64(2, 11) as usize;
        let vocab = vocabulary(classes);
        let len = rng.range_i64(1, 400) as usize;
        // skew predictions toward the ground truth so every regime appears
        let agree = rng.next_f64();
        let labels = vocab.labels();
        let gt: Vec<String> = (0..len)
            .map(|_| labels[rng.below(classes as u64) as usize].clone())
            .collect();
        let pred: Vec<String> = gt
            .iter()
            .map(|g| {
                if rng.next_f64() < agree {
                    g.clone()
                } else {
                    labels[rng.below(classes as u64) as usize].clone()
                }
            })
            .collect();
        let got = balanced_scores(&confusion(&gt, &pred, &vocab).unwrap());
        let want = tally_oracle(&gt, &pred, labels);
        for (a, b) in got.as_array().iter().zip(want.as_array()) {
            worst = worst.max((a - b).abs());
        }
    }
    let detail = format!("1000 pairs, max deviation {worst:.2e}");
    if worst <= 1e-9 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_5() -> Outcome {
    let h = homogeneous_left(&ArmSample::default()).unwrap();
    let identity_err =
        h.0.iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(j, v)| (v - f64::from(u8::from(i == j))).abs())
            })
            .fold(0.0, f64::max);

    let mut rng = SplitMix64::new(0x4B1);
    let mut uniform = |lo: f64, hi: f64| lo + (hi - lo) * rng.next_f64();
    let mut ortho: f64 = 0.0;
    let mut det: f64 = 0.0;
    let mut bottom_ok = true;
    let mut samples = Vec::new();
    for _ in 0..10_000 {
        let mut v = [0.0; 16];
        for (k, x) in v.iter_mut().enumerate() {
            *x = match k % 8 {
                0..=2 => uniform(-200.0, 200.0),
                3..=5 => uniform(-10.0, 10.0),
                6 => uniform(-7.0, 1.0),
                _ => uniform(-5.0, 5.0),
            };
        }
        let s = KinematicSample::from_array(v);
        for h in [homogeneous_left(&s.left).unwrap(), homogeneous_right(&s.right).unwrap()] {
            ortho = ortho.max(h.orthonormality_error());
            det = det.max((h.rotation_determinant() - 1.0).abs());
            bottom_ok &= h.0[3] == [0.0, 0.0, 0.0, 1.0];
        }
        samples.push(s);
    }
    let z = znormalize(&KinematicSeries::new(30.0, samples).unwrap());
    let n = z.len() as f64;
    let mut mean_err: f64 = 0.0;
    let mut std_err: f64 = 0.0;
    for d in 0..16 {
        let col: Vec<f64> = z.samples.iter().map(|s| s.to_array()[d]).collect();
        let mean = col.iter().sum::<f64>() / n;
        let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        mean_err = mean_err.max(mean.abs());
        std_err = std_err.max((std - 1.0).abs());
    }
    let detail = format!(
        "identity err {identity_err:.1e}; max |RtR-I| {ortho:.1e}; max |det-1| {det:.1e}; z mean err {mean_err:.1e}, std err {std_err:.1e}"
    );
    if identity_err <= 1e-12 && ortho <= 1e-9 && det <= 1e-9 && bottom_ok && mean_err <= 1e-9 && std_err <= 1e-9 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn two_phase(boundary: i64) -> ObserverTimeline {
    let t = IntervalTimeline::new(
        Track::Phase,
        vec![
            Segment::new("Suturing", 0, boundary),
            Segment::new("Knot Tying", boundary, 6000),
        ],
    )
    .unwrap();
    ObserverTimeline::new("obs", TimelineSet::new().with(t))
}

fn random_timelines(rng: &mut SplitMix64) -> TimelineSet {
    let vocabularies = VocabularySet::misaw();
    let mut set = TimelineSet::new();
    for track in Track::ALL {
        let labels = vocabularies.for_track(track).labels();
        let mut segments = Vec::new();
        let mut t = rng.range_i64(0, 500);
        for _ in 0..rng.range_i64(0, 12) {
            let len = rng.range_i64(1, 3000);
            segments.push(Segment::new(
                labels[rng.below(labels.len() as u64) as usize].clone(),
                t,
                t + len,
            ));
            t += len + rng.range_i64(0, 1) * rng.range_i64(0, 800);
        }
        set.insert(IntervalTimeline::new(track, segments).unwrap());
    }
    set
}

fn criterion_6() -> Outcome {
    let cfg = MergeConfig::new(1000.0).unwrap();
    let near = auto_merge(&two_phase(1000), &two_phase(1400), &cfg).unwrap();
    let merged_boundary = near.timelines().map(|t| t.get(Track::Phase).segments()[0].end_ms);
    let far = auto_merge(&two_phase(1000), &two_phase(2400), &cfg).unwrap();
    // both sides of the shared boundary are listed
    let flagged = !far.uncertain.is_empty()
        && far.uncertain.iter().all(|u| (u.a_ms, u.b_ms) == (1000, 2400))
        && far.timelines().is_none();

    let mut rng = SplitMix64::new(0x4A2);
    let mut self_ok = 0;
    for _ in 0..100 {
        let x = ObserverTimeline::new("x", random_timelines(&mut rng));
        let out = auto_merge(&x, &x, &cfg).unwrap();
        if out.uncertain.is_empty() && out.timelines().as_ref() == Some(&x.timelines) {
            self_ok += 1;
        }
    }
    let detail = format!(
        "(1000, 1400) -> {merged_boundary:?}; (1000, 2400) uncertain: {flagged}; self-merge identity {self_ok}/100"
    );
    if merged_boundary == Some(1200) && flagged && self_ok == 100 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn team(name: &str, values: [f64; 3]) -> TeamResult {
    TeamResult::new(name, Task::Phase).with_values(
        Track::Phase,
        values.iter().enumerate().map(|(i, &v)| (format!("s{i}"), v)),
    )
}

fn criterion_7() -> Outcome {
    let methods = [RankingMethod::MeanThenRank, RankingMethod::MedianThenRank];
    let split = [
        team("A", [90.0, 90.0, 10.0]),
        team("B", [80.0, 80.0, 80.0]),
        team("C", [50.0, 50.0, 50.0]),
    ];
    let agree = [
        team("A", [90.0, 90.0, 90.0]),
        team("B", [80.0, 80.0, 80.0]),
        team("C", [50.0, 50.0, 50.0]),
    ];
    let split_verdict = rank_table(&split, &methods).unwrap().verdict;
    let agree_verdict = rank_table(&agree, &methods).unwrap().verdict;
    let expected = StabilityVerdict::Ties(vec![vec!["A".to_string(), "B".to_string()]]);
    let detail = format!("disagreeing fixture: {split_verdict:?}; agreeing fixture: {agree_verdict:?}");
    if split_verdict == expected && agree_verdict == StabilityVerdict::Stable {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let vocabularies = VocabularySet::misaw();
    let spec = SynthSpec::for_vocabulary(8, vocabularies.for_track(Track::Step))
        .with_jitter(-6, 6)
        .with_substitution(0.2);
    let pair = generate_pair(&spec).unwrap();
    let (gt, pred) = pair.to_sequences(Track::Step, 30.0);
    let gt_path = dir.path().join("gt.tsv");
    let pred_path = dir.path().join("pred.tsv");
    std::fs::write(&gt_path, serialize_discrete(&gt)).unwrap();
    std::fs::write(&pred_path, serialize_discrete(&pred)).unwrap();

    let mut details = Vec::new();
    let mut ok = true;
    for format in ["tsv", "json"] {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_misaw"))
                .args(["evaluate", "--task", "multi", "--format", format])
                .arg(&gt_path)
                .arg(&pred_path)
                .output()
                .unwrap()
        };
        let (first, second) = (run(), run());
        let same = first.status.success() && first.stdout == second.stdout && !first.stdout.is_empty();
        ok &= same && second.status.success();
        details.push(format!("{format}: {} bytes, identical {same}", first.stdout.len()));
    }
    let detail = details.join("; ");
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("aggregation golden tables", criterion_1),
        ("missing-result imputation", criterion_2),
        ("AD window properties", criterion_3),
        ("balanced-score oracle", criterion_4),
        ("kinematic transforms and normalization", criterion_5),
        ("harmonization", criterion_6),
        ("ranking stability", criterion_7),
        ("end-to-end determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let line = match check() {
            Outcome::Pass(d) => format!("PASS  criterion {} {name}: {d}", i + 1),
            Outcome::ExpectedFail(d) => format!("FAIL  criterion {} {name} (known input defect): {d}", i + 1),
            Outcome::Fail(d) => {
                failed += 1;
                format!("FAIL  criterion {} {name}: {d}", i + 1)
            }
        };
        println!("{line}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
