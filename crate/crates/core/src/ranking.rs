//! Aggregation of per-sequence AD-accuracies into task scores, missing
//! result imputation, ranking under several aggregation methods and the
//! ranking stability verdict.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::vocab::{Track, VocabularySet};

/// Scores closer than this are tied.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Phase,
    Step,
    Activity,
    Multi,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Phase, Task::Step, Task::Activity, Task::Multi];

    /// Tracks whose scores the task needs.
    pub fn tracks(self) -> &'static [Track] {
        match self {
            Task::Phase => &[Track::Phase],
            Task::Step => &[Track::Step],
            Task::Activity => &Track::ACTIVITY,
            Task::Multi => &Track::ALL,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Phase => "phase",
            Task::Step => "step",
            Task::Activity => "activity",
            Task::Multi => "multi",
        }
    }

    pub fn from_name(name: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mean over test sequences.
pub fn s_uni(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("no per-sequence scores"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Mean of the six activity components, in [`Track::ACTIVITY`] order.
pub fn s_activity(components: &[f64]) -> Result<f64> {
    if components.len() != 6 {
        return Err(Error::Arity {
            expected: 6,
            found: components.len(),
        });
    }
    Ok(components.iter().sum::<f64>() / 6.0)
}

pub fn s_multi(phase: f64, step: f64, activity: f64) -> f64 {
    (phase + step + activity) / 3.0
}

/// Score of a random guess over `num_classes` classes, in percent.
pub fn impute_missing(num_classes: usize) -> Result<f64> {
    if num_classes == 0 {
        return Err(Error::InvalidConfig("number of classes must be >= 1"));
    }
    Ok(100.0 / num_classes as f64)
}

/// AD-accuracy per track for one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SequenceScores {
    values: [Option<f64>; 8],
}

impl SequenceScores {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, track: Track, value: f64) -> Self {
        self.set(track, value);
        self
    }

    pub fn set(&mut self, track: Track, value: f64) {
        self.values[track.index()] = Some(value);
    }

    pub fn get(&self, track: Track) -> Option<f64> {
        self.values[track.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamResult {
    pub team: String,
    pub task: Task,
    pub competing: bool,
    pub per_sequence: BTreeMap<String, SequenceScores>,
}

/// A score filled in by [`TeamResult::impute`].
#[derive(Debug, Clone, PartialEq)]
pub struct Imputed {
    pub team: String,
    pub sequence: String,
    pub track: Track,
    pub value: f64,
}

impl TeamResult {
    pub fn new(team: impl Into<String>, task: Task) -> Self {
        Self {
            team: team.into(),
            task,
            competing: true,
            per_sequence: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, sequence: impl Into<String>, scores: SequenceScores) {
        self.per_sequence.insert(sequence.into(), scores);
    }

    /// Convenience for single-track tasks.
    pub fn with_values<S: Into<String>>(mut self, track: Track, values: impl IntoIterator<Item = (S, f64)>) -> Self {
        for (seq, v) in values {
            let entry = self.per_sequence.entry(seq.into()).or_default();
            entry.set(track, v);
        }
        self
    }

    /// Checks score bounds and that every sequence belongs to `test_set`.
    pub fn validate(&self, test_set: &[String]) -> Result<()> {
        for (seq, scores) in &self.per_sequence {
            if !test_set.iter().any(|s| s == seq) {
                return Err(Error::UnknownSequence {
                    team: self.team.clone(),
                    sequence: seq.clone(),
                });
            }
            for &track in self.task.tracks() {
                if let Some(v) = scores.get(track) {
                    if !(0.0..=100.0).contains(&v) {
                        return Err(Error::ScoreOutOfRange {
                            team: self.team.clone(),
                            value: v,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Fills every missing track score of every test sequence with the
    /// random-guess score of that track's vocabulary size.
    pub fn impute(&mut self, test_set: &[String], vocabularies: &VocabularySet) -> Vec<Imputed> {
        let mut out = Vec::new();
        for seq in test_set {
            let entry = self.per_sequence.entry(seq.clone()).or_default();
            for &track in self.task.tracks() {
                if entry.get(track).is_none() {
                    let value = 100.0 / vocabularies.for_track(track).len() as f64;
                    entry.set(track, value);
                    out.push(Imputed {
                        team: self.team.clone(),
                        sequence: seq.clone(),
                        track,
                        value,
                    });
                }
            }
        }
        out
    }

    fn track_value(&self, sequence: &str, track: Track) -> Result<f64> {
        self.per_sequence
            .get(sequence)
            .and_then(|s| s.get(track))
            .ok_or_else(|| Error::MissingScore {
                team: self.team.clone(),
                sequence: sequence.into(),
                track,
            })
    }

    /// Task score of one sequence.
    pub fn sequence_score(&self, sequence: &str) -> Result<f64> {
        let activity = || -> Result<f64> {
            let parts = Track::ACTIVITY
                .iter()
                .map(|&t| self.track_value(sequence, t))
                .collect::<Result<Vec<_>>>()?;
            s_activity(&parts)
        };
        match self.task {
            Task::Phase => self.track_value(sequence, Track::Phase),
            Task::Step => self.track_value(sequence, Track::Step),
            Task::Activity => activity(),
            Task::Multi => Ok(s_multi(
                self.track_value(sequence, Track::Phase)?,
                self.track_value(sequence, Track::Step)?,
                activity()?,
            )),
        }
    }

    fn track_mean(&self, sequences: &[String], track: Track) -> Result<f64> {
        let values = sequences
            .iter()
            .map(|s| self.track_value(s, track))
            .collect::<Result<Vec<_>>>()?;
        s_uni(&values)
    }

    /// Official ranking score: per-track means over `sequences` combined by
    /// the task's formula.
    pub fn task_score(&self, sequences: &[String]) -> Result<f64> {
        let activity = || -> Result<f64> {
            let parts = Track::ACTIVITY
                .iter()
                .map(|&t| self.track_mean(sequences, t))
                .collect::<Result<Vec<_>>>()?;
            s_activity(&parts)
        };
        match self.task {
            Task::Phase => self.track_mean(sequences, Track::Phase),
            Task::Step => self.track_mean(sequences, Track::Step),
            Task::Activity => activity(),
            Task::Multi => Ok(s_multi(
                self.track_mean(sequences, Track::Phase)?,
                self.track_mean(sequences, Track::Step)?,
                activity()?,
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RankingMethod {
    /// Rank teams by their mean score (the official method).
    MeanThenRank,
    MedianThenRank,
    /// Rank teams per sequence, then rank the mean of those ranks.
    RankThenMean,
    RankThenMedian,
}

impl RankingMethod {
    pub const ALL: [RankingMethod; 4] = [
        RankingMethod::MeanThenRank,
        RankingMethod::MedianThenRank,
        RankingMethod::RankThenMean,
        RankingMethod::RankThenMedian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RankingMethod::MeanThenRank => "mean-then-rank",
            RankingMethod::MedianThenRank => "median-then-rank",
            RankingMethod::RankThenMean => "rank-then-mean",
            RankingMethod::RankThenMedian => "rank-then-median",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Whether a larger aggregate is better.
    pub fn higher_is_better(self) -> bool {
        matches!(self, RankingMethod::MeanThenRank | RankingMethod::MedianThenRank)
    }
}

impl fmt::Display for RankingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Standard competition ranks ("1224"): one plus the number of strictly
/// better values.
pub fn competition_ranks(values: &[f64], higher_is_better: bool) -> Vec<usize> {
    values
        .iter()
        .map(|&v| {
            1 + values
                .iter()
                .filter(|&&o| {
                    if higher_is_better {
                        o > v + TIE_EPSILON
                    } else {
                        o < v - TIE_EPSILON
                    }
                })
                .count()
        })
        .collect()
}

/// Aggregates and ranks of every team under one method, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRanking {
    pub method: RankingMethod,
    pub aggregates: Vec<f64>,
    pub ranks: Vec<usize>,
}

/// Test sequences shared by `results`: the union of their sequence ids.
pub fn sequence_union(results: &[TeamResult]) -> Vec<String> {
    let mut all: Vec<String> = results.iter().flat_map(|r| r.per_sequence.keys().cloned()).collect();
    all.sort();
    all.dedup();
    all
}

fn check_task(results: &[TeamResult]) -> Result<Task> {
    let first = results.first().ok_or(Error::Empty("no team results"))?;
    for r in results {
        if r.task != first.task {
            return Err(Error::HeterogeneousTasks {
                expected: first.task,
                found: r.task,
            });
        }
    }
    Ok(first.task)
}

/// Ranks `results` (already imputed) with `method` over the union of their
/// sequences. Every team must have every needed score.
pub fn rank(results: &[TeamResult], method: RankingMethod) -> Result<MethodRanking> {
    check_task(results)?;
    let sequences = sequence_union(results);
    if sequences.is_empty() {
        return Err(Error::Empty("no test sequences"));
    }
    let aggregates = match method {
        RankingMethod::MeanThenRank => results
            .iter()
            .map(|r| r.task_score(&sequences))
            .collect::<Result<Vec<_>>>()?,
        RankingMethod::MedianThenRank => results
            .iter()
            .map(|r| {
                let mut v = sequences
                    .iter()
                    .map(|s| r.sequence_score(s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(median(&mut v))
            })
            .collect::<Result<Vec<_>>>()?,
        RankingMethod::RankThenMean | RankingMethod::RankThenMedian => {
            let mut per_team: Vec<Vec<f64>> = alloc::vec![Vec::new(); results.len()];
            for s in &sequences {
                let scores = results
                    .iter()
                    .map(|r| r.sequence_score(s))
                    .collect::<Result<Vec<_>>>()?;
                for (acc, r) in per_team.iter_mut().zip(competition_ranks(&scores, true)) {
                    acc.push(r as f64);
                }
            }
            per_team
                .into_iter()
                .map(|mut ranks| {
                    if method == RankingMethod::RankThenMean {
                        ranks.iter().sum::<f64>() / ranks.len() as f64
                    } else {
                        median(&mut ranks)
                    }
                })
                .collect()
        }
    };
    let ranks = competition_ranks(&aggregates, method.higher_is_better());
    Ok(MethodRanking {
        method,
        aggregates,
        ranks,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    /// Groups of teams whose relative order changes between methods.
    Ties(Vec<Vec<String>>),
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdict::Stable)
    }
}

/// Compares the rankings pairwise: two teams are linked when their order
/// (ahead, tied, behind) differs between any two methods. Tie groups are
/// the connected components with more than one team.
pub fn stability(teams: &[String], rankings: &[MethodRanking]) -> StabilityVerdict {
    let n = teams.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut unstable = false;
    for i in 0..n {
        for j in i + 1..n {
            let mut orders = rankings.iter().map(|m| m.ranks[i].cmp(&m.ranks[j]));
            let first = orders.next();
            if orders.any(|o| Some(o) != first) {
                unstable = true;
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    if !unstable {
        return StabilityVerdict::Stable;
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, team) in teams.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(team.clone());
    }
    StabilityVerdict::Ties(groups.into_values().filter(|g| g.len() > 1).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub team: String,
    pub competing: bool,
    /// One aggregate per method of the table.
    pub aggregates: Vec<f64>,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub task: Task,
    pub methods: Vec<RankingMethod>,
    /// Sorted by the rank under the first method, then team name.
    pub rows: Vec<RankRow>,
    pub verdict: StabilityVerdict,
}

/// Ranks `results` under every method in `methods` and assesses stability.
pub fn rank_table(results: &[TeamResult], methods: &[RankingMethod]) -> Result<RankTable> {
    let task = check_task(results)?;
    if methods.is_empty() {
        return Err(Error::Empty("no ranking methods"));
    }
    let rankings = methods.iter().map(|&m| rank(results, m)).collect::<Result<Vec<_>>>()?;
    let teams: Vec<String> = results.iter().map(|r| r.team.clone()).collect();
    let verdict = stability(&teams, &rankings);
    let mut rows: Vec<RankRow> = results
        .iter()
        .enumerate()
        .map(|(i, r)| RankRow {
            team: r.team.clone(),
            competing: r.competing,
            aggregates: rankings.iter().map(|m| m.aggregates[i]).collect(),
            ranks: rankings.iter().map(|m| m.ranks[i]).collect(),
        })
        .collect();
    rows.sort_by(|a, b| a.ranks[0].cmp(&b.ranks[0]).then_with(|| a.team.cmp(&b.team)));
    Ok(RankTable {
        task,
        methods: methods.to_vec(),
        rows,
        verdict,
    })
}
