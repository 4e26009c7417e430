//! Command-line surface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use misaw_core::harmonize::{auto_merge, harmonization_pipeline, MergeConfig, ObserverTimeline};
use misaw_core::kinematics::{
    self, downsample, homogeneous_left, homogeneous_right, minmax_normalize, znormalize, GripAnomaly,
};
use misaw_core::metrics::{AdConfig, DEFAULT_ACCEPTABLE_DELAY_MS};
use misaw_core::ranking::{RankingMethod, Task};
use misaw_core::synth::{generate_pair, SynthSpec};
use misaw_core::timeline::{discretize, DiscreteSequence, DEFAULT_RATE_HZ};
use misaw_core::{Track, VocabularySet};

use crate::error::CliError;
use crate::report::{self, SequencePair};
use crate::{discrete, interval, kinematic, merge, results, tsv};

#[derive(Debug, Parser)]
#[command(name = "misaw", version, about = "Surgical workflow annotation and evaluation tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert an interval annotation file to a frame-synchronous file.
    Discretize(DiscretizeArgs),
    /// Score predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Rank team results and assess ranking stability.
    Rank(RankArgs),
    /// Merge two observers' interval annotations.
    Harmonize(HarmonizeArgs),
    /// Transforms, normalization, downsampling and grip checks.
    Kinematics(KinematicsArgs),
    /// Generate a seeded ground-truth/prediction pair.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Phase,
    Step,
    Activity,
    Multi,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Phase => Task::Phase,
            TaskArg::Step => Task::Step,
            TaskArg::Activity => Task::Activity,
            TaskArg::Multi => Task::Multi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalization {
    Zscore,
    Minmax,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RATE_HZ)]
    pub rate: f64,
    /// Defaults to the latest segment end.
    #[arg(long)]
    pub duration_ms: Option<i64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Ground-truth file, or a directory of them.
    pub gt: PathBuf,
    /// Prediction file, or a directory with files of the same stems.
    pub pred: PathBuf,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, default_value_t = DEFAULT_ACCEPTABLE_DELAY_MS)]
    pub delay_ms: f64,
    #[arg(long, default_value_t = DEFAULT_RATE_HZ)]
    pub rate: f64,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    pub results_dir: PathBuf,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// `all` or a comma-separated list of method names.
    #[arg(long, default_value = "all")]
    pub methods: String,
    /// File with one test sequence id per line; defaults to every sequence
    /// any team reported.
    #[arg(long)]
    pub test_set: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HarmonizeArgs {
    pub observer_a: PathBuf,
    pub observer_b: PathBuf,
    /// Observer A's refined annotation for the second pass.
    #[arg(long, alias = "refinedA", requires = "refined_b")]
    pub refined_a: Option<PathBuf>,
    #[arg(long, alias = "refinedB", requires = "refined_a")]
    pub refined_b: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KinematicsArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RATE_HZ)]
    pub rate: f64,
    /// Emit per-arm homogeneous transforms instead of the series.
    #[arg(long, conflicts_with = "normalize")]
    pub transforms: bool,
    #[arg(long, value_enum)]
    pub normalize: Option<Normalization>,
    #[arg(long)]
    pub downsample_hz: Option<f64>,
    /// Report grip values outside [-6, 0]; any anomaly makes the exit
    /// status 1.
    #[arg(long)]
    pub validate_grip: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Frames of boundary shift: a fixed `J` or an inclusive range `A:B`.
    #[arg(long, default_value = "0", value_parser = parse_jitter, allow_hyphen_values = true)]
    pub jitter: (i64, i64),
    #[arg(long, default_value_t = 10)]
    pub segments: usize,
    #[arg(long, default_value_t = 20)]
    pub min_len: usize,
    #[arg(long, default_value_t = 60)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0.0)]
    pub substitution: f64,
    /// Track that carries the generated labels; the others stay idle.
    #[arg(long, default_value = "phase", value_parser = parse_track)]
    pub track: Track,
    #[arg(long, default_value_t = DEFAULT_RATE_HZ)]
    pub rate: f64,
    #[arg(long, default_value_t = DEFAULT_ACCEPTABLE_DELAY_MS)]
    pub delay_ms: f64,
    /// Writes `<P>_gt.tsv`, `<P>_pred.tsv` and `<P>_transitions.tsv`.
    #[arg(long)]
    pub out_prefix: String,
}

fn parse_jitter(s: &str) -> Result<(i64, i64), String> {
    let bad = || format!("expected an integer or A:B, got {s:?}");
    match s.split_once(':') {
        Some((a, b)) => {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(format!("empty jitter range {s:?}"));
            }
            Ok((a, b))
        }
        None => {
            let j = s.trim().parse().map_err(|_| bad())?;
            Ok((j, j))
        }
    }
}

fn parse_track(s: &str) -> Result<Track, String> {
    Track::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Track::ALL.iter().map(|t| t.name()).collect();
        format!("unknown track {s:?}; expected one of {}", names.join(", "))
    })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => tsv::write(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn check_rate(rate: f64) -> Result<(), CliError> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--rate must be positive, got {rate}")))
    }
}

/// Reads a discrete file, or an interval file discretized at `rate`.
pub fn load_sequence(path: &Path, vocabularies: &VocabularySet, rate: f64) -> Result<DiscreteSequence, CliError> {
    let text = tsv::read(path)?;
    let source = path.display().to_string();
    if interval::looks_like_interval(&text) {
        let set = interval::parse_interval_str(&text, &source, vocabularies)?;
        Ok(discretize(&set, vocabularies, rate, None)?)
    } else {
        Ok(discrete::parse_discrete_str(&text, &source, vocabularies, rate)?)
    }
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

/// Ground-truth/prediction path pairs. Directories are matched by file
/// stem; every ground-truth file needs a prediction.
pub fn pair_inputs(gt: &Path, pred: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>, CliError> {
    match (gt.is_dir(), pred.is_dir()) {
        (false, false) => Ok(vec![(stem(gt), gt.to_path_buf(), pred.to_path_buf())]),
        (true, true) => {
            let preds = sorted_files(pred)?;
            let mut pairs = Vec::new();
            let mut missing = Vec::new();
            for g in sorted_files(gt)? {
                let id = stem(&g);
                match preds.iter().find(|p| stem(p) == id) {
                    Some(p) => pairs.push((id, g, p.clone())),
                    None => missing.push(id),
                }
            }
            if !missing.is_empty() {
                return Err(CliError::Validation(format!(
                    "no prediction for sequence(s): {}",
                    missing.join(", ")
                )));
            }
            for p in &preds {
                if !pairs.iter().any(|(id, _, _)| *id == stem(p)) {
                    eprintln!("warning: {}: no matching ground truth, ignored", p.display());
                }
            }
            if pairs.is_empty() {
                return Err(CliError::Validation(format!("{}: no ground-truth files", gt.display())));
            }
            Ok(pairs)
        }
        _ => Err(CliError::Usage(
            "ground truth and prediction must both be files or both be directories".into(),
        )),
    }
}

fn run_discretize(args: &DiscretizeArgs) -> Result<u8, CliError> {
    check_rate(args.rate)?;
    let vocabularies = VocabularySet::misaw();
    let set = interval::parse_interval(&args.input, &vocabularies)?;
    let seq = discretize(&set, &vocabularies, args.rate, args.duration_ms)?;
    emit(args.out.as_deref(), &discrete::serialize_discrete(&seq))?;
    Ok(0)
}

fn run_evaluate(args: &EvaluateArgs) -> Result<u8, CliError> {
    check_rate(args.rate)?;
    let cfg = AdConfig::new(args.delay_ms, args.rate).map_err(|e| CliError::Usage(e.to_string()))?;
    let vocabularies = VocabularySet::misaw();
    let mut pairs = Vec::new();
    for (id, g, p) in pair_inputs(&args.gt, &args.pred)? {
        pairs.push(SequencePair {
            id,
            gt: load_sequence(&g, &vocabularies, args.rate)?,
            pred: load_sequence(&p, &vocabularies, args.rate)?,
        });
    }
    let report = report::evaluate(&pairs, args.task.into(), &vocabularies, &cfg)?;
    for s in &report.sequences {
        if let Some(t) = s.truncated {
            eprintln!(
                "warning: {}: ground truth has {} frames and prediction {}; scored the first {}",
                s.sequence, t.gt_frames, t.pred_frames, s.frames
            );
        }
    }
    let text = match args.format {
        Format::Tsv => report::render_tsv(&report),
        Format::Json => report::render_json(&report),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(0)
}

fn parse_methods(spec: &str) -> Result<Vec<RankingMethod>, CliError> {
    if spec.trim() == "all" {
        return Ok(RankingMethod::ALL.to_vec());
    }
    spec.split(',')
        .map(|m| {
            RankingMethod::from_name(m.trim()).ok_or_else(|| {
                let names: Vec<&str> = RankingMethod::ALL.iter().map(|m| m.name()).collect();
                CliError::Usage(format!(
                    "unknown ranking method {m:?}; expected all or {}",
                    names.join(", ")
                ))
            })
        })
        .collect()
}

fn run_rank(args: &RankArgs) -> Result<u8, CliError> {
    let methods = parse_methods(&args.methods)?;
    let task: Task = args.task.into();
    let mut teams = results::read_results_dir(&args.results_dir, task)?;
    let test_set = match &args.test_set {
        Some(path) => results::parse_test_set(&tsv::read(path)?),
        None => misaw_core::ranking::sequence_union(&teams),
    };
    let (table, imputed) = results::rank_results(&mut teams, &test_set, &VocabularySet::misaw(), &methods)?;
    for i in &imputed {
        eprintln!(
            "note: {} has no {} score for {}; using {:.2}",
            i.team,
            i.track.name(),
            i.sequence,
            i.value
        );
    }
    let text = match args.format {
        Format::Tsv => results::render_rank_tsv(&table),
        Format::Json => results::render_rank_json(&table, &imputed),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(0)
}

fn observer(path: &Path, vocabularies: &VocabularySet) -> Result<ObserverTimeline, CliError> {
    Ok(ObserverTimeline::new(
        stem(path),
        interval::parse_interval(path, vocabularies)?,
    ))
}

fn run_harmonize(args: &HarmonizeArgs) -> Result<u8, CliError> {
    let vocabularies = VocabularySet::misaw();
    let a = observer(&args.observer_a, &vocabularies)?;
    let b = observer(&args.observer_b, &vocabularies)?;
    let (text, violations) = match (&args.refined_a, &args.refined_b) {
        (Some(ra), Some(rb)) => {
            let ra = observer(ra, &vocabularies)?;
            let rb = observer(rb, &vocabularies)?;
            let report = harmonization_pipeline(&a, &b, &ra, &rb)?;
            (merge::render_pipeline(&report), report.violations.len())
        }
        _ => {
            let outcome = auto_merge(&a, &b, &MergeConfig::first_pass())?;
            (merge::render_single_pass(&outcome), outcome.violations.len())
        }
    };
    emit(args.out.as_deref(), &text)?;
    if violations > 0 {
        eprintln!("error: merged timeline has {violations} ordering violation(s)");
        return Ok(1);
    }
    Ok(0)
}

fn run_kinematics(args: &KinematicsArgs) -> Result<u8, CliError> {
    check_rate(args.rate)?;
    let mut series = kinematic::parse_kinematics(&args.input, args.rate)?;
    let mut status = 0;
    if args.validate_grip {
        let flags = kinematics::validate_grip(&mut series).to_vec();
        for (k, f) in flags.iter().enumerate() {
            let sample = &series.samples[k];
            for (arm, flag, grip) in [
                ("left", f.left, sample.left.grip),
                ("right", f.right, sample.right.grip),
            ] {
                if let Some(a) = flag {
                    let what = match a {
                        GripAnomaly::BelowRange => "below",
                        GripAnomaly::AboveRange => "above",
                    };
                    eprintln!("frame {k}: {arm} grip {grip} {what} [-6, 0]");
                    status = 1;
                }
            }
        }
    }
    if let Some(hz) = args.downsample_hz {
        series = downsample(&series, hz).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let text = if args.transforms {
        let frames = series
            .samples
            .iter()
            .map(|s| Ok((homogeneous_left(&s.left)?, homogeneous_right(&s.right)?)))
            .collect::<Result<Vec<_>, misaw_core::Error>>()?;
        kinematic::serialize_transforms(&frames)
    } else {
        match args.normalize {
            Some(Normalization::Zscore) => series = znormalize(&series),
            Some(Normalization::Minmax) => series = minmax_normalize(&series),
            None => {}
        }
        kinematic::serialize_kinematics(&series)
    };
    emit(args.out.as_deref(), &text)?;
    Ok(status)
}

fn run_synth(args: &SynthArgs) -> Result<u8, CliError> {
    check_rate(args.rate)?;
    let cfg = AdConfig::new(args.delay_ms, args.rate).map_err(|e| CliError::Usage(e.to_string()))?;
    let vocabularies = VocabularySet::misaw();
    let spec = SynthSpec::for_vocabulary(args.seed, vocabularies.for_track(args.track))
        .with_segments(args.segments, args.min_len, args.max_len)
        .with_jitter(args.jitter.0, args.jitter.1)
        .with_substitution(args.substitution);
    let pair = generate_pair(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let (gt, pred) = pair.to_sequences(args.track, args.rate);
    let w = cfg.half_width();
    let mut transitions = String::from("gt_frame\tjitter\tgt_from\tgt_to\tpred_from\tpred_to\tabsorbed\n");
    for t in &pair.transitions {
        transitions.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            t.gt_frame,
            t.jitter,
            t.gt_labels.0,
            t.gt_labels.1,
            t.pred_labels.0,
            t.pred_labels.1,
            if t.absorbed_by(w) { "yes" } else { "no" }
        ));
    }
    let prefix = &args.out_prefix;
    tsv::write(
        Path::new(&format!("{prefix}_gt.tsv")),
        &discrete::serialize_discrete(&gt),
    )?;
    tsv::write(
        Path::new(&format!("{prefix}_pred.tsv")),
        &discrete::serialize_discrete(&pred),
    )?;
    tsv::write(Path::new(&format!("{prefix}_transitions.tsv")), &transitions)?;
    Ok(0)
}

/// Runs one command and returns the process exit status.
pub fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Discretize(a) => run_discretize(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Rank(a) => run_rank(a),
        Command::Harmonize(a) => run_harmonize(a),
        Command::Kinematics(a) => run_kinematics(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
