//! Team result directories for ranking. Each `<team>.tsv` file holds a
//! `sequence` column followed by any of the track columns; `NA` or an
//! empty cell marks a missing score. A `# competing: no` line before the
//! header marks a team that is ranked but not competing.

use std::path::{Path, PathBuf};

use misaw_core::ranking::{Imputed, RankTable, RankingMethod, StabilityVerdict, Task, TeamResult};
use misaw_core::{Track, VocabularySet};
use serde::Serialize;

use crate::error::{CliError, IssueKind, ParseErrors};
use crate::tsv;

pub fn parse_team_str(text: &str, source: &str, team: &str, task: Task) -> Result<TeamResult, ParseErrors> {
    let mut errors = ParseErrors::new(source);
    let mut result = TeamResult::new(team, task);
    let mut columns: Option<Vec<Option<Track>>> = None;
    for (n, line) in tsv::rows(text) {
        if let Some(directive) = line.trim().strip_prefix('#') {
            match directive.split_once(':').map(|(k, v)| (k.trim(), v.trim())) {
                Some(("competing", "no")) => result.competing = false,
                Some(("competing", "yes")) => result.competing = true,
                _ => errors.push(n, IssueKind::BadDirective(line.to_string())),
            }
            continue;
        }
        let cells = tsv::fields(line);
        let Some(cols) = &columns else {
            if cells[0].trim() != "sequence" {
                errors.push(
                    n,
                    IssueKind::BadHeader {
                        expected: "sequence\t<track>...".into(),
                        found: line.to_string(),
                    },
                );
                return Err(errors);
            }
            let mut parsed = Vec::new();
            for c in &cells[1..] {
                let t = Track::from_name(c.trim());
                if t.is_none() {
                    errors.push(n, IssueKind::UnknownComponent(c.to_string()));
                }
                parsed.push(t);
            }
            columns = Some(parsed);
            continue;
        };
        if cells.len() != cols.len() + 1 {
            errors.push(
                n,
                IssueKind::ColumnCount {
                    expected: cols.len() + 1,
                    found: cells.len(),
                },
            );
            continue;
        }
        let entry = result.per_sequence.entry(cells[0].trim().to_string()).or_default();
        for (track, raw) in cols.iter().zip(&cells[1..]) {
            let Some(track) = track else { continue };
            let raw = raw.trim();
            if raw.is_empty() || raw == "NA" {
                continue;
            }
            match tsv::number(track.name(), raw) {
                Ok(v) => entry.set(*track, v),
                Err(kind) => errors.push(n, kind),
            }
        }
    }
    if columns.is_none() {
        errors.push(1, IssueKind::MissingHeader);
    }
    errors.into_result(result)
}

/// Every `*.tsv` file of `dir`, sorted by file name; the team name is the
/// file stem.
pub fn read_results_dir(dir: &Path, task: Task) -> Result<Vec<TeamResult>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "tsv") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let team = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let text = tsv::read(&path)?;
        out.push(parse_team_str(&text, &path.display().to_string(), &team, task)?);
    }
    if out.is_empty() {
        return Err(CliError::Validation(format!("{}: no team result files", dir.display())));
    }
    Ok(out)
}

/// One sequence identifier per non-blank line.
pub fn parse_test_set(text: &str) -> Vec<String> {
    tsv::rows(text).map(|(_, l)| l.trim().to_string()).collect()
}

/// Validates against `test_set`, fills missing scores and ranks.
pub fn rank_results(
    results: &mut [TeamResult],
    test_set: &[String],
    vocabularies: &VocabularySet,
    methods: &[RankingMethod],
) -> misaw_core::Result<(RankTable, Vec<Imputed>)> {
    let mut imputed = Vec::new();
    for r in results.iter_mut() {
        r.validate(test_set)?;
        imputed.extend(r.impute(test_set, vocabularies));
    }
    Ok((misaw_core::ranking::rank_table(results, methods)?, imputed))
}

#[derive(Debug, Serialize)]
struct MethodEntry {
    method: &'static str,
    score: f64,
    rank: usize,
}

#[derive(Debug, Serialize)]
struct TeamEntry<'a> {
    team: &'a str,
    competing: bool,
    methods: Vec<MethodEntry>,
}

#[derive(Debug, Serialize)]
struct ImputedEntry<'a> {
    team: &'a str,
    sequence: &'a str,
    track: &'static str,
    value: f64,
}

#[derive(Debug, Serialize)]
struct RankReport<'a> {
    task: &'static str,
    teams: Vec<TeamEntry<'a>>,
    stable: bool,
    tie_groups: Vec<Vec<String>>,
    imputed: Vec<ImputedEntry<'a>>,
}

pub fn render_rank_json(table: &RankTable, imputed: &[Imputed]) -> String {
    let tie_groups = match &table.verdict {
        StabilityVerdict::Stable => Vec::new(),
        StabilityVerdict::Ties(g) => g.clone(),
    };
    let report = RankReport {
        task: table.task.name(),
        teams: table
            .rows
            .iter()
            .map(|r| TeamEntry {
                team: &r.team,
                competing: r.competing,
                methods: table
                    .methods
                    .iter()
                    .zip(r.aggregates.iter().zip(&r.ranks))
                    .map(|(m, (&score, &rank))| MethodEntry {
                        method: m.name(),
                        score,
                        rank,
                    })
                    .collect(),
            })
            .collect(),
        stable: table.verdict.is_stable(),
        tie_groups,
        imputed: imputed
            .iter()
            .map(|i| ImputedEntry {
                team: &i.team,
                sequence: &i.sequence,
                track: i.track.name(),
                value: i.value,
            })
            .collect(),
    };
    crate::report::render_json(&report)
}

pub fn verdict_line(verdict: &StabilityVerdict) -> String {
    match verdict {
        StabilityVerdict::Stable => "stable".to_string(),
        StabilityVerdict::Ties(groups) => {
            let groups: Vec<String> = groups.iter().map(|g| g.join(", ")).collect();
            format!("ties: {}", groups.join("; "))
        }
    }
}

pub fn render_rank_tsv(table: &RankTable) -> String {
    let mut out = format!("# {}\nteam\tcompeting", table.task.name());
    for m in &table.methods {
        out.push_str(&format!("\t{m}\t{m} rank"));
    }
    out.push('\n');
    for r in &table.rows {
        out.push_str(&r.team);
        out.push_str(if r.competing { "\tyes" } else { "\tno" });
        for (a, k) in r.aggregates.iter().zip(&r.ranks) {
            out.push_str(&format!("\t{a:.2}\t{k}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("# stability: {}\n", verdict_line(&table.verdict)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_missing_values() {
        let text = "# competing: no\nsequence\tphase\tstep\n1_1\t90.5\tNA\n1_2\t\t80\n";
        let r = parse_team_str(text, "t", "T", Task::Multi).unwrap();
        assert!(!r.competing);
        assert_eq!(r.per_sequence["1_1"].get(Track::Phase), Some(90.5));
        assert_eq!(r.per_sequence["1_1"].get(Track::Step), None);
        assert_eq!(r.per_sequence["1_2"].get(Track::Step), Some(80.0));
    }

    #[test]
    fn parse_errors() {
        let err = parse_team_str("sequence\tphase\twrist\n1\tx\t2\n", "t", "T", Task::Phase).unwrap_err();
        assert_eq!(err.issues[0].kind, IssueKind::UnknownComponent("wrist".into()));
        assert!(matches!(err.issues[1].kind, IssueKind::BadNumber { .. }));
        assert!(parse_team_str("", "t", "T", Task::Phase).is_err());
    }

    #[test]
    fn missing_sequence_is_imputed() {
        let mut results = vec![
            parse_team_str("sequence\tphase\na\t90\nb\t80\n", "t", "A", Task::Phase).unwrap(),
            parse_team_str("sequence\tphase\na\t70\n", "t", "B", Task::Phase).unwrap(),
        ];
        let test_set = vec!["a".to_string(), "b".to_string()];
        let (table, imputed) = rank_results(
            &mut results,
            &test_set,
            &VocabularySet::misaw(),
            &[RankingMethod::MeanThenRank],
        )
        .unwrap();
        assert_eq!(imputed.len(), 1);
        assert!((imputed[0].value - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(table.rows[0].team, "A");
        assert!((table.rows[1].aggregates[0] - (70.0 + 100.0 / 3.0) / 2.0).abs() < 1e-12);
        let tsv = render_rank_tsv(&table);
        assert!(tsv.ends_with("# stability: stable\n"));
    }
}
