//! Kinematic files: sixteen numeric columns per frame, left arm first. The
//! header line is optional on input and always written on output.

use std::path::Path;

use misaw_core::kinematics::{HomogeneousTransform, KinematicSample, KinematicSeries};

use crate::error::{CliError, IssueKind, ParseErrors};
use crate::tsv;

const FIELDS: [&str; 8] = ["x", "y", "z", "alpha", "beta", "gamma", "grip", "grip_voltage"];

pub fn header_columns() -> Vec<String> {
    ["left", "right"]
        .iter()
        .flat_map(|arm| FIELDS.iter().map(move |f| format!("{f}_{arm}")))
        .collect()
}

pub fn parse_kinematics_str(text: &str, source: &str, rate_hz: f64) -> Result<KinematicSeries, CliError> {
    let columns = header_columns();
    let mut errors = ParseErrors::new(source);
    let mut rows = tsv::rows(text).peekable();
    if let Some((n, line)) = rows.peek().copied() {
        let first = tsv::fields(line);
        if first.first().is_some_and(|c| c.trim().parse::<f64>().is_err()) {
            let header: Vec<&str> = columns.iter().map(String::as_str).collect();
            tsv::expect_header(&mut errors, n, line, &header);
            rows.next();
        }
    }

    let mut samples = Vec::new();
    for (n, line) in rows {
        let cells = tsv::fields(line);
        if cells.len() != columns.len() {
            errors.push(
                n,
                IssueKind::ColumnCount {
                    expected: columns.len(),
                    found: cells.len(),
                },
            );
            continue;
        }
        let mut values = [0.0; 16];
        let mut ok = true;
        for (i, raw) in cells.iter().enumerate() {
            match tsv::number(&columns[i], raw) {
                Ok(v) => values[i] = v,
                Err(kind) => {
                    errors.push(n, kind);
                    ok = false;
                }
            }
        }
        if ok {
            samples.push(KinematicSample::from_array(values));
        }
    }
    if samples.is_empty() && errors.is_empty() {
        return Err(misaw_core::Error::Empty("kinematic series").into());
    }
    let samples = errors.into_result(samples)?;
    Ok(KinematicSeries::new(rate_hz, samples)?)
}

pub fn parse_kinematics(path: &Path, rate_hz: f64) -> Result<KinematicSeries, CliError> {
    let text = tsv::read(path)?;
    parse_kinematics_str(&text, &path.display().to_string(), rate_hz)
}

pub fn serialize_kinematics(series: &KinematicSeries) -> String {
    let mut out = header_columns().join("\t");
    out.push('\n');
    for s in &series.samples {
        let row: Vec<String> = s.to_array().iter().map(f64::to_string).collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// One row per frame and arm with the sixteen matrix entries in row-major
/// order.
pub fn serialize_transforms(frames: &[(HomogeneousTransform, HomogeneousTransform)]) -> String {
    let mut out = String::from("frame\tarm");
    for i in 0..4 {
        for j in 0..4 {
            out.push_str(&format!("\tm{i}{j}"));
        }
    }
    out.push('\n');
    for (k, (left, right)) in frames.iter().enumerate() {
        for (arm, h) in [("left", left), ("right", right)] {
            out.push_str(&format!("{k}\t{arm}"));
            for v in h.0.iter().flatten() {
                out.push_str(&format!("\t{v}"));
            }
            out.push('\n');
        }
    }
    out
}
