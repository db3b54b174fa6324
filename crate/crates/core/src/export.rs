//! CSV and JSON writers for trajectories and scan reports.
//!
//! Every data file gets a `.meta.json` sidecar (or, in JSON format, an inline
//! `metadata` object) holding the effective configuration.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::bell_algebra::BellLabel;
use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::Result;
use crate::lab_demon::ErrorFlag;
use crate::monte_carlo::{EmpiricalTrajectory, RoundStats};
use crate::recurrence::{RegimeReport, Trajectory};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Coefficient letters in column order with the Bell label each one denotes.
const LETTERS: [(char, BellLabel); 4] = [
    ('A', BellLabel::PHI_PLUS),
    ('B', BellLabel::PSI_MINUS),
    ('C', BellLabel::PSI_PLUS),
    ('D', BellLabel::PHI_MINUS),
];

/// Coefficient column names `A_00 … D_11`; the subscript is the flag.
pub fn coefficient_columns() -> Vec<String> {
    LETTERS
        .iter()
        .flat_map(|(l, _)| ErrorFlag::ALL.iter().map(move |f| format!("{l}_{}", String::from(*f))))
        .collect()
}

/// Reorders `4·flag + bell` slots into [`coefficient_columns`] order.
pub fn coefficients_in_column_order(slots: &[f64; 16]) -> Vec<f64> {
    LETTERS
        .iter()
        .flat_map(|(_, b)| ErrorFlag::ALL.iter().map(move |f| slots[4 * f.index() + b.index()]))
        .collect()
}

pub fn trajectory_header() -> Vec<String> {
    let mut h: Vec<String> = ["round", "F", "F_cond", "keep_prob"].map(String::from).to_vec();
    h.extend(coefficient_columns());
    h
}

pub fn mc_header() -> Vec<String> {
    let mut h = trajectory_header();
    h.extend(["survivors", "sample_stddev_F"].map(String::from));
    h
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn trajectory_rows(t: &Trajectory) -> Vec<Vec<String>> {
    t.records
        .iter()
        .map(|r| {
            let mut row = vec![
                r.round.to_string(),
                num(r.fidelity),
                num(r.conditional_fidelity),
                num(r.keep_probability),
            ];
            row.extend(
                coefficients_in_column_order(r.state.coefficients())
                    .into_iter()
                    .map(num),
            );
            row
        })
        .collect()
}

fn mc_rows(rows: &[RoundStats]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let mut row = vec![
                r.round.to_string(),
                num(r.fidelity),
                num(r.conditional_fidelity),
                num(r.keep_fraction),
            ];
            row.extend(coefficients_in_column_order(&r.joint).into_iter().map(num));
            row.push(r.survivors.to_string());
            row.push(num(r.sample_stddev_f));
            row
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Run metadata: tool, command, effective config and a command-specific summary.
pub fn metadata(command: &str, config: &ExperimentConfig, summary: Value) -> Value {
    let mut meta = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "command": command,
        "config": config,
        "summary": summary,
    });
    if !config.output.deterministic {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        meta["generated_unix_seconds"] = json!(secs);
    }
    meta
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes a table either as `stem.csv` plus `stem.meta.json`, or as a single
/// `stem.json` with `metadata`, `columns` and `rows`. Returns the paths written.
fn write_table(
    config: &ExperimentConfig,
    stem: &str,
    header: &[String],
    rows: &[Vec<String>],
    meta: Value,
) -> Result<Vec<PathBuf>> {
    let dir = &config.output.dir;
    std::fs::create_dir_all(dir)?;
    match config.output.format {
        OutputFormat::Csv => {
            let data = dir.join(format!("{stem}.csv"));
            write_csv(std::fs::File::create(&data)?, header, rows)?;
            let sidecar = dir.join(format!("{stem}.meta.json"));
            write_json(&sidecar, &meta)?;
            Ok(vec![data, sidecar])
        }
        OutputFormat::Json => {
            let data = dir.join(format!("{stem}.json"));
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| Value::Array(r.iter().map(|s| cell_value(s)).collect()))
                .collect();
            write_json(&data, &json!({ "metadata": meta, "columns": header, "rows": rows }))?;
            Ok(vec![data])
        }
    }
}

fn cell_value(s: &str) -> Value {
    serde_json::from_str::<Value>(s).unwrap_or_else(|_| Value::String(s.to_string()))
}

pub fn write_trajectory(config: &ExperimentConfig, trajectory: &Trajectory, summary: Value) -> Result<Vec<PathBuf>> {
    let meta = metadata("iterate", config, summary);
    write_table(
        config,
        "trajectory",
        &trajectory_header(),
        &trajectory_rows(trajectory),
        meta,
    )
}

pub fn write_mc(config: &ExperimentConfig, trajectory: &EmpiricalTrajectory) -> Result<Vec<PathBuf>> {
    let last = trajectory.rows.last().expect("input row always present");
    let summary = json!({
        "halted": trajectory.halted,
        "rounds_completed": last.round,
        "final_survivors": last.survivors,
    });
    let meta = metadata("mc", config, summary);
    write_table(config, "mc_trajectory", &mc_header(), &mc_rows(&trajectory.rows), meta)
}

/// Scan output: `thresholds.json` always, plus the regime grid as a table.
pub fn write_scan(config: &ExperimentConfig, report: Value, grid: &[(f64, RegimeReport)]) -> Result<Vec<PathBuf>> {
    let dir = &config.output.dir;
    std::fs::create_dir_all(dir)?;
    let path = dir.join("thresholds.json");
    write_json(&path, &metadata("scan", config, report))?;
    let mut written = vec![path];
    if !grid.is_empty() {
        let header = ["parameter", "regime", "F_max", "F_cond_limit", "rounds", "converged"].map(String::from);
        let rows: Vec<Vec<String>> = grid
            .iter()
            .map(|(x, r)| {
                vec![
                    num(*x),
                    r.regime.to_string(),
                    num(r.f_max),
                    num(r.f_cond_limit),
                    r.rounds.to_string(),
                    r.converged.to_string(),
                ]
            })
            .collect();
        let meta = metadata("scan", config, json!({ "points": grid.len() }));
        written.extend(write_table(config, "regimes", &header, &rows, meta)?);
    }
    Ok(written)
}

pub fn report_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_model::{NoiseModel, Placement};
    use crate::recurrence::{iterate, StopRule, SubensembleState};
    use crate::FlagMode;

    #[test]
    fn header_layout() {
        let h = trajectory_header();
        assert_eq!(h.len(), 20);
        assert_eq!(&h[..6], ["round", "F", "F_cond", "keep_prob", "A_00", "A_01"]);
        assert_eq!(h[19], "D_11");
        assert_eq!(mc_header()[20..], ["survivors", "sample_stddev_F"]);
    }

    #[test]
    fn column_order_maps_letters() {
        let s = SubensembleState::point(ErrorFlag::new(1, 0), BellLabel::PSI_MINUS);
        let cols = coefficients_in_column_order(s.coefficients());
        let names = coefficient_columns();
        let hot: Vec<&String> = names
            .iter()
            .zip(&cols)
            .filter(|(_, v)| **v == 1.0)
            .map(|(n, _)| n)
            .collect();
        assert_eq!(hot, ["B_10"]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ExperimentConfig::default();
        config.output.dir = dir.path().to_path_buf();
        config.output.deterministic = true;
        let s = SubensembleState::werner(0.85, FlagMode::Fixed).unwrap();
        let t = iterate(&s, &NoiseModel::fig1(), Placement::BeforeRotation, StopRule::rounds(3)).unwrap();
        let paths = write_trajectory(&config, &t, json!({})).unwrap();
        let mut r = csv::Reader::from_path(&paths[0]).unwrap();
        assert_eq!(r.headers().unwrap().len(), 20);
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[3][1].parse::<f64>().unwrap(), t.records[3].fidelity);
        let meta: Value = serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
        assert_eq!(meta["config"]["seed"], 1);
        assert!(meta.get("generated_unix_seconds").is_none());
    }

    #[test]
    fn timestamp_present_unless_deterministic() {
        let config = ExperimentConfig::default();
        assert!(metadata("iterate", &config, json!(null))
            .get("generated_unix_seconds")
            .is_some());
    }
}
