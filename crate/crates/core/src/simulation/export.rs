//! Result files. Floats are written with fixed precision and rows follow the
//! configuration order, so equal results give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::experiment::{CellSummary, ExperimentResults, RunRecord, SchemeRecord};
use super::stats::BoxStats;
use crate::error::Result;
use crate::instance::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
    #[default]
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedFiles {
    pub paths: Vec<PathBuf>,
}

pub fn export_results(results: &ExperimentResults, dir: &Path, format: ExportFormat) -> Result<ExportedFiles> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        paths.push(path);
        Ok(())
    };
    if format != ExportFormat::Json {
        put("boxplot.csv".into(), boxplot_table(&results.summaries)?)?;
        for &scenario in &results.config.scenarios {
            put(format!("travel_time_{scenario}.csv"), travel_time_table(results, scenario)?)?;
        }
        put("summary.csv".into(), summary_table(&results.summaries)?)?;
        put("runs.csv".into(), runs_table(&results.records)?)?;
    }
    if format != ExportFormat::Csv {
        let body = json!({
            "schema_version": results.schema_version,
            "summaries": results.summaries,
            "records": results.records,
        });
        put("results.json".into(), pretty(&body))?;
    }
    let manifest = json!({
        "schema_version": results.schema_version,
        "tool": "beampath",
        "version": env!("CARGO_PKG_VERSION"),
        "config": results.config,
        "jobs": results.jobs,
    });
    put("manifest.json".into(), pretty(&manifest))?;
    Ok(ExportedFiles { paths })
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON value serialises");
    s.push('\n');
    s
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Fixed-point text without a sign on values that round to zero.
fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn opt(x: Option<f64>, decimals: usize) -> String {
    x.map(|v| fixed(v, decimals)).unwrap_or_default()
}

fn mbps(x: f64) -> String {
    fixed(x / 1e6, 1)
}

/// Rate box plots per scheme, in Mbps.
pub fn boxplot_table(summaries: &[CellSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "n_nodes", "scheme", "min_mbps", "q1_mbps", "median_mbps", "q3_mbps", "max_mbps"])?;
    for s in summaries {
        for (scheme, stats) in [("MP-CUA", &s.cua_rate), ("MP-CA", &s.ca_rate)] {
            let cols: Vec<String> = match stats {
                Some(b) => [b.min, b.q1, b.median, b.q3, b.max].into_iter().map(mbps).collect(),
                None => vec![String::new(); 5],
            };
            let mut row = vec![s.scenario.to_string(), s.n_nodes.to_string(), scheme.to_string()];
            row.extend(cols);
            w.write_record(&row)?;
        }
    }
    finish(w)
}

/// Mean total travel time (s) per scheme and node count for one scenario.
pub fn travel_time_table(results: &ExperimentResults, scenario: Scenario) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["scheme".to_string()];
    header.extend(results.config.node_counts.iter().map(|n| format!("n_visit_{n}")));
    w.write_record(&header)?;
    let cells: Vec<&CellSummary> = results.summaries.iter().filter(|s| s.scenario == scenario).collect();
    for (scheme, pick) in [
        ("MP-CUA", (|s: &CellSummary| s.cua_travel) as fn(&CellSummary) -> Option<BoxStats>),
        ("MP-CA", |s: &CellSummary| s.ca_travel),
    ] {
        let mut row = vec![scheme.to_string()];
        for &n in &results.config.node_counts {
            let mean = cells.iter().find(|s| s.n_nodes == n).and_then(|s| pick(s)).map(|b| b.mean);
            row.push(opt(mean, 4));
        }
        w.write_record(&row)?;
    }
    finish(w)
}

pub fn summary_table(summaries: &[CellSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario",
        "n_nodes",
        "runs",
        "headline_runs",
        "excluded_runs",
        "mean_improvement_pct",
        "max_improvement_pct",
        "cua_travel_mean_s",
        "ca_travel_mean_s",
        "mean_travel_increase_pct",
        "cua_runs_with_collisions",
        "ca_runs_with_collisions",
        "mean_collision_pairs",
    ])?;
    for s in summaries {
        w.write_record([
            s.scenario.to_string(),
            s.n_nodes.to_string(),
            s.runs.to_string(),
            s.headline_runs.to_string(),
            s.excluded_runs.to_string(),
            opt(s.improvement_pct.map(|b| b.mean), 4),
            opt(s.improvement_pct.map(|b| b.max), 4),
            opt(s.cua_travel.map(|b| b.mean), 4),
            opt(s.ca_travel.map(|b| b.mean), 4),
            opt(s.travel_increase_pct.map(|b| b.mean), 4),
            s.cua_runs_with_collisions.to_string(),
            s.ca_runs_with_collisions.to_string(),
            format!("{:.2}", s.mean_collision_pairs),
        ])?;
    }
    finish(w)
}

pub fn runs_table(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> =
        ["scenario", "n_nodes", "run", "instance_seed", "collision_pairs"].map(String::from).to_vec();
    for prefix in ["cua", "ca"] {
        for col in ["status", "travel_s", "rate_mbps", "collisions", "valid", "nodes"] {
            header.push(format!("{prefix}_{col}"));
        }
    }
    header.extend(["improvement_pct", "travel_increase_pct", "headline"].map(String::from));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.scenario.to_string(),
            r.n_nodes.to_string(),
            r.run.to_string(),
            r.instance_seed.to_string(),
            r.collision_pairs.to_string(),
        ];
        for s in [&r.cua, &r.ca] {
            row.extend(scheme_cols(s));
        }
        row.push(opt(r.improvement_pct, 6));
        row.push(opt(r.travel_increase_pct, 6));
        row.push(r.is_headline().to_string());
        w.write_record(&row)?;
    }
    finish(w)
}

fn scheme_cols(s: &SchemeRecord) -> Vec<String> {
    vec![
        s.status.to_string(),
        opt(s.objective, 6),
        opt(s.overall_rate.map(|r| r / 1e6), 6),
        s.collisions.map(|c| c.to_string()).unwrap_or_default(),
        s.valid.map(|v| v.to_string()).unwrap_or_default(),
        s.nodes_explored.to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::fixed;

    #[test]
    fn rounding_to_zero_drops_the_sign() {
        assert_eq!(fixed(-1e-9, 4), "0.0000");
        assert_eq!(fixed(-0.0, 1), "0.0");
        assert_eq!(fixed(-0.25, 1), "-0.2");
        assert_eq!(fixed(1.23456, 2), "1.23");
    }
}
