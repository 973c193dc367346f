//! CSV and JSON output files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use rrw_core::harness::{attraction_time_histogram, AttractingSet, AttractionTimeHistogram, EnsembleResult, SCHEMA_VERSION};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Which artifact kinds to write; `None` writes both.
pub fn wants(format: Option<Format>, kind: Format) -> bool {
    format.is_none_or(|f| f == kind)
}

pub fn stem(config: &RunConfig) -> String {
    format!("{}-{}", config.name, config.seed)
}

#[derive(Serialize)]
struct ReplicaRow<'a> {
    schema_version: u32,
    replica: u64,
    seed: u64,
    status: &'a str,
    detected: Option<bool>,
    attracting_set: String,
    stabilization_step_lower_estimate: Option<u64>,
    order_statistic: Option<u64>,
    max_radius: Option<u64>,
    weight_mode: String,
    error: String,
}

struct SummaryRow {
    schema_version: u32,
    name: String,
    graph: String,
    kind: String,
    weight: String,
    initial_weight: f64,
    horizon: u64,
    replicas: u64,
    window: u64,
    engine: String,
    seed: u64,
    detected: u64,
    completed: u64,
    failed: u64,
    attraction_fraction: f64,
    ci_low: f64,
    ci_high: f64,
    confidence: f64,
    config: String,
}

fn describe_set(set: &Option<AttractingSet>) -> String {
    match set {
        None => String::new(),
        Some(AttractingSet::Edge { edge }) => edge.clone(),
        Some(AttractingSet::Vertices { first, second }) => format!("{first}|{second}"),
    }
}

fn summary_row(config: &RunConfig, result: &EnsembleResult) -> SummaryRow {
    let a = &result.attraction;
    SummaryRow {
        schema_version: SCHEMA_VERSION,
        name: config.name.clone(),
        graph: config.graph.clone(),
        kind: config.kind.to_string(),
        weight: config.weight.clone(),
        initial_weight: config.initial_weight,
        horizon: config.horizon,
        replicas: config.replicas,
        window: result.window,
        engine: config.engine.to_string(),
        seed: config.seed,
        detected: a.successes,
        completed: a.trials,
        failed: result.failed,
        attraction_fraction: a.estimate,
        ci_low: a.ci_low,
        ci_high: a.ci_high,
        confidence: a.confidence,
        config: serde_json::to_string(config).expect("configurations serialize"),
    }
}

impl SummaryRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.schema_version.to_string(),
            self.name.clone(),
            self.graph.clone(),
            self.kind.clone(),
            self.weight.clone(),
            self.initial_weight.to_string(),
            self.horizon.to_string(),
            self.replicas.to_string(),
            self.window.to_string(),
            self.engine.clone(),
            self.seed.to_string(),
            self.detected.to_string(),
            self.completed.to_string(),
            self.failed.to_string(),
            self.attraction_fraction.to_string(),
            self.ci_low.to_string(),
            self.ci_high.to_string(),
            self.confidence.to_string(),
            self.config.clone(),
        ]
    }
}

#[derive(Serialize)]
struct SimulationDocument<'a> {
    schema_version: u32,
    config: &'a RunConfig,
    result: &'a EnsembleResult,
    attraction_times: AttractionTimeHistogram,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

/// Writes the per-replica CSV, the summary CSV, the JSON document and the
/// resolved configuration.
pub fn write_simulation(dir: &Path, config: &RunConfig, result: &EnsembleResult, format: Option<Format>) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let stem = stem(config);
    let mut written = Vec::new();
    if wants(format, Format::Csv) {
        let path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        for r in &result.replicas {
            w.serialize(ReplicaRow {
                schema_version: SCHEMA_VERSION,
                replica: r.index,
                seed: r.seed,
                status: if r.failed() { "failed" } else { "ok" },
                detected: r.verdict.as_ref().map(|v| v.detected),
                attracting_set: describe_set(&r.verdict.as_ref().and_then(|v| v.attracting_set.clone())),
                stabilization_step_lower_estimate: r.verdict.as_ref().and_then(|v| v.stabilization_step),
                order_statistic: r.order_statistic,
                max_radius: r.max_radius,
                weight_mode: r.weight_mode.map(|m| format!("{m:?}")).unwrap_or_default(),
                error: r.error.clone().unwrap_or_default(),
            })?;
        }
        w.flush()?;
        written.push(path);

        let path = dir.join(format!("{stem}-summary.csv"));
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record(&SUMMARY_HEADER[3..])?;
        w.write_record(summary_row(config, result).record())?;
        w.flush()?;
        written.push(path);
    }
    let path = dir.join(format!("{stem}.toml"));
    fs::write(&path, config.to_toml()).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    if wants(format, Format::Json) {
        let path = dir.join(format!("{stem}.json"));
        let doc = SimulationDocument {
            schema_version: SCHEMA_VERSION,
            config,
            result,
            attraction_times: attraction_time_histogram(result),
        };
        fs::write(&path, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

/// Outcome of one sweep cell.
#[derive(Serialize)]
pub struct SweepCell {
    pub index: usize,
    pub config: RunConfig,
    pub result: Option<EnsembleResult>,
    pub error: Option<String>,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    schema_version: u32,
    config: &'a RunConfig,
    cells: &'a [SweepCell],
}

const SUMMARY_HEADER: [&str; 22] = [
    "cell",
    "status",
    "error",
    "schema_version",
    "name",
    "graph",
    "kind",
    "weight",
    "initial_weight",
    "horizon",
    "replicas",
    "window",
    "engine",
    "seed",
    "detected",
    "completed",
    "failed",
    "attraction_fraction",
    "ci_low",
    "ci_high",
    "confidence",
    "config",
];

/// Writes the merged sweep summary CSV and the sweep JSON document.
pub fn write_sweep(dir: &Path, template: &RunConfig, cells: &[SweepCell], format: Option<Format>) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let stem = format!("{}-sweep", stem(template));
    let mut written = Vec::new();
    if wants(format, Format::Csv) {
        let path = dir.join(format!("{stem}.csv"));
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record(SUMMARY_HEADER)?;
        for c in cells {
            let status = if c.error.is_some() { "failed" } else { "ok" };
            let mut record = vec![c.index.to_string(), status.to_string(), c.error.clone().unwrap_or_default()];
            match &c.result {
                Some(r) => record.extend(summary_row(&c.config, r).record()),
                None => {
                    record.push(SCHEMA_VERSION.to_string());
                    record.resize(SUMMARY_HEADER.len() - 1, String::new());
                    record.push(serde_json::to_string(&c.config)?);
                }
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        written.push(path);
    }
    if wants(format, Format::Json) {
        let path = dir.join(format!("{stem}.json"));
        let doc = SweepDocument {
            schema_version: SCHEMA_VERSION,
            config: template,
            cells,
        };
        fs::write(&path, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}
