//! Trace files and run records. A trace file holds one rendered record per
//! line, so its SHA-256 equals the trace digest. A run record is a TOML
//! file with the code version, the fully resolved config, the digest and
//! the headline metrics, enough to repeat the run exactly.

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use ucran_core::engine::config::ScenarioConfig;
use ucran_core::metrics::RunMetrics;
use ucran_core::Trace;

use crate::AppError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn write_trace(trace: &Trace, path: &Path) -> Result<(), AppError> {
    let file = std::fs::File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in trace.records() {
        writeln!(w, "{r}").map_err(|e| AppError::io(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Modelling choices that are not config fields but shape the numbers.
#[derive(Debug, Clone, Serialize)]
pub struct Derivations {
    pub delay_boundary: &'static str,
    pub hover_power: &'static str,
    pub warmup_s: f64,
    pub seeds_stream: &'static str,
}

impl Derivations {
    pub fn of(config: &ScenarioConfig) -> Self {
        Derivations {
            delay_boundary: "task generation to processing completion",
            hover_power: if config.power.include_hover { "included" } else { "excluded" },
            warmup_s: config.warmup_s(),
            seeds_stream: "chacha8 per (seed, stream)",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsSummary {
    pub ue_count: u32,
    pub generated: u64,
    pub blocked: u64,
    pub completions: u64,
    pub avg_e2e_delay_s: Option<f64>,
    pub blocking_probability: Option<f64>,
    pub total_power_w: Option<f64>,
    pub edge_tasks: u64,
    pub bbu_tasks: u64,
    pub dropped_tasks: u64,
    pub coverage: Option<f64>,
    pub baseline_coverage: Option<f64>,
}

impl From<&RunMetrics> for MetricsSummary {
    fn from(m: &RunMetrics) -> Self {
        MetricsSummary {
            ue_count: m.ue_count,
            generated: m.generated,
            blocked: m.blocked,
            completions: m.completions,
            avg_e2e_delay_s: m.avg_e2e_delay_s,
            blocking_probability: m.blocking_probability,
            total_power_w: m.total_power_w,
            edge_tasks: m.edge_tasks,
            bbu_tasks: m.bbu_tasks,
            dropped_tasks: m.dropped_tasks,
            coverage: m.coverage,
            baseline_coverage: m.baseline_coverage,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub version: &'static str,
    pub trace_digest: String,
    pub trace_records: usize,
    pub derivations: Derivations,
    pub metrics: MetricsSummary,
    pub config: ScenarioConfig,
}

impl RunRecord {
    pub fn new(config: &ScenarioConfig, trace: &Trace, metrics: &RunMetrics) -> Self {
        RunRecord {
            version: VERSION,
            trace_digest: trace.digest(),
            trace_records: trace.len(),
            derivations: Derivations::of(config),
            metrics: metrics.into(),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub architecture: String,
    pub ue_count: u32,
    pub load_fraction: f64,
    pub seed: u64,
    pub trace_digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub version: &'static str,
    pub derivations: Derivations,
    pub config: ScenarioConfig,
    pub runs: Vec<SweepEntry>,
}

pub fn write_toml<T: Serialize>(value: &T, path: &Path) -> Result<(), AppError> {
    let text = toml::to_string(value).map_err(|e| AppError::Usage(format!("cannot serialize record: {e}")))?;
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trips_config() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.duration_s = 30.0;
        cfg.topology.capacity_prbs_override = Some(400);
        let out = ucran_core::run(&cfg).unwrap();
        let rec = RunRecord::new(&cfg, &out.trace, &out.metrics);
        let text = toml::to_string(&rec).unwrap();
        assert!(text.contains(&out.trace.digest()));
        #[derive(serde::Deserialize)]
        struct Back {
            config: ScenarioConfig,
        }
        let back: Back = toml::from_str(&text).unwrap();
        assert_eq!(back.config, cfg);
    }
}
