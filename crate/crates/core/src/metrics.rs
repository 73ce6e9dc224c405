//! Per-run metrics recomputed from a finished trace, and their aggregation
//! across seeds.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::analytic;
use crate::engine::config::{Architecture, ScenarioKind};
use crate::error::{Error, Result};
use crate::ids::{CellId, UeId};
use crate::latency::Site;
use crate::trace::{Trace, TraceRecord};

/// Metrics of one run. Delay and power are `None` when nothing was
/// measured, never zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub scenario: ScenarioKind,
    pub architecture: Architecture,
    pub ue_count: u32,
    pub seed: u64,
    pub avg_e2e_delay_s: Option<f64>,
    pub completions: u64,
    pub generated: u64,
    pub blocked: u64,
    pub blocking_probability: Option<f64>,
    pub total_power_w: Option<f64>,
    pub edge_tasks: u64,
    pub bbu_tasks: u64,
    pub dropped_tasks: u64,
    pub mean_comm_s: Option<f64>,
    pub mean_proc_s: Option<f64>,
    pub coverage: Option<f64>,
    pub baseline_coverage: Option<f64>,
    pub decisions: u64,
    /// Decisions whose site is not the argmin of the logged totals.
    pub decision_violations: u64,
}

fn ratio(num: f64, den: u64) -> Option<f64> {
    (den > 0).then(|| num / den as f64)
}

/// Recompute a run's metrics from its trace. Only sessions arriving and
/// tasks generated after warmup count; power is the time average of the
/// sampled network total after warmup.
pub fn compute_metrics(trace: &Trace) -> Result<RunMetrics> {
    if !trace.is_complete() {
        return Err(Error::domain("trace has no End record"));
    }
    let records = trace.records();
    let TraceRecord::Begin {
        scenario,
        architecture,
        seed,
        ue_count,
        warmup_s,
        cell,
        ..
    } = records[0]
    else {
        return Err(Error::domain("trace does not start with Begin"));
    };
    let end = records[records.len() - 1].time();
    let in_cell = |c: CellId| c == cell;

    let mut counted: BTreeSet<UeId> = BTreeSet::new();
    let mut blocked = 0u64;
    let (mut delay_sum, mut comm_sum, mut proc_sum) = (0.0, 0.0, 0.0);
    let (mut completions, mut edge, mut bbu, mut dropped) = (0u64, 0u64, 0u64, 0u64);
    let (mut decisions, mut violations) = (0u64, 0u64);
    let mut power: Option<(f64, f64)> = None;
    let (mut power_area, mut power_time) = (0.0, 0.0);
    let mut coverage = None;
    let mut baseline = None;

    for r in records {
        match *r {
            TraceRecord::Arrival { t, ue, cell: c, .. } if t >= warmup_s && in_cell(c) => {
                counted.insert(ue);
            }
            TraceRecord::Block { ue, .. } if counted.contains(&ue) => blocked += 1,
            TraceRecord::Task {
                generated, delay, cell: c, ..
            } if generated >= warmup_s && c.is_none_or(in_cell) => {
                completions += 1;
                delay_sum += delay.total_s;
                comm_sum += delay.comm_s;
                proc_sum += delay.proc_s;
                match delay.site {
                    Site::EdgeFRRH => edge += 1,
                    Site::BBUPool | Site::MacroBS => bbu += 1,
                }
            }
            TraceRecord::TaskDrop { t, .. } if t >= warmup_s => dropped += 1,
            TraceRecord::Decision { decision, .. } => {
                decisions += 1;
                if !decision.is_optimal() {
                    violations += 1;
                }
            }
            TraceRecord::PowerTotal { t, watts } if t >= warmup_s => {
                if let Some((t0, w0)) = power {
                    power_area += w0 * (t - t0);
                    power_time += t - t0;
                }
                power = Some((t, watts));
            }
            TraceRecord::Coverage { covered, total, baseline: b, .. } if total > 0 => {
                coverage = Some(f64::from(covered) / f64::from(total));
                baseline = Some(f64::from(b) / f64::from(total));
            }
            _ => {}
        }
    }
    // the last sample holds until the end of the run
    let total_power_w = power.map(|(t0, w0)| {
        power_area += w0 * (end - t0);
        power_time += end - t0;
        if power_time > 0.0 {
            power_area / power_time
        } else {
            w0
        }
    });

    let generated = counted.len() as u64;
    Ok(RunMetrics {
        scenario,
        architecture,
        ue_count,
        seed,
        avg_e2e_delay_s: ratio(delay_sum, completions),
        completions,
        generated,
        blocked,
        blocking_probability: ratio(blocked as f64, generated),
        total_power_w,
        edge_tasks: edge,
        bbu_tasks: bbu,
        dropped_tasks: dropped,
        mean_comm_s: ratio(comm_sum, completions),
        mean_proc_s: ratio(proc_sum, completions),
        coverage,
        baseline_coverage: baseline,
        decisions,
        decision_violations: violations,
    })
}

/// One aggregated row: means over seeds with 95 % half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub architecture: Architecture,
    pub ue_count: u32,
    pub seed_count: u32,
    pub avg_e2e_delay_s: Option<f64>,
    pub delay_ci: Option<f64>,
    pub blocking_probability: Option<f64>,
    pub blocking_ci: Option<f64>,
    pub total_power_w: Option<f64>,
    pub power_ci: Option<f64>,
}

/// Rows ordered by architecture (macro, C-RAN, UC-RAN), then UE count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub rows: Vec<MetricsRow>,
}

impl MetricsReport {
    pub fn row(&self, architecture: Architecture, ue_count: u32) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.architecture == architecture && r.ue_count == ue_count)
    }

    pub fn rows_of(&self, architecture: Architecture) -> impl Iterator<Item = &MetricsRow> {
        self.rows.iter().filter(move |r| r.architecture == architecture)
    }
}

fn summarize(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.flatten().collect();
    match analytic::mean_ci(&v) {
        Some((m, h)) => (Some(m), h),
        None => (None, None),
    }
}

/// Group runs by (architecture, UE count) and average over seeds.
pub fn aggregate(runs: &[RunMetrics]) -> MetricsReport {
    let mut keys: Vec<(Architecture, u32)> = runs.iter().map(|r| (r.architecture, r.ue_count)).collect();
    keys.sort();
    keys.dedup();
    let rows = keys
        .into_iter()
        .map(|(architecture, ue_count)| {
            let group: Vec<&RunMetrics> = runs
                .iter()
                .filter(|r| r.architecture == architecture && r.ue_count == ue_count)
                .collect();
            let (avg_e2e_delay_s, delay_ci) = summarize(group.iter().map(|r| r.avg_e2e_delay_s));
            let (blocking_probability, blocking_ci) = summarize(group.iter().map(|r| r.blocking_probability));
            let (total_power_w, power_ci) = summarize(group.iter().map(|r| r.total_power_w));
            MetricsRow {
                architecture,
                ue_count,
                seed_count: group.len() as u32,
                avg_e2e_delay_s,
                delay_ci,
                blocking_probability,
                blocking_ci,
                total_power_w,
                power_ci,
            }
        })
        .collect();
    MetricsReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{NodeId, TaskId};
    use crate::latency::DelayBreakdown;
    use crate::trace::TaskSource;
    use crate::traffic::Origin;

    fn begin(warmup_s: f64) -> TraceRecord {
        TraceRecord::Begin {
            scenario: ScenarioKind::Hotspot,
            architecture: Architecture::CRAN,
            seed: 1,
            ue_count: 100,
            duration_s: 100.0,
            warmup_s,
            cell: CellId(1),
        }
    }

    fn task(t: f64, total: f64) -> TraceRecord {
        TraceRecord::Task {
            t,
            task: TaskId(0),
            source: TaskSource::Ue(UeId(0)),
            cell: Some(CellId(1)),
            generated: t - total,
            delay: DelayBreakdown {
                comm_s: total,
                proc_s: 0.0,
                total_s: total,
                site: Site::BBUPool,
            },
        }
    }

    #[test]
    fn delay_mean() {
        let mut tr = Trace::new();
        tr.push(begin(0.0));
        tr.push(task(1.0, 0.004));
        tr.push(task(2.0, 0.006));
        tr.push(TraceRecord::End { t: 3.0 });
        let m = compute_metrics(&tr).unwrap();
        assert!((m.avg_e2e_delay_s.unwrap() - 0.005).abs() < 1e-15);
        assert_eq!(m.completions, 2);
    }

    #[test]
    fn no_completions_is_not_zero() {
        let mut tr = Trace::new();
        tr.push(begin(0.0));
        tr.push(TraceRecord::End { t: 3.0 });
        let m = compute_metrics(&tr).unwrap();
        assert_eq!(m.avg_e2e_delay_s, None);
        assert_eq!(m.blocking_probability, None);
        assert_eq!(m.total_power_w, None);
    }

    #[test]
    fn blocking_ratio() {
        let mut tr = Trace::new();
        tr.push(begin(0.0));
        for i in 0..100 {
            let ue = UeId(i);
            tr.push(TraceRecord::Arrival {
                t: 1.0,
                ue,
                cell: CellId(1),
                origin: Origin::Local,
            });
            if i < 10 {
                tr.push(TraceRecord::Block { t: 1.0, ue, cell: CellId(1) });
            } else {
                tr.push(TraceRecord::Admit { t: 1.0, ue, node: NodeId(0) });
            }
        }
        tr.push(TraceRecord::End { t: 2.0 });
        assert_eq!(compute_metrics(&tr).unwrap().blocking_probability, Some(0.10));
    }

    #[test]
    fn warmup_excluded() {
        let mut tr = Trace::new();
        tr.push(begin(5.0));
        tr.push(TraceRecord::Arrival {
            t: 1.0,
            ue: UeId(0),
            cell: CellId(1),
            origin: Origin::Local,
        });
        tr.push(TraceRecord::Block { t: 6.0, ue: UeId(0), cell: CellId(1) });
        tr.push(task(4.0, 0.5));
        tr.push(TraceRecord::End { t: 10.0 });
        let m = compute_metrics(&tr).unwrap();
        assert_eq!(m.generated, 0);
        assert_eq!(m.blocked, 0);
        assert_eq!(m.completions, 0);
    }

    #[test]
    fn constant_power_average() {
        let mut tr = Trace::new();
        tr.push(begin(0.0));
        for k in 0..10 {
            tr.push(TraceRecord::PowerTotal { t: k as f64, watts: 500.0 });
        }
        tr.push(TraceRecord::End { t: 10.0 });
        assert_eq!(compute_metrics(&tr).unwrap().total_power_w, Some(500.0));
    }

    #[test]
    fn incomplete_trace_rejected() {
        let mut tr = Trace::new();
        tr.push(begin(0.0));
        assert!(compute_metrics(&tr).is_err());
    }

    fn run(arch: Architecture, ue_count: u32, seed: u64, delay: Option<f64>) -> RunMetrics {
        RunMetrics {
            scenario: ScenarioKind::Hotspot,
            architecture: arch,
            ue_count,
            seed,
            avg_e2e_delay_s: delay,
            completions: 0,
            generated: 10,
            blocked: seed,
            blocking_probability: Some(seed as f64 / 10.0),
            total_power_w: Some(100.0),
            edge_tasks: 0,
            bbu_tasks: 0,
            dropped_tasks: 0,
            mean_comm_s: None,
            mean_proc_s: None,
            coverage: None,
            baseline_coverage: None,
            decisions: 0,
            decision_violations: 0,
        }
    }

    #[test]
    fn aggregation_orders_and_averages() {
        let runs = [
            run(Architecture::UCRAN, 100, 1, Some(1.0)),
            run(Architecture::MacroOnly, 200, 1, None),
            run(Architecture::MacroOnly, 100, 1, Some(2.0)),
            run(Architecture::MacroOnly, 100, 3, Some(4.0)),
        ];
        let rep = aggregate(&runs);
        let keys: Vec<_> = rep.rows.iter().map(|r| (r.architecture, r.ue_count)).collect();
        assert_eq!(
            keys,
            [
                (Architecture::MacroOnly, 100),
                (Architecture::MacroOnly, 200),
                (Architecture::UCRAN, 100)
            ]
        );
        let r = &rep.rows[0];
        assert_eq!(r.seed_count, 2);
        assert_eq!(r.avg_e2e_delay_s, Some(3.0));
        assert_eq!(r.blocking_probability, Some(0.2));
        assert!(r.delay_ci.is_some());
        assert_eq!(rep.rows[1].avg_e2e_delay_s, None);
        assert_eq!(rep.rows[2].delay_ci, None);
    }
}
