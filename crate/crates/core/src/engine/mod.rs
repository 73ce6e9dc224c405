//! Scenario orchestration: single runs, sweeps over load points, seeds
//! and architectures, and a standalone M/M/1 queue.

pub mod config;
pub mod event;
pub mod kernel;
pub mod scenario;

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand_distr::{Distribution, Exp};

use self::config::{Architecture, ScenarioConfig, ScenarioKind};
use self::event::{EventKind, EventQueue};
use crate::error::{Error, Result};
use crate::ids::UeId;
use crate::latency::{ProcessingQueue, QueueModel};
use crate::metrics::{aggregate, compute_metrics, MetricsReport, RunMetrics};
use crate::topology::build_topology;
use crate::trace::Trace;
use crate::traffic::{schedule_sweep, stream_rng, LoadSchedule, SweepPoint};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub trace: Trace,
}

/// Run one scenario to completion.
pub fn run(config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    let trace = kernel::run_trace(config)?;
    let metrics = compute_metrics(&trace)?;
    Ok(RunOutput { metrics, trace })
}

/// One run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepJob {
    pub point: SweepPoint,
    pub seed: u64,
    pub config: ScenarioConfig,
}

impl SweepJob {
    pub fn run(&self) -> Result<RunMetrics> {
        run(&self.config).map(|o| o.metrics).map_err(|e| Error::Sweep {
            point: self.point.index,
            seed: self.seed,
            source: Box::new(e),
        })
    }
}

/// Every (architecture, load point, seed) job of a sweep, in report order.
pub fn sweep_plan(
    config: &ScenarioConfig,
    schedule: &LoadSchedule,
    seeds: &[u64],
    architectures: &[Architecture],
) -> Result<Vec<SweepJob>> {
    if seeds.is_empty() {
        return Err(Error::invalid("seeds", "a sweep needs at least one seed"));
    }
    if architectures.is_empty() {
        return Err(Error::invalid("architectures", "a sweep needs at least one architecture"));
    }
    if config.scenario.kind != ScenarioKind::Hotspot {
        return Err(Error::invalid("scenario.kind", "sweeps run the hotspot scenario"));
    }
    let mut archs = architectures.to_vec();
    archs.sort();
    archs.dedup();
    let mut jobs = Vec::new();
    for &arch in &archs {
        let base = config.with(arch, config.scenario.seed);
        let max_ues = build_topology(&base)?
            .cell(crate::ids::CellId(base.topology.hotspot_cell))
            .map(|c| c.max_ues)
            .ok_or_else(|| Error::invalid("topology.hotspot_cell", "no such cell"))?;
        for point in schedule_sweep(schedule, max_ues)? {
            for &seed in seeds {
                let mut c = config.with(arch, seed);
                c.traffic.load_fraction = point.fraction;
                jobs.push(SweepJob { point, seed, config: c });
            }
        }
    }
    Ok(jobs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Per-run metrics in plan order.
    pub runs: Vec<RunMetrics>,
    pub report: MetricsReport,
}

impl SweepReport {
    pub fn from_runs(runs: Vec<RunMetrics>) -> Self {
        let report = aggregate(&runs);
        SweepReport { runs, report }
    }
}

/// Sequential sweep; the first failing run aborts it.
pub fn run_sweep(
    config: &ScenarioConfig,
    schedule: &LoadSchedule,
    seeds: &[u64],
    architectures: &[Architecture],
) -> Result<SweepReport> {
    let jobs = sweep_plan(config, schedule, seeds, architectures)?;
    let runs = jobs.iter().map(SweepJob::run).collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::from_runs(runs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mm1Outcome {
    pub completions: u64,
    pub arrivals: u64,
    pub elapsed_s: f64,
    pub mean_sojourn_s: f64,
    /// Time-average number in system.
    pub mean_in_system: f64,
}

/// Single FIFO processing queue fed by Poisson arrivals, run until
/// `completions` tasks have finished.
pub fn run_mm1(lambda: f64, mu: f64, completions: u64, seed: u64) -> Result<Mm1Outcome> {
    let gaps = Exp::new(lambda).map_err(|_| Error::domain("arrival rate must be > 0"))?;
    let service = Exp::new(mu).map_err(|_| Error::domain("service rate must be > 0"))?;
    if completions == 0 {
        return Err(Error::domain("need at least one completion"));
    }
    let mut arrival_rng = stream_rng(seed, 1);
    let mut service_rng = stream_rng(seed, 2);
    let mut q = ProcessingQueue::new(QueueModel::new(mu)?);
    let mut events = EventQueue::new();
    let mut in_queue: VecDeque<f64> = VecDeque::new();
    events.schedule(gaps.sample(&mut arrival_rng), EventKind::UeArrival(UeId(0)));
    let mut now = 0.0;
    while let Some(ev) = events.pop() {
        now = ev.time;
        match ev.kind {
            EventKind::UeArrival(_) => {
                let done = q.arrive(now, service.sample(&mut service_rng));
                in_queue.push_back(now);
                events.schedule(done, EventKind::TaskDone { slot: 0 });
                events.schedule(now + gaps.sample(&mut arrival_rng), EventKind::UeArrival(UeId(0)));
            }
            EventKind::TaskDone { .. } => {
                let arrived = in_queue.pop_front().ok_or_else(|| Error::domain("departure from empty queue"))?;
                q.depart(now, now - arrived)?;
                if q.completions() >= completions {
                    break;
                }
            }
            _ => {}
        }
    }
    Ok(Mm1Outcome {
        completions: q.completions(),
        arrivals: q.arrivals(),
        elapsed_s: now,
        mean_sojourn_s: q.mean_sojourn().unwrap_or(0.0),
        mean_in_system: q.mean_in_system(now),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_duration_is_empty() {
        let mut c = ScenarioConfig::default();
        c.scenario.duration_s = 0.0;
        let out = run(&c).unwrap();
        assert_eq!(out.trace.len(), 2);
        assert_eq!(out.metrics.generated, 0);
        assert_eq!(out.metrics.avg_e2e_delay_s, None);
    }

    #[test]
    fn plan_counts() {
        let c = ScenarioConfig::default();
        let jobs = sweep_plan(&c, &LoadSchedule::default_sweep(), &[1, 2, 3, 4, 5], &Architecture::ALL).unwrap();
        assert_eq!(jobs.len(), 150);
        assert_eq!(jobs[0].config.scenario.architecture, Architecture::MacroOnly);
        assert_eq!(jobs[0].point.ue_count, 100);
        assert_eq!(jobs[149].point.ue_count, 1000);
        assert!(sweep_plan(&c, &LoadSchedule::default_sweep(), &[], &Architecture::ALL).is_err());
    }

    #[test]
    fn mm1_short_run_is_sane() {
        let o = run_mm1(50.0, 100.0, 20_000, 3).unwrap();
        assert_eq!(o.completions, 20_000);
        assert!((o.mean_sojourn_s - 0.02).abs() < 0.004, "{}", o.mean_sojourn_s);
    }
}
