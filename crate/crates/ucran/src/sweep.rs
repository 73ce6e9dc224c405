//! Parallel sweep: every job gets its own kernel; results are collected in
//! plan order, so the report does not depend on scheduling.

use rayon::prelude::*;
use ucran_core::engine::{self, sweep_plan, SweepJob, SweepReport};
use ucran_core::metrics::RunMetrics;
use ucran_core::traffic::LoadSchedule;
use ucran_core::{Architecture, Error, Result, ScenarioConfig};

#[derive(Debug, Clone)]
pub struct JobOutcome {
    pub job: SweepJob,
    pub metrics: RunMetrics,
    pub digest: String,
}

fn run_job(job: &SweepJob) -> Result<JobOutcome> {
    let out = engine::run(&job.config).map_err(|e| Error::Sweep {
        point: job.point.index,
        seed: job.seed,
        source: Box::new(e),
    })?;
    Ok(JobOutcome {
        job: job.clone(),
        metrics: out.metrics,
        digest: out.trace.digest(),
    })
}

/// Run a sweep on the rayon pool. The first failing job in plan order is
/// reported.
pub fn parallel_sweep(
    config: &ScenarioConfig,
    schedule: &LoadSchedule,
    seeds: &[u64],
    architectures: &[Architecture],
) -> Result<(SweepReport, Vec<JobOutcome>)> {
    let jobs = sweep_plan(config, schedule, seeds, architectures)?;
    let results: Vec<Result<JobOutcome>> = jobs.par_iter().map(run_job).collect();
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let report = SweepReport::from_runs(outcomes.iter().map(|o| o.metrics.clone()).collect());
    Ok((report, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_sequential() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.duration_s = 60.0;
        let schedule = LoadSchedule::new(vec![0.2, 0.9]).unwrap();
        let seeds = [1, 2];
        let (par, outcomes) = parallel_sweep(&cfg, &schedule, &seeds, &Architecture::ALL).unwrap();
        let seq = ucran_core::run_sweep(&cfg, &schedule, &seeds, &Architecture::ALL).unwrap();
        assert_eq!(par, seq);
        assert_eq!(outcomes.len(), 12);
        assert_eq!(par.report.rows.len(), 6);
    }
}
