use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ucran::config::load_config;
use ucran::record::{self, Derivations, RunRecord, SweepEntry, SweepRecord};
use ucran::report::{emit_results, render, Format};
use ucran::sweep::parallel_sweep;
use ucran::AppError;
use ucran_core::analytic;
use ucran_core::engine::{self, SweepReport};
use ucran_core::traffic::LoadSchedule;
use ucran_core::{Architecture, ScenarioConfig};

#[derive(Parser)]
#[command(name = "ucran", version, about = "Macro / C-RAN / UAV-assisted C-RAN simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arch {
    Macro,
    Cran,
    Ucran,
    All,
}

impl Arch {
    fn resolve(self) -> Vec<Architecture> {
        match self {
            Arch::Macro => vec![Architecture::MacroOnly],
            Arch::Cran => vec![Architecture::CRAN],
            Arch::Ucran => vec![Architecture::UCRAN],
            Arch::All => Architecture::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario per selected architecture.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to the config's architecture.
        #[arg(long, value_enum)]
        arch: Option<Arch>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Sweep the configured load points over seeds and architectures.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        arch: Arch,
        /// Inclusive seed range `N..M`, or a single seed.
        #[arg(long, default_value = "1..5", value_parser = parse_seeds)]
        seeds: Seeds,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Parse and validate a config file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Closed-form reference values, optionally checked against the simulator.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Erlang-B blocking of a loss system.
    ErlangB {
        #[arg(long)]
        servers: u32,
        #[arg(long)]
        erlangs: f64,
        /// Also simulate the loss system with this many arrivals per seed.
        #[arg(long)]
        simulate: Option<u64>,
        #[arg(long, default_value = "1..10", value_parser = parse_seeds)]
        seeds: Seeds,
    },
    /// M/M/1 mean sojourn time and mean number in system.
    Mm1 {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        /// Also simulate until this many completions.
        #[arg(long)]
        simulate: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let a: u64 = a.trim().parse().map_err(|_| format!("bad seed: {a}"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad seed: {b}"))?;
    if b < a {
        return Err(format!("empty seed range {s}"));
    }
    Ok(Seeds((a..=b).collect()))
}

fn config_or_default(path: Option<&Path>) -> Result<ScenarioConfig, AppError> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => Ok(ScenarioConfig::default()),
    }
}

fn create_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn cmd_run(config: Option<&Path>, arch: Option<Arch>, seed: Option<u64>, out: &Path, format: Format) -> Result<(), AppError> {
    let base = config_or_default(config)?;
    let seed = seed.unwrap_or(base.scenario.seed);
    let archs = arch.map_or_else(|| vec![base.scenario.architecture], Arch::resolve);
    create_dir(out)?;
    let mut runs = Vec::new();
    for a in archs {
        let cfg = base.with(a, seed);
        let output = engine::run(&cfg)?;
        let stem = format!("{}_{}_s{seed}", cfg.scenario.kind, a);
        record::write_trace(&output.trace, &out.join(format!("{stem}.trace")))?;
        record::write_toml(&RunRecord::new(&cfg, &output.trace, &output.metrics), &out.join(format!("{stem}.toml")))?;
        let m = &output.metrics;
        println!(
            "{stem}: digest={} generated={} blocked={} completions={} edge={} bbu={}",
            output.trace.digest(),
            m.generated,
            m.blocked,
            m.completions,
            m.edge_tasks,
            m.bbu_tasks
        );
        if let (Some(c), Some(b)) = (m.coverage, m.baseline_coverage) {
            println!("{stem}: coverage={c} baseline={b}");
        }
        runs.push(output.metrics);
    }
    let report = SweepReport::from_runs(runs).report;
    let path = emit_results(&report, format, out, &format!("{}_s{seed}_results", base.scenario.kind))?;
    print!("{}", render(&report, Format::Txt));
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep(config: Option<&Path>, arch: Arch, seeds: &[u64], out: &Path, format: Format) -> Result<(), AppError> {
    let cfg = config_or_default(config)?;
    let schedule = LoadSchedule::new(cfg.traffic.load_fractions.clone())?;
    let (sweep, outcomes) = parallel_sweep(&cfg, &schedule, seeds, &arch.resolve())?;
    let path = emit_results(&sweep.report, format, out, "results")?;
    let rec = SweepRecord {
        version: record::VERSION,
        derivations: Derivations::of(&cfg),
        config: cfg.clone(),
        runs: outcomes
            .iter()
            .map(|o| SweepEntry {
                architecture: o.job.config.scenario.architecture.label().into(),
                ue_count: o.job.point.ue_count,
                load_fraction: o.job.point.fraction,
                seed: o.job.seed,
                trace_digest: o.digest.clone(),
            })
            .collect(),
    };
    record::write_toml(&rec, &out.join("sweep.toml"))?;
    print!("{}", render(&sweep.report, Format::Txt));
    println!("wrote {} ({} runs)", path.display(), outcomes.len());
    Ok(())
}

fn cmd_oracle(which: Oracle) -> Result<(), AppError> {
    match which {
        Oracle::ErlangB {
            servers,
            erlangs,
            simulate,
            seeds,
        } => {
            let b = analytic::erlang_b(servers, erlangs)?;
            println!("erlang_b servers={servers} erlangs={erlangs} blocking={b}");
            if let Some(arrivals) = simulate {
                let base = ScenarioConfig::loss_system(servers, erlangs, arrivals as f64);
                let mut sum = 0.0;
                for &s in &seeds.0 {
                    let m = engine::run(&base.with(base.scenario.architecture, s))?.metrics;
                    let p = m.blocking_probability.unwrap_or(0.0);
                    println!("simulated seed={s} arrivals={} blocking={p}", m.generated);
                    sum += p;
                }
                let mean = sum / seeds.0.len() as f64;
                println!("simulated mean={mean} relative_error={}", (mean - b) / b);
            }
        }
        Oracle::Mm1 { lambda, mu, simulate, seed } => {
            let w = analytic::mm1_sojourn(lambda, mu)?;
            let l = analytic::mm1_in_system(lambda, mu)?;
            println!("mm1 lambda={lambda} mu={mu} sojourn_s={w} in_system={l}");
            if let Some(n) = simulate {
                let o = engine::run_mm1(lambda, mu, n, seed)?;
                let rate = o.arrivals as f64 / o.elapsed_s;
                println!(
                    "simulated completions={} sojourn_s={} in_system={} little_lw={}",
                    o.completions,
                    o.mean_sojourn_s,
                    o.mean_in_system,
                    rate * o.mean_sojourn_s
                );
            }
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Run {
            config,
            arch,
            seed,
            out,
            format,
        } => cmd_run(config.as_deref(), arch, seed, &out, format),
        Command::Sweep {
            config,
            arch,
            seeds,
            out,
            format,
        } => cmd_sweep(config.as_deref(), arch, &seeds.0, &out, format),
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!(
                "{}: ok ({} / {})",
                config.display(),
                cfg.scenario.kind,
                cfg.scenario.architecture
            );
            Ok(())
        }
        Command::Oracle { which } => cmd_oracle(which),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
