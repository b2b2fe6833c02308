use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use mais::bench::quadrature::{quadrature_reference, write_reference, ReferenceCache};
use mais::bench::{compute_mse, export_csv, group_by_point, run_experiment, write_csv, ExperimentSpec};
use mais::samplers::{eval_budget, setup_evals};
use mais::targets::{LogDensity, TargetModel, TARGET_NAMES};

/// Benchmark harness for Markov adaptive importance samplers.
#[derive(Parser)]
#[command(name = "mais-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment and write one CSV row per replication.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Master seed (overrides [harness] seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Replications per sweep point (overrides [harness] replications).
        #[arg(long)]
        reps: Option<usize>,
        /// Output CSV; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides [harness] jobs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the registered targets.
    ListTargets,
    /// Compute reference moments by grid quadrature and cache them.
    Quadrature {
        #[arg(long)]
        target: String,
        /// Dimension, for targets with a variable one.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the target-evaluation budget of every sweep point.
    Budget {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Marks failures to load an experiment file, which exit with the
/// configuration status even for I/O errors.
#[derive(Debug)]
struct ConfigFailure(mais::Error);

impl std::fmt::Display for ConfigFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for ConfigFailure {}

fn load(path: &std::path::Path) -> anyhow::Result<ExperimentSpec> {
    Ok(ExperimentSpec::from_file(path).map_err(ConfigFailure)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config = err.chain().any(|e| {
                e.is::<ConfigFailure>()
                    || e.downcast_ref::<mais::Error>().is_some_and(mais::Error::is_config_error)
            });
            ExitCode::from(if config { 2 } else { 3 })
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run {
            config,
            seed,
            reps,
            out,
            jobs,
        } => {
            let mut spec = load(&config)?;
            if let Some(s) = seed {
                spec.master_seed = s;
            }
            if let Some(r) = reps {
                anyhow::ensure!(r >= 1, mais::Error::InvalidConfig("--reps must be at least 1".into()));
                spec.replications = r;
            }
            if let Some(j) = jobs {
                anyhow::ensure!(j >= 1, mais::Error::InvalidConfig("--jobs must be at least 1".into()));
                spec.jobs = j;
            }
            let records = run_experiment(&spec).context("experiment failed")?;
            match &out {
                Some(path) => export_csv(&records, path)?,
                None => write_csv(&records, std::io::stdout().lock())?,
            }
            if let Ok((mean, z)) = spec.reference_values() {
                let mut err = std::io::stderr().lock();
                for group in group_by_point(&records) {
                    let r = &group[0];
                    let mse = compute_mse(&group, Some(&mean), z)?;
                    writeln!(
                        err,
                        "N={} M={} T={} sigma={} lambda={}: MSE per component {:?}, MSE(Z) {}",
                        r.n,
                        r.m,
                        r.t,
                        r.sigma.map_or("random".into(), |v| v.to_string()),
                        r.lambda.map_or("-".into(), |v| v.to_string()),
                        mse.per_component,
                        mse.z.map_or("NA".into(), |v| format!("{v:.6e}")),
                    )?;
                }
            }
        }
        Command::ListTargets => {
            for name in TARGET_NAMES {
                let t = TargetModel::by_name(name, None)?;
                let reference = match &t.reference {
                    Some(r) => r.source,
                    None => "none",
                };
                println!("{name}\tdim={}\treference={reference}", t.dim());
            }
        }
        Command::Quadrature { target, dim, out } => {
            let t = TargetModel::by_name(&target, dim)?;
            let q = quadrature_reference(&t)?;
            let cache = ReferenceCache::new(&t, &q);
            write_reference(&out, &cache)?;
            println!("mean = {:?}", q.mean);
            println!("Z = {:.12e} (log Z = {:.12})", q.z, q.log_z);
        }
        Command::Budget { config } => {
            let spec = load(&config)?;
            for p in &spec.points {
                let c = spec.config_for(p, spec.master_seed)?;
                println!(
                    "N={} M={} T={}: E={} (+{} initial)",
                    p.n,
                    p.m,
                    p.t,
                    eval_budget(&c),
                    setup_evals(&c)
                );
            }
        }
    }
    Ok(())
}
