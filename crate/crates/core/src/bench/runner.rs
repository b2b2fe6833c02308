use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::replication_seed;
use crate::samplers;

use super::records::ResultRecord;
use super::spec::ExperimentSpec;

/// Runs every replication of every sweep point on a pool of `spec.jobs`
/// threads.
///
/// Replication `r` uses the seed `replication_seed(master, r)` at every sweep
/// point, so sweep points are compared under common random numbers. Records
/// come back point-major, replication-minor, whatever the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>> {
    let tasks: Vec<(usize, usize)> = (0..spec.points.len())
        .flat_map(|p| (0..spec.replications).map(move |r| (p, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {} worker threads: {e}", spec.jobs)))?;
    pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, r)| run_replication(spec, p, r))
            .collect()
    })
}

/// A single replication at sweep point `point`.
pub fn run_replication(spec: &ExperimentSpec, point: usize, replication: usize) -> Result<ResultRecord> {
    let p = &spec.points[point];
    let seed = replication_seed(spec.master_seed, replication as u64);
    let config = spec.config_for(p, seed)?;
    let result = samplers::run(&config)?;
    Ok(ResultRecord {
        experiment: spec.name.clone(),
        algorithm: spec.algorithm.name().to_string(),
        target: spec.target.name.clone(),
        n: p.n,
        m: p.m,
        t: p.t,
        sigma: p.sigma.value(),
        lambda: p.lambda.and_then(|l| l.value()),
        scheme: spec.scheme.name().to_string(),
        adaptation: spec.adaptation.name().to_string(),
        replication,
        seed,
        i_hat: result.i_hat,
        z_hat: result.z_hat,
        e: result.eval_count,
        wall_time_s: result.wall_time.as_secs_f64(),
    })
}
