//! Complete algorithms built from the adaptation kernels, the denominator
//! schemes and the recursive estimator.
//!
//! Which algorithm runs is decided by [`SamplerConfig::algorithm`] together
//! with the adaptation kernel and the denominator. Markov PMC (standard
//! denominator) and Markov AMIS (temporal denominator) are configurations of
//! [`run_population_mais`], not separate code paths.

mod budget;
mod config;
mod engine;
mod kde;

pub use budget::{eval_budget, iterations_for_budget, setup_evals};
pub use config::{Algorithm, Initializer, LowerCovariance, SamplerConfig, DEFAULT_HISTORY_CAP};
pub use engine::{RunResult, TracePoint};
pub use kde::{equivalent_mixture_check, Grid};

use crate::error::{Error, Result};
use crate::targets::LogDensity;

/// Runs the configured algorithm on the configured target.
pub fn run(config: &SamplerConfig) -> Result<RunResult> {
    run_with(config, &*config.target)
}

/// Runs the configured algorithm against `target` instead of the configured
/// one, e.g. an instrumented wrapper.
pub fn run_with<T: LogDensity>(config: &SamplerConfig, target: &T) -> Result<RunResult> {
    config.validate()?;
    if target.dim() != config.dim() {
        return Err(Error::DimensionMismatch {
            expected: config.dim(),
            got: target.dim(),
        });
    }
    let result = match config.algorithm {
        Algorithm::ParallelMhBaseline => engine::run_mh_baseline(config, target)?,
        _ => engine::run_iterative(config, target)?,
    };
    debug_assert_eq!(result.eval_count, eval_budget(config));
    Ok(result)
}

fn as_algorithm(config: &SamplerConfig, algorithm: Algorithm) -> Result<RunResult> {
    if config.algorithm == algorithm {
        run(config)
    } else {
        let mut c = config.clone();
        c.algorithm = algorithm;
        run(&c)
    }
}

/// Static MIS: the means never move, and every iteration draws `M` samples
/// from each of the `N` fixed proposals.
pub fn run_static_mis(config: &SamplerConfig) -> Result<RunResult> {
    as_algorithm(config, Algorithm::StaticMis)
}

/// Random-walk importance sampling: one MH chain drives a single proposal.
pub fn run_rwis(config: &SamplerConfig) -> Result<RunResult> {
    as_algorithm(config, Algorithm::Rwis)
}

/// Population MAIS with parallel (PI-MAIS) or interacting (I²-MAIS) chains.
pub fn run_population_mais(config: &SamplerConfig) -> Result<RunResult> {
    as_algorithm(config, Algorithm::PopulationMais)
}

/// Generic adaptive MIS: any adaptation, any denominator. Temporal, full and
/// partition denominators re-weight all earlier samples every iteration.
pub fn run_gamis(config: &SamplerConfig) -> Result<RunResult> {
    as_algorithm(config, Algorithm::Gamis)
}

/// Standard PMC: multinomial resampling of the weighted samples sets the
/// next means.
pub fn run_standard_pmc(config: &SamplerConfig) -> Result<RunResult> {
    as_algorithm(config, Algorithm::StandardPmc)
}

/// `N` parallel random-walk MH chains without importance sampling.
pub fn run_parallel_mh_baseline(config: &SamplerConfig) -> Result<RunResult> {
    as_algorithm(config, Algorithm::ParallelMhBaseline)
}
