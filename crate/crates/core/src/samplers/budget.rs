use crate::adaptation::AdaptationKernel;

use super::config::{Algorithm, SamplerConfig};

/// Fresh target evaluations performed by the iterations of a run.
///
/// Lower-level draws cost `N·M` per iteration. Mean adaptation adds `N` per
/// iteration for parallel MH, block MH and MH-within-Gibbs, and `1` for SMH.
/// PMC resampling and static means cost nothing extra. The parallel-MH
/// baseline has no importance sampling layer and costs `N·T`.
///
/// The one-off evaluation of the initial means is not included; see
/// [`setup_evals`].
pub fn eval_budget(config: &SamplerConfig) -> u64 {
    let (n, m, t) = (config.n as u64, config.m as u64, config.t as u64);
    if config.algorithm == Algorithm::ParallelMhBaseline {
        return n * t;
    }
    let adapt = match config.adaptation {
        AdaptationKernel::ParallelMH { .. }
        | AdaptationKernel::BlockMH { .. }
        | AdaptationKernel::MhWithinGibbs { .. } => n * t,
        AdaptationKernel::Smh { .. } => t,
        AdaptationKernel::None | AdaptationKernel::PmcResample => 0,
    };
    n * m * t + adapt
}

/// Evaluations of `π` at the initial means, needed once by the MCMC kernels
/// before their first acceptance test.
pub fn setup_evals(config: &SamplerConfig) -> u64 {
    match config.adaptation {
        AdaptationKernel::None | AdaptationKernel::PmcResample => 0,
        _ => config.n as u64,
    }
}

/// Largest `T` with `eval_budget ≤ budget` for the given `N`, `M` and kernel.
pub fn iterations_for_budget(config: &SamplerConfig, budget: u64) -> usize {
    let mut probe = config.clone();
    probe.t = 1;
    let per_iteration = eval_budget(&probe);
    (budget / per_iteration.max(1)) as usize
}
