//! Markov kernels that move the population of proposal means, plus PMC
//! multinomial resampling.
//!
//! All MH kernels here use Gaussian random-walk proposals, which are
//! symmetric, so the proposal ratio in the acceptance probability cancels.
//! Every kernel reads `log π` of the current means from [`MeanPopulation`]
//! and evaluates the target only at new candidates.

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::normalize_log_weights;
use crate::targets::LogDensity;
use crate::weighting::{Covariance, ProposalComponent};

/// Gaussian random-walk proposal `φ(μ' | μ) = N(μ'; μ, Λ)`.
///
/// `Frozen` proposes the current point (zero variance).
#[derive(Debug, Clone, PartialEq)]
pub enum RandomWalk {
    Gaussian(Arc<Covariance>),
    Frozen,
}

impl RandomWalk {
    pub fn isotropic(dim: usize, lambda: f64) -> Result<Self> {
        Ok(Self::Gaussian(Arc::new(Covariance::isotropic(dim, lambda)?)))
    }

    pub fn diagonal(stds: Vec<f64>) -> Result<Self> {
        Ok(Self::Gaussian(Arc::new(Covariance::diagonal(stds)?)))
    }

    pub fn propose<R: Rng + ?Sized>(&self, from: &[f64], rng: &mut R) -> Vec<f64> {
        match self {
            RandomWalk::Gaussian(cov) => {
                let mut out = vec![0.0; from.len()];
                cov.sample_into(from, rng, &mut out);
                out
            }
            RandomWalk::Frozen => from.to_vec(),
        }
    }
}

/// How the population of means evolves between iterations.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptationKernel {
    /// Means stay at their initial values.
    None,
    /// One independent MH step per chain. `kernels` holds one walk per chain,
    /// or a single walk shared by all.
    ParallelMH { kernels: Vec<RandomWalk> },
    /// One MH step on the stacked population; all or nothing.
    BlockMH { kernels: Vec<RandomWalk> },
    /// Sample Metropolis-Hastings with an independent proposal.
    Smh { proposal: ProposalComponent },
    /// A single chain threaded through the population indices.
    MhWithinGibbs { kernels: Vec<RandomWalk> },
    /// Multinomial resampling of the previous iteration's weighted samples.
    PmcResample,
}

impl AdaptationKernel {
    pub fn name(&self) -> &'static str {
        match self {
            AdaptationKernel::None => "none",
            AdaptationKernel::ParallelMH { .. } => "parallel-mh",
            AdaptationKernel::BlockMH { .. } => "block-mh",
            AdaptationKernel::Smh { .. } => "smh",
            AdaptationKernel::MhWithinGibbs { .. } => "mh-within-gibbs",
            AdaptationKernel::PmcResample => "pmc-resample",
        }
    }
}

pub(crate) fn walk_for(kernels: &[RandomWalk], n: usize) -> &RandomWalk {
    if kernels.len() == 1 {
        &kernels[0]
    } else {
        &kernels[n]
    }
}

/// Proposal means with cached `log π(μ_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanPopulation {
    means: Vec<Vec<f64>>,
    log_pi: Vec<f64>,
}

impl MeanPopulation {
    /// Evaluates the target once per mean.
    pub fn evaluate<T: LogDensity + ?Sized>(means: Vec<Vec<f64>>, target: &T) -> Self {
        let log_pi = means.iter().map(|m| target.log_density(m)).collect();
        Self { means, log_pi }
    }

    /// Population whose cached values are supplied by the caller.
    pub fn from_cached(means: Vec<Vec<f64>>, log_pi: Vec<f64>) -> Self {
        assert_eq!(means.len(), log_pi.len());
        Self { means, log_pi }
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn log_pi(&self) -> &[f64] {
        &self.log_pi
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub(crate) fn set(&mut self, n: usize, mean: Vec<f64>, log_pi: f64) {
        self.means[n] = mean;
        self.log_pi[n] = log_pi;
    }
}

/// Outcome of a single-site MH step.
#[derive(Debug, Clone, PartialEq)]
pub struct MhStep {
    pub mean: Vec<f64>,
    pub log_pi: f64,
    pub accepted: bool,
}

fn sanitize(lp: f64) -> f64 {
    if lp.is_nan() {
        f64::NEG_INFINITY
    } else {
        lp
    }
}

/// `true` with probability `min(1, exp(log_ratio))`. Always consumes one
/// uniform so stream positions do not depend on the outcome.
fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    !log_ratio.is_nan() && u.ln() < log_ratio
}

/// One random-walk MH step from `mean`, whose `log π` is `log_pi`.
/// Evaluates the target exactly once.
pub fn mh_transition<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    mean: &[f64],
    log_pi: f64,
    kernel: &RandomWalk,
    target: &T,
    rng: &mut R,
) -> MhStep {
    let candidate = kernel.propose(mean, rng);
    let lp = sanitize(target.log_density(&candidate));
    if accept(lp - log_pi, rng) {
        MhStep {
            mean: candidate,
            log_pi: lp,
            accepted: true,
        }
    } else {
        MhStep {
            mean: mean.to_vec(),
            log_pi,
            accepted: false,
        }
    }
}

/// Parallel single-site MH: chain `n` uses `rngs[n]`. Returns the number of
/// accepted moves.
pub fn parallel_mh_transition<T: LogDensity + ?Sized, R: Rng>(
    population: &mut MeanPopulation,
    kernels: &[RandomWalk],
    target: &T,
    rngs: &mut [R],
) -> usize {
    let mut accepted = 0;
    for (n, rng) in rngs.iter_mut().enumerate() {
        let step = mh_transition(
            &population.means[n],
            population.log_pi[n],
            walk_for(kernels, n),
            target,
            rng,
        );
        accepted += step.accepted as usize;
        population.set(n, step.mean, step.log_pi);
    }
    accepted
}

/// MH on the stacked means with the product of per-chain walks as proposal.
/// Evaluates the target `N` times and accepts the whole block or nothing.
pub fn block_mh_transition<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    population: &mut MeanPopulation,
    kernels: &[RandomWalk],
    target: &T,
    rng: &mut R,
) -> bool {
    let n = population.len();
    let candidates: Vec<Vec<f64>> = (0..n)
        .map(|i| walk_for(kernels, i).propose(&population.means[i], rng))
        .collect();
    let lps: Vec<f64> = candidates
        .iter()
        .map(|c| sanitize(target.log_density(c)))
        .collect();
    let log_ratio = lps.iter().sum::<f64>() - population.log_pi.iter().sum::<f64>();
    if accept(log_ratio, rng) {
        population.means = candidates;
        population.log_pi = lps;
        true
    } else {
        false
    }
}

/// SMH acceptance probability
/// `Σ_{n≥1} r_n / (Σ_{i≥0} r_i − min_i r_i)` for inverse weights
/// `r_i = φ(μ_i)/π(μ_i)` given in log-space; index 0 is the candidate.
pub fn smh_acceptance(log_r_candidate: f64, log_r_population: &[f64]) -> Result<f64> {
    if log_r_population
        .iter()
        .all(|lr| lr.is_nan() || *lr == f64::NEG_INFINITY)
    {
        return Err(Error::DegenerateInverseWeights);
    }
    if log_r_candidate == f64::INFINITY || log_r_candidate.is_nan() {
        return Ok(0.0);
    }
    if log_r_population.contains(&f64::INFINITY) {
        return Ok(1.0);
    }
    let shift = log_r_population
        .iter()
        .copied()
        .chain(std::iter::once(log_r_candidate))
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = |lr: f64| if lr.is_nan() { 0.0 } else { (lr - shift).exp() };
    let r0 = scale(log_r_candidate);
    let rs: Vec<f64> = log_r_population.iter().map(|&lr| scale(lr)).collect();

    // first minimum over i = 0..=N; the denominator sums every other term so
    // that a minimal candidate yields exactly the numerator
    let mut argmin = 0usize;
    let mut min = r0;
    for (i, &r) in rs.iter().enumerate() {
        if r < min {
            min = r;
            argmin = i + 1;
        }
    }
    let numerator: f64 = rs.iter().sum();
    let denominator = if argmin == 0 {
        numerator
    } else {
        r0 + rs
            .iter()
            .enumerate()
            .filter(|(i, _)| i + 1 != argmin)
            .map(|(_, r)| r)
            .sum::<f64>()
    };
    if denominator <= 0.0 {
        return Err(Error::DegenerateInverseWeights);
    }
    Ok((numerator / denominator).min(1.0))
}

/// Outcome of one SMH transition.
#[derive(Debug, Clone, PartialEq)]
pub struct SmhStep {
    pub replaced: Option<usize>,
    pub alpha: f64,
}

/// One SMH step: draw a candidate from `proposal`, pick a member with
/// probability proportional to its inverse weight, and swap it in with the
/// SMH acceptance probability. One target evaluation.
pub fn smh_transition<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    population: &mut MeanPopulation,
    proposal: &ProposalComponent,
    target: &T,
    rng: &mut R,
) -> Result<SmhStep> {
    let candidate = proposal.sample(rng);
    let lp0 = sanitize(target.log_density(&candidate));
    let log_r0 = proposal.log_pdf_unchecked(&candidate) - lp0;
    let log_r: Vec<f64> = population
        .means
        .iter()
        .zip(&population.log_pi)
        .map(|(m, lp)| proposal.log_pdf_unchecked(m) - lp)
        .collect();

    let k = select_inverse_weighted(&log_r, rng)?;
    let alpha = smh_acceptance(log_r0, &log_r)?;
    let u: f64 = rng.random();
    if u < alpha {
        population.set(k, candidate, lp0);
        Ok(SmhStep {
            replaced: Some(k),
            alpha,
        })
    } else {
        Ok(SmhStep {
            replaced: None,
            alpha,
        })
    }
}

/// Index drawn with probability proportional to `exp(log_r)`; infinite
/// entries share all the mass.
fn select_inverse_weighted<R: Rng + ?Sized>(log_r: &[f64], rng: &mut R) -> Result<usize> {
    let infinite: Vec<usize> = (0..log_r.len())
        .filter(|&i| log_r[i] == f64::INFINITY)
        .collect();
    let probs = if infinite.is_empty() {
        let clean: Vec<f64> = log_r
            .iter()
            .map(|&v| if v.is_nan() { f64::NEG_INFINITY } else { v })
            .collect();
        normalize_log_weights(&clean).map_err(|_| Error::DegenerateInverseWeights)?
    } else {
        let p = 1.0 / infinite.len() as f64;
        let mut v = vec![0.0; log_r.len()];
        infinite.iter().for_each(|&i| v[i] = p);
        v
    };
    let dist = WeightedIndex::new(&probs).map_err(|_| Error::DegenerateInverseWeights)?;
    Ok(dist.sample(rng))
}

/// Sequential MH sweep threading one chain through the population: the
/// chain starts at the last member, and member `n` becomes the state after
/// the `n`-th step. `N` target evaluations.
pub fn mh_within_gibbs_sweep<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    population: &mut MeanPopulation,
    kernels: &[RandomWalk],
    target: &T,
    rng: &mut R,
) -> usize {
    let n = population.len();
    let mut current = population.means[n - 1].clone();
    let mut current_lp = population.log_pi[n - 1];
    let mut accepted = 0;
    for i in 0..n {
        let step = mh_transition(&current, current_lp, walk_for(kernels, i), target, rng);
        accepted += step.accepted as usize;
        current = step.mean;
        current_lp = step.log_pi;
        population.set(i, current.clone(), current_lp);
    }
    accepted
}

/// `count` independent multinomial draws from the weighted samples. A
/// single sample is returned as is, whatever its weight.
pub fn pmc_resample<R: Rng + ?Sized>(
    samples: &[Vec<f64>],
    log_weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    assert_eq!(samples.len(), log_weights.len());
    if samples.len() == 1 {
        return Ok(vec![samples[0].clone(); count]);
    }
    let probs = normalize_log_weights(log_weights)?;
    let dist = WeightedIndex::new(&probs).map_err(|_| Error::AllZeroWeights)?;
    Ok((0..count)
        .map(|_| samples[dist.sample(rng)].clone())
        .collect())
}
