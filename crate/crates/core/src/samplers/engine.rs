use std::sync::Arc;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;

use crate::adaptation::{
    block_mh_transition, mh_within_gibbs_sweep, parallel_mh_transition, pmc_resample, smh_transition,
    AdaptationKernel, MeanPopulation,
};
use crate::error::{Error, Result};
use crate::estimation::RunningEstimator;
use crate::numeric::{log_sum_exp, LogSumExp};
use crate::rng::{RngStream, StreamRole};
use crate::sample::WeightedSample;
use crate::targets::{CountingTarget, LogDensity};
use crate::weighting::{
    log_weight, Covariance, DenominatorScheme, ProposalComponent, ProposalHistory, ProposalIndex,
};

use super::config::{Algorithm, SamplerConfig};

/// Running estimate after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    /// One-based iteration number.
    pub t: usize,
    pub i_hat: Vec<f64>,
    pub z_hat: Option<f64>,
}

/// Output of a sampler run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: Algorithm,
    /// Posterior mean estimate.
    pub i_hat: Vec<f64>,
    /// Normalizing-constant estimate; `None` for the MCMC baseline, which
    /// cannot produce one.
    pub z_hat: Option<f64>,
    /// Fresh target evaluations during the iterations; equals
    /// [`eval_budget`](super::eval_budget).
    pub eval_count: u64,
    /// Evaluations at the initial means before the first iteration.
    pub setup_evals: u64,
    pub wall_time: Duration,
    /// Empty unless `trace` was set.
    pub trace: Vec<TracePoint>,
    pub final_means: Vec<Vec<f64>>,
    /// Fraction of accepted mean moves, for MCMC kernels.
    pub acceptance_rate: Option<f64>,
    /// Every sample with its final weight; empty unless `keep_samples`.
    pub samples: Vec<WeightedSample>,
    /// Proposals used, when `keep_samples` is set.
    pub history: Option<ProposalHistory>,
}

/// Samples kept for re-weighting, grouped by the mixture they divide by.
///
/// Each sample carries `log π(x)` and a running log-sum of the proposal
/// densities of its group, so a new proposal costs one density evaluation
/// per affected sample and no target evaluations.
struct ReweightStore {
    dim: usize,
    xs: Vec<f64>,
    log_pi: Vec<f64>,
    den: Vec<LogSumExp>,
    group: Vec<usize>,
    proposal: Vec<ProposalIndex>,
    log_w: Vec<f64>,
    members: Vec<Vec<ProposalIndex>>,
    samples_in: Vec<Vec<usize>>,
}

impl ReweightStore {
    fn new(dim: usize, groups: usize, capacity: usize) -> Self {
        Self {
            dim,
            xs: Vec::with_capacity(capacity * dim),
            log_pi: Vec::with_capacity(capacity),
            den: Vec::with_capacity(capacity),
            group: Vec::with_capacity(capacity),
            proposal: Vec::with_capacity(capacity),
            log_w: Vec::with_capacity(capacity),
            members: vec![Vec::new(); groups],
            samples_in: vec![Vec::new(); groups],
        }
    }

    fn groups(scheme: &DenominatorScheme, chains: usize) -> usize {
        match scheme {
            DenominatorScheme::Temporal => chains,
            DenominatorScheme::Partition(p) => p.sets().len(),
            _ => 1,
        }
    }

    fn group_of(scheme: &DenominatorScheme, idx: ProposalIndex) -> Result<usize> {
        match scheme {
            DenominatorScheme::Temporal => Ok(idx.chain),
            DenominatorScheme::Partition(p) => p.set_of(idx).map_err(|_| Error::PartitionNotCovering {
                chain: idx.chain,
                iteration: idx.iteration,
            }),
            _ => Ok(0),
        }
    }

    fn x(&self, s: usize) -> &[f64] {
        &self.xs[s * self.dim..(s + 1) * self.dim]
    }

    /// Adds iteration `t`: first the new proposals enter the denominators of
    /// the stored samples of their groups, then the new samples get their
    /// full denominators.
    fn absorb(
        &mut self,
        scheme: &DenominatorScheme,
        history: &ProposalHistory,
        t: usize,
        m: usize,
        xs: &[f64],
        log_pi: &[f64],
    ) -> Result<()> {
        let chains = history.chains();
        for n in 0..chains {
            let idx = ProposalIndex::new(n, t);
            let g = Self::group_of(scheme, idx)?;
            let q = history.get(idx)?;
            for &s in &self.samples_in[g] {
                let v = q.log_pdf_unchecked(&self.xs[s * self.dim..(s + 1) * self.dim]);
                self.den[s].add(v);
            }
            self.members[g].push(idx);
        }
        for (k, lp) in log_pi.iter().enumerate() {
            let idx = ProposalIndex::new(k / m, t);
            let g = Self::group_of(scheme, idx)?;
            let x = &xs[k * self.dim..(k + 1) * self.dim];
            let mut acc = LogSumExp::new();
            for &p in &self.members[g] {
                acc.add(history.get(p)?.log_pdf_unchecked(x));
            }
            let s = self.log_pi.len();
            self.xs.extend_from_slice(x);
            self.log_pi.push(*lp);
            self.den.push(acc);
            self.group.push(g);
            self.proposal.push(idx);
            self.log_w.push(f64::NEG_INFINITY);
            self.samples_in[g].push(s);
        }
        Ok(())
    }

    /// Recomputes every weight and returns `(H, Î)`.
    fn estimate(&mut self) -> Result<(f64, Vec<f64>)> {
        let mut h = 0.0;
        let mut sum = vec![0.0; self.dim];
        let log_sizes: Vec<f64> = self.members.iter().map(|m| (m.len() as f64).ln()).collect();
        for s in 0..self.log_pi.len() {
            let lden = self.den[s].value() - log_sizes[self.group[s]];
            let lw = log_weight(self.log_pi[s], lden).map_err(|_| Error::NonFiniteWeight {
                index: s,
                value: f64::INFINITY,
            })?;
            self.log_w[s] = lw;
            let w = lw.exp();
            if w > 0.0 {
                h += w;
                for (a, xi) in sum.iter_mut().zip(self.x(s)) {
                    *a += w * xi;
                }
            }
        }
        let i_hat = if h > 0.0 {
            sum.iter().map(|v| v / h).collect()
        } else {
            vec![0.0; self.dim]
        };
        Ok((h, i_hat))
    }

    fn into_samples(self) -> Vec<WeightedSample> {
        (0..self.log_pi.len())
            .map(|s| WeightedSample {
                x: self.x(s).to_vec(),
                log_weight: self.log_w[s],
                chain: self.proposal[s].chain,
                iteration: self.proposal[s].iteration,
                replica: 0,
            })
            .collect()
    }
}

fn sanitize(lp: f64) -> f64 {
    if lp.is_nan() {
        f64::NEG_INFINITY
    } else {
        lp
    }
}

pub(crate) fn chain_covariances(cfg: &SamplerConfig) -> Result<Vec<Arc<Covariance>>> {
    (0..cfg.n)
        .map(|i| cfg.lower.for_chain(cfg.dim(), cfg.chain_offset + i, cfg.master_seed))
        .collect()
}

fn initial_means(cfg: &SamplerConfig) -> Vec<Vec<f64>> {
    (0..cfg.n)
        .map(|i| cfg.init.mean_for(cfg.chain_offset + i, cfg.master_seed))
        .collect()
}

fn chain_rngs(seed: u64, role: StreamRole, offset: usize, n: usize) -> Vec<ChaCha8Rng> {
    (0..n)
        .map(|i| RngStream::for_role(seed, role, (offset + i) as u64).rng())
        .collect()
}

/// The iterative adapt → sample → weight → estimate loop shared by every
/// importance-sampling algorithm.
pub(crate) fn run_iterative<T: LogDensity>(cfg: &SamplerConfig, target: &T) -> Result<RunResult> {
    let start = Instant::now();
    let target = CountingTarget::new(target);
    let dim = cfg.dim();
    let (n, m) = (cfg.n, cfg.m);
    let nm = n * m;
    let scheme = &cfg.denominator;

    let covs = chain_covariances(cfg)?;
    let means = initial_means(cfg);
    let needs_pi = !matches!(cfg.adaptation, AdaptationKernel::None | AdaptationKernel::PmcResample);
    let mut population = if needs_pi {
        MeanPopulation::evaluate(means, &target)
    } else {
        MeanPopulation::from_cached(means, vec![f64::NAN; n])
    };
    let setup_evals = target.count();
    target.reset();

    let mut adapt_rngs = match cfg.adaptation {
        AdaptationKernel::ParallelMH { .. } => {
            chain_rngs(cfg.master_seed, StreamRole::Adaptation, cfg.chain_offset, n)
        }
        _ => Vec::new(),
    };
    let mut pop_rng = RngStream::for_role(cfg.master_seed, StreamRole::Population, 0).rng();
    let mut lower_rngs = chain_rngs(cfg.lower_seed(), StreamRole::Lower, cfg.chain_offset, n);

    let reweight = scheme.needs_reweighting();
    let mut store = reweight.then(|| {
        ReweightStore::new(dim, ReweightStore::groups(scheme, n), nm * cfg.t)
    });
    let mut history = ProposalHistory::new(n);
    let mut estimator = RunningEstimator::new(dim);
    let mut kept = Vec::new();
    let mut trace = Vec::new();
    let (mut accepted, mut proposed) = (0usize, 0usize);

    let mut xs = vec![0.0; nm * dim];
    let mut log_pi = vec![0.0; nm];
    let mut log_w = vec![0.0; nm];
    let mut scratch = vec![0.0; n];
    let ln_n = (n as f64).ln();

    for t in 0..cfg.t {
        match &cfg.adaptation {
            AdaptationKernel::ParallelMH { kernels } => {
                accepted += parallel_mh_transition(&mut population, kernels, &target, &mut adapt_rngs);
                proposed += n;
            }
            AdaptationKernel::BlockMH { kernels } => {
                if block_mh_transition(&mut population, kernels, &target, &mut pop_rng) {
                    accepted += n;
                }
                proposed += n;
            }
            AdaptationKernel::Smh { proposal } => {
                let step = smh_transition(&mut population, proposal, &target, &mut pop_rng)?;
                accepted += step.replaced.is_some() as usize;
                proposed += 1;
            }
            AdaptationKernel::MhWithinGibbs { kernels } => {
                accepted += mh_within_gibbs_sweep(&mut population, kernels, &target, &mut pop_rng);
                proposed += n;
            }
            AdaptationKernel::None | AdaptationKernel::PmcResample => {}
        }

        let proposals: Vec<ProposalComponent> = population
            .means()
            .iter()
            .zip(&covs)
            .map(|(mu, c)| ProposalComponent::new(mu.clone(), c.clone()))
            .collect::<Result<_>>()?;

        for (i, (q, rng)) in proposals.iter().zip(lower_rngs.iter_mut()).enumerate() {
            for j in 0..m {
                let k = i * m + j;
                let x = &mut xs[k * dim..(k + 1) * dim];
                q.sample_into(rng, x);
                log_pi[k] = sanitize(target.log_density(x));
            }
        }
        history.push_iteration(proposals, m);

        if let Some(store) = store.as_mut() {
            store.absorb(scheme, &history, t, m, &xs, &log_pi)?;
            let (h, i_hat) = store.estimate()?;
            estimator.reset_to(h, i_hat, store.log_pi.len());
            log_w.copy_from_slice(&store.log_w[store.log_w.len() - nm..]);
        } else {
            let current = history.iteration(t);
            let mut s_t = 0.0;
            let mut weighted = vec![0.0; dim];
            for k in 0..nm {
                let x = &xs[k * dim..(k + 1) * dim];
                let own = &current[k / m].0;
                let lden = if n == 1 || *scheme == DenominatorScheme::Standard {
                    own.log_pdf_unchecked(x)
                } else {
                    for (slot, (q, _)) in scratch.iter_mut().zip(current) {
                        *slot = q.log_pdf_unchecked(x);
                    }
                    log_sum_exp(&scratch) - ln_n
                };
                let lw = log_weight(log_pi[k], lden).map_err(|_| Error::NonFiniteWeight {
                    index: t * nm + k,
                    value: f64::INFINITY,
                })?;
                log_w[k] = lw;
                let w = lw.exp();
                if w > 0.0 {
                    s_t += w;
                    for (a, xi) in weighted.iter_mut().zip(x) {
                        *a += w * xi;
                    }
                }
                if cfg.keep_samples {
                    kept.push(WeightedSample {
                        x: x.to_vec(),
                        log_weight: lw,
                        chain: k / m,
                        iteration: t,
                        replica: 0,
                    });
                }
            }
            estimator.fold(s_t, &weighted, nm);
        }

        if cfg.trace {
            trace.push(TracePoint {
                t: t + 1,
                i_hat: estimator.i_hat().to_vec(),
                z_hat: Some(estimator.z_hat()),
            });
        }

        if matches!(cfg.adaptation, AdaptationKernel::PmcResample) {
            let points: Vec<Vec<f64>> = xs.chunks(dim).map(<[f64]>::to_vec).collect();
            let means = pmc_resample(&points, &log_w, n, &mut pop_rng)?;
            population = MeanPopulation::from_cached(means, vec![f64::NAN; n]);
        }
    }

    if estimator.h() <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    let samples = match store {
        Some(store) if cfg.keep_samples => store.into_samples(),
        _ => kept,
    };
    Ok(RunResult {
        algorithm: cfg.algorithm,
        i_hat: estimator.i_hat().to_vec(),
        z_hat: Some(estimator.z_hat()),
        eval_count: target.count(),
        setup_evals,
        wall_time: start.elapsed(),
        trace,
        final_means: population.means().to_vec(),
        acceptance_rate: (proposed > 0).then(|| accepted as f64 / proposed as f64),
        samples,
        history: cfg.keep_samples.then_some(history),
    })
}

/// `N` independent random-walk MH chains of length `T`; the estimate is the
/// pooled average of every post-move state.
pub(crate) fn run_mh_baseline<T: LogDensity>(cfg: &SamplerConfig, target: &T) -> Result<RunResult> {
    let start = Instant::now();
    let target = CountingTarget::new(target);
    let AdaptationKernel::ParallelMH { kernels } = &cfg.adaptation else {
        return Err(Error::config("the parallel-MH baseline needs a parallel MH kernel"));
    };
    let dim = cfg.dim();
    let n = cfg.n;
    let mut population = MeanPopulation::evaluate(initial_means(cfg), &target);
    let setup_evals = target.count();
    target.reset();
    let mut rngs = chain_rngs(cfg.master_seed, StreamRole::Adaptation, cfg.chain_offset, n);
    let mut sum = vec![0.0; dim];
    let mut trace = Vec::new();
    let mut accepted = 0usize;
    for t in 0..cfg.t {
        accepted += parallel_mh_transition(&mut population, kernels, &target, &mut rngs);
        for mu in population.means() {
            for (a, v) in sum.iter_mut().zip(mu) {
                *a += v;
            }
        }
        if cfg.trace {
            let count = ((t + 1) * n) as f64;
            trace.push(TracePoint {
                t: t + 1,
                i_hat: sum.iter().map(|v| v / count).collect(),
                z_hat: None,
            });
        }
    }
    let count = (cfg.t * n) as f64;
    Ok(RunResult {
        algorithm: cfg.algorithm,
        i_hat: sum.iter().map(|v| v / count).collect(),
        z_hat: None,
        eval_count: target.count(),
        setup_evals,
        wall_time: start.elapsed(),
        trace,
        final_means: population.means().to_vec(),
        acceptance_rate: Some(accepted as f64 / count),
        samples: Vec::new(),
        history: None,
    })
}
