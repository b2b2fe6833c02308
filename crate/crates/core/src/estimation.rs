//! Self-normalized importance-sampling estimators, batch and recursive.

use crate::error::{Error, Result};
use crate::numeric::{normalize_log_weights, weighted_mean};
use crate::sample::WeightedSample;

/// Moment and normalizing-constant estimates from one batch of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub i_hat: Vec<f64>,
    pub z_hat: f64,
}

/// `Î = Σ ρ̄ f(x)` and `Ẑ = mean raw weight`.
pub fn batch_estimate<F>(samples: &[WeightedSample], f: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let first = samples.first().ok_or(Error::AllZeroWeights)?;
    let dim = f(&first.x).len();
    let values: Vec<Vec<f64>> = samples.iter().map(|s| f(&s.x)).collect();
    let i_hat = weighted_mean(
        dim,
        samples
            .iter()
            .zip(&values)
            .map(|(s, v)| (s.raw_weight(), v.as_slice())),
    )
    .ok_or(Error::AllZeroWeights)?;
    let total: f64 = samples.iter().map(|s| s.raw_weight()).sum();
    Ok(Estimate {
        i_hat,
        z_hat: total / samples.len() as f64,
    })
}

/// Accumulators `H_t`, `Î_t`, `Ẑ_t` of an iterative sampler.
///
/// `Î_t` is a convex combination of the previous estimate and the new batch,
/// weighted by their total masses `H_{t-1}` and `S_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningEstimator {
    h: f64,
    i_hat: Vec<f64>,
    total_samples: usize,
    t: usize,
}

impl RunningEstimator {
    pub fn new(dim: usize) -> Self {
        Self {
            h: 0.0,
            i_hat: vec![0.0; dim],
            total_samples: 0,
            t: 0,
        }
    }

    /// Cumulative weight sum `H_t`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn i_hat(&self) -> &[f64] {
        &self.i_hat
    }

    /// `Ẑ_t = H_t / (number of samples so far)`.
    pub fn z_hat(&self) -> f64 {
        if self.total_samples == 0 {
            0.0
        } else {
            self.h / self.total_samples as f64
        }
    }

    pub fn total_samples(&self) -> usize {
        self.total_samples
    }

    pub fn iterations(&self) -> usize {
        self.t
    }

    /// Folds one iteration's samples into the running estimate.
    ///
    /// A batch with no mass leaves `Î` unchanged. The error is raised only
    /// while the cumulative mass is still zero.
    pub fn update<F>(&mut self, batch: &[WeightedSample], f: F) -> Result<()>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let dim = self.i_hat.len();
        let mut s_t = 0.0;
        let mut weighted = vec![0.0; dim];
        for (i, s) in batch.iter().enumerate() {
            let w = s.raw_weight();
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { index: i, value: w });
            }
            if w == 0.0 {
                continue;
            }
            let v = f(&s.x);
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            s_t += w;
            for (a, vi) in weighted.iter_mut().zip(&v) {
                *a += w * vi;
            }
        }
        self.fold(s_t, &weighted, batch.len());
        if self.h > 0.0 {
            Ok(())
        } else {
            Err(Error::AllZeroWeights)
        }
    }

    /// Folds a batch summarized by its weight mass `s_t` and the weighted sum
    /// `Σ w f(x)`.
    pub(crate) fn fold(&mut self, s_t: f64, weighted_sum: &[f64], count: usize) {
        let h_new = self.h + s_t;
        if h_new > 0.0 {
            for (cur, ws) in self.i_hat.iter_mut().zip(weighted_sum) {
                *cur = (self.h * *cur + ws) / h_new;
            }
        }
        self.h = h_new;
        self.total_samples += count;
        self.t += 1;
    }

    /// Replaces the state with the estimate over a re-weighted sample store.
    pub(crate) fn reset_to(&mut self, h: f64, i_hat: Vec<f64>, total_samples: usize) {
        self.h = h;
        self.i_hat = i_hat;
        self.total_samples = total_samples;
        self.t += 1;
    }

    /// Direct constructor for callers holding `H_{t-1}`, `Î_{t-1}`.
    pub fn from_parts(h: f64, i_hat: Vec<f64>, total_samples: usize, t: usize) -> Self {
        Self {
            h,
            i_hat,
            total_samples,
            t,
        }
    }
}

/// One partial estimator `(Î_n, Ẑ_n, M_n)` where `M_n` is the number of
/// samples behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialEstimate {
    pub i_hat: Vec<f64>,
    pub z_hat: f64,
    pub samples: usize,
}

/// Convex combination of partial estimators: the weight of each partial is
/// its mass `M_n Ẑ_n`; `Ẑ` is the sample-count-weighted average.
pub fn combine_partial_estimators(partials: &[PartialEstimate]) -> Result<Estimate> {
    let first = partials.first().ok_or(Error::AllZeroPartials)?;
    let dim = first.i_hat.len();
    let total_samples: usize = partials.iter().map(|p| p.samples).sum();
    let i_hat = weighted_mean(
        dim,
        partials
            .iter()
            .map(|p| (p.samples as f64 * p.z_hat, p.i_hat.as_slice())),
    )
    .ok_or(Error::AllZeroPartials)?;
    let mass: f64 = partials.iter().map(|p| p.samples as f64 * p.z_hat).sum();
    Ok(Estimate {
        i_hat,
        z_hat: mass / total_samples as f64,
    })
}

/// Weighted point-mass approximation of the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleApproximation {
    pub support: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
}

impl ParticleApproximation {
    pub fn mean(&self) -> Vec<f64> {
        let dim = self.support.first().map_or(0, Vec::len);
        let mut m = vec![0.0; dim];
        for (x, p) in self.support.iter().zip(&self.probabilities) {
            for (mi, xi) in m.iter_mut().zip(x) {
                *mi += p * xi;
            }
        }
        m
    }
}

pub fn particle_approximation(samples: &[WeightedSample]) -> Result<ParticleApproximation> {
    let log_w: Vec<f64> = samples.iter().map(|s| s.log_weight).collect();
    if log_w.is_empty() {
        return Err(Error::AllZeroWeights);
    }
    Ok(ParticleApproximation {
        support: samples.iter().map(|s| s.x.clone()).collect(),
        probabilities: normalize_log_weights(&log_w)?,
    })
}

pub fn identity(x: &[f64]) -> Vec<f64> {
    x.to_vec()
}
