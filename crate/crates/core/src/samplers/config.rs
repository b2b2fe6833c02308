use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::adaptation::{AdaptationKernel, RandomWalk};
use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamRole};
use crate::targets::{LogDensity, TargetModel};
use crate::weighting::{Covariance, DenominatorScheme};

/// Default cap on the number of samples kept for historical re-weighting.
pub const DEFAULT_HISTORY_CAP: usize = 50_000_000;

/// Which complete algorithm a configuration runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    StaticMis,
    Rwis,
    PopulationMais,
    Gamis,
    StandardPmc,
    ParallelMhBaseline,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::StaticMis => "static-mis",
            Algorithm::Rwis => "rwis",
            Algorithm::PopulationMais => "population-mais",
            Algorithm::Gamis => "gamis",
            Algorithm::StandardPmc => "standard-pmc",
            Algorithm::ParallelMhBaseline => "parallel-mh",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "static-mis" | "static" => Algorithm::StaticMis,
            "rwis" => Algorithm::Rwis,
            "population-mais" | "pi-mais" | "i2-mais" | "mais" => Algorithm::PopulationMais,
            "gamis" => Algorithm::Gamis,
            "standard-pmc" | "pmc" => Algorithm::StandardPmc,
            "parallel-mh" => Algorithm::ParallelMhBaseline,
            other => return Err(Error::config(format!("unknown algorithm `{other}`"))),
        })
    }
}

/// Initial proposal means.
#[derive(Debug, Clone, PartialEq)]
pub enum Initializer {
    /// One mean per chain, or a single mean shared by all chains.
    Explicit(Vec<Vec<f64>>),
    /// Independent uniform draws in the box `[lo, hi]`.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Independent draws from `N(mean, std² I)`.
    Gaussian { mean: Vec<f64>, std: f64 },
}

impl Initializer {
    /// `U([-4, 4]^D)`: every mean starts away from most modes of the
    /// five-mode mixture.
    pub fn in1(dim: usize) -> Self {
        Self::cube(dim, -4.0, 4.0)
    }

    /// `U([-20, 20]^D)`: means spread over the whole support.
    pub fn in2(dim: usize) -> Self {
        Self::cube(dim, -20.0, 20.0)
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Initializer::UniformBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    fn validate(&self, dim: usize, chains: usize, offset: usize) -> Result<()> {
        match self {
            Initializer::Explicit(means) => {
                if means.is_empty() {
                    return Err(Error::config("explicit initializer has no means"));
                }
                if means.len() != 1 && means.len() < offset + chains {
                    return Err(Error::config(format!(
                        "explicit initializer has {} means, need {}",
                        means.len(),
                        offset + chains
                    )));
                }
                if let Some(m) = means.iter().find(|m| m.len() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: m.len(),
                    });
                }
                if means.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::config("initial means must be finite"));
                }
            }
            Initializer::UniformBox { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: lo.len().max(hi.len()),
                    });
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
                    return Err(Error::config("initializer bounds must satisfy lo <= hi"));
                }
            }
            Initializer::Gaussian { mean, std } => {
                if mean.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: mean.len(),
                    });
                }
                if !(std.is_finite() && *std >= 0.0) || mean.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("Gaussian initializer needs a finite mean and std >= 0"));
                }
            }
        }
        Ok(())
    }

    /// Mean of chain `chain` (already offset).
    pub(crate) fn mean_for(&self, chain: usize, seed: u64) -> Vec<f64> {
        match self {
            Initializer::Explicit(means) if means.len() == 1 => means[0].clone(),
            Initializer::Explicit(means) => means[chain].clone(),
            Initializer::UniformBox { lo, hi } => {
                let mut rng = RngStream::for_role(seed, StreamRole::Init, chain as u64).rng();
                lo.iter()
                    .zip(hi)
                    .map(|(&l, &h)| if l == h { l } else { rng.random_range(l..h) })
                    .collect()
            }
            Initializer::Gaussian { mean, std } => {
                let mut rng = RngStream::for_role(seed, StreamRole::Init, chain as u64).rng();
                mean.iter()
                    .map(|m| m + std * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            }
        }
    }
}

/// Covariances `C_n` of the lower-level proposals.
#[derive(Debug, Clone, PartialEq)]
pub enum LowerCovariance {
    /// `σ² I` for every chain.
    Isotropic(f64),
    /// `diag(σ_{n,1}², …)` with `σ_{n,j} ~ U(low, high)` drawn per chain.
    RandomDiagonal { low: f64, high: f64 },
    /// Given matrices, one per chain or a single shared one.
    PerChain(Vec<Arc<Covariance>>),
}

impl LowerCovariance {
    fn validate(&self, dim: usize, chains: usize, offset: usize) -> Result<()> {
        match self {
            LowerCovariance::Isotropic(s) => {
                if !(s.is_finite() && *s > 0.0) {
                    return Err(Error::config(format!(
                        "lower proposal scale must be positive, got {s}"
                    )));
                }
            }
            LowerCovariance::RandomDiagonal { low, high } => {
                if !(low.is_finite() && high.is_finite() && *low > 0.0 && low <= high) {
                    return Err(Error::config(format!(
                        "random scale range must satisfy 0 < low <= high, got [{low}, {high}]"
                    )));
                }
            }
            LowerCovariance::PerChain(covs) => {
                if covs.is_empty() || (covs.len() != 1 && covs.len() < offset + chains) {
                    return Err(Error::config("need one lower covariance per chain"));
                }
                if let Some(c) = covs.iter().find(|c| c.dim() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: c.dim(),
                    });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn for_chain(&self, dim: usize, chain: usize, seed: u64) -> Result<Arc<Covariance>> {
        Ok(match self {
            LowerCovariance::Isotropic(s) => Arc::new(Covariance::isotropic(dim, *s)?),
            LowerCovariance::RandomDiagonal { low, high } => {
                let mut rng = RngStream::for_role(seed, StreamRole::Covariance, chain as u64).rng();
                let stds = (0..dim)
                    .map(|_| if low == high { *low } else { rng.random_range(*low..*high) })
                    .collect();
                Arc::new(Covariance::diagonal(stds)?)
            }
            LowerCovariance::PerChain(covs) if covs.len() == 1 => covs[0].clone(),
            LowerCovariance::PerChain(covs) => covs[chain].clone(),
        })
    }
}

/// Full description of one sampler run.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    pub target: Arc<TargetModel>,
    /// Number of chains (proposals per iteration).
    pub n: usize,
    /// Samples per proposal per iteration.
    pub m: usize,
    /// Iterations.
    pub t: usize,
    pub denominator: DenominatorScheme,
    pub adaptation: AdaptationKernel,
    pub lower: LowerCovariance,
    pub init: Initializer,
    pub master_seed: u64,
    /// Seed of the lower-level draws, if different from `master_seed`.
    pub lower_seed: Option<u64>,
    /// Global index of this run's first chain. Runs with disjoint chain
    /// ranges and the same seeds reproduce the corresponding chains of one
    /// larger run.
    pub chain_offset: usize,
    /// Record `(t, Î_t, Ẑ_t)` after every iteration.
    pub trace: bool,
    /// Return every weighted sample and the proposal history.
    pub keep_samples: bool,
    /// Maximum number of samples stored for re-weighting.
    pub history_cap: usize,
}

impl SamplerConfig {
    /// A configuration with defaults for everything but the essentials:
    /// isotropic lower covariance `σ = 1`, In1-style box initialization,
    /// standard denominator, no adaptation.
    pub fn new(algorithm: Algorithm, target: Arc<TargetModel>, n: usize, m: usize, t: usize) -> Self {
        let dim = target.dim();
        Self {
            algorithm,
            target,
            n,
            m,
            t,
            denominator: DenominatorScheme::Standard,
            adaptation: AdaptationKernel::None,
            lower: LowerCovariance::Isotropic(1.0),
            init: Initializer::in1(dim),
            master_seed: 0,
            lower_seed: None,
            chain_offset: 0,
            trace: false,
            keep_samples: false,
            history_cap: DEFAULT_HISTORY_CAP,
        }
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub(crate) fn lower_seed(&self) -> u64 {
        self.lower_seed.unwrap_or(self.master_seed)
    }

    /// Checks every invariant that does not need a run.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if self.n == 0 || self.m == 0 || self.t == 0 {
            return Err(Error::config("N, M and T must all be at least 1"));
        }
        self.init.validate(dim, self.n, self.chain_offset)?;
        self.lower.validate(dim, self.n, self.chain_offset)?;
        self.validate_adaptation(dim)?;
        self.validate_algorithm()?;
        if let DenominatorScheme::Partition(p) = &self.denominator {
            p.validate_covers(self.n, self.t)?;
        }
        if self.denominator.needs_reweighting() {
            let requested = self
                .n
                .checked_mul(self.m)
                .and_then(|v| v.checked_mul(self.t))
                .unwrap_or(usize::MAX);
            if requested > self.history_cap {
                return Err(Error::MemoryCapExceeded {
                    requested,
                    cap: self.history_cap,
                });
            }
        }
        Ok(())
    }

    fn validate_adaptation(&self, dim: usize) -> Result<()> {
        let check_walks = |kernels: &[RandomWalk]| -> Result<()> {
            if kernels.is_empty() || (kernels.len() != 1 && kernels.len() != self.n) {
                return Err(Error::config("need one random-walk kernel per chain or a single shared one"));
            }
            for k in kernels {
                if let RandomWalk::Gaussian(c) = k {
                    if c.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: c.dim(),
                        });
                    }
                }
            }
            Ok(())
        };
        match &self.adaptation {
            AdaptationKernel::ParallelMH { kernels }
            | AdaptationKernel::BlockMH { kernels }
            | AdaptationKernel::MhWithinGibbs { kernels } => check_walks(kernels),
            AdaptationKernel::Smh { proposal } if proposal.dim() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                got: proposal.dim(),
            }),
            _ => Ok(()),
        }
    }

    fn validate_algorithm(&self) -> Result<()> {
        use AdaptationKernel as K;
        let scheme_is_local = matches!(
            self.denominator,
            DenominatorScheme::Standard | DenominatorScheme::Spatial
        );
        let ok = match self.algorithm {
            Algorithm::StaticMis => matches!(self.adaptation, K::None),
            Algorithm::Rwis => {
                if self.n != 1 {
                    return Err(Error::config("RWIS runs a single chain (N = 1)"));
                }
                matches!(self.adaptation, K::ParallelMH { .. }) && scheme_is_local
            }
            Algorithm::PopulationMais => matches!(
                self.adaptation,
                K::ParallelMH { .. } | K::BlockMH { .. } | K::Smh { .. } | K::MhWithinGibbs { .. }
            ),
            Algorithm::Gamis => true,
            Algorithm::StandardPmc => matches!(self.adaptation, K::PmcResample) && scheme_is_local,
            Algorithm::ParallelMhBaseline => matches!(self.adaptation, K::ParallelMH { .. }),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "{} does not support adaptation `{}` with the {} denominator",
                self.algorithm.name(),
                self.adaptation.name(),
                self.denominator.name()
            )))
        }
    }
}
