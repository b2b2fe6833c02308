//! Gaussian proposal densities and the deterministic-mixture denominators
//! used to weight samples drawn from a space-time grid of proposals.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::LogSumExp;
use crate::targets::LogDensity;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Square-root factor of a covariance matrix.
#[derive(Debug, Clone, PartialEq)]
enum Factor {
    /// Standard deviations of a diagonal covariance.
    Diagonal(Vec<f64>),
    /// Lower Cholesky factor, row-major `dim × dim`.
    Full(Vec<f64>),
}

/// Covariance of a Gaussian proposal with its cached factorization.
///
/// Shared between all proposals of one chain via `Arc`, since only the mean
/// moves during adaptation.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    dim: usize,
    factor: Factor,
    /// `-D/2 log 2π - log |L|`
    log_norm: f64,
}

impl Covariance {
    pub fn isotropic(dim: usize, sigma: f64) -> Result<Self> {
        Self::diagonal(vec![sigma; dim])
    }

    /// Diagonal covariance from standard deviations.
    pub fn diagonal(stds: Vec<f64>) -> Result<Self> {
        if stds.is_empty() || stds.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::NonPositiveDefinite);
        }
        let dim = stds.len();
        let log_det_half: f64 = stds.iter().map(|s| s.ln()).sum();
        Ok(Self {
            dim,
            log_norm: -0.5 * dim as f64 * LN_2PI - log_det_half,
            factor: Factor::Diagonal(stds),
        })
    }

    /// Full covariance given row by row. Validated by Cholesky.
    pub fn full(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::NonPositiveDefinite);
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        let symmetric = (0..dim).all(|i| {
            (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * (1.0 + m[(i, j)].abs()))
        });
        if !symmetric || m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonPositiveDefinite);
        }
        let chol = m.cholesky().ok_or(Error::NonPositiveDefinite)?;
        let l = chol.l();
        let mut flat = vec![0.0; dim * dim];
        let mut log_det_half = 0.0;
        for i in 0..dim {
            for j in 0..=i {
                flat[i * dim + j] = l[(i, j)];
            }
            if l[(i, i)] <= 0.0 {
                return Err(Error::NonPositiveDefinite);
            }
            log_det_half += l[(i, i)].ln();
        }
        Ok(Self {
            dim,
            log_norm: -0.5 * dim as f64 * LN_2PI - log_det_half,
            factor: Factor::Full(flat),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The covariance matrix, row-major.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        match &self.factor {
            Factor::Diagonal(s) => (0..d)
                .map(|i| (0..d).map(|j| if i == j { s[i] * s[i] } else { 0.0 }).collect())
                .collect(),
            Factor::Full(l) => (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| (0..=i.min(j)).map(|k| l[i * d + k] * l[j * d + k]).sum())
                        .collect()
                })
                .collect(),
        }
    }

    /// Squared Mahalanobis norm of `diff`.
    #[inline]
    fn mahalanobis_sq(&self, mean: &[f64], x: &[f64]) -> f64 {
        match &self.factor {
            Factor::Diagonal(s) => {
                let mut acc = 0.0;
                for ((xi, mi), si) in x.iter().zip(mean).zip(s) {
                    let z = (xi - mi) / si;
                    acc += z * z;
                }
                acc
            }
            Factor::Full(l) => {
                // forward substitution L z = x - μ without allocating z:
                // the D ≤ a-few-dozen cases fit on the stack
                let d = self.dim;
                let mut buf = [0.0f64; 64];
                let mut heap;
                let z: &mut [f64] = if d <= buf.len() {
                    &mut buf[..d]
                } else {
                    heap = vec![0.0; d];
                    &mut heap
                };
                let mut acc = 0.0;
                for i in 0..d {
                    let row = &l[i * d..i * d + i];
                    let mut s = x[i] - mean[i];
                    for (lij, zj) in row.iter().zip(z.iter()) {
                        s -= lij * zj;
                    }
                    let zi = s / l[i * d + i];
                    z[i] = zi;
                    acc += zi * zi;
                }
                acc
            }
        }
    }

    /// Writes `mean + L·ε` into `out`, with ε standard normal.
    pub fn sample_into<R: Rng + ?Sized>(&self, mean: &[f64], rng: &mut R, out: &mut [f64]) {
        let d = self.dim;
        match &self.factor {
            Factor::Diagonal(s) => {
                for i in 0..d {
                    let e: f64 = rng.sample(StandardNormal);
                    out[i] = mean[i] + s[i] * e;
                }
            }
            Factor::Full(l) => {
                let eps: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                for i in 0..d {
                    let mut v = mean[i];
                    for j in 0..=i {
                        v += l[i * d + j] * eps[j];
                    }
                    out[i] = v;
                }
            }
        }
    }
}

/// Gaussian proposal `q(x | μ, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalComponent {
    mean: Vec<f64>,
    cov: Arc<Covariance>,
}

impl ProposalComponent {
    pub fn new(mean: Vec<f64>, cov: Arc<Covariance>) -> Result<Self> {
        if mean.len() != cov.dim {
            return Err(Error::DimensionMismatch {
                expected: cov.dim,
                got: mean.len(),
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn isotropic(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        let cov = Covariance::isotropic(mean.len(), sigma)?;
        Self::new(mean, Arc::new(cov))
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Arc<Covariance> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Same covariance, new location.
    pub fn with_mean(&self, mean: Vec<f64>) -> Self {
        debug_assert_eq!(mean.len(), self.mean.len());
        Self {
            mean,
            cov: Arc::clone(&self.cov),
        }
    }

    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.log_pdf_unchecked(x))
    }

    #[inline]
    pub(crate) fn log_pdf_unchecked(&self, x: &[f64]) -> f64 {
        self.cov.log_norm - 0.5 * self.cov.mahalanobis_sq(&self.mean, x)
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.cov.sample_into(&self.mean, rng, out)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// Position of a proposal in the chain × iteration grid, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProposalIndex {
    pub chain: usize,
    pub iteration: usize,
}

impl ProposalIndex {
    pub const fn new(chain: usize, iteration: usize) -> Self {
        Self { chain, iteration }
    }
}

/// Every proposal used so far, indexed by iteration then chain.
///
/// Each proposal carries the number of samples drawn from it; mixtures weight
/// their components by these counts, which reduces to the plain average when
/// all counts are equal.
#[derive(Debug, Clone, Default)]
pub struct ProposalHistory {
    chains: usize,
    iterations: Vec<Vec<(ProposalComponent, usize)>>,
}

impl ProposalHistory {
    pub fn new(chains: usize) -> Self {
        Self {
            chains,
            iterations: Vec::new(),
        }
    }

    /// Appends the proposals of a new iteration, one per chain, each with
    /// `count` samples.
    pub fn push_iteration(&mut self, proposals: Vec<ProposalComponent>, count: usize) {
        self.push_iteration_with_counts(proposals.into_iter().map(|p| (p, count)).collect());
    }

    pub fn push_iteration_with_counts(&mut self, proposals: Vec<(ProposalComponent, usize)>) {
        assert_eq!(proposals.len(), self.chains, "one proposal per chain");
        assert!(proposals.iter().all(|(_, c)| *c >= 1), "sample counts must be ≥ 1");
        self.iterations.push(proposals);
    }

    pub fn chains(&self) -> usize {
        self.chains
    }

    pub fn iterations(&self) -> usize {
        self.iterations.len()
    }

    pub fn len(&self) -> usize {
        self.chains * self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn get(&self, idx: ProposalIndex) -> Result<&ProposalComponent> {
        self.entry(idx).map(|(p, _)| p)
    }

    fn entry(&self, idx: ProposalIndex) -> Result<&(ProposalComponent, usize)> {
        self.iterations
            .get(idx.iteration)
            .and_then(|it| it.get(idx.chain))
            .ok_or(Error::UnknownIndex {
                chain: idx.chain,
                iteration: idx.iteration,
            })
    }

    pub fn iteration(&self, t: usize) -> &[(ProposalComponent, usize)] {
        &self.iterations[t]
    }

    /// Accumulates `log(count·q(x))` over the given proposals.
    #[inline]
    pub(crate) fn accumulate<'a, I>(acc: &mut LogSumExp, total: &mut f64, members: I, x: &[f64])
    where
        I: IntoIterator<Item = &'a (ProposalComponent, usize)>,
    {
        for (q, count) in members {
            let c = *count as f64;
            acc.add(q.log_pdf_unchecked(x) + c.ln());
            *total += c;
        }
    }
}

/// Disjoint groups of proposals; each group forms one mixture denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    sets: Vec<Vec<ProposalIndex>>,
    lookup: HashMap<ProposalIndex, usize>,
}

impl Partition {
    pub fn new(sets: Vec<Vec<ProposalIndex>>) -> Result<Self> {
        let mut lookup = HashMap::new();
        for (set_id, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::config("partition contains an empty set"));
            }
            for &idx in set {
                if lookup.insert(idx, set_id).is_some() {
                    return Err(Error::PartitionNotCovering {
                        chain: idx.chain,
                        iteration: idx.iteration,
                    });
                }
            }
        }
        Ok(Self { sets, lookup })
    }

    /// Every proposal alone in its set (equivalent to standard weighting).
    pub fn singletons(chains: usize, iterations: usize) -> Self {
        let sets = (0..iterations)
            .flat_map(|t| (0..chains).map(move |n| vec![ProposalIndex::new(n, t)]))
            .collect();
        Self::new(sets).expect("singletons are disjoint")
    }

    /// Groups each chain's proposals into consecutive windows of `width`
    /// iterations.
    pub fn time_blocks(chains: usize, iterations: usize, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::config("partition block width must be ≥ 1"));
        }
        let mut sets = Vec::new();
        for n in 0..chains {
            let mut t = 0;
            while t < iterations {
                let end = (t + width).min(iterations);
                sets.push((t..end).map(|r| ProposalIndex::new(n, r)).collect());
                t = end;
            }
        }
        Self::new(sets)
    }

    /// Groups chains into consecutive blocks of `width` within each iteration.
    pub fn chain_blocks(chains: usize, iterations: usize, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::config("partition block width must be ≥ 1"));
        }
        let mut sets = Vec::new();
        for t in 0..iterations {
            let mut n = 0;
            while n < chains {
                let end = (n + width).min(chains);
                sets.push((n..end).map(|k| ProposalIndex::new(k, t)).collect());
                n = end;
            }
        }
        Self::new(sets)
    }

    pub fn sets(&self) -> &[Vec<ProposalIndex>] {
        &self.sets
    }

    pub fn set_of(&self, idx: ProposalIndex) -> Result<usize> {
        self.lookup
            .get(&idx)
            .copied()
            .ok_or(Error::PartitionNotCovering {
                chain: idx.chain,
                iteration: idx.iteration,
            })
    }

    /// Checks that the sets cover the full `chains × iterations` grid and
    /// nothing outside it.
    pub fn validate_covers(&self, chains: usize, iterations: usize) -> Result<()> {
        for t in 0..iterations {
            for n in 0..chains {
                self.set_of(ProposalIndex::new(n, t))?;
            }
        }
        if let Some(extra) = self
            .lookup
            .keys()
            .find(|i| i.chain >= chains || i.iteration >= iterations)
        {
            return Err(Error::UnknownIndex {
                chain: extra.chain,
                iteration: extra.iteration,
            });
        }
        Ok(())
    }
}

/// Which mixture divides the importance weight of a sample drawn from
/// proposal `(n, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DenominatorScheme {
    /// `q_{n,t}` alone.
    Standard,
    /// Mixture of all chains at iteration `t`.
    Spatial,
    /// Mixture of chain `n` across its iterations.
    Temporal,
    /// Mixture of every proposal.
    Full,
    /// Mixture over the partition set containing `(n, t)`.
    Partition(Partition),
}

impl DenominatorScheme {
    pub fn name(&self) -> &'static str {
        match self {
            DenominatorScheme::Standard => "standard",
            DenominatorScheme::Spatial => "spatial",
            DenominatorScheme::Temporal => "temporal",
            DenominatorScheme::Full => "full",
            DenominatorScheme::Partition(_) => "partition",
        }
    }

    /// Whether past weights change when new proposals arrive.
    pub fn needs_reweighting(&self) -> bool {
        !matches!(self, DenominatorScheme::Standard | DenominatorScheme::Spatial)
    }
}

/// `log Φ_{n,t}(x)` over the proposals present in `history`.
///
/// Mixture variants only see proposals already pushed to the history, so
/// during an adaptive run the temporal, full and partition mixtures cover the
/// iterations seen so far.
pub fn denominator_log_value(
    scheme: &DenominatorScheme,
    history: &ProposalHistory,
    idx: ProposalIndex,
    x: &[f64],
) -> Result<f64> {
    let own = history.get(idx)?;
    if x.len() != own.dim() {
        return Err(Error::DimensionMismatch {
            expected: own.dim(),
            got: x.len(),
        });
    }
    let mut acc = LogSumExp::new();
    let mut total = 0.0;
    match scheme {
        DenominatorScheme::Standard => return Ok(own.log_pdf_unchecked(x)),
        DenominatorScheme::Spatial => {
            ProposalHistory::accumulate(&mut acc, &mut total, history.iteration(idx.iteration), x)
        }
        DenominatorScheme::Temporal => ProposalHistory::accumulate(
            &mut acc,
            &mut total,
            history.iterations.iter().map(|it| &it[idx.chain]),
            x,
        ),
        DenominatorScheme::Full => ProposalHistory::accumulate(
            &mut acc,
            &mut total,
            history.iterations.iter().flatten(),
            x,
        ),
        DenominatorScheme::Partition(p) => {
            let set = &p.sets[p.set_of(idx)?];
            let members = set.iter().filter_map(|&m| history.entry(m).ok());
            ProposalHistory::accumulate(&mut acc, &mut total, members, x)
        }
    }
    Ok(acc.value() - total.ln())
}

/// `log(π/Φ)` with the zero-target convention: a sample where the target
/// vanishes has weight zero regardless of the denominator.
#[inline]
pub fn log_weight(log_target: f64, log_denominator: f64) -> Result<f64> {
    if log_target == f64::NEG_INFINITY || log_target.is_nan() {
        return Ok(f64::NEG_INFINITY);
    }
    let lw = log_target - log_denominator;
    if lw.is_nan() || lw == f64::INFINITY {
        return Err(Error::NonFiniteWeight {
            index: 0,
            value: lw,
        });
    }
    Ok(lw)
}

/// A sample position tagged with the proposal that generated it.
#[derive(Debug, Clone, Copy)]
pub struct IndexedPoint<'a> {
    pub x: &'a [f64],
    pub proposal: ProposalIndex,
}

/// Raw importance weights `π(x)/Φ_{n,t}(x)` for a batch of samples.
pub fn compute_weights<T: LogDensity + ?Sized>(
    samples: &[IndexedPoint<'_>],
    target: &T,
    scheme: &DenominatorScheme,
    history: &ProposalHistory,
) -> Result<Vec<f64>> {
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let log_phi = denominator_log_value(scheme, history, s.proposal, s.x)?;
            let lw = log_weight(target.log_density(s.x), log_phi).map_err(|_| {
                Error::NonFiniteWeight {
                    index: i,
                    value: f64::INFINITY,
                }
            })?;
            Ok(lw.exp())
        })
        .collect()
}

/// Standard normal density, used by tests and reference computations.
pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}
