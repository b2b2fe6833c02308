use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::Deserialize;

use crate::adaptation::{AdaptationKernel, RandomWalk};
use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamRole};
use crate::samplers::{iterations_for_budget, Algorithm, Initializer, LowerCovariance, SamplerConfig};
use crate::targets::{LogDensity, TargetModel};
use crate::weighting::{DenominatorScheme, Partition, ProposalComponent};

use super::quadrature::load_reference;

/// Where the reference moments for MSE come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSource {
    /// Closed form, for the Gaussian mixtures.
    Analytic,
    /// A quadrature cache file, checked against the target fingerprint.
    Quadrature(PathBuf),
    /// Values compiled into the library.
    Frozen,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    target: RawTarget,
    algorithm: RawAlgorithm,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    harness: RawHarness,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    name: String,
    dim: Option<usize>,
    reference: Option<String>,
    reference_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgorithm {
    kind: String,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "T")]
    t: Option<usize>,
    budget: Option<u64>,
    scheme: Option<String>,
    partition_width: Option<usize>,
    adaptation: Option<String>,
    sigma: Option<f64>,
    sigma_range: Option<[f64; 2]>,
    lambda: Option<f64>,
    lambda_range: Option<[f64; 2]>,
    smh_mean: Option<Vec<f64>>,
    init: Option<String>,
    init_lo: Option<Vec<f64>>,
    init_hi: Option<Vec<f64>>,
    init_means: Option<Vec<Vec<f64>>>,
    init_mean: Option<Vec<f64>>,
    init_std: Option<f64>,
    history_cap: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    sigma: Option<Vec<f64>>,
    lambda: Option<Vec<f64>>,
    #[serde(rename = "N")]
    n: Option<Vec<usize>>,
    #[serde(rename = "M")]
    m: Option<Vec<usize>>,
    #[serde(rename = "T")]
    t: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHarness {
    #[serde(default = "one")]
    replications: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "one")]
    jobs: usize,
}

impl Default for RawHarness {
    fn default() -> Self {
        Self {
            replications: 1,
            seed: 0,
            jobs: 1,
        }
    }
}

fn one() -> usize {
    1
}

/// Scale of a proposal family: fixed, or drawn per chain from a range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Fixed(f64),
    Uniform(f64, f64),
}

impl Scale {
    /// Fixed value, or `None` for random scales.
    pub fn value(&self) -> Option<f64> {
        match self {
            Scale::Fixed(v) => Some(*v),
            Scale::Uniform(..) => None,
        }
    }
}

/// Adaptation family before the scales are plugged in.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptationChoice {
    None,
    ParallelMH,
    BlockMH,
    Smh { mean: Option<Vec<f64>> },
    MhWithinGibbs,
    PmcResample,
}

impl AdaptationChoice {
    fn parse(s: &str, smh_mean: Option<Vec<f64>>) -> Result<Self> {
        Ok(match s {
            "none" => Self::None,
            "parallel-mh" => Self::ParallelMH,
            "block-mh" => Self::BlockMH,
            "smh" => Self::Smh { mean: smh_mean },
            "mh-within-gibbs" | "gibbs" => Self::MhWithinGibbs,
            "pmc-resample" | "resample" => Self::PmcResample,
            other => return Err(Error::config(format!("unknown adaptation `{other}`"))),
        })
    }

    fn default_for(algorithm: Algorithm) -> Option<Self> {
        match algorithm {
            Algorithm::StaticMis => Some(Self::None),
            Algorithm::Rwis | Algorithm::PopulationMais | Algorithm::ParallelMhBaseline => {
                Some(Self::ParallelMH)
            }
            Algorithm::StandardPmc => Some(Self::PmcResample),
            Algorithm::Gamis => None,
        }
    }

    fn uses_walk(&self) -> bool {
        !matches!(self, Self::None | Self::PmcResample)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::ParallelMH => "parallel-mh",
            Self::BlockMH => "block-mh",
            Self::Smh { .. } => "smh",
            Self::MhWithinGibbs => "mh-within-gibbs",
            Self::PmcResample => "pmc-resample",
        }
    }
}

/// Denominator family before `N`/`T` are known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeChoice {
    Standard,
    Spatial,
    Temporal,
    Full,
    TimeBlocks(usize),
}

impl SchemeChoice {
    fn parse(s: &str, width: Option<usize>) -> Result<Self> {
        Ok(match s {
            "standard" => Self::Standard,
            "spatial" => Self::Spatial,
            "temporal" => Self::Temporal,
            "full" => Self::Full,
            "partition" => Self::TimeBlocks(
                width.ok_or_else(|| Error::config("scheme `partition` needs `partition_width`"))?,
            ),
            other => return Err(Error::config(format!("unknown denominator scheme `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Spatial => "spatial",
            Self::Temporal => "temporal",
            Self::Full => "full",
            Self::TimeBlocks(_) => "partition",
        }
    }

    fn build(&self, n: usize, t: usize) -> Result<DenominatorScheme> {
        Ok(match self {
            Self::Standard => DenominatorScheme::Standard,
            Self::Spatial => DenominatorScheme::Spatial,
            Self::Temporal => DenominatorScheme::Temporal,
            Self::Full => DenominatorScheme::Full,
            Self::TimeBlocks(w) => DenominatorScheme::Partition(Partition::time_blocks(n, t, *w)?),
        })
    }
}

/// One combination of swept parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub sigma: Scale,
    pub lambda: Option<Scale>,
}

/// A parsed experiment: a sampler template, the sweep and the harness.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub target: Arc<TargetModel>,
    pub reference: ReferenceSource,
    pub algorithm: Algorithm,
    pub adaptation: AdaptationChoice,
    pub scheme: SchemeChoice,
    pub init: Initializer,
    pub history_cap: usize,
    pub points: Vec<SweepPoint>,
    pub replications: usize,
    pub master_seed: u64,
    pub jobs: usize,
}

impl ExperimentSpec {
    /// Reads and validates a TOML experiment file. Relative reference paths
    /// resolve against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            Error::InvalidConfig(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parses experiment text; `base` anchors relative paths.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })?;
        Self::from_raw(raw, base)
    }

    fn from_raw(raw: RawSpec, base: &Path) -> Result<Self> {
        let target = Arc::new(TargetModel::by_name(&raw.target.name, raw.target.dim)?);
        let dim = target.dim();
        let reference = match raw.target.reference.as_deref() {
            None | Some("frozen") => ReferenceSource::Frozen,
            Some("analytic") => ReferenceSource::Analytic,
            Some("quadrature") => {
                let file = raw.target.reference_file.clone().ok_or_else(|| {
                    Error::config("[target] reference = \"quadrature\" needs `reference_file`")
                })?;
                ReferenceSource::Quadrature(base.join(file))
            }
            Some(other) => {
                return Err(Error::config(format!(
                    "[target] reference: unknown source `{other}`"
                )))
            }
        };

        let a = raw.algorithm;
        let algorithm = Algorithm::parse(&a.kind)?;
        let adaptation = match &a.adaptation {
            Some(s) => AdaptationChoice::parse(s, a.smh_mean.clone())?,
            None => AdaptationChoice::default_for(algorithm)
                .ok_or_else(|| Error::config("[algorithm] adaptation is required for gamis"))?,
        };
        let default_scheme = match algorithm {
            Algorithm::StaticMis | Algorithm::Rwis | Algorithm::StandardPmc => "standard",
            _ => "spatial",
        };
        let scheme = SchemeChoice::parse(a.scheme.as_deref().unwrap_or(default_scheme), a.partition_width)?;

        let given = [
            a.init.is_some(),
            a.init_means.is_some(),
            a.init_lo.is_some() || a.init_hi.is_some(),
            a.init_std.is_some() || a.init_mean.is_some(),
        ];
        if given.iter().filter(|g| **g).count() > 1 {
            return Err(Error::config(
                "[algorithm] give one of `init`, `init_means`, `init_lo`/`init_hi`, `init_mean`/`init_std`",
            ));
        }
        let init = if let Some(means) = &a.init_means {
            Initializer::Explicit(means.clone())
        } else if a.init_lo.is_some() || a.init_hi.is_some() {
            match (&a.init_lo, &a.init_hi) {
                (Some(lo), Some(hi)) => Initializer::UniformBox {
                    lo: lo.clone(),
                    hi: hi.clone(),
                },
                _ => return Err(Error::config("[algorithm] `init_lo` and `init_hi` go together")),
            }
        } else if let Some(std) = a.init_std {
            Initializer::Gaussian {
                mean: a.init_mean.clone().unwrap_or_else(|| vec![0.0; dim]),
                std,
            }
        } else if a.init_mean.is_some() {
            return Err(Error::config("[algorithm] `init_mean` needs `init_std`"));
        } else {
            match a.init.as_deref() {
                None | Some("in1") => Initializer::in1(dim),
                Some("in2") => Initializer::in2(dim),
                Some(other) => {
                    return Err(Error::config(format!("[algorithm] init: unknown preset `{other}`")))
                }
            }
        };

        let sigma_base = match (a.sigma, a.sigma_range) {
            (Some(s), None) => Scale::Fixed(s),
            (None, Some([lo, hi])) => Scale::Uniform(lo, hi),
            (None, None) if raw.sweep.sigma.is_some() => Scale::Fixed(f64::NAN),
            _ => return Err(Error::config("[algorithm] give exactly one of `sigma`, `sigma_range`")),
        };
        let lambda_base = match (a.lambda, a.lambda_range) {
            (Some(l), None) => Some(Scale::Fixed(l)),
            (None, Some([lo, hi])) => Some(Scale::Uniform(lo, hi)),
            (None, None) if raw.sweep.lambda.is_some() => Some(Scale::Fixed(f64::NAN)),
            (None, None) => None,
            _ => return Err(Error::config("[algorithm] give at most one of `lambda`, `lambda_range`")),
        };
        if adaptation.uses_walk() && lambda_base.is_none() {
            return Err(Error::config(format!(
                "[algorithm] adaptation `{}` needs `lambda` or `lambda_range`",
                adaptation.name()
            )));
        }

        let h = raw.harness;
        if h.replications == 0 {
            return Err(Error::config("[harness] replications must be at least 1"));
        }
        if h.jobs == 0 {
            return Err(Error::config("[harness] jobs must be at least 1"));
        }

        let list = |v: &Option<Vec<usize>>, base: Option<usize>| -> Vec<Option<usize>> {
            match v {
                Some(v) => v.iter().copied().map(Some).collect(),
                None => vec![base],
            }
        };
        let n_default = if algorithm == Algorithm::Rwis { Some(1) } else { a.n };
        let ns = list(&raw.sweep.n, n_default);
        let ms = list(&raw.sweep.m, a.m.or(Some(1)));
        let ts = list(&raw.sweep.t, a.t);
        let sigmas: Vec<Scale> = match &raw.sweep.sigma {
            Some(v) => v.iter().map(|&s| Scale::Fixed(s)).collect(),
            None => vec![sigma_base],
        };
        let lambdas: Vec<Option<Scale>> = match &raw.sweep.lambda {
            Some(v) => v.iter().map(|&l| Some(Scale::Fixed(l))).collect(),
            None => vec![lambda_base],
        };

        let mut spec = ExperimentSpec {
            name: raw.name,
            target,
            reference,
            algorithm,
            adaptation,
            scheme,
            init,
            history_cap: a.history_cap.unwrap_or(crate::samplers::DEFAULT_HISTORY_CAP),
            points: Vec::new(),
            replications: h.replications,
            master_seed: h.seed,
            jobs: h.jobs,
        };

        for &n in &ns {
            let n = n.ok_or_else(|| Error::config("[algorithm] N is required"))?;
            for &m in &ms {
                let m = m.unwrap_or(1);
                for &t in &ts {
                    for &sigma in &sigmas {
                        for &lambda in &lambdas {
                            let mut point = SweepPoint {
                                n,
                                m,
                                t: t.unwrap_or(1),
                                sigma,
                                lambda,
                            };
                            if t.is_none() {
                                let budget = a.budget.ok_or_else(|| {
                                    Error::config("[algorithm] give `T` or an evaluation `budget`")
                                })?;
                                let probe = spec.config_for(&point, 0)?;
                                point.t = iterations_for_budget(&probe, budget);
                                if point.t == 0 {
                                    return Err(Error::config(format!(
                                        "budget {budget} is below one iteration at N={n}, M={m}"
                                    )));
                                }
                            }
                            spec.config_for(&point, 0)?.validate()?;
                            spec.points.push(point);
                        }
                    }
                }
            }
        }
        Ok(spec)
    }

    /// Reference mean and `Z` from the configured source.
    pub fn reference_values(&self) -> Result<(Vec<f64>, Option<f64>)> {
        match &self.reference {
            ReferenceSource::Analytic | ReferenceSource::Frozen => self.target.true_moments(),
            ReferenceSource::Quadrature(path) => {
                let cache = load_reference(path, &self.target)?;
                Ok((cache.mean, Some(cache.z)))
            }
        }
    }

    /// The sampler configuration of one sweep point under `seed`.
    pub fn config_for(&self, point: &SweepPoint, seed: u64) -> Result<SamplerConfig> {
        let dim = self.target.dim();
        let mut c = SamplerConfig::new(self.algorithm, self.target.clone(), point.n, point.m, point.t);
        c.master_seed = seed;
        c.init = self.init.clone();
        c.history_cap = self.history_cap;
        c.denominator = self.scheme.build(point.n, point.t)?;
        c.lower = match point.sigma {
            Scale::Fixed(s) => LowerCovariance::Isotropic(s),
            Scale::Uniform(low, high) => LowerCovariance::RandomDiagonal { low, high },
        };
        let walks = || -> Result<Vec<RandomWalk>> {
            match point.lambda {
                Some(Scale::Fixed(l)) => Ok(vec![RandomWalk::isotropic(dim, l)
                    .map_err(|_| Error::config(format!("lambda must be positive, got {l}")))?]),
                Some(Scale::Uniform(lo, hi)) => {
                    if !(lo > 0.0 && lo <= hi) {
                        return Err(Error::config("lambda_range must satisfy 0 < low <= high"));
                    }
                    (0..point.n)
                        .map(|i| {
                            let mut rng = RngStream::for_role(seed, StreamRole::WalkScale, i as u64).rng();
                            let stds = (0..dim)
                                .map(|_| if lo == hi { lo } else { rng.random_range(lo..hi) })
                                .collect();
                            RandomWalk::diagonal(stds)
                        })
                        .collect()
                }
                None => Err(Error::config("adaptation needs lambda")),
            }
        };
        c.adaptation = match &self.adaptation {
            AdaptationChoice::None => AdaptationKernel::None,
            AdaptationChoice::PmcResample => AdaptationKernel::PmcResample,
            AdaptationChoice::ParallelMH => AdaptationKernel::ParallelMH { kernels: walks()? },
            AdaptationChoice::BlockMH => AdaptationKernel::BlockMH { kernels: walks()? },
            AdaptationChoice::MhWithinGibbs => AdaptationKernel::MhWithinGibbs { kernels: walks()? },
            AdaptationChoice::Smh { mean } => {
                let l = match point.lambda {
                    Some(Scale::Fixed(l)) => l,
                    _ => return Err(Error::config("SMH needs a fixed `lambda`")),
                };
                let mean = mean.clone().unwrap_or_else(|| vec![0.0; dim]);
                AdaptationKernel::Smh {
                    proposal: ProposalComponent::isotropic(mean, l)
                        .map_err(|_| Error::config(format!("lambda must be positive, got {l}")))?,
                }
            }
        };
        Ok(c)
    }
}
