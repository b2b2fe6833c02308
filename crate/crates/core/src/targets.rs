//! Benchmark targets: unnormalized log-densities with known reference values.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::LogSumExp;
use crate::rng::RngStream;
use crate::weighting::{Covariance, ProposalComponent};

/// Unnormalized log-density `log π(x)`.
///
/// Implementations return `-inf` where the density vanishes. Callers are
/// responsible for passing `x` of length [`LogDensity::dim`].
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;
    fn log_density(&self, x: &[f64]) -> f64;
}

impl<T: LogDensity + ?Sized> LogDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
}

/// Known moments of a target.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub mean: Vec<f64>,
    pub z: Option<f64>,
    pub source: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    components: Vec<ProposalComponent>,
    log_scale: f64,
}

impl GaussianMixture {
    /// `z · Σ_k w_k N(x; ν_k, Σ_k)`; `z` is the normalizing constant of the
    /// resulting unnormalized target.
    pub fn new(
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        covariances: Vec<Covariance>,
        z: f64,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || means.len() != covariances.len() {
            return Err(Error::config("mixture weights, means and covariances differ in length"));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::config("mixture weights must be nonnegative and sum to 1"));
        }
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::config("mixture scale must be positive"));
        }
        let components = means
            .into_iter()
            .zip(covariances)
            .map(|(m, c)| ProposalComponent::new(m, Arc::new(c)))
            .collect::<Result<Vec<_>>>()?;
        let dim = components[0].dim();
        if components.iter().any(|c| c.dim() != dim) {
            return Err(Error::config("mixture components differ in dimension"));
        }
        Ok(Self {
            weights,
            components,
            log_scale: z.ln(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ProposalComponent] {
        &self.components
    }

    pub fn mean(&self) -> Vec<f64> {
        let dim = self.components[0].dim();
        let mut m = vec![0.0; dim];
        for (w, c) in self.weights.iter().zip(&self.components) {
            for (mi, ci) in m.iter_mut().zip(c.mean()) {
                *mi += w * ci;
            }
        }
        m
    }

    /// Exact draw from the normalized mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                k = i;
                break;
            }
        }
        self.components[k].sample(rng)
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let mut acc = LogSumExp::new();
        for (w, c) in self.weights.iter().zip(&self.components) {
            acc.add(w.ln() + c.log_pdf_unchecked(x));
        }
        self.log_scale + acc.value()
    }
}

/// Banana-shaped density
/// `exp(-(4 - B x₁ - x₂²)²/(2η₁²) - x₁²/(2η₂²) - x₂²/(2η₃²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BananaSpec {
    pub b: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
}

impl Default for BananaSpec {
    fn default() -> Self {
        Self {
            b: 10.0,
            eta1: 4.0,
            eta2: 5.0,
            eta3: 5.0,
        }
    }
}

impl BananaSpec {
    fn log_density(&self, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        let r = 4.0 - self.b * x1 - x2 * x2;
        -r * r / (2.0 * self.eta1 * self.eta1)
            - x1 * x1 / (2.0 * self.eta2 * self.eta2)
            - x2 * x2 / (2.0 * self.eta3 * self.eta3)
    }
}

/// Seed of the frozen sensor observation set in `data/sensor_observations.txt`.
pub const SENSOR_DATA_SEED: u64 = 20_160_607;
/// Parameters `(x₁, x₂, a, ω)` used to simulate the frozen observations.
pub const SENSOR_TRUE_PARAMS: [f64; 4] = [3.0, 3.0, -20.0, 5.0];
pub const SENSOR_COUNT_PER_SENSOR: usize = 10;

const FROZEN_SENSOR_DATA: &str = include_str!("../data/sensor_observations.txt");

/// Range-measurement localization model with unknown position `(x₁, x₂)`,
/// path-loss slope `a` and noise scale `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorNetworkSpec {
    pub sensors: Vec<[f64; 2]>,
    /// `(sensor index, value)`, zero-based sensor index.
    pub observations: Vec<(usize, f64)>,
    /// Prior standard deviations of `x₁, x₂, a, ω` (5 each by default, i.e.
    /// prior variance 25).
    pub prior_std: [f64; 4],
    /// Restrict `ω > 0`.
    pub truncate_omega: bool,
    pub reference_distance: f64,
}

impl SensorNetworkSpec {
    pub fn default_sensors() -> Vec<[f64; 2]> {
        vec![[-10.0, 2.0], [8.0, 8.0], [-20.0, -18.0]]
    }

    /// Model over the frozen observation set shipped with the crate.
    pub fn frozen() -> Self {
        Self {
            sensors: Self::default_sensors(),
            observations: parse_sensor_data(FROZEN_SENSOR_DATA)
                .expect("bundled sensor data is well-formed"),
            prior_std: [5.0; 4],
            truncate_omega: true,
            reference_distance: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensors.is_empty() {
            return Err(Error::config("sensor network needs at least one sensor"));
        }
        let mut counts = vec![0usize; self.sensors.len()];
        for &(j, _) in &self.observations {
            *counts
                .get_mut(j)
                .ok_or_else(|| Error::config(format!("observation refers to unknown sensor {j}")))? += 1;
        }
        if counts.iter().any(|&c| c != counts[0]) {
            return Err(Error::config("every sensor must contribute the same number of observations"));
        }
        if self.prior_std.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::config("prior standard deviations must be positive"));
        }
        Ok(())
    }

    fn expected_reading(&self, pos: [f64; 2], sensor: usize, a: f64) -> Option<f64> {
        let h = self.sensors[sensor];
        let d = ((pos[0] - h[0]).powi(2) + (pos[1] - h[1]).powi(2)).sqrt();
        (d > 0.0).then(|| a * (d / self.reference_distance).ln())
    }

    /// Residual sum of squares of the observations under `(x₁, x₂, a)`.
    pub fn residual_ss(&self, x: &[f64]) -> f64 {
        // one log per sensor rather than per observation
        let mut expected = [0.0f64; 8];
        let mut heap;
        let m: &mut [f64] = if self.sensors.len() <= expected.len() {
            &mut expected[..self.sensors.len()]
        } else {
            heap = vec![0.0; self.sensors.len()];
            &mut heap
        };
        for (j, slot) in m.iter_mut().enumerate() {
            match self.expected_reading([x[0], x[1]], j, x[2]) {
                Some(v) => *slot = v,
                None => return f64::INFINITY,
            }
        }
        self.observations.iter().map(|&(j, y)| (y - m[j]).powi(2)).sum()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let omega = x[3];
        if self.truncate_omega && omega <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if omega == 0.0 || !omega.is_finite() {
            return f64::NEG_INFINITY;
        }
        let rss = self.residual_ss(x);
        if !rss.is_finite() {
            return f64::NEG_INFINITY;
        }
        let n = self.observations.len() as f64;
        let var = omega * omega;
        let mut lp = -0.5 * n * (2.0 * PI * var).ln() - rss / (2.0 * var);
        for (xi, s) in x.iter().zip(&self.prior_std) {
            lp += -0.5 * (2.0 * PI * s * s).ln() - xi * xi / (2.0 * s * s);
        }
        if self.truncate_omega {
            lp += 2f64.ln();
        }
        lp
    }
}

/// Draws `count_per_sensor` readings `a·log(‖x - h_j‖/0.3) + N(0, ω²)` from
/// every sensor, in sensor order.
pub fn simulate_sensor_data(
    spec: &SensorNetworkSpec,
    true_params: [f64; 4],
    count_per_sensor: usize,
    stream: RngStream,
) -> Result<Vec<(usize, f64)>> {
    let [x1, x2, a, omega] = true_params;
    if !(omega >= 0.0) {
        return Err(Error::config("noise scale ω must be nonnegative"));
    }
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(count_per_sensor * spec.sensors.len());
    for j in 0..spec.sensors.len() {
        let mean = spec
            .expected_reading([x1, x2], j, a)
            .ok_or(Error::SingularGeometry { sensor: j })?;
        for _ in 0..count_per_sensor {
            let e: f64 = rng.sample(StandardNormal);
            out.push((j, mean + omega * e));
        }
    }
    Ok(out)
}

/// Plain-text observation format: one `sensor_index value` pair per line,
/// sensor index one-based, value printed with 17 significant digits.
pub fn format_sensor_data(observations: &[(usize, f64)]) -> String {
    observations
        .iter()
        .map(|(j, y)| format!("{} {:.16e}\n", j + 1, y))
        .collect()
}

pub fn parse_sensor_data(text: &str) -> Result<Vec<(usize, f64)>> {
    let parse_err = |line: usize, msg: &str| Error::Parse {
        path: "sensor observations".into(),
        message: format!("line {line}: {msg}"),
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let mut parts = l.split_whitespace();
            let j: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .filter(|&j: &usize| j >= 1)
                .ok_or_else(|| parse_err(i + 1, "bad sensor index"))?;
            let y: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(i + 1, "bad value"))?;
            if parts.next().is_some() {
                return Err(parse_err(i + 1, "trailing fields"));
            }
            Ok((j - 1, y))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetKind {
    GaussianMixture(GaussianMixture),
    Banana(BananaSpec),
    Sensor(SensorNetworkSpec),
}

/// A named benchmark target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetModel {
    pub name: String,
    pub kind: TargetKind,
    pub reference: Option<Reference>,
}

/// Banana reference from `mais-bench quadrature --target banana` (4000² cells
/// after box refinement); `E[x₂] = 0` by symmetry.
const BANANA_MEAN_X1: f64 = -1.095_560_012_201_64;
const BANANA_Z: f64 = 10.726_620_508_026;

/// Posterior means of `(x₁, x₂, a, ω)` under the frozen sensor data, from
/// `mais-bench quadrature --target sensor` (see README).
pub const SENSOR_REFERENCE_MEAN: [f64; 4] = [
    3.535_635_738_820_878,
    3.095_525_948_423_407,
    -20.011_881_693_109_213,
    5.657_206_003_523_374,
];
/// Normalizing constant of the same posterior, `log Z ≈ -108.4661`.
pub const SENSOR_REFERENCE_Z: f64 = 7.830_192_624_298_228e-48;

pub const TARGET_NAMES: &[&str] = &[
    "mixture5",
    "mixture-hd",
    "banana",
    "sensor",
    "gauss1d",
    "bimodal1d",
];

impl TargetModel {
    /// Five-mode bivariate mixture with mean `[1.6, 1.4]` and `Z = 1`.
    pub fn mixture5() -> Self {
        let means = vec![
            vec![-10.0, -10.0],
            vec![0.0, 16.0],
            vec![13.0, 8.0],
            vec![-9.0, 7.0],
            vec![14.0, -14.0],
        ];
        let covs = [
            [[2.0, 0.6], [0.6, 1.0]],
            [[2.0, -0.4], [-0.4, 2.0]],
            [[2.0, 0.8], [0.8, 2.0]],
            [[3.0, 0.0], [0.0, 0.5]],
            [[2.0, -0.1], [-0.1, 2.0]],
        ]
        .iter()
        .map(|c| Covariance::full(&[c[0].to_vec(), c[1].to_vec()]).expect("SPD"))
        .collect();
        let mix = GaussianMixture::new(vec![0.2; 5], means, covs, 1.0).expect("valid mixture");
        Self {
            name: "mixture5".into(),
            reference: Some(Reference {
                mean: mix.mean(),
                z: Some(1.0),
                source: "analytic: average of component means",
            }),
            kind: TargetKind::GaussianMixture(mix),
        }
    }

    /// Equal-weight mixture of three isotropic Gaussians in `dim` dimensions
    /// with means `-5`, `6`, `3` in every coordinate and standard deviation 8.
    pub fn mixture_hd(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("dimension must be ≥ 1"));
        }
        let means = [-5.0, 6.0, 3.0].iter().map(|&m| vec![m; dim]).collect();
        let covs = (0..3)
            .map(|_| Covariance::isotropic(dim, 8.0))
            .collect::<Result<_>>()?;
        let mix = GaussianMixture::new(vec![1.0 / 3.0; 3], means, covs, 1.0)?;
        Ok(Self {
            name: "mixture-hd".into(),
            reference: Some(Reference {
                mean: vec![4.0 / 3.0; dim],
                z: Some(1.0),
                source: "analytic: (−5 + 6 + 3)/3 per coordinate",
            }),
            kind: TargetKind::GaussianMixture(mix),
        })
    }

    pub fn banana() -> Self {
        Self::banana_with(BananaSpec::default())
    }

    /// Banana target; reference values are attached only for the default
    /// parameters.
    pub fn banana_with(spec: BananaSpec) -> Self {
        let reference = (spec == BananaSpec::default()).then(|| Reference {
            mean: vec![BANANA_MEAN_X1, 0.0],
            z: Some(BANANA_Z),
            source: "dense-grid quadrature",
        });
        Self {
            name: "banana".into(),
            kind: TargetKind::Banana(spec),
            reference,
        }
    }

    /// Sensor-network posterior over the frozen observation set.
    pub fn sensor() -> Self {
        let spec = SensorNetworkSpec::frozen();
        Self {
            name: "sensor".into(),
            kind: TargetKind::Sensor(spec),
            reference: Some(Reference {
                mean: SENSOR_REFERENCE_MEAN.to_vec(),
                z: Some(SENSOR_REFERENCE_Z),
                source: "4-D grid quadrature over the frozen observations",
            }),
        }
    }

    pub fn sensor_with(spec: SensorNetworkSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            name: "sensor".into(),
            kind: TargetKind::Sensor(spec),
            reference: None,
        })
    }

    /// `exp(-x²/2)`, `Z = √(2π)`, mean 0.
    pub fn gauss1d() -> Self {
        let z = (2.0 * PI).sqrt();
        let mix = GaussianMixture::new(
            vec![1.0],
            vec![vec![0.0]],
            vec![Covariance::isotropic(1, 1.0).expect("SPD")],
            z,
        )
        .expect("valid mixture");
        Self {
            name: "gauss1d".into(),
            kind: TargetKind::GaussianMixture(mix),
            reference: Some(Reference {
                mean: vec![0.0],
                z: Some(z),
                source: "analytic",
            }),
        }
    }

    /// Normalized bimodal 1-D mixture `0.4 N(-3, 1) + 0.6 N(2.5, 0.7²)`.
    pub fn bimodal1d() -> Self {
        let mix = GaussianMixture::new(
            vec![0.4, 0.6],
            vec![vec![-3.0], vec![2.5]],
            vec![
                Covariance::isotropic(1, 1.0).expect("SPD"),
                Covariance::isotropic(1, 0.7).expect("SPD"),
            ],
            1.0,
        )
        .expect("valid mixture");
        Self {
            name: "bimodal1d".into(),
            reference: Some(Reference {
                mean: mix.mean(),
                z: Some(1.0),
                source: "analytic",
            }),
            kind: TargetKind::GaussianMixture(mix),
        }
    }

    /// Looks up a registered target. `dim` applies to `mixture-hd` only.
    pub fn by_name(name: &str, dim: Option<usize>) -> Result<Self> {
        let check_dim = |model: Self| match dim {
            Some(d) if d != model.dim() => Err(Error::config(format!(
                "target `{name}` has fixed dimension {}",
                model.dim()
            ))),
            _ => Ok(model),
        };
        match name {
            "mixture5" => check_dim(Self::mixture5()),
            "mixture-hd" => Self::mixture_hd(dim.unwrap_or(2)),
            "banana" => check_dim(Self::banana()),
            "sensor" => check_dim(Self::sensor()),
            "gauss1d" => check_dim(Self::gauss1d()),
            "bimodal1d" => check_dim(Self::bimodal1d()),
            other => Err(Error::config(format!(
                "unknown target `{other}` (known: {})",
                TARGET_NAMES.join(", ")
            ))),
        }
    }

    pub fn log_target(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.log_density(x))
    }

    pub fn true_moments(&self) -> Result<(Vec<f64>, Option<f64>)> {
        self.reference
            .as_ref()
            .map(|r| (r.mean.clone(), r.z))
            .ok_or_else(|| Error::NoReference(self.name.clone()))
    }

    /// Canonical text description; hashed to tag cached reference files.
    pub fn fingerprint(&self) -> String {
        match &self.kind {
            TargetKind::GaussianMixture(m) => {
                let comps: Vec<String> = m
                    .components
                    .iter()
                    .map(|c| format!("{:?}|{:?}", c.mean(), c.covariance().matrix()))
                    .collect();
                format!("{}:mix:{:?}:{}:{}", self.name, m.weights, comps.join(";"), m.log_scale)
            }
            TargetKind::Banana(b) => format!("{}:banana:{:?}", self.name, b),
            TargetKind::Sensor(s) => format!(
                "{}:sensor:{:?}:{:?}:{:?}:{}:{}",
                self.name, s.sensors, s.observations, s.prior_std, s.truncate_omega, s.reference_distance
            ),
        }
    }
}

impl LogDensity for TargetModel {
    fn dim(&self) -> usize {
        match &self.kind {
            TargetKind::GaussianMixture(m) => m.components[0].dim(),
            TargetKind::Banana(_) => 2,
            TargetKind::Sensor(_) => 4,
        }
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let v = match &self.kind {
            TargetKind::GaussianMixture(m) => m.log_density(x),
            TargetKind::Banana(b) => b.log_density(x),
            TargetKind::Sensor(s) => s.log_density(x),
        };
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// Wraps a target and counts every density evaluation.
#[derive(Debug)]
pub struct CountingTarget<T> {
    inner: T,
    count: AtomicU64,
}

impl<T: LogDensity> CountingTarget<T> {
    pub fn new(inner: T) -> Self {
        Self {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: LogDensity> LogDensity for CountingTarget<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.log_density(x)
    }
}
