//! Grid quadrature for reference moments, and the cache files holding them.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::targets::{LogDensity, TargetKind, TargetModel};

/// `Z`, `log Z` and the mean of a target over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub mean: Vec<f64>,
    pub z: f64,
    pub log_z: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: usize,
}

/// Calls `f` at every cell midpoint of a `cells^D` grid over `[lo, hi]`.
fn for_each_midpoint(lo: &[f64], hi: &[f64], cells: usize, mut f: impl FnMut(&[f64])) {
    let d = lo.len();
    let w: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| (h - l) / cells as f64).collect();
    let mut idx = vec![0usize; d];
    let mut x: Vec<f64> = (0..d).map(|k| lo[k] + 0.5 * w[k]).collect();
    loop {
        f(&x);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < cells {
                x[k] = lo[k] + (idx[k] as f64 + 0.5) * w[k];
                break;
            }
            idx[k] = 0;
            x[k] = lo[k] + 0.5 * w[k];
        }
    }
}

/// Midpoint rule on a `cells^D` grid, accumulated in log-space.
pub fn grid_quadrature<T: LogDensity + ?Sized>(
    target: &T,
    lo: &[f64],
    hi: &[f64],
    cells: usize,
) -> Result<QuadratureResult> {
    let d = target.dim();
    if lo.len() != d || hi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: lo.len(),
        });
    }
    if cells == 0 || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
        return Err(Error::config("quadrature box needs lo < hi and at least one cell"));
    }
    let mut shift = f64::NEG_INFINITY;
    let mut s0 = 0.0;
    let mut s1 = vec![0.0; d];
    for_each_midpoint(lo, hi, cells, |x| {
        let lp = target.log_density(x);
        if lp == f64::NEG_INFINITY || lp.is_nan() {
            return;
        }
        if lp > shift {
            let scale = (shift - lp).exp();
            s0 *= scale;
            s1.iter_mut().for_each(|v| *v *= scale);
            shift = lp;
        }
        let w = (lp - shift).exp();
        s0 += w;
        for (a, xi) in s1.iter_mut().zip(x) {
            *a += w * xi;
        }
    });
    if s0 == 0.0 {
        return Err(Error::AllZeroWeights);
    }
    let log_vol: f64 = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| ((h - l) / cells as f64).ln())
        .sum();
    let log_z = shift + s0.ln() + log_vol;
    Ok(QuadratureResult {
        mean: s1.iter().map(|v| v / s0).collect(),
        z: log_z.exp(),
        log_z,
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        cells,
    })
}

/// Shrinks `[lo, hi]` to the cells of a coarse grid whose log-density is
/// within `drop` of the maximum, padded by one cell on each side.
fn support_box<T: LogDensity + ?Sized>(
    target: &T,
    lo: &[f64],
    hi: &[f64],
    cells: usize,
    drop: f64,
) -> (Vec<f64>, Vec<f64>) {
    let d = lo.len();
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut max = f64::NEG_INFINITY;
    for_each_midpoint(lo, hi, cells, |x| {
        let lp = target.log_density(x);
        if lp.is_finite() {
            max = max.max(lp);
            pts.push((x.to_vec(), lp));
        }
    });
    let w: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| (h - l) / cells as f64).collect();
    let mut new_lo = vec![f64::INFINITY; d];
    let mut new_hi = vec![f64::NEG_INFINITY; d];
    for (x, lp) in &pts {
        if *lp >= max - drop {
            for k in 0..d {
                new_lo[k] = new_lo[k].min(x[k] - 1.5 * w[k]);
                new_hi[k] = new_hi[k].max(x[k] + 1.5 * w[k]);
            }
        }
    }
    if pts.is_empty() {
        return (lo.to_vec(), hi.to_vec());
    }
    let clamp_lo = new_lo.iter().zip(lo).map(|(a, b)| a.max(*b)).collect();
    let clamp_hi = new_hi.iter().zip(hi).map(|(a, b)| a.min(*b)).collect();
    (clamp_lo, clamp_hi)
}

/// Box and resolutions used for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePlan {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub coarse: usize,
    pub fine: usize,
    pub rounds: usize,
    /// Log-density drop below the maximum that still counts as support.
    pub drop: f64,
}

impl QuadraturePlan {
    pub fn for_target(target: &TargetModel) -> Result<Self> {
        let d = target.dim();
        Ok(match &target.kind {
            TargetKind::Banana(_) => Self {
                lo: vec![-50.0; 2],
                hi: vec![50.0; 2],
                coarse: 400,
                fine: 4000,
                rounds: 2,
                drop: 40.0,
            },
            TargetKind::Sensor(_) => Self {
                lo: vec![-40.0, -40.0, -60.0, 0.0],
                hi: vec![40.0, 40.0, 40.0, 40.0],
                coarse: 40,
                fine: 96,
                rounds: 3,
                drop: 30.0,
            },
            TargetKind::GaussianMixture(m) if d <= 2 => {
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for c in m.components() {
                    let cov = c.covariance().matrix();
                    for k in 0..d {
                        let s = cov[k][k].sqrt();
                        lo[k] = lo[k].min(c.mean()[k] - 12.0 * s);
                        hi[k] = hi[k].max(c.mean()[k] + 12.0 * s);
                    }
                }
                Self {
                    lo,
                    hi,
                    coarse: if d == 1 { 2000 } else { 300 },
                    fine: if d == 1 { 200_000 } else { 3000 },
                    rounds: 0,
                    drop: 40.0,
                }
            }
            _ => {
                return Err(Error::config(format!(
                    "no quadrature plan for `{}` in dimension {d}",
                    target.name
                )))
            }
        })
    }
}

/// Shrinks the box over `plan.rounds` coarse passes, then integrates on the
/// fine grid.
pub fn adaptive_quadrature<T: LogDensity + ?Sized>(target: &T, plan: &QuadraturePlan) -> Result<QuadratureResult> {
    let (mut lo, mut hi) = (plan.lo.clone(), plan.hi.clone());
    for _ in 0..plan.rounds {
        (lo, hi) = support_box(target, &lo, &hi, plan.coarse, plan.drop);
    }
    grid_quadrature(target, &lo, &hi, plan.fine)
}

/// Reference moments of a registered target by quadrature.
pub fn quadrature_reference(target: &TargetModel) -> Result<QuadratureResult> {
    adaptive_quadrature(target, &QuadraturePlan::for_target(target)?)
}

/// Hex SHA-256 of the target's canonical description.
pub fn target_hash(target: &TargetModel) -> String {
    let digest = Sha256::digest(target.fingerprint().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Contents of a reference cache file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceCache {
    pub target: String,
    /// [`target_hash`] of the target the values belong to.
    pub fingerprint: String,
    pub mean: Vec<f64>,
    pub z: f64,
    pub log_z: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: usize,
}

impl ReferenceCache {
    pub fn new(target: &TargetModel, q: &QuadratureResult) -> Self {
        Self {
            target: target.name.clone(),
            fingerprint: target_hash(target),
            mean: q.mean.clone(),
            z: q.z,
            log_z: q.log_z,
            lo: q.lo.clone(),
            hi: q.hi.clone(),
            cells: q.cells,
        }
    }
}

pub fn write_reference(path: &Path, cache: &ReferenceCache) -> Result<()> {
    let text = toml::to_string(cache).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a cache and refuses it unless it was computed for `target`.
pub fn load_reference(path: &Path, target: &TargetModel) -> Result<ReferenceCache> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cache: ReferenceCache = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let expected = target_hash(target);
    if cache.fingerprint != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!(
                "stale reference cache: computed for fingerprint {}, target `{}` now hashes to {expected}; \
                 rerun `mais-bench quadrature --target {}`",
                cache.fingerprint, target.name, target.name
            ),
        });
    }
    Ok(cache)
}
