use crate::error::{Error, Result};

use super::records::ResultRecord;

/// Mean squared errors of a set of replications.
#[derive(Debug, Clone, PartialEq)]
pub struct MseReport {
    /// Per estimate component; empty without a reference mean.
    pub per_component: Vec<f64>,
    /// `None` without a reference `Z` or when no record carries `Ẑ`.
    pub z: Option<f64>,
    pub replications: usize,
}

impl MseReport {
    /// Average over components.
    pub fn mean_over_components(&self) -> Option<f64> {
        (!self.per_component.is_empty())
            .then(|| self.per_component.iter().sum::<f64>() / self.per_component.len() as f64)
    }
}

/// Sum of squares accumulated in sorted order, so the result does not
/// depend on the order of the records.
fn mean_sq(mut sq: Vec<f64>) -> f64 {
    sq.sort_by(f64::total_cmp);
    let n = sq.len() as f64;
    sq.iter().sum::<f64>() / n
}

/// `MSE_d = (1/R) Σ_r (Î_{d,r} − ref_d)²`, and the same for `Ẑ`.
pub fn compute_mse(
    records: &[ResultRecord],
    reference_mean: Option<&[f64]>,
    reference_z: Option<f64>,
) -> Result<MseReport> {
    if reference_mean.is_none() && reference_z.is_none() {
        return Err(Error::NoReference("no reference mean or Z given".into()));
    }
    if records.is_empty() {
        return Err(Error::config("MSE needs at least one record"));
    }
    let per_component = match reference_mean {
        Some(reference) => {
            if let Some(r) = records.iter().find(|r| r.i_hat.len() != reference.len()) {
                return Err(Error::DimensionMismatch {
                    expected: reference.len(),
                    got: r.i_hat.len(),
                });
            }
            reference
                .iter()
                .enumerate()
                .map(|(d, rd)| mean_sq(records.iter().map(|r| (r.i_hat[d] - rd).powi(2)).collect()))
                .collect()
        }
        None => Vec::new(),
    };
    let z = reference_z.and_then(|z0| {
        let sq: Vec<f64> = records
            .iter()
            .filter_map(|r| r.z_hat.map(|z| (z - z0).powi(2)))
            .collect();
        (!sq.is_empty()).then(|| mean_sq(sq))
    });
    Ok(MseReport {
        per_component,
        z,
        replications: records.len(),
    })
}

/// Records grouped by sweep point, in first-appearance order.
pub fn group_by_point(records: &[ResultRecord]) -> Vec<Vec<ResultRecord>> {
    let mut groups: Vec<Vec<ResultRecord>> = Vec::new();
    for r in records {
        let key = |x: &ResultRecord| {
            (
                x.algorithm.clone(),
                x.n,
                x.m,
                x.t,
                x.sigma.map(f64::to_bits),
                x.lambda.map(f64::to_bits),
                x.scheme.clone(),
                x.adaptation.clone(),
            )
        };
        match groups.iter_mut().find(|g| key(&g[0]) == key(r)) {
            Some(g) => g.push(r.clone()),
            None => groups.push(vec![r.clone()]),
        }
    }
    groups
}
