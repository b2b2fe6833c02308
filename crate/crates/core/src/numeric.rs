//! Log-space arithmetic and weight normalization shared by every sampler.

use crate::error::{Error, Result};

/// Normalizes nonnegative weights into a probability vector.
///
/// Individual zeros are fine; a batch with no positive mass is
/// [`Error::AllZeroWeights`].
pub fn normalize_weights(weights: &[f64]) -> Result<Vec<f64>> {
    let mut total = 0.0;
    for (index, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::NonFiniteWeight { index, value: w });
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Normalizes weights given in log-space. Equivalent to
/// `normalize_weights(exp(log_weights))` but immune to overflow.
pub fn normalize_log_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    for (index, &lw) in log_weights.iter().enumerate() {
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::NonFiniteWeight {
                index,
                value: lw.exp(),
            });
        }
    }
    let total = log_sum_exp(log_weights);
    if total == f64::NEG_INFINITY {
        return Err(Error::AllZeroWeights);
    }
    Ok(log_weights.iter().map(|lw| (lw - total).exp()).collect())
}

/// `log Σ exp(v_i)`, shifted by the maximum so large entries do not overflow.
///
/// `-inf` entries contribute nothing; an all `-inf` input returns `-inf`.
/// Panics on an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "log_sum_exp of an empty slice");
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY || max.is_nan() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Streaming log-sum-exp accumulator.
///
/// Used on the hot path where mixture terms are produced one at a time and
/// materializing them in a buffer would cost an allocation per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExp {
    max: f64,
    scaled_sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub const fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled_sum: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        if value == f64::NEG_INFINITY {
            return;
        }
        if value <= self.max {
            self.scaled_sum += (value - self.max).exp();
        } else {
            self.scaled_sum = self.scaled_sum * (self.max - value).exp() + 1.0;
            self.max = value;
        }
    }

    /// Merges another accumulator into this one.
    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.scaled_sum += other.scaled_sum * (other.max - self.max).exp();
        } else {
            self.scaled_sum = self.scaled_sum * (self.max - other.max).exp() + other.scaled_sum;
            self.max = other.max;
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled_sum.ln()
        }
    }
}

impl FromIterator<f64> for LogSumExp {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogSumExp::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Weighted sample mean of vector-valued observations. `weights` need not be
/// normalized. Returns `None` when the weights carry no mass.
pub(crate) fn weighted_mean<'a, I>(dim: usize, items: I) -> Option<Vec<f64>>
where
    I: IntoIterator<Item = (f64, &'a [f64])>,
{
    let mut acc = vec![0.0; dim];
    let mut total = 0.0;
    for (w, v) in items {
        if w == 0.0 {
            continue;
        }
        total += w;
        for (a, x) in acc.iter_mut().zip(v) {
            *a += w * x;
        }
    }
    if total > 0.0 {
        acc.iter_mut().for_each(|a| *a /= total);
        Some(acc)
    } else {
        None
    }
}
