use crate::error::{Error, Result};
use crate::weighting::ProposalComponent;

/// Midpoint grid over a 1-D interval or a 2-D box.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Cells per axis.
    pub cells: usize,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells: usize) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(Error::config("grid must be 1-D or 2-D"));
        }
        if cells == 0 || lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::config("grid needs lo < hi and at least one cell"));
        }
        Ok(Self { lo, hi, cells })
    }

    fn widths(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) / self.cells as f64)
            .collect()
    }

    /// Cell midpoints and the cell volume.
    pub fn points(&self) -> (Vec<Vec<f64>>, f64) {
        let w = self.widths();
        let axis = |d: usize| -> Vec<f64> {
            (0..self.cells)
                .map(|i| self.lo[d] + (i as f64 + 0.5) * w[d])
                .collect()
        };
        let pts = if self.lo.len() == 1 {
            axis(0).into_iter().map(|x| vec![x]).collect()
        } else {
            let (a, b) = (axis(0), axis(1));
            a.iter()
                .flat_map(|&x| b.iter().map(move |&y| vec![x, y]))
                .collect()
        };
        (pts, w.iter().product())
    }
}

/// Grid-L1 distance `∫|ψ_J − π̄|` between the kernel estimate
/// `ψ_J(x) = (1/J) Σ_{j<J} N(x; μ_j, h_J² I)` and a normalized target, for
/// each `J` of the ladder. `bandwidth(J)` gives `h_J`.
pub fn equivalent_mixture_check<B, F>(
    means: &[Vec<f64>],
    bandwidth: B,
    normalized_target: F,
    grid: &Grid,
    ladder: &[usize],
) -> Result<Vec<f64>>
where
    B: Fn(usize) -> f64,
    F: Fn(&[f64]) -> f64,
{
    let dim = grid.lo.len();
    if let Some(m) = means.iter().find(|m| m.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.len(),
        });
    }
    let (points, cell) = grid.points();
    let pi: Vec<f64> = points.iter().map(|x| normalized_target(x)).collect();
    ladder
        .iter()
        .map(|&j| {
            if j == 0 || j > means.len() {
                return Err(Error::config(format!(
                    "ladder entry {j} outside 1..={}",
                    means.len()
                )));
            }
            let h = bandwidth(j);
            let kernels: Vec<ProposalComponent> = means[..j]
                .iter()
                .map(|mu| ProposalComponent::isotropic(mu.clone(), h))
                .collect::<Result<_>>()?;
            let mut l1 = 0.0;
            for (x, p) in points.iter().zip(&pi) {
                let psi: f64 =
                    kernels.iter().map(|k| k.log_pdf_unchecked(x).exp()).sum::<f64>() / j as f64;
                l1 += (psi - p).abs();
            }
            Ok(l1 * cell)
        })
        .collect()
}
