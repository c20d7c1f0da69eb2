use ndarray::{Array2, Array3, ArrayViewMut1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A batch of control sequences, shaped `(batch, horizon, control_dim)`.
pub type ControlTrajectoryBatch = Array3<f64>;

/// Per-dimension box `[lo, hi]` on the control space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlLimits {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ControlLimits {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Shape(format!(
                "control limits need equal non-zero lengths, got lo={} hi={}",
                lo.len(),
                hi.len()
            )));
        }
        for (dim, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidLimits { dim, lo: l, hi: h });
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[-bound, bound]` in every one of `dim` dimensions.
    pub fn symmetric(dim: usize, bound: f64) -> Result<Self> {
        Self::new(vec![-bound; dim], vec![bound; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| v >= l && v <= h)
    }

    pub fn clamp_row(&self, mut u: ArrayViewMut1<'_, f64>) {
        for (k, v) in u.iter_mut().enumerate() {
            *v = v.clamp(self.lo[k], self.hi[k]);
        }
    }

    /// Clamps every control in a `(batch, horizon, dim)` tensor in place.
    pub fn clamp_batch(&self, batch: &mut Array3<f64>) {
        for mut lane in batch.lanes_mut(Axis(2)) {
            for (k, v) in lane.iter_mut().enumerate() {
                *v = v.clamp(self.lo[k], self.hi[k]);
            }
        }
    }

    pub fn clamp_sequence(&self, seq: &mut Array2<f64>) {
        for row in seq.rows_mut() {
            self.clamp_row(row);
        }
    }
}

/// Diagonal Gaussian over control sequences: mean and per-element std, both `(horizon, dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianControlDistribution {
    pub mean: Array2<f64>,
    pub std: Array2<f64>,
}

impl GaussianControlDistribution {
    pub fn new(mean: Array2<f64>, std: Array2<f64>) -> Result<Self> {
        if mean.dim() != std.dim() {
            return Err(Error::Shape(format!(
                "mean {:?} and std {:?} differ",
                mean.dim(),
                std.dim()
            )));
        }
        if std.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config("std entries must be finite and >= 0".into()));
        }
        Ok(Self { mean, std })
    }

    /// Zero mean with a constant std.
    pub fn constant(horizon: usize, dim: usize, std: f64) -> Self {
        Self {
            mean: Array2::zeros((horizon, dim)),
            std: Array2::from_elem((horizon, dim), std),
        }
    }

    pub fn horizon(&self) -> usize {
        self.mean.nrows()
    }

    pub fn control_dim(&self) -> usize {
        self.mean.ncols()
    }

    /// Receding-horizon warm start: drop the first `steps` rows and repeat the last row.
    pub fn shift(&mut self, steps: usize) {
        shift_rows(&mut self.mean, steps);
        shift_rows(&mut self.std, steps);
    }
}

fn shift_rows(a: &mut Array2<f64>, steps: usize) {
    let horizon = a.nrows();
    if steps == 0 || horizon == 0 {
        return;
    }
    let steps = steps.min(horizon - 1);
    for t in 0..horizon {
        let src = (t + steps).min(horizon - 1);
        for k in 0..a.ncols() {
            a[[t, k]] = a[[src, k]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_degenerate_box() {
        assert!(matches!(
            ControlLimits::new(vec![0.0], vec![0.0]),
            Err(Error::InvalidLimits { dim: 0, .. })
        ));
        assert!(ControlLimits::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn shift_repeats_last_row() {
        let mut d = GaussianControlDistribution::new(array![[1.0], [2.0], [3.0]], array![[0.1], [0.2], [0.3]]).unwrap();
        d.shift(1);
        assert_eq!(d.mean, array![[2.0], [3.0], [3.0]]);
        assert_eq!(d.std, array![[0.2], [0.3], [0.3]]);
    }
}
