//! k-nearest-neighbour regression on min-max scaled features.

use crate::dataset::ScalingSpec;
use crate::error::Result;
use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct KnnModel {
    k: usize,
    scaling: ScalingSpec,
    train: Matrix,
    targets: Vec<f64>,
}

impl KnnModel {
    /// `k` larger than the training set is clamped to the training set size,
    /// in which case every prediction is the training mean.
    pub fn fit(x: &Matrix, y: &[f64], k: usize) -> Result<Self> {
        let scaling = ScalingSpec::fit(x);
        let train = scaling.apply(x)?;
        Ok(KnnModel {
            k: k.clamp(1, x.rows().max(1)),
            scaling,
            train,
            targets: y.to_vec(),
        })
    }

    pub fn scale(&self, m: &Matrix) -> Result<Matrix> {
        self.scaling.apply(m)
    }

    /// Predicts one already-scaled row. Distance ties resolve toward the lower
    /// training index so the neighbour set is unique.
    pub fn predict_scaled_row(&self, row: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .train
            .iter_rows()
            .enumerate()
            .map(|(i, t)| {
                let d: f64 = t.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
        }
        let mut nearest: Vec<usize> = dist[..self.k].iter().map(|&(_, i)| i).collect();
        // fixed summation order
        nearest.sort_unstable();
        nearest.iter().map(|&i| self.targets[i]).sum::<f64>() / self.k as f64
    }
}
