//! Pick-freeze matrices: `A` with its `i`th column taken from `B`.

use crate::dataset::HalfSplit;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A split together with the lazily computed predictions on both halves.
#[derive(Debug, Clone)]
pub struct PickFreezePair {
    pub split: HalfSplit,
    pred_a: Option<Vec<f64>>,
    pred_b: Option<Vec<f64>>,
}

impl PickFreezePair {
    pub fn new(split: HalfSplit) -> Self {
        PickFreezePair {
            split,
            pred_a: None,
            pred_b: None,
        }
    }

    pub fn predictions_a(&self) -> Option<&[f64]> {
        self.pred_a.as_deref()
    }

    pub fn predictions_b(&self) -> Option<&[f64]> {
        self.pred_b.as_deref()
    }

    pub fn set_predictions(&mut self, a: Vec<f64>, b: Vec<f64>) -> Result<()> {
        let half = self.split.half();
        for len in [a.len(), b.len()] {
            if len != half {
                return Err(Error::InvalidDataset(format!(
                    "prediction vector of length {len} for a half of {half} rows"
                )));
            }
        }
        self.pred_a = Some(a);
        self.pred_b = Some(b);
        Ok(())
    }

    pub fn build(&self, i: usize) -> Result<Matrix> {
        build_pick_freeze(&self.split, i)
    }
}

/// Returns a copy of `A` whose column `i` is replaced by column `i` of `B`.
pub fn build_pick_freeze(split: &HalfSplit, i: usize) -> Result<Matrix> {
    let k = split.k();
    if i >= k {
        return Err(Error::FeatureOutOfRange { index: i, k });
    }
    let mut out = split.a.clone();
    for r in 0..out.rows() {
        out.set(r, i, split.b.get(r, i));
    }
    Ok(out)
}
