//! Recursive feature elimination.
//!
//! Each round fits the estimator on the surviving features and drops the one
//! with the smallest importance, until a single feature remains. The linear
//! estimator is refitted on min-max rescaled survivors every round so that
//! coefficient magnitudes are comparable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::models::{ForestParams, LinearModel, PredictorSpec, RandomForest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RfeEstimator {
    Linear,
    RandomForest,
}

impl FromStr for RfeEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lr" => Ok(RfeEstimator::Linear),
            "rf" | "random_forest" => Ok(RfeEstimator::RandomForest),
            other => Err(Error::InvalidSpec(format!("unknown rfe estimator {other:?}"))),
        }
    }
}

impl fmt::Display for RfeEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RfeEstimator::Linear => "LR",
            RfeEstimator::RandomForest => "RF",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RfeResult {
    /// Feature indices, first eliminated first; the survivor is last.
    pub elimination_order: Vec<usize>,
    /// `ranks[i] = k - position of i in elimination_order`; the survivor has rank 1.
    pub ranks: Vec<usize>,
}

impl RfeResult {
    fn from_order(elimination_order: Vec<usize>) -> Self {
        let k = elimination_order.len();
        let mut ranks = vec![0; k];
        for (pos, &i) in elimination_order.iter().enumerate() {
            ranks[i] = k - pos;
        }
        RfeResult {
            elimination_order,
            ranks,
        }
    }
}

/// Absolute slope coefficients; the intercept is excluded.
pub fn linear_importance(model: &LinearModel) -> Vec<f64> {
    model.weights.iter().map(|w| w.abs()).collect()
}

/// Normalised impurity decrease per feature; see [`RandomForest::feature_importance`].
pub fn rf_importance(forest: &RandomForest) -> Vec<f64> {
    forest.feature_importance()
}

pub fn rfe(d: &Dataset, estimator: RfeEstimator, seed: u64) -> Result<RfeResult> {
    let k = d.k();
    if k < 2 {
        return Err(Error::InvalidDataset("rfe needs at least two features".into()));
    }
    let y = d.target_values()?;
    if estimator == RfeEstimator::Linear && d.n() <= k {
        return Err(Error::InvalidDataset(format!(
            "linear rfe needs more rows than features ({} <= {k})",
            d.n()
        )));
    }
    let defaults = PredictorSpec::new(crate::models::ModelKind::RandomForest);

    let mut survivors: Vec<usize> = (0..k).collect();
    let mut order = Vec::with_capacity(k);
    while survivors.len() > 1 {
        let importance = (|| -> Result<Vec<f64>> {
            let x = d.features().select_columns(&survivors);
            match estimator {
                RfeEstimator::Linear => {
                    let sub = Dataset::with_default_names(x, None)?;
                    let (scaled, _) = dataset::min_max_scale(&sub);
                    Ok(linear_importance(&LinearModel::fit(scaled.features(), y)?))
                }
                RfeEstimator::RandomForest => {
                    let params = ForestParams {
                        trees: defaults.rf_trees,
                        min_leaf: defaults.rf_min_leaf,
                        mtry: survivors.len().div_ceil(3),
                        seed,
                    };
                    Ok(rf_importance(&RandomForest::fit(&x, y, params)))
                }
            }
        })()
        .map_err(|e| Error::Rfe {
            survivors: survivors.clone(),
            source: Box::new(e),
        })?;

        // first minimum wins, i.e. the lowest surviving index on ties
        let mut drop = 0;
        for (pos, v) in importance.iter().enumerate() {
            if *v < importance[drop] {
                drop = pos;
            }
        }
        order.push(survivors.remove(drop));
    }
    order.push(survivors[0]);
    Ok(RfeResult::from_order(order))
}
