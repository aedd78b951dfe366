//! The trained model `f` whose output variance is decomposed.
//!
//! Built-in regressors are ordinary least squares, k-nearest neighbours and a
//! CART random forest. Any other model is reached through the external
//! command protocol in [`external`]. Benchmarks can also wrap the analytic
//! generating function itself as a predictor.

pub mod external;
pub mod forest;
pub mod knn;
pub mod linear;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::oracle::{AnalyticFunction, Response};
use crate::rng;

pub use external::ExternalModel;
pub use forest::{ForestParams, RandomForest};
pub use knn::KnnModel;
pub use linear::LinearModel;

/// Rows required to fit a built-in model.
pub const MIN_FIT_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Knn,
    RandomForest,
    External,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Linear => "linear",
            ModelKind::Knn => "knn",
            ModelKind::RandomForest => "random_forest",
            ModelKind::External => "external",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lr" => Ok(ModelKind::Linear),
            "knn" => Ok(ModelKind::Knn),
            "rf" | "random_forest" => Ok(ModelKind::RandomForest),
            "external" => Ok(ModelKind::External),
            other => Err(Error::InvalidSpec(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub kind: ModelKind,
    pub knn_k: usize,
    pub rf_trees: usize,
    pub rf_min_leaf: usize,
    /// Features tried per split; `None` means `ceil(k / 3)`.
    pub rf_mtry: Option<usize>,
    pub external_command: Option<String>,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl PredictorSpec {
    pub fn new(kind: ModelKind) -> Self {
        PredictorSpec {
            kind,
            knn_k: 5,
            rf_trees: 10,
            rf_min_leaf: 5,
            rf_mtry: None,
            external_command: None,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }

    pub fn external(command: impl Into<String>) -> Self {
        PredictorSpec {
            external_command: Some(command.into()),
            ..PredictorSpec::new(ModelKind::External)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.knn_k == 0 || self.rf_trees == 0 || self.rf_min_leaf == 0 || self.rf_mtry == Some(0) {
            return Err(Error::InvalidSpec("model parameters must be positive".into()));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction <= 0.5) {
            return Err(Error::InvalidSpec(format!(
                "holdout fraction {} outside (0, 0.5]",
                self.holdout_fraction
            )));
        }
        if self.kind == ModelKind::External
            && self.external_command.as_deref().is_none_or(|c| c.trim().is_empty())
        {
            return Err(Error::InvalidSpec("external model requires a command".into()));
        }
        Ok(())
    }

    fn mtry(&self, k: usize) -> usize {
        self.rf_mtry.unwrap_or_else(|| k.div_ceil(3)).clamp(1, k)
    }
}

#[derive(Clone)]
pub enum Model {
    Linear(LinearModel),
    Knn(KnnModel),
    Forest(RandomForest),
    External(ExternalModel),
    Analytic(AnalyticFunction),
    /// Any caller-supplied deterministic response; its noise scale is ignored.
    Custom(Arc<dyn Response + Send>),
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Linear(m) => f.debug_tuple("Linear").field(m).finish(),
            Model::Knn(m) => f.debug_tuple("Knn").field(m).finish(),
            Model::Forest(m) => f.debug_tuple("Forest").field(m).finish(),
            Model::External(m) => f.debug_tuple("External").field(m).finish(),
            Model::Analytic(m) => f.debug_tuple("Analytic").field(m).finish(),
            Model::Custom(r) => write!(f, "Custom(arity {})", r.arity()),
        }
    }
}

/// A fitted model. Immutable after fitting; `predict` takes `&self` and is
/// safe to call from several threads.
#[derive(Debug, Clone)]
pub struct FittedPredictor {
    model: Model,
    k_expected: usize,
    holdout_mae: f64,
}

impl FittedPredictor {
    /// Wraps a noise-free analytic function as the predictor. The reported
    /// MAE is measured against the dataset target when one is given.
    pub fn analytic(f: AnalyticFunction, d: &Dataset) -> Result<Self> {
        let mut p = FittedPredictor {
            model: Model::Analytic(f),
            k_expected: d.k(),
            holdout_mae: 0.0,
        };
        if let Some(t) = d.target() {
            let pred = p.predict(d.features())?;
            p.holdout_mae = mae(&pred, &t.values);
        }
        Ok(p)
    }

    /// Wraps a deterministic response on `k` columns. The reported MAE is 0.
    pub fn from_response(response: Arc<dyn Response + Send>, k: usize) -> Result<Self> {
        if response.arity() > k {
            return Err(Error::ColumnMismatch {
                expected: response.arity(),
                got: k,
            });
        }
        Ok(FittedPredictor {
            model: Model::Custom(response),
            k_expected: k,
            holdout_mae: 0.0,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn k_expected(&self) -> usize {
        self.k_expected
    }

    pub fn holdout_mae(&self) -> f64 {
        self.holdout_mae
    }

    pub fn as_linear(&self) -> Option<&LinearModel> {
        match &self.model {
            Model::Linear(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_forest(&self) -> Option<&RandomForest> {
        match &self.model {
            Model::Forest(m) => Some(m),
            _ => None,
        }
    }

    pub fn predict(&self, m: &Matrix) -> Result<Vec<f64>> {
        if m.cols() != self.k_expected {
            return Err(Error::ColumnMismatch {
                expected: self.k_expected,
                got: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Ok(Vec::new());
        }
        let out = match &self.model {
            Model::Linear(lm) => m.iter_rows().map(|r| lm.predict_row(r)).collect(),
            Model::Knn(knn) => {
                let s = knn.scale(m)?;
                let rows: Vec<&[f64]> = s.iter_rows().collect();
                rows.par_iter().map(|r| knn.predict_scaled_row(r)).collect()
            }
            Model::Forest(f) => {
                let rows: Vec<&[f64]> = m.iter_rows().collect();
                rows.par_iter().map(|r| f.predict_row(r)).collect()
            }
            Model::External(ext) => ext.predict(m)?,
            Model::Analytic(f) => m
                .iter_rows()
                .map(|r| f.evaluate(r, 0.0))
                .collect::<Result<Vec<f64>>>()?,
            Model::Custom(f) => m.iter_rows().map(|r| f.value(r)).collect::<Result<Vec<f64>>>()?,
        };
        Ok(out)
    }
}

pub fn mae(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64
}

fn fit_model(spec: &PredictorSpec, x: &Matrix, y: &[f64]) -> Result<Model> {
    Ok(match spec.kind {
        ModelKind::Linear => Model::Linear(LinearModel::fit(x, y)?),
        ModelKind::Knn => Model::Knn(KnnModel::fit(x, y, spec.knn_k)?),
        ModelKind::RandomForest => Model::Forest(RandomForest::fit(
            x,
            y,
            ForestParams {
                trees: spec.rf_trees,
                min_leaf: spec.rf_min_leaf,
                mtry: spec.mtry(x.cols()),
                seed: spec.seed,
            },
        )),
        ModelKind::External => {
            let ext = ExternalModel::new(spec.external_command.clone().unwrap_or_default());
            ext.fit(x, y)?;
            Model::External(ext)
        }
    })
}

/// Fits the model described by `spec` on `d`.
///
/// A seed-determined fraction of rows is held out to measure the MAE, then
/// the model is refitted on every row. External commands additionally get a
/// one-row predict handshake after the final fit.
pub fn fit(spec: &PredictorSpec, d: &Dataset) -> Result<FittedPredictor> {
    spec.validate()?;
    let y = d.target_values()?;
    let n = d.n();
    if spec.kind != ModelKind::External && n < MIN_FIT_ROWS {
        return Err(Error::TooFewRows {
            needed: MIN_FIT_ROWS,
            got: n,
        });
    }

    let n_hold = ((spec.holdout_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(spec.seed));
    let (hold, train) = order.split_at(n_hold);
    let x = d.features();
    let train_x = x.select_rows(train);
    let train_y: Vec<f64> = train.iter().map(|&r| y[r]).collect();
    let hold_x = x.select_rows(hold);
    let hold_y: Vec<f64> = hold.iter().map(|&r| y[r]).collect();

    let probe = FittedPredictor {
        model: fit_model(spec, &train_x, &train_y)?,
        k_expected: d.k(),
        holdout_mae: 0.0,
    };
    let holdout_mae = mae(&probe.predict(&hold_x)?, &hold_y);
    if !holdout_mae.is_finite() {
        return Err(Error::Domain("holdout MAE is not finite".into()));
    }

    let fitted = FittedPredictor {
        model: fit_model(spec, x, y)?,
        k_expected: d.k(),
        holdout_mae,
    };
    if spec.kind == ModelKind::External {
        fitted.predict(&x.select_rows(&[0]))?;
    }
    Ok(fitted)
}
