//! Feature ranking by variance-based sensitivity indices.
//!
//! A regression model is fitted to the data and its output variance is
//! attributed to individual features through first-order and total
//! sensitivity indices, estimated with pick-freeze Monte Carlo over the
//! dataset's own rows. Synthetic benchmarks, brute-force oracles and a
//! recursive-feature-elimination baseline validate the rankings.

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod matrix;
pub mod models;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod sampling;

pub use dataset::{load_csv, min_max_scale, shuffle_split_halves, Dataset, HalfSplit, ScalingSpec, TargetColumn};
pub use error::{Error, Result};
pub use estimators::{evaluate_features, evaluate_true_function, evaluate_with_predictor, SensitivityReport};
pub use matrix::Matrix;
pub use models::{fit, FittedPredictor, ModelKind, PredictorSpec};
pub use oracle::{AnalyticFunction, BenchmarkSpec, Budgets, FeatureDistribution};
