//! Sensitivity indices of a fitted model over a dataset.
//!
//! The pipeline fits the model, computes the mean `f0` and variance `V` of
//! its predictions over all rows, shuffles the rows into halves `A` and `B`,
//! and for each feature `i` evaluates the model on `A` with column `i` taken
//! from `B`. The total index is
//!
//! ```text
//! S_Ti = 1 - [ (1/n') sum_j f(A)_j f(A_B^(i))_j - f0^2 ] / V
//! ```
//!
//! and the first-order index reuses the same prediction vectors:
//!
//! ```text
//! S_i = [ (1/n') sum_j f(B)_j (f(A_B^(i))_j - f(A)_j) ] / V
//! ```
//!
//! `f0` and `V` come from the full dataset, the inner products from the
//! `n' = n / 2` rows of each half. Raw estimates can leave [0, 1]; they are
//! kept for ranking and clamped copies are reported alongside.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::models::{self, FittedPredictor, PredictorSpec};
use crate::oracle::{AnalyticFunction, BenchmarkSpec};
use crate::sampling::{self, PickFreezePair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub f0: f64,
    pub variance: f64,
}

/// Population mean and variance, `V = mean(f^2) - f0^2`. A constant vector
/// has variance exactly 0; round-off below zero is snapped to 0.
pub fn moments(predictions: &[f64]) -> Result<MomentPair> {
    let n = predictions.len();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    if let Some(p) = predictions.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("prediction {p} is not finite")));
    }
    let f0 = predictions.iter().sum::<f64>() / n as f64;
    let first = predictions[0];
    let variance = if predictions.iter().all(|&v| v == first) {
        0.0
    } else {
        let second = predictions.iter().map(|v| v * v).sum::<f64>() / n as f64;
        (second - f0 * f0).max(0.0)
    };
    Ok(MomentPair { f0, variance })
}

fn check_inputs(vectors: &[&[f64]], mom: &MomentPair) -> Result<usize> {
    let n = vectors[0].len();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::Domain("prediction vectors differ in length".into()));
    }
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    if mom.variance.is_nan() || mom.variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(n)
}

/// Raw total index from predictions on `A` and on `A` with column `i` from `B`.
pub fn total_index(f_a: &[f64], f_abi: &[f64], mom: &MomentPair) -> Result<f64> {
    let n = check_inputs(&[f_a, f_abi], mom)?;
    let cross = f_a.iter().zip(f_abi).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    Ok(1.0 - (cross - mom.f0 * mom.f0) / mom.variance)
}

/// Raw first-order index from predictions on `A`, `B` and the hybrid matrix.
pub fn first_order_index(f_a: &[f64], f_b: &[f64], f_abi: &[f64], mom: &MomentPair) -> Result<f64> {
    let n = check_inputs(&[f_a, f_b, f_abi], mom)?;
    let num = f_b
        .iter()
        .zip(f_abi.iter().zip(f_a))
        .map(|(b, (ab, a))| b * (ab - a))
        .sum::<f64>()
        / n as f64;
    Ok(num / mom.variance)
}

/// Standard error of the mean of `terms`, scaled by `1 / V`.
fn standard_error(terms: impl Iterator<Item = f64> + Clone, n: usize, variance: f64) -> f64 {
    let mean = terms.clone().sum::<f64>() / n as f64;
    let ss = terms.map(|t| (t - mean) * (t - mean)).sum::<f64>();
    (ss / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt() / variance
}

/// Rank 1 goes to the largest value; ties resolve toward the lower index.
pub fn rank(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSensitivity {
    pub name: String,
    pub first_raw: f64,
    pub total_raw: f64,
    pub first: f64,
    pub total: f64,
    pub rank_first: usize,
    pub rank_total: usize,
    pub se_first: f64,
    pub se_total: f64,
}

/// What produced the predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorEcho {
    Fitted(PredictorSpec),
    TrueFunction(AnalyticFunction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub features: Vec<FeatureSensitivity>,
    pub f0: f64,
    pub variance: f64,
    pub n_rows: usize,
    pub n_half: usize,
    pub holdout_mae: f64,
    pub seed: u64,
    pub predictor: PredictorEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkSpec>,
}

impl SensitivityReport {
    pub fn k(&self) -> usize {
        self.features.len()
    }

    pub fn total_raw(&self) -> Vec<f64> {
        self.features.iter().map(|f| f.total_raw).collect()
    }

    pub fn first_raw(&self) -> Vec<f64> {
        self.features.iter().map(|f| f.first_raw).collect()
    }

    pub fn rank_total(&self) -> Vec<usize> {
        self.features.iter().map(|f| f.rank_total).collect()
    }

    pub fn rank_first(&self) -> Vec<usize> {
        self.features.iter().map(|f| f.rank_first).collect()
    }
}

/// Fits `spec` on `d` and computes every feature's indices.
pub fn evaluate_features(spec: &PredictorSpec, d: &Dataset, seed: u64) -> Result<SensitivityReport> {
    let predictor = models::fit(spec, d)?;
    evaluate_with_predictor(&predictor, d, seed, PredictorEcho::Fitted(spec.clone()))
}

/// Runs the estimation steps with an already fitted predictor. The target,
/// if any, is ignored. Features are evaluated in parallel and gathered in
/// index order, so the report does not depend on scheduling.
pub fn evaluate_with_predictor(
    predictor: &FittedPredictor,
    d: &Dataset,
    seed: u64,
    echo: PredictorEcho,
) -> Result<SensitivityReport> {
    let k = d.k();
    let mom = moments(&predictor.predict(d.features())?)?;
    if mom.variance == 0.0 {
        return Err(Error::ZeroVariance);
    }

    let mut pair = PickFreezePair::new(dataset::shuffle_split_halves(d, seed)?);
    let f_a = predictor.predict(&pair.split.a)?;
    let f_b = predictor.predict(&pair.split.b)?;
    pair.set_predictions(f_a, f_b)?;
    let f_a = pair.predictions_a().expect("set above");
    let f_b = pair.predictions_b().expect("set above");
    let n_half = pair.split.half();

    let raw = (0..k)
        .into_par_iter()
        .map(|i| {
            let hybrid = sampling::build_pick_freeze(&pair.split, i)?;
            let f_abi = predictor.predict(&hybrid)?;
            let total = total_index(f_a, &f_abi, &mom)?;
            let first = first_order_index(f_a, f_b, &f_abi, &mom)?;
            let se_total = standard_error(f_a.iter().zip(&f_abi).map(|(a, b)| a * b), n_half, mom.variance);
            let se_first = standard_error(
                f_b.iter().zip(f_abi.iter().zip(f_a)).map(|(b, (ab, a))| b * (ab - a)),
                n_half,
                mom.variance,
            );
            Ok((first, total, se_first, se_total))
        })
        .collect::<Result<Vec<_>>>()?;

    let firsts: Vec<f64> = raw.iter().map(|r| r.0).collect();
    let totals: Vec<f64> = raw.iter().map(|r| r.1).collect();
    let rank_first = rank(&firsts);
    let rank_total = rank(&totals);
    let features = raw
        .iter()
        .enumerate()
        .map(|(i, &(first, total, se_first, se_total))| FeatureSensitivity {
            name: d.feature_names()[i].clone(),
            first_raw: first,
            total_raw: total,
            first: first.clamp(0.0, 1.0),
            total: total.clamp(0.0, 1.0),
            rank_first: rank_first[i],
            rank_total: rank_total[i],
            se_first,
            se_total,
        })
        .collect();

    Ok(SensitivityReport {
        features,
        f0: mom.f0,
        variance: mom.variance,
        n_rows: d.n(),
        n_half,
        holdout_mae: predictor.holdout_mae(),
        seed,
        predictor: echo,
        benchmark: None,
    })
}

/// Indices of the generating function itself on benchmark data.
pub fn evaluate_true_function(f: &AnalyticFunction, d: &Dataset, seed: u64) -> Result<SensitivityReport> {
    let noiseless = f.clone().with_sigma(0.0)?;
    let predictor = FittedPredictor::analytic(noiseless, d)?;
    evaluate_with_predictor(&predictor, d, seed, PredictorEcho::TrueFunction(f.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mom(f0: f64, variance: f64) -> MomentPair {
        MomentPair { f0, variance }
    }

    #[test]
    fn moments_by_hand() {
        assert_eq!(moments(&[1.0, 1.0, 1.0]).unwrap(), mom(1.0, 0.0));
        assert_eq!(moments(&[0.0, 2.0]).unwrap(), mom(1.0, 1.0));
        assert_eq!(moments(&[1.0, 2.0, 3.0, 4.0]).unwrap(), mom(2.5, 1.25));
        assert!(moments(&[1.0]).is_err());
    }

    #[test]
    fn constant_moments_exactly_zero() {
        assert_eq!(moments(&[0.1; 7]).unwrap().variance, 0.0);
    }

    #[test]
    fn total_index_by_hand() {
        assert_eq!(total_index(&[1.0, -1.0], &[1.0, -1.0], &mom(0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(total_index(&[1.0, -1.0], &[-1.0, 1.0], &mom(0.0, 1.0)).unwrap(), 2.0);
    }

    #[test]
    fn zero_variance_is_an_error() {
        assert!(matches!(total_index(&[1.0, 1.0], &[1.0, 1.0], &mom(1.0, 0.0)), Err(Error::ZeroVariance)));
        assert!(matches!(
            first_order_index(&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], &mom(1.0, 0.0)),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn first_order_zero_when_hybrid_equals_a() {
        let a = [0.3, 1.2, -0.4];
        assert_eq!(first_order_index(&a, &[5.0, 1.0, 2.0], &a, &mom(0.0, 2.0)).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(total_index(&[1.0, 2.0], &[1.0], &mom(0.0, 1.0)).is_err());
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&[0.1, 0.9, 0.5]), vec![3, 1, 2]);
        assert_eq!(rank(&[0.5, 0.5]), vec![1, 2]);
        assert_eq!(rank(&[7.0]), vec![1]);
        assert_eq!(rank(&[-0.2, 0.0, -0.1]), vec![3, 1, 2]);
    }
}
