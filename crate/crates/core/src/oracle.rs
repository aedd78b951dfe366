//! Closed-form benchmark functions, synthetic data generation and
//! brute-force conditional-variance oracles.
//!
//! The oracles estimate `Var(E[Y | X_S])` with a nested Monte Carlo loop: the
//! outer loop fixes the coordinates in `S`, the inner loop averages the
//! function over fresh draws of every other coordinate (and of the noise).
//! Interaction-only components follow by inclusion-exclusion over subsets.
//! These estimates share no code path with the pick-freeze estimator and
//! serve as its ground truth.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, standard_normal, uniform01};

/// Largest subset handled by [`partial_variance_component`].
pub const MAX_COMPONENT_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    /// `10 sin(pi x0 x1) + 20 (x2 - 0.5)^2 + 10 x3 + 5 x4`
    Friedman1,
    /// `sqrt(x0^2 + (x1 x2 - 1 / (x1 x3))^2)`
    Friedman2,
    /// `sum_i c_i x_i`
    AdditiveLinear(Vec<f64>),
    /// `(x0 - 0.5)(x1 - 0.5)`
    ProductInteraction,
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticFunction {
    pub kind: FunctionKind,
    /// Scale of the additive standard-normal noise.
    pub sigma: f64,
}

/// Anything the oracles can integrate: a deterministic response plus an
/// optional additive Gaussian noise scale.
pub trait Response: Sync {
    fn value(&self, row: &[f64]) -> Result<f64>;

    fn noise_sd(&self) -> f64 {
        0.0
    }

    /// Number of leading columns the response reads.
    fn arity(&self) -> usize;
}

impl AnalyticFunction {
    pub fn new(kind: FunctionKind, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("noise scale must be finite and >= 0, got {sigma}")));
        }
        if let FunctionKind::AdditiveLinear(c) = &kind {
            if c.is_empty() {
                return Err(Error::Domain("additive function needs at least one coefficient".into()));
            }
        }
        Ok(AnalyticFunction { kind, sigma })
    }

    pub fn friedman1(sigma: f64) -> Self {
        AnalyticFunction::new(FunctionKind::Friedman1, sigma).expect("valid sigma")
    }

    pub fn friedman2(sigma: f64) -> Self {
        AnalyticFunction::new(FunctionKind::Friedman2, sigma).expect("valid sigma")
    }

    pub fn additive(coefficients: Vec<f64>) -> Self {
        AnalyticFunction::new(FunctionKind::AdditiveLinear(coefficients), 0.0).expect("non-empty coefficients")
    }

    pub fn interaction() -> Self {
        AnalyticFunction::new(FunctionKind::ProductInteraction, 0.0).expect("valid sigma")
    }

    pub fn constant(c: f64) -> Self {
        AnalyticFunction::new(FunctionKind::Constant(c), 0.0).expect("valid sigma")
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        self = AnalyticFunction::new(self.kind, sigma)?;
        Ok(self)
    }

    /// Number of leading features that enter the function.
    pub fn relevant_count(&self) -> usize {
        match &self.kind {
            FunctionKind::Friedman1 => 5,
            FunctionKind::Friedman2 => 4,
            FunctionKind::AdditiveLinear(c) => c.len(),
            FunctionKind::ProductInteraction => 2,
            FunctionKind::Constant(_) => 0,
        }
    }

    /// Noise-free value plus `sigma * noise_draw`.
    pub fn evaluate(&self, row: &[f64], noise_draw: f64) -> Result<f64> {
        let need = self.relevant_count();
        if row.len() < need {
            return Err(Error::Domain(format!("function reads {need} features, row has {}", row.len())));
        }
        let base = match &self.kind {
            FunctionKind::Friedman1 => {
                10.0 * (PI * row[0] * row[1]).sin()
                    + 20.0 * (row[2] - 0.5).powi(2)
                    + 10.0 * row[3]
                    + 5.0 * row[4]
            }
            FunctionKind::Friedman2 => {
                let denom = row[1] * row[3];
                if denom == 0.0 {
                    return Err(Error::Domain("friedman2 undefined where x1 * x3 = 0".into()));
                }
                let inner = row[1] * row[2] - 1.0 / denom;
                (row[0] * row[0] + inner * inner).sqrt()
            }
            FunctionKind::AdditiveLinear(c) => c.iter().zip(row).map(|(a, x)| a * x).sum(),
            FunctionKind::ProductInteraction => (row[0] - 0.5) * (row[1] - 0.5),
            FunctionKind::Constant(c) => *c,
        };
        Ok(base + self.sigma * noise_draw)
    }
}

impl Response for AnalyticFunction {
    fn value(&self, row: &[f64]) -> Result<f64> {
        self.evaluate(row, 0.0)
    }

    fn noise_sd(&self) -> f64 {
        self.sigma
    }

    fn arity(&self) -> usize {
        self.relevant_count()
    }
}

/// Benchmark names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkName {
    Friedman1,
    Friedman2,
    Additive,
    Interaction,
}

impl FromStr for BenchmarkName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "friedman1" => Ok(BenchmarkName::Friedman1),
            "friedman2" => Ok(BenchmarkName::Friedman2),
            "additive" => Ok(BenchmarkName::Additive),
            "interaction" => Ok(BenchmarkName::Interaction),
            other => Err(Error::Domain(format!(
                "unknown benchmark {other:?} (expected friedman1, friedman2, additive or interaction)"
            ))),
        }
    }
}

impl fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkName::Friedman1 => "friedman1",
            BenchmarkName::Friedman2 => "friedman2",
            BenchmarkName::Additive => "additive",
            BenchmarkName::Interaction => "interaction",
        })
    }
}

impl BenchmarkName {
    /// The named function; `additive` is `2 x0 + x1`.
    pub fn function(self, sigma: f64) -> Result<AnalyticFunction> {
        let kind = match self {
            BenchmarkName::Friedman1 => FunctionKind::Friedman1,
            BenchmarkName::Friedman2 => FunctionKind::Friedman2,
            BenchmarkName::Additive => FunctionKind::AdditiveLinear(vec![2.0, 1.0]),
            BenchmarkName::Interaction => FunctionKind::ProductInteraction,
        };
        AnalyticFunction::new(kind, sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureDistribution {
    Uniform01,
    /// Unclipped normal; values may leave [0, 1].
    Normal { mean: f64, sd: f64 },
    /// x0 ~ U[0, 100], x1 ~ U[40 pi, 560 pi], x2 ~ U[0, 1], x3 ~ U[1, 11],
    /// all other columns U[0, 1].
    PaperRanges,
}

impl FeatureDistribution {
    pub const NORMAL: FeatureDistribution = FeatureDistribution::Normal { mean: 0.5, sd: 0.25 };

    pub fn sample<R: Rng + ?Sized>(&self, column: usize, rng: &mut R) -> f64 {
        match *self {
            FeatureDistribution::Uniform01 => uniform01(rng),
            FeatureDistribution::Normal { mean, sd } => mean + sd * standard_normal(rng),
            FeatureDistribution::PaperRanges => {
                let u = uniform01(rng);
                match column {
                    0 => 100.0 * u,
                    1 => 40.0 * PI + 520.0 * PI * u,
                    3 => 1.0 + 10.0 * u,
                    _ => u,
                }
            }
        }
    }
}

impl FromStr for FeatureDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform01" => Ok(FeatureDistribution::Uniform01),
            "normal" => Ok(FeatureDistribution::NORMAL),
            "paper_ranges" => Ok(FeatureDistribution::PaperRanges),
            other => Err(Error::Domain(format!("unknown feature distribution {other:?}"))),
        }
    }
}

impl fmt::Display for FeatureDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureDistribution::Uniform01 => f.write_str("uniform01"),
            FeatureDistribution::Normal { mean, sd } => write!(f, "normal({mean}, {sd})"),
            FeatureDistribution::PaperRanges => f.write_str("paper_ranges"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub function: AnalyticFunction,
    pub n: usize,
    pub k_total: usize,
    pub distribution: FeatureDistribution,
    pub seed: u64,
}

impl BenchmarkSpec {
    pub fn new(function: AnalyticFunction, n: usize, k_total: usize, distribution: FeatureDistribution, seed: u64) -> Result<Self> {
        let spec = BenchmarkSpec {
            function,
            n,
            k_total,
            distribution,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_total < self.function.relevant_count().max(1) {
            return Err(Error::Domain(format!(
                "k_total {} below the {} relevant features",
                self.k_total,
                self.function.relevant_count()
            )));
        }
        if self.n < 4 {
            return Err(Error::TooFewRows { needed: 4, got: self.n });
        }
        Ok(())
    }

    fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, row: &mut [f64]) {
        for (c, v) in row.iter_mut().enumerate() {
            *v = self.distribution.sample(c, rng);
        }
    }
}

/// Draws `n x k_total` features, then one standard-normal noise value per row
/// from a separate stream, so the features do not depend on `sigma`.
/// Columns are named `x0`.. and the target `y`.
pub fn generate_dataset(spec: &BenchmarkSpec) -> Result<Dataset> {
    spec.validate()?;
    let (n, k) = (spec.n, spec.k_total);
    let mut feature_rng = rng::seeded_stream(spec.seed, 0);
    let mut noise_rng = rng::seeded_stream(spec.seed, 1);
    let mut x = Matrix::zeros(n, k);
    for r in 0..n {
        spec.sample_row(&mut feature_rng, x.row_mut(r));
    }
    let y = x
        .iter_rows()
        .map(|row| spec.function.evaluate(row, standard_normal(&mut noise_rng)))
        .collect::<Result<Vec<f64>>>()?;
    Dataset::with_default_names(x, Some(y))
}

/// Monte Carlo budget for the nested-loop oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub n_outer: usize,
    pub n_inner: usize,
    /// Plain Monte Carlo draws for the total variance.
    pub n_total: usize,
}

impl Budgets {
    pub fn new(n_outer: usize, n_inner: usize) -> Self {
        Budgets {
            n_outer,
            n_inner,
            n_total: n_outer * n_inner,
        }
    }
}

/// A Monte Carlo variance estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Population variance of `v` with the standard error of that estimate,
/// `sd((v_j - mean)^2) / sqrt(n)`.
fn variance_with_se(v: &[f64]) -> Estimate {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = sq.iter().sum::<f64>() / n;
    let spread = sq.iter().map(|s| (s - var) * (s - var)).sum::<f64>() / (n - 1.0).max(1.0);
    Estimate {
        value: var,
        se: (spread / n).sqrt(),
    }
}

fn check_subset(subset: &[usize], k: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::Domain("subset must be non-empty".into()));
    }
    for (i, &s) in subset.iter().enumerate() {
        if s >= k {
            return Err(Error::FeatureOutOfRange { index: s, k });
        }
        if subset[..i].contains(&s) {
            return Err(Error::Domain(format!("feature {s} repeated in subset")));
        }
    }
    Ok(())
}

/// Nested-loop estimate of `Var(E[Y | X_S])`.
///
/// Outer iteration `o` draws from its own stream of the benchmark seed, so
/// the result does not depend on how iterations are scheduled. The inner
/// mean carries Monte Carlo noise of order `E[Var(Y | X_S)] / n_inner`,
/// which is not removed.
pub fn double_loop_variance_se<F: Response + ?Sized>(
    f: &F,
    subset: &[usize],
    spec: &BenchmarkSpec,
    n_outer: usize,
    n_inner: usize,
) -> Result<Estimate> {
    let k = spec.k_total;
    check_subset(subset, k)?;
    if n_outer < 2 || n_inner < 1 {
        return Err(Error::Domain("need n_outer >= 2 and n_inner >= 1".into()));
    }
    let mut member = vec![false; k];
    for &s in subset {
        member[s] = true;
    }
    let free: Vec<usize> = (0..k).filter(|&c| !member[c]).collect();
    let sigma = f.noise_sd();

    let means = (0..n_outer)
        .into_par_iter()
        .map(|o| {
            let mut rng = rng::seeded_stream(spec.seed, 2 + o as u64);
            let mut row = vec![0.0; k];
            spec.sample_row(&mut rng, &mut row);
            let mut acc = 0.0;
            for _ in 0..n_inner {
                for &c in &free {
                    row[c] = spec.distribution.sample(c, &mut rng);
                }
                let mut v = f.value(&row)?;
                if sigma > 0.0 {
                    v += sigma * standard_normal(&mut rng);
                }
                acc += v;
            }
            Ok(acc / n_inner as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(variance_with_se(&means))
}

pub fn double_loop_variance<F: Response + ?Sized>(
    f: &F,
    subset: &[usize],
    spec: &BenchmarkSpec,
    n_outer: usize,
    n_inner: usize,
) -> Result<f64> {
    double_loop_variance_se(f, subset, spec, n_outer, n_inner).map(|e| e.value)
}

/// Plain Monte Carlo `V(Y)` over all features, noise included.
pub fn total_variance_se<F: Response + ?Sized>(f: &F, spec: &BenchmarkSpec, n_samples: usize) -> Result<Estimate> {
    if n_samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let k = spec.k_total;
    let sigma = f.noise_sd();
    // one stream per block of rows keeps the parallel draw deterministic
    const BLOCK: usize = 4096;
    let blocks = n_samples.div_ceil(BLOCK);
    let values: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::seeded_stream(spec.seed ^ 0x5eed_0000_0000_0000, b as u64);
            let len = BLOCK.min(n_samples - b * BLOCK);
            let mut row = vec![0.0; k];
            (0..len)
                .map(|_| {
                    spec.sample_row(&mut rng, &mut row);
                    let v = f.value(&row)?;
                    Ok(v + if sigma > 0.0 { sigma * standard_normal(&mut rng) } else { 0.0 })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = values.into_iter().flatten().collect();
    Ok(variance_with_se(&values))
}

pub fn total_variance<F: Response + ?Sized>(f: &F, spec: &BenchmarkSpec, n_samples: usize) -> Result<f64> {
    total_variance_se(f, spec, n_samples).map(|e| e.value)
}

/// Interaction-only component `V'_S = sum_{T subset S} (-1)^{|S|-|T|} Var(E[Y | X_T])`,
/// with the empty set contributing zero. For a single feature this equals
/// [`double_loop_variance`]. The standard error combines the terms as if
/// independent.
pub fn partial_variance_component_se<F: Response + ?Sized>(
    f: &F,
    subset: &[usize],
    spec: &BenchmarkSpec,
    budgets: Budgets,
) -> Result<Estimate> {
    check_subset(subset, spec.k_total)?;
    if subset.len() > MAX_COMPONENT_ORDER {
        return Err(Error::Domain(format!(
            "components of order {} exceed the supported maximum {MAX_COMPONENT_ORDER}",
            subset.len()
        )));
    }
    let s = subset.len();
    let mut value = 0.0;
    let mut var_se = 0.0;
    for mask in 1u32..(1 << s) {
        let t: Vec<usize> = (0..s).filter(|b| mask & (1 << b) != 0).map(|b| subset[b]).collect();
        let e = double_loop_variance_se(f, &t, spec, budgets.n_outer, budgets.n_inner)?;
        let sign = if (s - t.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        value += sign * e.value;
        var_se += e.se * e.se;
    }
    Ok(Estimate {
        value,
        se: var_se.sqrt(),
    })
}

pub fn partial_variance_component<F: Response + ?Sized>(
    f: &F,
    subset: &[usize],
    spec: &BenchmarkSpec,
    budgets: Budgets,
) -> Result<f64> {
    partial_variance_component_se(f, subset, spec, budgets).map(|e| e.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceIndex {
    pub first: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceIndices {
    pub variance: f64,
    pub indices: Vec<BruteForceIndex>,
}

/// `S_i = Var(E[Y|X_i]) / V` and `S_Ti = 1 - Var(E[Y|X_~i]) / V` for every
/// one of the `k_total` features, each conditional variance by the nested
/// loop and `V` by plain Monte Carlo.
pub fn brute_force_indices<F: Response + ?Sized>(f: &F, spec: &BenchmarkSpec, budgets: Budgets) -> Result<BruteForceIndices> {
    let k = spec.k_total;
    if k < f.arity() {
        return Err(Error::Domain(format!("k_total {k} below the {} features the function reads", f.arity())));
    }
    let variance = total_variance(f, spec, budgets.n_total)?;
    if variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let indices = (0..k)
        .map(|i| {
            let first = double_loop_variance(f, &[i], spec, budgets.n_outer, budgets.n_inner)?;
            let rest: Vec<usize> = (0..k).filter(|&c| c != i).collect();
            let closed = if rest.is_empty() {
                // conditioning on nothing leaves E[Y] alone
                0.0
            } else {
                double_loop_variance(f, &rest, spec, budgets.n_outer, budgets.n_inner)?
            };
            Ok(BruteForceIndex {
                first: first / variance,
                total: 1.0 - closed / variance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BruteForceIndices { variance, indices })
}
