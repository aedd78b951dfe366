//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero if any criterion fails. Seeds are fixed up front:
//! single-seed checks use 42, multi-seed checks use 1, 2 and 3.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use varsel::baselines::{rfe, RfeEstimator};
use varsel::estimators::{self, moments};
use varsel::oracle::{self, generate_dataset, Response};
use varsel::sampling::build_pick_freeze;
use varsel::{
    evaluate_features, evaluate_true_function, evaluate_with_predictor, AnalyticFunction, BenchmarkSpec, Budgets,
    Dataset, FeatureDistribution, FittedPredictor, ModelKind, PredictorSpec, Result, SensitivityReport,
};

const SEED: u64 = 42;
const SEEDS: [u64; 3] = [1, 2, 3];
const TOL: f64 = 0.02;
const N_HALF: usize = 65_536;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn spec(f: AnalyticFunction, n: usize, k: usize, dist: FeatureDistribution, seed: u64) -> BenchmarkSpec {
    BenchmarkSpec::new(f, n, k, dist, seed).expect("valid benchmark")
}

fn true_report(f: &AnalyticFunction, n: usize, k: usize, dist: FeatureDistribution, seed: u64) -> Result<SensitivityReport> {
    let d = generate_dataset(&spec(f.clone(), n, k, dist, seed))?;
    evaluate_true_function(f, &d, seed)
}

fn top(ranks: &[usize], relevant: usize) -> bool {
    ranks[..relevant].iter().all(|&r| r <= relevant)
}

fn fmt_ranks(r: &[usize]) -> String {
    r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed <= limit, format!("{:.1}s of {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

/// Pick-freeze against the nested-loop oracle on two functions with closed forms.
fn oracle_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let budgets = Budgets {
        n_outer: 20_000,
        n_inner: 500,
        n_total: 2_000_000,
    };
    let cases = [
        ("additive", AnalyticFunction::additive(vec![2.0, 1.0]), [(0.8, 0.8), (0.2, 0.2)]),
        ("interaction", AnalyticFunction::interaction(), [(0.0, 1.0), (0.0, 1.0)]),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, f, closed) in cases {
        let est = true_report(&f, 2 * N_HALF, 2, FeatureDistribution::Uniform01, SEED)?;
        let bf = oracle::brute_force_indices(&f, &spec(f.clone(), 2 * N_HALF, 2, FeatureDistribution::Uniform01, SEED), budgets)?;
        let mut worst_oracle: f64 = 0.0;
        let mut worst_closed: f64 = 0.0;
        for (i, e) in est.features.iter().enumerate() {
            let o = bf.indices[i];
            worst_oracle = worst_oracle.max((e.first_raw - o.first).abs()).max((e.total_raw - o.total).abs());
            worst_closed = worst_closed
                .max((e.first_raw - closed[i].0).abs())
                .max((e.total_raw - closed[i].1).abs());
        }
        pass &= worst_oracle <= TOL && worst_closed <= TOL;
        detail.push(format!(
            "{name}: S=({:.4},{:.4}) S_T=({:.4},{:.4}) max|est-oracle|={worst_oracle:.4} max|est-closed|={worst_closed:.4}",
            est.features[0].first_raw, est.features[1].first_raw, est.features[0].total_raw, est.features[1].total_raw
        ));
    }
    let (fast, t) = within(start.elapsed(), Duration::from_secs(30));
    detail.push(t);
    Ok(Outcome::new(pass && fast, detail.join("; ")))
}

fn friedman1_noise_levels() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (sigma, check_first) in [(0.0, true), (1.0, false)] {
        for seed in SEEDS {
            let f = AnalyticFunction::friedman1(sigma);
            let r = true_report(&f, 10_000, 20, FeatureDistribution::Uniform01, seed)?;
            let gap = |v: Vec<f64>| {
                let lo = v[..5].iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = v[5..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                lo - hi
            };
            let g_total = gap(r.total_raw());
            let mut ok = g_total > 0.0;
            let mut line = format!("sigma={sigma} seed={seed} S_T gap={g_total:.4}");
            if check_first {
                let g_first = gap(r.first_raw());
                ok &= g_first > 0.0;
                line.push_str(&format!(" S gap={g_first:.4}"));
            }
            pass &= ok;
            detail.push(line);
        }
    }
    let (fast, t) = within(start.elapsed(), Duration::from_secs(60));
    detail.push(t);
    Ok(Outcome::new(pass && fast, detail.join("; ")))
}

fn friedman2_data(sigma: f64, seed: u64) -> Result<Dataset> {
    generate_dataset(&spec(AnalyticFunction::friedman2(sigma), 10_000, 20, FeatureDistribution::PaperRanges, seed))
}

fn friedman2_total_ranks() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for sigma in [0.0, 10.0] {
        for seed in SEEDS {
            let f = AnalyticFunction::friedman2(sigma);
            let r = evaluate_true_function(&f, &friedman2_data(sigma, seed)?, seed)?;
            let ranks = r.rank_total();
            pass &= top(&ranks, 4);
            detail.push(format!("sigma={sigma} seed={seed} ranks[0..4]={}", fmt_ranks(&ranks[..4])));
        }
    }
    let (fast, t) = within(start.elapsed(), Duration::from_secs(60));
    detail.push(t);
    Ok(Outcome::new(pass && fast, detail.join("; ")))
}

fn friedman1_forest() -> Result<Outcome> {
    let start = Instant::now();
    let d = generate_dataset(&spec(AnalyticFunction::friedman1(0.0), 10_000, 20, FeatureDistribution::Uniform01, SEED))?;
    let mut ps = PredictorSpec::new(ModelKind::RandomForest).with_seed(SEED);
    ps.rf_trees = 10;
    let r = evaluate_features(&ps, &d, SEED)?;
    let ranks = r.rank_total();
    let (fast, t) = within(start.elapsed(), Duration::from_secs(120));
    Ok(Outcome::new(
        top(&ranks, 5) && fast,
        format!("ranks[0..5]={} holdout MAE={:.3}; {t}", fmt_ranks(&ranks[..5]), r.holdout_mae),
    ))
}

fn rfe_linear_contrast() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for sigma in [0.0, 10.0] {
        for seed in SEEDS {
            let res = rfe(&friedman2_data(sigma, seed)?, RfeEstimator::Linear, seed)?;
            let all_top = top(&res.ranks, 4);
            pass &= !all_top;
            detail.push(format!("sigma={sigma} seed={seed} ranks[0..4]={}", fmt_ranks(&res.ranks[..4])));
        }
    }
    let (fast, t) = within(start.elapsed(), Duration::from_secs(60));
    detail.push(t);
    Ok(Outcome::new(pass && fast, detail.join("; ")))
}

/// Friedman-1 read through a column permutation: column `c` of the
/// permuted data holds original column `perm[c]`.
struct PermutedFriedman1 {
    inverse: Vec<usize>,
}

impl Response for PermutedFriedman1 {
    fn value(&self, row: &[f64]) -> Result<f64> {
        let orig: Vec<f64> = self.inverse.iter().map(|&c| row[c]).collect();
        AnalyticFunction::friedman1(0.0).evaluate(&orig, 0.0)
    }

    fn arity(&self) -> usize {
        self.inverse.len()
    }
}

/// `x0 + 2 x1 + 4 (x0 - 0.5)(x1 - 0.5)`, ignoring further columns.
struct TwoWay;

impl Response for TwoWay {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(x[0] + 2.0 * x[1] + 4.0 * (x[0] - 0.5) * (x[1] - 0.5))
    }

    fn arity(&self) -> usize {
        2
    }
}

/// Three features with every pairwise and the triple interaction present.
struct ThreeWay;

impl Response for ThreeWay {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let (a, b, c) = (x[0] - 0.5, x[1] - 0.5, x[2] - 0.5);
        Ok(x[0] + x[1] + x[2] + 2.0 * a * b + 3.0 * a * c + b * c + 8.0 * a * b * c)
    }

    fn arity(&self) -> usize {
        3
    }
}

fn properties() -> Result<Outcome> {
    let n = 2 * N_HALF;
    let mut fails = Vec::new();
    let mut notes = Vec::new();

    // additive: no interactions, so first-order and total coincide
    let additive = AnalyticFunction::additive(vec![2.0, 1.0]);
    let r = true_report(&additive, n, 4, FeatureDistribution::Uniform01, SEED)?;
    let worst = r
        .features
        .iter()
        .map(|f| (f.first_raw - f.total_raw).abs())
        .fold(0.0, f64::max);
    notes.push(format!("additive max|S-S_T|={worst:.4}"));
    if worst > TOL {
        fails.push("additive |S_i - S_Ti|".to_string());
    }

    let benches = [
        ("friedman1", AnalyticFunction::friedman1(0.0), 20, FeatureDistribution::Uniform01),
        ("friedman2", AnalyticFunction::friedman2(0.0), 20, FeatureDistribution::PaperRanges),
        ("additive", additive.clone(), 2, FeatureDistribution::Uniform01),
        ("interaction", AnalyticFunction::interaction(), 2, FeatureDistribution::Uniform01),
    ];
    for (name, f, k, dist) in benches {
        let r = true_report(&f, n, k, dist, SEED)?;
        let sum: f64 = r.first_raw().iter().sum();
        let slack = r
            .features
            .iter()
            .map(|f| f.total_raw - f.first_raw)
            .fold(f64::INFINITY, f64::min);
        notes.push(format!("{name} sum S={sum:.4} min(S_T-S)={slack:.4}"));
        if sum > 1.0 + TOL {
            fails.push(format!("{name} sum S_i"));
        }
        if slack < -TOL {
            fails.push(format!("{name} S_Ti >= S_i"));
        }
    }

    // permutation equivariance, bit for bit
    let k = 8;
    let d = generate_dataset(&spec(AnalyticFunction::friedman1(0.0), n, k, FeatureDistribution::Uniform01, SEED))?;
    let perm = [6, 2, 7, 0, 4, 1, 5, 3];
    let mut inverse = vec![0; k];
    for (c, &p) in perm.iter().enumerate() {
        inverse[p] = c;
    }
    let permuted = d.subset_features(&perm)?;
    let base = FittedPredictor::from_response(Arc::new(AnalyticFunction::friedman1(0.0)), k)?;
    let moved = FittedPredictor::from_response(Arc::new(PermutedFriedman1 { inverse }), k)?;
    let echo = estimators::PredictorEcho::TrueFunction(AnalyticFunction::friedman1(0.0));
    let r0 = evaluate_with_predictor(&base, &d, SEED, echo.clone())?;
    let r1 = evaluate_with_predictor(&moved, &permuted, SEED, echo)?;
    let equivariant = perm.iter().enumerate().all(|(c, &p)| {
        r1.features[c].first_raw.to_bits() == r0.features[p].first_raw.to_bits()
            && r1.features[c].total_raw.to_bits() == r0.features[p].total_raw.to_bits()
    });
    if !equivariant {
        fails.push("permutation equivariance".into());
    }

    // a redundant column leaves f(A_B^(i)) = f(A) exactly
    let split = varsel::shuffle_split_halves(&d, SEED)?;
    let f_a = base.predict(&split.a)?;
    let f_abi = base.predict(&build_pick_freeze(&split, 7)?)?;
    let mom = moments(&base.predict(d.features())?)?;
    let expected = 1.0 - (f_a.iter().map(|a| a * a).sum::<f64>() / f_a.len() as f64 - mom.f0 * mom.f0) / mom.variance;
    if f_abi != f_a || r0.features[7].total_raw.to_bits() != expected.to_bits() {
        fails.push("redundant-column identity".into());
    }

    // decomposition completeness for two features
    let budgets = Budgets {
        n_outer: 50_000,
        n_inner: 50,
        n_total: 2_000_000,
    };
    let s3 = spec(AnalyticFunction::constant(0.0), 1000, 3, FeatureDistribution::Uniform01, SEED);
    let parts = [vec![0], vec![1], vec![0, 1]]
        .iter()
        .map(|s| oracle::partial_variance_component_se(&TwoWay, s, &s3, budgets))
        .collect::<Result<Vec<_>>>()?;
    let total = oracle::total_variance_se(&TwoWay, &s3, budgets.n_total)?;
    let lhs: f64 = parts.iter().map(|e| e.value).sum();
    let se = (parts.iter().map(|e| e.se * e.se).sum::<f64>() + total.se * total.se).sqrt();
    notes.push(format!("V'0+V'1+V'01={lhs:.5} V={:.5} 3SE={:.5}", total.value, 3.0 * se));
    if (lhs - total.value).abs() > 3.0 * se {
        fails.push("two-feature completeness".into());
    }

    // complement identity for three features
    let parts = [vec![0], vec![0, 1], vec![0, 2], vec![0, 1, 2]]
        .iter()
        .map(|s| oracle::partial_variance_component_se(&ThreeWay, s, &s3, budgets))
        .collect::<Result<Vec<_>>>()?;
    let total = oracle::total_variance_se(&ThreeWay, &s3, budgets.n_total)?;
    let closed = oracle::double_loop_variance_se(&ThreeWay, &[1, 2], &s3, budgets.n_outer, budgets.n_inner)?;
    let lhs: f64 = parts.iter().map(|e| e.value).sum();
    let rhs = total.value - closed.value;
    let se = (parts.iter().map(|e| e.se * e.se).sum::<f64>() + total.se * total.se + closed.se * closed.se).sqrt();
    notes.push(format!("sum V' containing 0={lhs:.5} V-Var(E[Y|X1,X2])={rhs:.5} 3SE={:.5}", 3.0 * se));
    if (lhs - rhs).abs() > 3.0 * se {
        fails.push("three-feature complement identity".into());
    }

    if !fails.is_empty() {
        notes.insert(0, format!("failed: {}", fails.join(", ")));
    }
    Ok(Outcome::new(fails.is_empty(), notes.join("; ")))
}

fn friedman1_component() -> Result<Outcome> {
    let start = Instant::now();
    let f = AnalyticFunction::friedman1(0.0);
    let s = spec(f.clone(), 1000, 5, FeatureDistribution::Uniform01, SEED);
    let budgets = Budgets {
        n_outer: 50_000,
        n_inner: 1000,
        n_total: 1_000_000,
    };
    let v3 = oracle::partial_variance_component(&f, &[3], &s, budgets)?;
    let bf = oracle::brute_force_indices(
        &f,
        &s,
        Budgets {
            n_outer: 20_000,
            n_inner: 200,
            n_total: 1_000_000,
        },
    )?;
    let (s3, s4) = (bf.indices[3].first, bf.indices[4].first);
    let (fast, t) = within(start.elapsed(), Duration::from_secs(60));
    Ok(Outcome::new(
        (v3 - 100.0 / 12.0).abs() <= 0.1 && s3 > s4 && fast,
        format!("V'3={v3:.4} (target {:.4}); S_3={s3:.4} S_4={s4:.4}; {t}", 100.0 / 12.0),
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_varsel"))
        .args(args)
        .current_dir(dir)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn cli_determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir().map_err(|e| varsel::Error::io("tempdir", e))?;
    let p = dir.path();
    if !run_cli(p, &["generate", "friedman1", "--n", "1000", "--seed", "7", "--out", "data.csv"]) {
        return Ok(Outcome::new(false, "generate failed"));
    }
    let commands: Vec<(&str, Vec<&str>, Vec<&str>)> = vec![
        (
            "generate",
            vec!["generate", "friedman2", "--n", "500", "--seed", "3", "--out", "{}.csv"],
            vec!["{}.csv"],
        ),
        (
            "rank",
            vec!["rank", "--input", "data.csv", "--target", "y", "--model", "rf", "--out", "{}.json"],
            vec!["{}.json"],
        ),
        (
            "benchmark",
            vec!["benchmark", "friedman2", "--n", "1000", "--seed", "5", "--models", "true,rf,knn,linear", "--out", "{}.md"],
            vec!["{}.md", "{}.true.json", "{}.rf.json", "{}.knn.json", "{}.linear.json"],
        ),
        (
            "oracle-check",
            vec!["oracle-check", "interaction", "--n-half", "4096", "--outer", "200", "--inner", "200", "--tolerance", "1", "--out", "{}.json"],
            vec!["{}.json"],
        ),
    ];
    let mut fails = Vec::new();
    for (name, args, outputs) in commands {
        let mut files = Vec::new();
        for run in ["first", "second"] {
            let stem = format!("{name}-{run}");
            let args: Vec<String> = args.iter().map(|a| a.replace("{}", &stem)).collect();
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            if !run_cli(p, &refs) {
                fails.push(format!("{name} exited non-zero"));
            }
            files.push(
                outputs
                    .iter()
                    .map(|o| std::fs::read(p.join(o.replace("{}", &stem))).unwrap_or_default())
                    .collect::<Vec<_>>(),
            );
        }
        if files[0] != files[1] || files[0].iter().any(Vec::is_empty) {
            fails.push(format!("{name} output differs or is missing"));
        }
    }
    let detail = if fails.is_empty() {
        "generate, rank, benchmark and oracle-check outputs byte-identical on rerun".to_string()
    } else {
        fails.join(", ")
    };
    Ok(Outcome::new(fails.is_empty(), detail))
}

fn main() {
    type Criterion = (&'static str, fn() -> Result<Outcome>);
    let criteria: [Criterion; 8] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 friedman1 relevant above redundant", friedman1_noise_levels),
        ("3 friedman2 total-index top four", friedman2_total_ranks),
        ("4 friedman1 random forest top five", friedman1_forest),
        ("5 linear RFE misses friedman2 top four", rfe_linear_contrast),
        ("6 property suite", properties),
        ("7 friedman1 component value", friedman1_component),
        ("8 CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        if !outcome.pass {
            failed += 1;
        }
        println!("{} [{name}] {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
