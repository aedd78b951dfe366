//! Command-line front end.
//!
//! ```text
//! varsel rank         --input d.csv --target y [--model rf] [--out r.json]
//! varsel benchmark    friedman2 --noise 0 --models true,rf --rfe linear,rf --out t.md
//! varsel oracle-check additive --n-half 65536 --tolerance 0.02 --out check.json
//! varsel generate     friedman1 --n 500 --noise 1 --out f.csv
//! ```
//!
//! Option values resolve as command-line flag, then `--config` file entry
//! (flat `key = value` lines, keys are the long flag names), then built-in
//! default. Every command is deterministic for a fixed flag set.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::{self, RfeEstimator};
use crate::dataset::{self, TargetColumn};
use crate::error::Error;
use crate::estimators::{self, PredictorEcho, SensitivityReport};
use crate::models::{self, ModelKind, PredictorSpec};
use crate::oracle::{self, BenchmarkName, BenchmarkSpec, Budgets, FeatureDistribution};
use crate::report::{self, ComparisonMeta, Format};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BENCHMARK_N: usize = 10_000;
pub const DEFAULT_K_TOTAL: usize = 20;
pub const DEFAULT_N_HALF: usize = 65_536;
pub const DEFAULT_OUTER: usize = 2000;
pub const DEFAULT_INNER: usize = 2000;
pub const DEFAULT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(name = "varsel", version, about = "Rank features by variance-based sensitivity indices")]
pub struct Cli {
    /// Flat key=value file supplying defaults for any long option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on a CSV dataset and rank its features.
    Rank(RankArgs),
    /// Run a synthetic benchmark and compare ranking methods.
    Benchmark(BenchmarkArgs),
    /// Compare pick-freeze indices of an analytic function with the brute-force oracle.
    OracleCheck(OracleArgs),
    /// Write a synthetic benchmark dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// linear, knn, rf or external.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long = "extern-cmd")]
    pub extern_cmd: Option<String>,
    #[arg(long = "knn-k")]
    pub knn_k: Option<usize>,
    #[arg(long = "rf-trees")]
    pub rf_trees: Option<usize>,
    #[arg(long = "rf-min-leaf")]
    pub rf_min_leaf: Option<usize>,
    #[arg(long = "rf-mtry")]
    pub rf_mtry: Option<usize>,
    /// Fraction of rows held out to measure the MAE.
    #[arg(long)]
    pub holdout: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Target column, by header name or 0-based index.
    #[arg(long)]
    pub target: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Min-max scale features before fitting.
    #[arg(long)]
    pub scale: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// json, csv or markdown; guessed from the output extension otherwise.
    #[arg(long)]
    pub format: Option<String>,
    /// first, total or both (summary printed to stdout).
    #[arg(long)]
    pub indices: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    pub name: String,
    #[arg(long)]
    pub noise: Option<f64>,
    /// uniform, normal or paper_ranges.
    #[arg(long)]
    pub dist: Option<String>,
    /// Comma-separated: true, linear, knn, rf, external.
    #[arg(long)]
    pub models: Option<String>,
    /// Comma-separated RFE estimators: linear, rf. Empty for none.
    #[arg(long)]
    pub rfe: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "extern-cmd")]
    pub extern_cmd: Option<String>,
    /// Comparison table path (.md for Markdown, JSON otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub indices: Option<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub name: String,
    #[arg(long = "n-half")]
    pub n_half: Option<usize>,
    #[arg(long)]
    pub outer: Option<usize>,
    #[arg(long)]
    pub inner: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub indices: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub name: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Pipeline stage named in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Usage,
    Parse,
    Fit,
    Estimate,
    Serialize,
    Check,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Usage => "usage",
            Stage::Parse => "parse",
            Stage::Fit => "fit",
            Stage::Estimate => "estimate",
            Stage::Serialize => "serialize",
            Stage::Check => "check",
        })
    }
}

#[derive(Debug)]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self.stage {
            Stage::Usage => 2,
            _ => 1,
        }
    }
}

fn at(stage: Stage) -> impl Fn(Error) -> CliError {
    move |e| CliError {
        stage,
        message: e.to_string(),
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        stage: Stage::Usage,
        message: message.into(),
    }
}

/// Flat `key = value` configuration. `#` starts a comment line.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key=value", no + 1)))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        ConfigFile::parse(&text)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value, else config entry, else `None`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config key {key}: cannot parse {v:?}"))),
        }
    }

    pub fn resolve_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.resolve(flag, key)?.unwrap_or(default))
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        self.resolve_or(None, key, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSelection {
    First,
    Total,
    Both,
}

impl FromStr for IndexSelection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "first" => Ok(IndexSelection::First),
            "total" => Ok(IndexSelection::Total),
            "both" => Ok(IndexSelection::Both),
            other => Err(usage(format!("--indices must be first, total or both, got {other:?}"))),
        }
    }
}

impl IndexSelection {
    fn first(self) -> bool {
        self != IndexSelection::Total
    }

    fn total(self) -> bool {
        self != IndexSelection::First
    }
}

fn parse_with<T: FromStr<Err = Error>>(s: &str) -> Result<T, CliError> {
    s.parse().map_err(|e: Error| usage(e.to_string()))
}

fn selection(cfg: &ConfigFile, flag: Option<String>) -> Result<IndexSelection, CliError> {
    cfg.resolve_or(flag, "indices", "both".to_string())?.parse()
}

fn predictor_spec(cfg: &ConfigFile, m: ModelArgs, seed: u64) -> Result<PredictorSpec, CliError> {
    let kind: ModelKind = parse_with(&cfg.resolve_or(m.model, "model", "rf".to_string())?)?;
    let mut spec = PredictorSpec::new(kind).with_seed(seed);
    spec.knn_k = cfg.resolve_or(m.knn_k, "knn-k", spec.knn_k)?;
    spec.rf_trees = cfg.resolve_or(m.rf_trees, "rf-trees", spec.rf_trees)?;
    spec.rf_min_leaf = cfg.resolve_or(m.rf_min_leaf, "rf-min-leaf", spec.rf_min_leaf)?;
    spec.rf_mtry = cfg.resolve(m.rf_mtry, "rf-mtry")?;
    spec.holdout_fraction = cfg.resolve_or(m.holdout, "holdout", spec.holdout_fraction)?;
    spec.external_command = cfg.resolve(m.extern_cmd, "extern-cmd")?;
    spec.validate().map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

fn print_summary(r: &SensitivityReport, sel: IndexSelection) {
    let mut order: Vec<usize> = (0..r.k()).collect();
    if sel.total() {
        order.sort_by_key(|&i| r.features[i].rank_total);
    } else {
        order.sort_by_key(|&i| r.features[i].rank_first);
    }
    for i in order {
        let f = &r.features[i];
        let mut line = format!("{:>4}  {:<16}", if sel.total() { f.rank_total } else { f.rank_first }, f.name);
        if sel.total() {
            line.push_str(&format!("  S_Ti={:>9.5}", f.total_raw));
        }
        if sel.first() {
            line.push_str(&format!("  S_i={:>9.5}", f.first_raw));
        }
        println!("{line}");
    }
}

pub fn run_rank(cfg: &ConfigFile, args: RankArgs) -> Result<SensitivityReport, CliError> {
    let input: PathBuf = cfg
        .resolve(args.input, "input")?
        .ok_or_else(|| usage("rank requires --input"))?;
    let target: String = cfg
        .resolve(args.target, "target")?
        .ok_or_else(|| usage("rank requires --target"))?;
    let seed = cfg.resolve_or(args.seed, "seed", DEFAULT_SEED)?;
    let scale = cfg.flag(args.scale, "scale")?;
    let sel = selection(cfg, args.indices)?;
    let spec = predictor_spec(cfg, args.model, seed)?;
    let out: Option<PathBuf> = cfg.resolve(args.out, "out")?;
    let format = match cfg.resolve::<String>(args.format, "format")? {
        Some(f) => parse_with::<Format>(&f)?,
        None => out.as_deref().map_or(Format::Json, Format::from_path),
    };

    let mut d = dataset::load_csv(&input, Some(&TargetColumn::parse(&target))).map_err(at(Stage::Parse))?;
    if scale {
        d = dataset::min_max_scale(&d).0;
    }
    let predictor = models::fit(&spec, &d).map_err(at(Stage::Fit))?;
    let r = estimators::evaluate_with_predictor(&predictor, &d, seed, PredictorEcho::Fitted(spec))
        .map_err(at(Stage::Estimate))?;
    match out {
        Some(path) => report::write_report(&r, format, &path).map_err(at(Stage::Serialize))?,
        None => print!("{}", report::render(&r, format).map_err(at(Stage::Serialize))?),
    }
    print_summary(&r, sel);
    Ok(r)
}

fn default_distribution(name: BenchmarkName) -> FeatureDistribution {
    match name {
        BenchmarkName::Friedman2 => FeatureDistribution::PaperRanges,
        _ => FeatureDistribution::Uniform01,
    }
}

#[allow(clippy::too_many_arguments)]
fn benchmark_spec(
    cfg: &ConfigFile,
    name: &str,
    noise: Option<f64>,
    dist: Option<String>,
    n: Option<usize>,
    k: Option<usize>,
    seed: Option<u64>,
    default_n: usize,
) -> Result<(BenchmarkName, BenchmarkSpec), CliError> {
    let name: BenchmarkName = parse_with(name)?;
    let sigma = cfg.resolve_or(noise, "noise", 0.0)?;
    let distribution = match cfg.resolve::<String>(dist, "dist")? {
        Some(d) => parse_with(&d)?,
        None => default_distribution(name),
    };
    let function = name.function(sigma).map_err(|e| usage(e.to_string()))?;
    let default_k = match name {
        BenchmarkName::Friedman1 | BenchmarkName::Friedman2 => DEFAULT_K_TOTAL,
        _ => function.relevant_count(),
    };
    let spec = BenchmarkSpec::new(
        function,
        cfg.resolve_or(n, "n", default_n)?,
        cfg.resolve_or(k, "k", default_k)?,
        distribution,
        cfg.resolve_or(seed, "seed", DEFAULT_SEED)?,
    )
    .map_err(|e| usage(e.to_string()))?;
    Ok((name, spec))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("benchmark");
    path.with_file_name(format!("{stem}.{suffix}.json"))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::to_string).collect()
}

/// Result of a benchmark run: the table plus one report per model.
#[derive(Debug, Clone)]
pub struct BenchmarkOutcome {
    pub table: report::ComparisonTable,
    pub reports: Vec<(String, SensitivityReport)>,
}

pub fn run_benchmark(cfg: &ConfigFile, args: BenchmarkArgs) -> Result<BenchmarkOutcome, CliError> {
    let (_, spec) = benchmark_spec(cfg, &args.name, args.noise, args.dist, args.n, args.k, args.seed, DEFAULT_BENCHMARK_N)?;
    let seed = spec.seed;
    let sel = selection(cfg, args.indices)?;
    let model_names = split_list(&cfg.resolve_or(args.models, "models", "true,rf".to_string())?);
    let rfe_names = split_list(&cfg.resolve_or(args.rfe, "rfe", "linear,rf".to_string())?);
    let extern_cmd: Option<String> = cfg.resolve(args.extern_cmd, "extern-cmd")?;
    let out: Option<PathBuf> = cfg.resolve(args.out, "out")?;
    let rfe_estimators = rfe_names
        .iter()
        .map(|s| parse_with::<RfeEstimator>(s))
        .collect::<Result<Vec<_>, _>>()?;

    let d = oracle::generate_dataset(&spec).map_err(at(Stage::Parse))?;

    let mut rows: Vec<(String, Vec<usize>)> = Vec::new();
    let mut reports = Vec::new();
    for label in &model_names {
        let mut r = if label == "true" {
            estimators::evaluate_true_function(&spec.function, &d, seed).map_err(at(Stage::Estimate))?
        } else {
            let kind: ModelKind = parse_with(label)?;
            let mut ps = PredictorSpec::new(kind).with_seed(seed);
            ps.external_command = extern_cmd.clone();
            ps.validate().map_err(|e| usage(e.to_string()))?;
            let predictor = models::fit(&ps, &d).map_err(at(Stage::Fit))?;
            estimators::evaluate_with_predictor(&predictor, &d, seed, PredictorEcho::Fitted(ps))
                .map_err(at(Stage::Estimate))?
        };
        r.benchmark = Some(spec.clone());
        if sel.first() {
            rows.push((format!("S_i-{label}"), r.rank_first()));
        }
        if sel.total() {
            rows.push((format!("S_Ti-{label}"), r.rank_total()));
        }
        reports.push((label.clone(), r));
    }
    for est in rfe_estimators {
        let res = baselines::rfe(&d, est, seed).map_err(at(Stage::Fit))?;
        rows.push((format!("RFE-{est}"), res.ranks));
    }

    let relevant: Vec<usize> = (0..spec.function.relevant_count()).collect();
    let meta = ComparisonMeta {
        benchmark: Some(spec.clone()),
        noise: Some(spec.function.sigma),
        seed: Some(seed),
    };
    let table = report::build_comparison(&rows, &relevant, meta).map_err(at(Stage::Estimate))?;
    let markdown = report::render_comparison_markdown(&table);

    if let Some(path) = &out {
        let body = match Format::from_path(path) {
            Format::Markdown => markdown.clone(),
            _ => report::render_comparison_json(&table).map_err(at(Stage::Serialize))?,
        };
        for (label, r) in &reports {
            report::write_report(r, Format::Json, sibling(path, label)).map_err(at(Stage::Serialize))?;
        }
        report::write_atomic(path, body.as_bytes()).map_err(at(Stage::Serialize))?;
    }
    print!("{markdown}");
    Ok(BenchmarkOutcome { table, reports })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDeviation {
    pub feature: usize,
    pub first_estimate: f64,
    pub first_oracle: f64,
    pub total_estimate: f64,
    pub total_oracle: f64,
    pub first_deviation: f64,
    pub total_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub function: String,
    pub n_half: usize,
    pub budgets: Budgets,
    pub tolerance: f64,
    pub checked: String,
    pub features: Vec<FeatureDeviation>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Pick-freeze indices of the true function against the nested-loop oracle.
pub fn oracle_check(
    spec: &BenchmarkSpec,
    n_half: usize,
    budgets: Budgets,
    tolerance: f64,
    sel: IndexSelection,
    name: &str,
) -> Result<OracleCheck, CliError> {
    let mut data_spec = spec.clone();
    data_spec.n = 2 * n_half;
    let d = oracle::generate_dataset(&data_spec).map_err(at(Stage::Parse))?;
    let est = estimators::evaluate_true_function(&spec.function, &d, spec.seed).map_err(at(Stage::Estimate))?;
    let bf = oracle::brute_force_indices(&spec.function, spec, budgets).map_err(at(Stage::Estimate))?;
    let features: Vec<FeatureDeviation> = est
        .features
        .iter()
        .zip(&bf.indices)
        .enumerate()
        .map(|(i, (e, o))| FeatureDeviation {
            feature: i,
            first_estimate: e.first_raw,
            first_oracle: o.first,
            total_estimate: e.total_raw,
            total_oracle: o.total,
            first_deviation: (e.first_raw - o.first).abs(),
            total_deviation: (e.total_raw - o.total).abs(),
        })
        .collect();
    let max_deviation = features
        .iter()
        .flat_map(|f| {
            let a = if sel.first() { f.first_deviation } else { 0.0 };
            let b = if sel.total() { f.total_deviation } else { 0.0 };
            [a, b]
        })
        .fold(0.0, f64::max);
    let checked = match sel {
        IndexSelection::First => "first",
        IndexSelection::Total => "total",
        IndexSelection::Both => "both",
    };
    Ok(OracleCheck {
        function: name.to_string(),
        n_half,
        budgets,
        tolerance,
        checked: checked.to_string(),
        features,
        max_deviation,
        pass: max_deviation <= tolerance,
    })
}

pub fn run_oracle_check(cfg: &ConfigFile, args: OracleArgs) -> Result<OracleCheck, CliError> {
    let n_half = cfg.resolve_or(args.n_half, "n-half", DEFAULT_N_HALF)?;
    let (_, spec) = benchmark_spec(cfg, &args.name, args.noise, args.dist, Some(2 * n_half), args.k, args.seed, 2 * n_half)?;
    let budgets = Budgets::new(
        cfg.resolve_or(args.outer, "outer", DEFAULT_OUTER)?,
        cfg.resolve_or(args.inner, "inner", DEFAULT_INNER)?,
    );
    let tolerance = cfg.resolve_or(args.tolerance, "tolerance", DEFAULT_TOLERANCE)?;
    let sel = selection(cfg, args.indices)?;
    let out: Option<PathBuf> = cfg.resolve(args.out, "out")?;

    let check = oracle_check(&spec, n_half, budgets, tolerance, sel, &args.name)?;
    if let Some(path) = out {
        let mut s = serde_json::to_string_pretty(&check).map_err(|e| at(Stage::Serialize)(e.into()))?;
        s.push('\n');
        report::write_atomic(&path, s.as_bytes()).map_err(at(Stage::Serialize))?;
    }
    for f in &check.features {
        println!(
            "x{:<3} S_i {:>9.5} vs {:>9.5} (|d|={:.5})   S_Ti {:>9.5} vs {:>9.5} (|d|={:.5})",
            f.feature, f.first_estimate, f.first_oracle, f.first_deviation, f.total_estimate, f.total_oracle, f.total_deviation
        );
    }
    println!(
        "{}: max deviation {:.5}, tolerance {}",
        if check.pass { "PASS" } else { "FAIL" },
        check.max_deviation,
        check.tolerance
    );
    if !check.pass {
        return Err(CliError {
            stage: Stage::Check,
            message: format!("max deviation {} exceeds tolerance {}", check.max_deviation, check.tolerance),
        });
    }
    Ok(check)
}

pub fn run_generate(cfg: &ConfigFile, args: GenerateArgs) -> Result<dataset::Dataset, CliError> {
    let (_, spec) = benchmark_spec(cfg, &args.name, args.noise, args.dist, args.n, args.k, args.seed, DEFAULT_BENCHMARK_N)?;
    let out: PathBuf = cfg.resolve(args.out, "out")?.ok_or_else(|| usage("generate requires --out"))?;
    let d = oracle::generate_dataset(&spec).map_err(at(Stage::Parse))?;
    let mut buf = Vec::new();
    d.write_csv_to(&mut buf).map_err(at(Stage::Serialize))?;
    report::write_atomic(&out, &buf).map_err(at(Stage::Serialize))?;
    Ok(d)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Rank(a) => run_rank(&cfg, a).map(|_| ()),
        Command::Benchmark(a) => run_benchmark(&cfg, a).map(|_| ()),
        Command::OracleCheck(a) => run_oracle_check(&cfg, a).map(|_| ()),
        Command::Generate(a) => run_generate(&cfg, a).map(|_| ()),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("varsel: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_precedence() {
        let cfg = ConfigFile::parse("# comment\nseed = 7\nmodel=linear\n").unwrap();
        assert_eq!(cfg.resolve_or(Some(3u64), "seed", 1).unwrap(), 3);
        assert_eq!(cfg.resolve_or(None::<u64>, "seed", 1).unwrap(), 7);
        assert_eq!(cfg.resolve_or(None::<u64>, "n", 1).unwrap(), 1);
        assert!(cfg.resolve_or(None::<u64>, "model", 1).is_err());
        assert!(ConfigFile::parse("novalue\n").is_err());
    }

    #[test]
    fn index_selection_parse() {
        assert_eq!("first".parse::<IndexSelection>().unwrap(), IndexSelection::First);
        assert!("all".parse::<IndexSelection>().is_err());
    }

    #[test]
    fn unknown_benchmark_is_usage_error() {
        let cfg = ConfigFile::default();
        let err = benchmark_spec(&cfg, "nosuch", None, None, None, None, None, 100).unwrap_err();
        assert_eq!(err.stage, Stage::Usage);
    }

    #[test]
    fn missing_target_is_usage_error() {
        let code = main_with_args(["varsel", "rank", "--input", "whatever.csv"]);
        assert_eq!(code, 2);
    }
}
