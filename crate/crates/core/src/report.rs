//! Report serialisation.
//!
//! JSON is the canonical, lossless format (floats are written with shortest
//! round-trip formatting). CSV and Markdown are projections for people and
//! spreadsheets. All files are written to a temporary sibling and renamed on
//! success, so a failed run never leaves a partial file behind.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::SensitivityReport;
use crate::matrix::format_float;
use crate::oracle::BenchmarkSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(Error::Domain(format!("unknown report format {other:?}"))),
        }
    }
}

impl Format {
    /// Guesses the format from a file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            Some("md") => Format::Markdown,
            _ => Format::Json,
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn render_json(r: &SensitivityReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(s: &str) -> Result<SensitivityReport> {
    Ok(serde_json::from_str(s)?)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<SensitivityReport> {
    let path = path.as_ref();
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_json(&s)
}

/// One row per feature in dataset order with the clamped indices.
pub fn render_csv(r: &SensitivityReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "S_i", "S_Ti", "rank_first", "rank_total"])?;
    for f in &r.features {
        w.write_record([
            f.name.clone(),
            format_float(f.first),
            format_float(f.total),
            f.rank_first.to_string(),
            f.rank_total.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
}

/// Table sorted by total-index rank, best first.
pub fn render_markdown(r: &SensitivityReport) -> String {
    let mut rows: Vec<_> = r.features.iter().collect();
    rows.sort_by_key(|f| f.rank_total);
    let mut s = String::new();
    let _ = writeln!(s, "| rank | feature | S_Ti | S_i | S_Ti raw | S_i raw |");
    let _ = writeln!(s, "|---:|---|---:|---:|---:|---:|");
    for f in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {:.4} | {:.4} | {:.6} | {:.6} |",
            f.rank_total, f.name, f.total, f.first, f.total_raw, f.first_raw
        );
    }
    let _ = writeln!(
        s,
        "\nf0 = {}, V = {}, n = {}, n' = {}, holdout MAE = {}, seed = {}",
        r.f0, r.variance, r.n_rows, r.n_half, r.holdout_mae, r.seed
    );
    if let Some(b) = &r.benchmark {
        let _ = writeln!(s, "features: {}", b.distribution);
    }
    s
}

pub fn render(r: &SensitivityReport, format: Format) -> Result<String> {
    match format {
        Format::Json => render_json(r),
        Format::Csv => render_csv(r),
        Format::Markdown => Ok(render_markdown(r)),
    }
}

pub fn write_report(r: &SensitivityReport, format: Format, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, render(r, format)?.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    /// Rank of each relevant feature, in the order of `ComparisonTable::relevant`.
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ComparisonMeta {
    pub benchmark: Option<BenchmarkSpec>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub relevant: Vec<usize>,
    pub k_total: usize,
    pub rows: Vec<ComparisonRow>,
    pub metadata: ComparisonMeta,
}

/// Restricts each method's full ranking to the relevant features.
pub fn build_comparison(results: &[(String, Vec<usize>)], relevant: &[usize], metadata: ComparisonMeta) -> Result<ComparisonTable> {
    if relevant.is_empty() {
        return Err(Error::Domain("no relevant features given".into()));
    }
    let k_total = results
        .first()
        .map(|(_, r)| r.len())
        .ok_or_else(|| Error::Domain("no method results given".into()))?;
    let mut rows = Vec::with_capacity(results.len());
    for (label, ranks) in results {
        if ranks.len() != k_total {
            return Err(Error::Domain(format!(
                "method {label:?} ranks {} features, expected {k_total}",
                ranks.len()
            )));
        }
        if let Some(bad) = ranks.iter().find(|&&r| r == 0 || r > k_total) {
            return Err(Error::Domain(format!("method {label:?} has rank {bad} outside 1..={k_total}")));
        }
        let picked = relevant
            .iter()
            .map(|&i| {
                ranks
                    .get(i)
                    .copied()
                    .ok_or(Error::FeatureOutOfRange { index: i, k: k_total })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(ComparisonRow {
            label: label.clone(),
            ranks: picked,
        });
    }
    Ok(ComparisonTable {
        relevant: relevant.to_vec(),
        k_total,
        rows,
        metadata,
    })
}

/// Row per method, column per relevant feature. Column headers are 1-based
/// feature labels.
pub fn render_comparison_markdown(t: &ComparisonTable) -> String {
    let mut s = String::new();
    if let Some(noise) = t.metadata.noise {
        let _ = writeln!(s, "noise sigma = {noise}, {} features\n", t.k_total);
    }
    let _ = write!(s, "| method |");
    for i in &t.relevant {
        let _ = write!(s, " {} |", i + 1);
    }
    let _ = write!(s, "\n|---|");
    for _ in &t.relevant {
        let _ = write!(s, "---:|");
    }
    s.push('\n');
    for row in &t.rows {
        let _ = write!(s, "| {} |", row.label);
        for r in &row.ranks {
            let _ = write!(s, " {r} |");
        }
        s.push('\n');
    }
    if let Some(b) = &t.metadata.benchmark {
        let _ = writeln!(s, "\nn = {}, features: {}, seed = {}", b.n, b.distribution, b.seed);
    }
    s
}

pub fn render_comparison_json(t: &ComparisonTable) -> Result<String> {
    let mut s = serde_json::to_string_pretty(t)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{FeatureSensitivity, PredictorEcho};
    use crate::models::{ModelKind, PredictorSpec};

    fn report() -> SensitivityReport {
        let feat = |name: &str, raw: f64, rank: usize| FeatureSensitivity {
            name: name.into(),
            first_raw: raw - 0.1,
            total_raw: raw,
            first: (raw - 0.1).clamp(0.0, 1.0),
            total: raw.clamp(0.0, 1.0),
            rank_first: rank,
            rank_total: rank,
            se_first: 0.01,
            se_total: 0.0123456789,
        };
        SensitivityReport {
            features: vec![feat("a", 0.1 + 0.2, 2), feat("b", 1.0 / 3.0, 1)],
            f0: 2.5,
            variance: 1.0 / 7.0,
            n_rows: 10,
            n_half: 5,
            holdout_mae: 0.3,
            seed: 42,
            predictor: PredictorEcho::Fitted(PredictorSpec::new(ModelKind::Linear)),
            benchmark: None,
        }
    }

    #[test]
    fn csv_shape() {
        let s = render_csv(&report()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "name,S_i,S_Ti,rank_first,rank_total");
        assert!(lines[1].starts_with("a,"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = report();
        assert_eq!(parse_json(&render_json(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn markdown_sorted_by_total_rank() {
        let s = render_markdown(&report());
        let rows: Vec<&str> = s.lines().filter(|l| l.starts_with("| ") && !l.starts_with("| rank")).collect();
        assert!(rows[0].starts_with("| 1 | b"));
        assert!(rows[1].starts_with("| 2 | a"));
    }

    #[test]
    fn comparison_identity() {
        let t = build_comparison(&[("m".into(), vec![1, 2, 3])], &[0, 1], ComparisonMeta::default()).unwrap();
        assert_eq!(t.rows, vec![ComparisonRow { label: "m".into(), ranks: vec![1, 2] }]);
    }

    #[test]
    fn comparison_errors() {
        let res = [("m".to_string(), vec![1, 2, 3])];
        assert!(build_comparison(&res, &[], ComparisonMeta::default()).is_err());
        let mixed = [("m".to_string(), vec![1, 2, 3]), ("n".to_string(), vec![1, 2])];
        assert!(build_comparison(&mixed, &[0], ComparisonMeta::default()).is_err());
        let bad = [("m".to_string(), vec![1, 4, 3])];
        assert!(build_comparison(&bad, &[0], ComparisonMeta::default()).is_err());
        assert!(build_comparison(&res, &[3], ComparisonMeta::default()).is_err());
    }

    #[test]
    fn comparison_markdown_layout() {
        let t = build_comparison(
            &[("S_Ti true".into(), vec![3, 2, 1, 4, 5]), ("RFE LR".into(), vec![5, 4, 1, 2, 3])],
            &[0, 1, 2, 3],
            ComparisonMeta {
                noise: Some(0.0),
                ..Default::default()
            },
        )
        .unwrap();
        let md = render_comparison_markdown(&t);
        assert!(md.contains("| method | 1 | 2 | 3 | 4 |"));
        assert!(md.contains("| S_Ti true | 3 | 2 | 1 | 4 |"));
        assert!(md.contains("| RFE LR | 5 | 4 | 1 | 2 |"));
    }

    #[test]
    fn atomic_write_and_format_guess() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_report(&report(), Format::from_path(&p), &p).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("name,"));
        assert!(write_atomic(dir.path().join("missing/r.json"), b"x").is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
