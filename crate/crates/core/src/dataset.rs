//! Tabular regression data: CSV ingestion, min-max scaling and the seeded
//! half split that produces the two sampling matrices.
//!
//! CSV dialect: UTF-8, comma separator, mandatory header row, `.` decimal
//! point. Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every value bit for bit.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{format_float, Matrix};
use crate::rng;

pub const DEFAULT_TARGET_NAME: &str = "y";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    feature_names: Vec<String>,
    target: Option<Target>,
}

/// Column used as regression target when loading a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
}

impl TargetColumn {
    /// Interprets a command-line value. A header name wins over a numeric
    /// index when both could apply; that is resolved at load time.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(s.to_string()),
        }
    }
}

impl Dataset {
    pub fn new(features: Matrix, feature_names: Vec<String>, target: Option<Target>) -> Result<Self> {
        let (n, k) = (features.rows(), features.cols());
        if n < 2 {
            return Err(Error::TooFewRows { needed: 2, got: n });
        }
        if k == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if feature_names.len() != k {
            return Err(Error::InvalidDataset(format!(
                "{} names for {k} feature columns",
                feature_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if name.is_empty() {
                return Err(Error::InvalidDataset("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        for (r, row) in features.iter_rows().enumerate() {
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: r + 1, column: c + 1 });
            }
        }
        if let Some(t) = &target {
            if t.values.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "target has {} values for {n} rows",
                    t.values.len()
                )));
            }
            if let Some(r) = t.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: r + 1, column: k + 1 });
            }
            if seen.contains(t.name.as_str()) {
                return Err(Error::DuplicateName(t.name.clone()));
            }
        }
        Ok(Dataset {
            features,
            feature_names,
            target,
        })
    }

    /// Dataset with generated names `x0`..`x{k-1}` and target `y`.
    pub fn with_default_names(features: Matrix, target: Option<Vec<f64>>) -> Result<Self> {
        let names = (0..features.cols()).map(|i| format!("x{i}")).collect();
        let target = target.map(|values| Target {
            name: DEFAULT_TARGET_NAME.to_string(),
            values,
        });
        Dataset::new(features, names, target)
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn k(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target(&self) -> Option<&Target> {
        self.target.as_ref()
    }

    pub fn target_values(&self) -> Result<&[f64]> {
        self.target
            .as_ref()
            .map(|t| t.values.as_slice())
            .ok_or(Error::MissingTarget)
    }

    /// Copy of the dataset restricted to `rows`, in the given order.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let target = self.target.as_ref().map(|t| Target {
            name: t.name.clone(),
            values: rows.iter().map(|&r| t.values[r]).collect(),
        });
        Dataset::new(
            self.features.select_rows(rows),
            self.feature_names.clone(),
            target,
        )
    }

    /// Copy of the dataset keeping only the listed feature columns.
    pub fn subset_features(&self, cols: &[usize]) -> Result<Dataset> {
        for &c in cols {
            if c >= self.k() {
                return Err(Error::FeatureOutOfRange { index: c, k: self.k() });
            }
        }
        Dataset::new(
            self.features.select_columns(cols),
            cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            self.target.clone(),
        )
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file)
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        if let Some(t) = &self.target {
            header.push(&t.name);
        }
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for (r, row) in self.features.iter_rows().enumerate() {
            record.clear();
            record.extend(row.iter().map(|&v| format_float(v)));
            if let Some(t) = &self.target {
                record.push(format_float(t.values[r]));
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// Reads a headed, comma-separated numeric file.
///
/// Error positions are 1-based: row 1 is the first data row after the
/// header, column 1 the leftmost column.
pub fn load_csv(path: impl AsRef<Path>, target: Option<&TargetColumn>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, target)
}

pub fn read_csv<R: std::io::Read>(input: R, target: Option<&TargetColumn>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }

    let target_idx = match target {
        None => None,
        Some(TargetColumn::Name(name)) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::TargetNotFound(name.clone()))?,
        ),
        Some(TargetColumn::Index(i)) => {
            // a header literally named "3" takes precedence over index 3
            let by_name = header.iter().position(|h| *h == i.to_string());
            match by_name {
                Some(p) => Some(p),
                None if *i < header.len() => Some(*i),
                None => return Err(Error::TargetNotFound(i.to_string())),
            }
        }
    };

    let width = header.len();
    let k = width - usize::from(target_idx.is_some());
    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut n = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: r + 1,
                column: c + 1,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: r + 1, column: c + 1 });
            }
            if Some(c) == target_idx {
                y.push(v);
            } else {
                data.push(v);
            }
        }
        n += 1;
    }

    let features = Matrix::from_vec(n, k, data)?;
    let names = header
        .iter()
        .enumerate()
        .filter(|(c, _)| Some(*c) != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let target = target_idx.map(|t| Target {
        name: header[t].clone(),
        values: y,
    });
    Dataset::new(features, names, target)
}

/// Per-column `(min, max)` pairs of a min-max scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub ranges: Vec<(f64, f64)>,
}

impl ScalingSpec {
    pub fn fit(m: &Matrix) -> Self {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); m.cols()];
        for row in m.iter_rows() {
            for (range, &v) in ranges.iter_mut().zip(row) {
                range.0 = range.0.min(v);
                range.1 = range.1.max(v);
            }
        }
        ScalingSpec { ranges }
    }

    /// Maps each column onto [0, 1]; constant columns map to 0. Values
    /// outside the fitted range (unseen data) fall outside [0, 1].
    pub fn apply(&self, m: &Matrix) -> Result<Matrix> {
        self.check(m)?;
        let mut out = m.clone();
        for r in 0..out.rows() {
            for (v, &(lo, hi)) in out.row_mut(r).iter_mut().zip(&self.ranges) {
                *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.0 };
            }
        }
        Ok(out)
    }

    pub fn invert(&self, m: &Matrix) -> Result<Matrix> {
        self.check(m)?;
        let mut out = m.clone();
        for r in 0..out.rows() {
            for (v, &(lo, hi)) in out.row_mut(r).iter_mut().zip(&self.ranges) {
                *v = lo + *v * (hi - lo);
            }
        }
        Ok(out)
    }

    fn check(&self, m: &Matrix) -> Result<()> {
        if m.cols() != self.ranges.len() {
            return Err(Error::ColumnMismatch {
                expected: self.ranges.len(),
                got: m.cols(),
            });
        }
        Ok(())
    }
}

/// Scales every feature column onto [0, 1]. The target is left untouched.
pub fn min_max_scale(d: &Dataset) -> (Dataset, ScalingSpec) {
    let spec = ScalingSpec::fit(d.features());
    let scaled = spec
        .apply(d.features())
        .expect("spec fitted on the same matrix");
    let out = Dataset {
        features: scaled,
        feature_names: d.feature_names.clone(),
        target: d.target.clone(),
    };
    (out, spec)
}

/// The two disjoint sampling matrices drawn from the shuffled rows.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSplit {
    pub a: Matrix,
    pub b: Matrix,
    /// Shuffled source row indices; `a` holds rows `permutation[..half]`,
    /// `b` rows `permutation[half..2 * half]`.
    pub permutation: Vec<usize>,
}

impl HalfSplit {
    pub fn half(&self) -> usize {
        self.a.rows()
    }

    pub fn k(&self) -> usize {
        self.a.cols()
    }

    /// Split from explicit halves, bypassing the shuffle.
    pub fn from_matrices(a: Matrix, b: Matrix) -> Result<Self> {
        if a.rows() != b.rows() || a.cols() != b.cols() {
            return Err(Error::InvalidDataset(format!(
                "halves differ in shape: {}x{} vs {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        let permutation = (0..2 * a.rows()).collect();
        Ok(HalfSplit { a, b, permutation })
    }
}

/// Shuffles the feature rows with the seeded generator and cuts them into
/// two halves of `n / 2` rows. With odd `n` the last shuffled row is unused.
/// The target never enters the split.
pub fn shuffle_split_halves(d: &Dataset, seed: u64) -> Result<HalfSplit> {
    split_matrix(d.features(), seed)
}

pub(crate) fn split_matrix(m: &Matrix, seed: u64) -> Result<HalfSplit> {
    let n = m.rows();
    if n < 4 {
        return Err(Error::TooFewRows { needed: 4, got: n });
    }
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.shuffle(&mut rng::seeded(seed));
    let half = n / 2;
    Ok(HalfSplit {
        a: m.select_rows(&permutation[..half]),
        b: m.select_rows(&permutation[half..2 * half]),
        permutation,
    })
}
