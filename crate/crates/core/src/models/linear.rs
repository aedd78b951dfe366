//! Ordinary least squares via the normal equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Relative pivot size below which the Gram matrix is treated as singular.
const PIVOT_TOL: f64 = 1e-12;
const RIDGE_SCALE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Ridge term that was added to the diagonal, 0 when none was needed.
    pub ridge: f64,
}

impl LinearModel {
    /// Fits slopes on centred data, then recovers the intercept. When the
    /// centred Gram matrix is singular, a ridge of `1e-8 * trace / p` is added
    /// to its diagonal and the solve is retried once.
    pub fn fit(x: &Matrix, y: &[f64]) -> Result<Self> {
        let (n, p) = (x.rows(), x.cols());
        if n == 0 || y.len() != n {
            return Err(Error::SingularDesign(format!("{n} rows for {} targets", y.len())));
        }
        let x_mean: Vec<f64> = (0..p)
            .map(|c| x.iter_rows().map(|r| r[c]).sum::<f64>() / n as f64)
            .collect();
        let y_mean = y.iter().sum::<f64>() / n as f64;

        let mut gram = vec![0.0; p * p];
        let mut rhs = vec![0.0; p];
        let mut centred = vec![0.0; p];
        for (row, &t) in x.iter_rows().zip(y) {
            for ((c, &v), &m) in centred.iter_mut().zip(row).zip(&x_mean) {
                *c = v - m;
            }
            let ty = t - y_mean;
            for a in 0..p {
                rhs[a] += centred[a] * ty;
                for b in a..p {
                    gram[a * p + b] += centred[a] * centred[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram[a * p + b] = gram[b * p + a];
            }
        }

        let (weights, ridge) = match cholesky_solve(&gram, &rhs, p) {
            Some(w) => (w, 0.0),
            None => {
                let trace: f64 = (0..p).map(|a| gram[a * p + a]).sum();
                let ridge = if trace > 0.0 {
                    RIDGE_SCALE * trace / p as f64
                } else {
                    RIDGE_SCALE
                };
                let mut damped = gram.clone();
                for a in 0..p {
                    damped[a * p + a] += ridge;
                }
                let w = cholesky_solve(&damped, &rhs, p).ok_or_else(|| {
                    Error::SingularDesign(format!("gram matrix singular even with ridge {ridge:e}"))
                })?;
                (w, ridge)
            }
        };
        let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
        if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::SingularDesign("non-finite coefficients".into()));
        }
        Ok(LinearModel {
            weights,
            intercept,
            ridge,
        })
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }
}

/// Solves `g w = rhs` for symmetric `g`; `None` when a pivot is not
/// sufficiently positive.
fn cholesky_solve(g: &[f64], rhs: &[f64], p: usize) -> Option<Vec<f64>> {
    let scale = (0..p).map(|a| g[a * p + a]).fold(0.0, f64::max);
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = g[i * p + j];
            for m in 0..j {
                s -= l[i * p + m] * l[j * p + m];
            }
            if i == j {
                if s <= PIVOT_TOL * scale || s <= 0.0 {
                    return None;
                }
                l[i * p + i] = s.sqrt();
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }
    let mut z = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|m| l[i * p + m] * z[m]).sum();
        z[i] = (rhs[i] - s) / l[i * p + i];
    }
    let mut w = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|m| l[m * p + i] * w[m]).sum();
        w[i] = (z[i] - s) / l[i * p + i];
    }
    Some(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_plane() {
        let rows: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] - 2.0 * r[1] + 0.5).collect();
        let m = LinearModel::fit(&Matrix::from_rows(&rows).unwrap(), &y).unwrap();
        assert!((m.weights[0] - 3.0).abs() < 1e-10);
        assert!((m.weights[1] + 2.0).abs() < 1e-10);
        assert!((m.intercept - 0.5).abs() < 1e-10);
        assert_eq!(m.ridge, 0.0);
    }

    #[test]
    fn collinear_columns_use_ridge() {
        let rows: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let m = LinearModel::fit(&Matrix::from_rows(&rows).unwrap(), &y).unwrap();
        assert!(m.ridge > 0.0);
        for (r, t) in rows.iter().zip(&y) {
            assert!((m.predict_row(r) - t).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_column_gets_zero_weight() {
        let rows: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 4.0]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64).collect();
        let m = LinearModel::fit(&Matrix::from_rows(&rows).unwrap(), &y).unwrap();
        assert!(m.weights[1].abs() < 1e-9);
        assert!((m.weights[0] - 2.0).abs() < 1e-6);
    }
}
