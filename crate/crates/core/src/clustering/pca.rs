use serde::Serialize;

use crate::error::{Error, Result};

const JACOBI_TOLERANCE: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues and eigenvectors (as columns of `vectors`) of a symmetric
/// matrix by cyclic Jacobi rotations. Unsorted.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("eigensolver needs a square matrix".into()));
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let norm = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let off = |a: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += 2.0 * a[p][q] * a[p][q];
            }
        }
        s.sqrt()
    };

    let mut converged = norm == 0.0 || off(&a) <= JACOBI_TOLERANCE * norm;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
        converged = off(&a) <= JACOBI_TOLERANCE * norm;
    }
    Ok(((0..n).map(|i| a[i][i]).collect(), v))
}

/// Fitted principal axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel {
    pub means: Vec<f64>,
    /// Column standard deviations used for z-scoring; `None` when the data
    /// was only centered. Constant columns get scale 1.
    pub scales: Option<Vec<f64>>,
    /// Unit-length axes, by decreasing eigenvalue.
    pub axes: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Fraction of total variance per retained axis.
    pub explained: Vec<f64>,
}

impl PcaModel {
    /// Fits every axis (as many as there are columns).
    pub fn fit(matrix: &[Vec<f64>], standardize: bool) -> Result<Self> {
        let rows = matrix.len();
        if rows < 2 {
            return Err(Error::Shape(format!(
                "PCA needs at least 2 rows, got {rows}"
            )));
        }
        let cols = matrix[0].len();
        if cols == 0 || matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape(
                "PCA needs a non-empty rectangular matrix".into(),
            ));
        }
        let n = rows as f64;
        let means: Vec<f64> = (0..cols)
            .map(|j| matrix.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let scales = standardize.then(|| {
            (0..cols)
                .map(|j| {
                    let var = matrix
                        .iter()
                        .map(|r| (r[j] - means[j]).powi(2))
                        .sum::<f64>()
                        / (n - 1.0);
                    let sd = var.sqrt();
                    if sd > 0.0 {
                        sd
                    } else {
                        1.0
                    }
                })
                .collect::<Vec<_>>()
        });
        let mut model = PcaModel {
            means,
            scales,
            axes: Vec::new(),
            eigenvalues: Vec::new(),
            explained: Vec::new(),
        };
        let z: Vec<Vec<f64>> = matrix.iter().map(|r| model.normalize(r)).collect();

        let mut cov = vec![vec![0.0; cols]; cols];
        for row in &z {
            for i in 0..cols {
                for j in i..cols {
                    cov[i][j] += row[i] * row[j];
                }
            }
        }
        for i in 0..cols {
            for j in i..cols {
                cov[i][j] /= n - 1.0;
                cov[j][i] = cov[i][j];
            }
        }

        let (values, vectors) = symmetric_eigen(&cov)?;
        let mut order: Vec<usize> = (0..cols).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
        for &i in &order {
            let mut axis: Vec<f64> = (0..cols).map(|k| vectors[k][i]).collect();
            // Largest-magnitude coordinate positive; first one wins ties.
            let mut pivot = 0;
            for k in 1..cols {
                if axis[k].abs() > axis[pivot].abs() {
                    pivot = k;
                }
            }
            if axis[pivot] < 0.0 {
                axis.iter_mut().for_each(|x| *x = -*x);
            }
            model.axes.push(axis);
            model.eigenvalues.push(values[i]);
            model.explained.push(if total > 0.0 {
                values[i].max(0.0) / total
            } else {
                0.0
            });
        }
        Ok(model)
    }

    pub fn n_components(&self) -> usize {
        self.axes.len()
    }

    /// Keeps the first `k` axes.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.axes.len() {
            return Err(Error::Shape(format!(
                "n_components {k} outside 1..={}",
                self.axes.len()
            )));
        }
        let mut m = self.clone();
        m.axes.truncate(k);
        m.eigenvalues.truncate(k);
        m.explained.truncate(k);
        Ok(m)
    }

    fn normalize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, x)| {
                let c = x - self.means[j];
                match &self.scales {
                    Some(s) => c / s[j],
                    None => c,
                }
            })
            .collect()
    }

    pub fn transform(&self, matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
        matrix
            .iter()
            .map(|r| {
                let z = self.normalize(r);
                self.axes
                    .iter()
                    .map(|axis| axis.iter().zip(&z).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect()
    }

    /// Maps projected rows back to the original feature space.
    pub fn inverse_transform(&self, projected: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let cols = self.means.len();
        projected
            .iter()
            .map(|p| {
                (0..cols)
                    .map(|j| {
                        let z: f64 = self.axes.iter().zip(p).map(|(axis, c)| axis[j] * c).sum();
                        let scale = self.scales.as_ref().map_or(1.0, |s| s[j]);
                        z * scale + self.means[j]
                    })
                    .collect()
            })
            .collect()
    }
}

/// Fits PCA and projects the data onto the first `n_components` axes.
pub fn fit_pca(
    matrix: &[Vec<f64>],
    n_components: usize,
    standardize: bool,
) -> Result<(PcaModel, Vec<Vec<f64>>)> {
    let cols = matrix.first().map_or(0, Vec::len);
    if n_components == 0 || n_components > cols {
        return Err(Error::Shape(format!(
            "n_components {n_components} outside 1..={cols}"
        )));
    }
    let model = PcaModel::fit(matrix, standardize)?.truncated(n_components)?;
    let projected = model.transform(matrix);
    Ok((model, projected))
}
