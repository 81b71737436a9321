//! Minimal dense linear algebra for small design matrices.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        assert!(!columns.is_empty());
        let rows = columns[0].len();
        assert!(columns.iter().all(|c| c.len() == rows));
        let cols = columns.len();
        let mut m = Matrix::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m.data[i * cols + j] = v;
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn dot_row(&self, i: usize, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.cols);
        self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// XᵀX of this matrix, a `cols x cols` symmetric matrix.
    pub fn gram(&self) -> Matrix {
        let p = self.cols;
        let mut g = Matrix::zeros(p, p);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..p {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..p {
                    g.data[a * p + b] += ra * r[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                g.data[a * p + b] = g.data[b * p + a];
            }
        }
        g
    }

    /// Xᵀy.
    pub fn t_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let r = self.row(i);
            let yi = y[i];
            for (o, &x) in out.iter_mut().zip(r) {
                *o += x * yi;
            }
        }
        out
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
/// Returns the lower factor L with A = L Lᵀ.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Numeric("cholesky needs a square matrix".into()));
    }
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                let threshold = 1e-12 * a.get(i, i).abs().max(1e-300);
                if s <= threshold || !s.is_finite() {
                    return Err(Error::Numeric(format!(
                        "matrix not positive definite (pivot {s:.3e} at {i}); design may be collinear"
                    )));
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve A x = b for symmetric positive-definite A.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(a)?;
    let n = b.len();
    // forward: L z = b
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * z[k];
        }
        z[i] = s / l.get(i, i);
    }
    // backward: Lᵀ x = z
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    Ok(x)
}

/// Inverse of a symmetric positive-definite matrix, column by column.
pub fn inverse_spd(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve_spd(a, &e)?;
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solve_spd_round_trip() {
        // A = Bᵀ B + I is SPD for any B.
        let b = Matrix::from_columns(&[vec![1.0, 2.0, 0.5], vec![-1.0, 0.3, 2.0]]);
        let mut a = b.gram();
        for i in 0..a.nrows() {
            a.set(i, i, a.get(i, i) + 1.0);
        }
        let x_true = vec![0.7, -1.3];
        let rhs: Vec<f64> = (0..2).map(|i| a.dot_row(i, &x_true)).collect();
        let x = solve_spd(&a, &rhs).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert_relative_eq!(xi, ti, epsilon = 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = Matrix::from_columns(&[vec![1.0, 1.0], vec![1.0, 1.0]]).gram();
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn inverse_spd_identity() {
        let b = Matrix::from_columns(&[vec![2.0, 0.1, 0.0], vec![0.3, 1.5, -0.2]]);
        let mut a = b.gram();
        for i in 0..2 {
            a.set(i, i, a.get(i, i) + 0.5);
        }
        let inv = inverse_spd(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    s += a.get(i, k) * inv.get(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(s, expect, epsilon = 1e-12);
            }
        }
    }
}
