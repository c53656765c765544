//! Minimal dense square-matrix helpers for rotation handling.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    dim: usize,
    /// Row-major entries, `data[r * dim + c]`.
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Option<SquareMatrix> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(SquareMatrix {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(dim: usize) -> SquareMatrix {
        let mut m = SquareMatrix {
            dim,
            data: vec![0.0; dim * dim],
        };
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.get(r, c) * v[c])
                    .sum::<f64>()
            })
            .collect()
    }

    /// Largest absolute entry of `A^T A - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| self.get(k, i) * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[i * n + col]
                        .abs()
                        .total_cmp(&a[j * n + col].abs())
                })
                .unwrap();
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for c in 0..n {
                    a.swap(pivot * n + c, col * n + c);
                }
                det = -det;
            }
            det *= a[col * n + col];
            for row in (col + 1)..n {
                let factor = a[row * n + col] / a[col * n + col];
                for c in col..n {
                    a[row * n + c] -= factor * a[col * n + c];
                }
            }
        }
        det
    }

    /// Negate one column in place.
    pub fn negate_col(&mut self, col: usize) {
        for r in 0..self.dim {
            let v = -self.get(r, col);
            self.set(r, col, v);
        }
    }

    /// Orthonormalize the columns of a matrix by modified Gram-Schmidt.
    /// Returns `None` when a column degenerates (zero probability for
    /// Gaussian input).
    pub fn gram_schmidt_columns(mut self) -> Option<SquareMatrix> {
        let n = self.dim;
        for j in 0..n {
            for prev in 0..j {
                let dot: f64 = (0..n).map(|r| self.get(r, j) * self.get(r, prev)).sum();
                for r in 0..n {
                    let v = self.get(r, j) - dot * self.get(r, prev);
                    self.set(r, j, v);
                }
            }
            let norm: f64 = (0..n)
                .map(|r| self.get(r, j) * self.get(r, j))
                .sum::<f64>()
                .sqrt();
            if norm < 1e-150 {
                return None;
            }
            for r in 0..n {
                let v = self.get(r, j) / norm;
                self.set(r, j, v);
            }
        }
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_known_matrix() {
        let m = SquareMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert!((m.det() - 5.0).abs() < 1e-12);
        assert!((SquareMatrix::identity(4).det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gram_schmidt_produces_orthonormal_columns() {
        let m = SquareMatrix::from_rows(vec![
            vec![1.0, 2.0, 0.5],
            vec![-1.0, 0.3, 2.0],
            vec![0.2, 1.0, -1.0],
        ])
        .unwrap()
        .gram_schmidt_columns()
        .unwrap();
        assert!(m.orthogonality_defect() < 1e-12);
    }
}
