//! Dense square-matrix kernels: partially pivoted LU, determinants, inverses,
//! and rank-one column-replacement updates of a transposed inverse.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Numerical thresholds shared by the linear algebra and the samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// A pivot below `singular_tol * scale` marks the matrix singular, where
    /// `scale` is the largest absolute row sum.
    pub singular_tol: f64,
    /// Rank-one updates with `|1 + u^T b[:, j]|` at or below this are refused.
    pub denom_tol: f64,
    /// Denominators below this trigger a from-scratch refresh instead of an
    /// incremental update.
    pub refresh_denom: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { singular_tol: 1e-12, denom_tol: 1e-12, refresh_denom: 1e-6 }
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// LU factorization with partial (row) pivoting: `P A = L U`, stored packed.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
    min_pivot: f64,
}

impl Lu {
    fn factor(m: &Matrix) -> Lu {
        let n = m.rows;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|r| (r, lu[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            min_pivot = min_pivot.min(pivot_abs);
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            if pivot == 0.0 {
                continue;
            }
            for r in k + 1..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for c in k + 1..n {
                        lu[r * n + c] -= factor * lu[k * n + c];
                    }
                }
            }
        }
        Lu { n, lu, perm, sign, min_pivot }
    }

    fn determinant(&self) -> f64 {
        (0..self.n).map(|k| self.lu[k * self.n + k]).product::<f64>() * self.sign
    }

    /// Solves `A x = e_col` for every column and returns `A^{-1}`.
    fn inverse(&self) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::zeros(n, n);
        let mut x = vec![0.0; n];
        for col in 0..n {
            for (r, xr) in x.iter_mut().enumerate() {
                *xr = if self.perm[r] == col { 1.0 } else { 0.0 };
            }
            for r in 0..n {
                let row = &self.lu[r * n..r * n + r];
                x[r] -= row.iter().zip(&x[..r]).map(|(a, b)| a * b).sum::<f64>();
            }
            for r in (0..n).rev() {
                let row = &self.lu[r * n + r + 1..(r + 1) * n];
                let s = x[r] - row.iter().zip(&x[r + 1..]).map(|(a, b)| a * b).sum::<f64>();
                x[r] = s / self.lu[r * n + r];
            }
            for r in 0..n {
                inv[(r, col)] = x[r];
            }
        }
        inv
    }
}

/// Determinant via partially pivoted LU.
pub fn determinant(m: &Matrix) -> Result<f64> {
    m.require_square()?;
    Ok(Lu::factor(m).determinant())
}

/// `m^{-T}`, the transpose of the inverse.
pub fn inverse_transpose(m: &Matrix) -> Result<Matrix> {
    inverse_transpose_with(m, &Tolerances::default())
}

pub fn inverse_transpose_with(m: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    Ok(invert_with_det(m, tol)?.0)
}

/// `(m^{-T}, det m)` from a single factorization.
pub(crate) fn invert_with_det(m: &Matrix, tol: &Tolerances) -> Result<(Matrix, f64)> {
    m.require_square()?;
    let lu = Lu::factor(m);
    if m.rows == 0 || lu.min_pivot <= tol.singular_tol * m.scale() {
        return Err(Error::Singular);
    }
    Ok((lu.inverse().transpose(), lu.determinant()))
}

/// `1 + u^T b[:, j]`. If `b = L^{-T}` this is `det(L + u e_j^T) / det(L)`.
pub fn det_lemma_factor(b: &Matrix, u: &[f64], j: usize) -> f64 {
    debug_assert_eq!(u.len(), b.rows);
    1.0 + u.iter().enumerate().map(|(k, uk)| uk * b[(k, j)]).sum::<f64>()
}

/// Turns `b = L^{-T}` into `(L + u e_j^T)^{-T}` in O(n^2).
///
/// Returns the determinant ratio `det(L + u e_j^T) / det(L)`.
pub fn sherman_morrison_update(b: &mut Matrix, u: &[f64], j: usize) -> Result<f64> {
    sherman_morrison_update_with(b, u, j, &Tolerances::default())
}

pub fn sherman_morrison_update_with(
    b: &mut Matrix,
    u: &[f64],
    j: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let n = b.rows;
    let denom = det_lemma_factor(b, u, j);
    if denom.abs() <= tol.denom_tol {
        return Err(Error::SingularUpdate(denom));
    }
    // b -= b[:, j] (u^T b) / denom
    let mut ub = vec![0.0; n];
    for (k, &uk) in u.iter().enumerate() {
        if uk != 0.0 {
            for (c, acc) in ub.iter_mut().enumerate() {
                *acc += uk * b[(k, c)];
            }
        }
    }
    let bj = b.column(j);
    for (r, &bjr) in bj.iter().enumerate() {
        let s = bjr / denom;
        if s != 0.0 {
            for (c, &ubc) in ub.iter().enumerate() {
                b[(r, c)] -= s * ubc;
            }
        }
    }
    Ok(denom)
}
