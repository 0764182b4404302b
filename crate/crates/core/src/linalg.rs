//! Dense exact matrices.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, entries: scalar::zeros(rows * cols) }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Scalar::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| scalar::int(x)).collect()).collect())
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Scalar>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m.entries[i * m.cols + j] = x.clone();
            }
        }
        m
    }

    pub fn diagonal(d: &[Scalar]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Scalar) {
        self.entries[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Scalar]) {
        for (i, x) in col.iter().enumerate() {
            self.set(i, j, x.clone());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape");
        let mut out = scalar::zeros(self.rows);
        for j in 0..self.cols {
            if v[j].is_zero() {
                continue;
            }
            for i in 0..self.rows {
                let a = self.get(i, j);
                if !a.is_zero() {
                    out[i] += a * &v[j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix { rows: self.rows, cols: self.cols, entries: scalar::add(&self.entries, &other.entries) }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix { rows: self.rows, cols: self.cols, entries: scalar::sub(&self.entries, &other.entries) }
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, entries: scalar::scaled(c, &self.entries) }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&-Scalar::one())
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn block(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let mut m = Matrix::zeros(a.rows + c.rows, a.cols + b.cols);
        for (src, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..src.rows {
                for j in 0..src.cols {
                    m.set(r0 + i, c0 + j, src.get(i, j).clone());
                }
            }
        }
        m
    }

    /// Columns `range` of the matrix.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Matrix {
        let mut m = Matrix::zeros(self.rows, range.len());
        for i in 0..self.rows {
            for (jj, j) in range.clone().enumerate() {
                m.set(i, jj, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array((0..self.rows).map(|i| scalar::vec_to_json(self.row(i))).collect())
    }

    pub fn from_json(v: &serde_json::Value, rows: usize, cols: usize) -> Result<Matrix> {
        let arr = v.as_array().ok_or_else(|| Error::Parse(format!("expected matrix, got {v}")))?;
        if arr.len() != rows {
            return Err(Error::Parse(format!("matrix has {} rows, expected {rows}", arr.len())));
        }
        let mut out = Vec::with_capacity(rows);
        for r in arr {
            let row = scalar::vec_from_json(r)?;
            if row.len() != cols {
                return Err(Error::Parse(format!("matrix row has {} entries, expected {cols}", row.len())));
            }
            out.push(row);
        }
        if rows == 0 {
            return Ok(Matrix::zeros(0, cols));
        }
        Ok(Matrix::from_rows(out))
    }
}

/// Reduced row echelon form; returns the pivot columns.
fn rref(m: &mut Matrix) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..m.cols {
                m.entries.swap(p * m.cols + j, r * m.cols + j);
            }
        }
        let inv = m.get(r, c).recip();
        for j in c..m.cols {
            let x = m.get(r, j) * &inv;
            m.set(r, j, x);
        }
        for i in 0..m.rows {
            if i == r {
                continue;
            }
            let f = m.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            for j in c..m.cols {
                let x = m.get(r, j);
                if !x.is_zero() {
                    let y = m.get(i, j) - &f * x;
                    m.set(i, j, y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

pub fn kernel_basis(m: &Matrix) -> Vec<Vec<Scalar>> {
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = scalar::zeros(m.cols);
            v[f] = Scalar::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -w.get(r, f).clone();
            }
            v
        })
        .collect()
}

pub fn solve(m: &Matrix, b: &[Scalar]) -> Option<Vec<Scalar>> {
    assert_eq!(b.len(), m.rows, "right-hand side length");
    let mut aug = Matrix::zeros(m.rows, m.cols + 1);
    for i in 0..m.rows {
        for j in 0..m.cols {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, m.cols, b[i].clone());
    }
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&m.cols) {
        return None;
    }
    let mut x = scalar::zeros(m.cols);
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug.get(r, m.cols).clone();
    }
    Some(x)
}

/// Inverse of a square matrix, if it exists.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut aug = Matrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, n + i, Scalar::one());
    }
    let pivots = rref(&mut aug);
    if pivots.iter().take(n).any(|&p| p >= n) {
        return None;
    }
    Some(aug.columns(n..2 * n))
}

/// dim ker(d_out) − rank(d_in), after checking `d_out · d_in = 0`.
pub fn homology_dim(d_out: &Matrix, d_in: &Matrix, degree: usize) -> Result<usize> {
    if d_out.cols != d_in.rows {
        return Err(Error::DimensionMismatch(format!("{}x{} after {}x{}", d_out.rows, d_out.cols, d_in.rows, d_in.cols)));
    }
    if !d_out.mul(d_in).is_zero() {
        return Err(Error::CompositionNonzero(degree));
    }
    Ok(d_out.cols - rank(d_out) - rank(d_in))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Matrix::zeros(3, 3)), 0);
        assert_eq!(rank(&Matrix::identity(4)), 4);
        assert_eq!(rank(&Matrix::from_i64(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&Matrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(&Matrix::zeros(2, 3)).len(), 3);
        assert_eq!(kernel_basis(&Matrix::from_i64(&[&[1, 1]])), vec![vec![int(-1), int(1)]]);
    }

    #[test]
    fn homology_examples() {
        let z = Matrix::zeros(3, 3);
        assert_eq!(homology_dim(&z, &z, 0).unwrap(), 3);
        assert_eq!(homology_dim(&Matrix::identity(3), &z, 0).unwrap(), 0);
        let out = Matrix::from_i64(&[&[0, 0]]);
        let inn = Matrix::from_i64(&[&[1], &[0]]);
        assert_eq!(homology_dim(&out, &inn, 0).unwrap(), 1);
        let bad = homology_dim(&Matrix::identity(2), &inn, 3);
        assert!(matches!(bad, Err(Error::CompositionNonzero(3))));
    }

    #[test]
    fn solve_examples() {
        let b = vec![int(1), int(-2), int(5)];
        assert_eq!(solve(&Matrix::identity(3), &b), Some(b.clone()));
        assert_eq!(solve(&Matrix::zeros(3, 3), &b), None);
        let m = Matrix::from_i64(&[&[2, 0], &[0, 3]]);
        assert_eq!(solve(&m, &[int(4), int(6)]), Some(vec![int(2), int(2)]));
    }

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_i64(&[&[1, 2], &[3, 4]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        assert!(inverse(&Matrix::from_i64(&[&[1, 2], &[2, 4]])).is_none());
    }
}
