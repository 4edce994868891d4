//! Small dense matrices and sparse symmetric forms over a [`Scalar`].

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a matrix from its rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Invalid("ragged matrix rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(T::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j).clone() + a.clone() * other.get(k, j).clone();
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// `uᵀ M v`.
    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        let mv = self.mul_vec(v);
        dot(u, &mv)
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j).clone() - self.get(j, i).clone()).is_negligible()))
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(|x| x.is_negligible())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| if x.abs() > m { x.abs() } else { m })
    }

    /// Rank by Gaussian elimination; pivots are judged by [`Scalar::is_negligible`].
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..a.cols {
            if rank == a.rows {
                break;
            }
            let pivot = (rank..a.rows)
                .filter(|&r| !a.get(r, col).is_negligible())
                .max_by(|&x, &y| a.get(x, col).abs().partial_cmp(&a.get(y, col).abs()).unwrap());
            let Some(p) = pivot else { continue };
            a.swap_rows(rank, p);
            let pv = a.get(rank, col).clone();
            for r in rank + 1..a.rows {
                let f = a.get(r, col).clone() / pv.clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..a.cols {
                    let v = a.get(r, c).clone() - f.clone() * a.get(rank, c).clone();
                    a.set(r, c, v);
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    /// Positive-semidefiniteness test by symmetric elimination. Returns the
    /// rank when the (symmetric) matrix is PSD, `None` otherwise.
    pub fn psd_rank(&self) -> Option<usize> {
        if !self.is_symmetric() {
            return None;
        }
        let mut a = self.clone();
        let n = a.rows;
        let mut alive: Vec<usize> = (0..n).collect();
        let mut rank = 0;
        while !alive.is_empty() {
            if alive.iter().any(|&i| a.get(i, i).is_negative() && !a.get(i, i).is_negligible()) {
                return None;
            }
            let pivot = alive
                .iter()
                .copied()
                .filter(|&i| !a.get(i, i).is_negligible())
                .max_by(|&x, &y| a.get(x, x).partial_cmp(a.get(y, y)).unwrap());
            let Some(k) = pivot else {
                // Zero diagonal on the remaining block: PSD only if the block vanishes.
                let all_zero = alive.iter().all(|&i| alive.iter().all(|&j| a.get(i, j).is_negligible()));
                return all_zero.then_some(rank);
            };
            let pv = a.get(k, k).clone();
            alive.retain(|&i| i != k);
            for &i in &alive {
                let f = a.get(i, k).clone() / pv.clone();
                if f.is_zero() {
                    continue;
                }
                for &j in &alive {
                    let v = a.get(i, j).clone() - f.clone() * a.get(k, j).clone();
                    a.set(i, j, v);
                }
            }
            rank += 1;
        }
        Some(rank)
    }

    /// Leading principal minors `det(A[..k, ..k])` for `k = 1..=n`.
    pub fn leading_minors(&self) -> Vec<T> {
        (1..=self.rows.min(self.cols))
            .map(|k| {
                let mut sub = Matrix::zeros(k, k);
                for i in 0..k {
                    for j in 0..k {
                        sub.set(i, j, self.get(i, j).clone());
                    }
                }
                sub.determinant()
            })
            .collect()
    }

    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let mut a = self.clone();
        let n = a.rows;
        let mut det = T::one();
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a.get(r, col).is_zero())
                .max_by(|&x, &y| a.get(x, col).abs().partial_cmp(&a.get(y, col).abs()).unwrap());
            let Some(p) = pivot else { return T::zero() };
            if p != col {
                a.swap_rows(col, p);
                det = -det;
            }
            let pv = a.get(col, col).clone();
            det = det * pv.clone();
            for r in col + 1..n {
                let f = a.get(r, col).clone() / pv.clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = a.get(r, c).clone() - f.clone() * a.get(col, c).clone();
                    a.set(r, c, v);
                }
            }
        }
        det
    }

    /// Solves `self · X = rhs` for square invertible `self`.
    pub fn solve(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        assert!(self.is_square() && rhs.rows == self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a.get(r, col).is_negligible())
                .max_by(|&x, &y| a.get(x, col).abs().partial_cmp(&a.get(y, col).abs()).unwrap())
                .ok_or_else(|| Error::Structure("singular linear system".into()))?;
            a.swap_rows(col, pivot);
            b.swap_rows(col, pivot);
            let pv = a.get(col, col).clone();
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone() / pv.clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = a.get(r, c).clone() - f.clone() * a.get(col, c).clone();
                    a.set(r, c, v);
                }
                for c in 0..b.cols {
                    let v = b.get(r, c).clone() - f.clone() * b.get(col, c).clone();
                    b.set(r, c, v);
                }
            }
        }
        for r in 0..n {
            let pv = a.get(r, r).clone();
            for c in 0..b.cols {
                let v = b.get(r, c).clone() / pv.clone();
                b.set(r, c, v);
            }
        }
        Ok(b)
    }
}

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter()
        .zip(v)
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// Sparse symmetric matrix `Q` defining the bilinear form `uᵀ Q v`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymForm<T> {
    rows: Vec<BTreeMap<usize, T>>,
}

impl<T: Scalar> SymForm<T> {
    pub fn new(n: usize) -> Self {
        Self { rows: vec![BTreeMap::new(); n] }
    }

    pub fn from_dense(m: &Matrix<T>) -> Self {
        let mut f = Self::new(m.rows());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if !m.get(i, j).is_zero() {
                    f.rows[i].insert(j, m.get(i, j).clone());
                }
            }
        }
        f
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i].get(&j).cloned().unwrap_or_else(T::zero)
    }

    /// Adds `v` to entries `(i, j)` and `(j, i)` (once on the diagonal).
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        Self::bump(&mut self.rows[i], j, v.clone());
        if i != j {
            Self::bump(&mut self.rows[j], i, v);
        }
    }

    fn bump(row: &mut BTreeMap<usize, T>, j: usize, v: T) {
        let e = row.entry(j).or_insert_with(T::zero);
        *e = e.clone() + v;
        if e.is_zero() {
            row.remove(&j);
        }
    }

    /// Nonzero entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &T)> {
        self.rows[i].iter().map(|(j, v)| (*j, v))
    }

    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        let mut acc = T::zero();
        for (i, row) in self.rows.iter().enumerate() {
            if u[i].is_zero() {
                continue;
            }
            let mut s = T::zero();
            for (j, q) in row {
                s = s + q.clone() * v[*j].clone();
            }
            acc = acc + u[i].clone() * s;
        }
        acc
    }

    pub fn quadratic(&self, u: &[T]) -> T {
        self.bilinear(u, u)
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let n = self.size();
        let mut m = Matrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                m.set(i, *j, v.clone());
            }
        }
        m
    }

    /// Schur complement onto the vertices listed in `onto`: the form
    /// `v ↦ min { Q(u) : u|onto = v }`. Interior vertices are eliminated in
    /// increasing index order; the result is indexed by position in `onto`.
    pub fn trace_onto(&self, onto: &[usize]) -> Result<SymForm<T>> {
        let n = self.size();
        let mut keep = vec![usize::MAX; n];
        for (pos, &v) in onto.iter().enumerate() {
            if v >= n || keep[v] != usize::MAX {
                return Err(Error::Invalid(format!("bad trace target vertex {v}")));
            }
            keep[v] = pos;
        }
        let mut rows = self.rows.clone();
        for k in 0..n {
            if keep[k] != usize::MAX {
                continue;
            }
            let row_k = std::mem::take(&mut rows[k]);
            let pivot = row_k.get(&k).cloned().unwrap_or_else(T::zero);
            if pivot.is_negligible() {
                return Err(Error::Structure(format!(
                    "singular interior block at vertex {k}: the form is not positive on non-constants"
                )));
            }
            let nbrs: Vec<(usize, T)> = row_k.into_iter().filter(|(j, _)| *j != k).collect();
            for (i, qik) in &nbrs {
                rows[*i].remove(&k);
                let scaled = qik.clone() / pivot.clone();
                for (j, qkj) in &nbrs {
                    if j < i {
                        continue;
                    }
                    let delta = -(scaled.clone() * qkj.clone());
                    Self::bump(&mut rows[*i], *j, delta.clone());
                    if i != j {
                        Self::bump(&mut rows[*j], *i, delta);
                    }
                }
            }
        }
        let mut out = SymForm::new(onto.len());
        for (pos, &v) in onto.iter().enumerate() {
            for (j, q) in &rows[v] {
                out.rows[pos].insert(keep[*j], q.clone());
            }
        }
        Ok(out)
    }

    /// Entrywise difference `self − other`.
    pub fn difference(&self, other: &Self) -> Self {
        assert_eq!(self.size(), other.size());
        let mut out = self.clone();
        for (i, row) in other.rows.iter().enumerate() {
            for (j, v) in row {
                Self::bump(&mut out.rows[i], *j, -v.clone());
            }
        }
        out
    }

    pub fn is_zero_form(&self) -> bool {
        self.rows.iter().all(|r| r.values().all(|v| v.is_negligible()))
    }
}
