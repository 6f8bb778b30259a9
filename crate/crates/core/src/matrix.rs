//! Sparse row-major transition matrices and dense products.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix stored as one adjacency list per row.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    rows: Vec<Vec<(usize, T)>>,
    stochastic: bool,
}

impl<T: Scalar> TransitionMatrix<T> {
    /// Rows must already be free of duplicate column indices.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>, stochastic: bool) -> Self {
        Self { rows, stochastic }
    }

    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim).map(|i| vec![(i, T::one())]).collect();
        Self::from_rows(rows, true)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, T)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(T::zero)
    }

    /// Number of stored entries that are not zero.
    pub fn nnz(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.iter().filter(|(_, v)| !v.is_zero()).count())
            .sum()
    }

    /// `P · 1`
    pub fn row_sums(&self) -> Vec<T> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(T::zero(), |acc, (_, v)| acc + v.clone()))
            .collect()
    }

    /// Row vector times matrix, `x · P`.
    pub fn left_mul(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::SizeMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut out = vec![T::zero(); self.dim()];
        for (row, xi) in self.rows.iter().zip(x) {
            if xi.is_zero() {
                continue;
            }
            for (j, v) in row {
                out[*j] = out[*j].clone() + xi.clone() * v.clone();
            }
        }
        Ok(out)
    }

    /// Verifies nonnegative entries and unit row sums within `tol`.
    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        let one = T::one();
        for (i, row) in self.rows.iter().enumerate() {
            let sum = row.iter().fold(T::zero(), |acc, (_, v)| acc + v.clone());
            let negative = row.iter().any(|(_, v)| v.is_negative());
            if negative || !sum.approx_eq(&one, tol) {
                return Err(Error::NonStochastic {
                    row: i,
                    sum: sum.to_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut d = DenseMatrix::<T>::zeros(n);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                d.data[i * n + j] = d.data[i * n + j].clone() + v.clone();
            }
        }
        d
    }

    /// `a · P + b · Q` for matrices of equal dimension.
    pub fn affine_combination(a: &T, p: &Self, b: &T, q: &Self) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::SizeMismatch {
                expected: p.dim(),
                found: q.dim(),
            });
        }
        let rows = p
            .rows
            .iter()
            .zip(&q.rows)
            .map(|(rp, rq)| {
                let mut row: Vec<(usize, T)> =
                    rp.iter().map(|(j, v)| (*j, a.clone() * v.clone())).collect();
                for (j, v) in rq {
                    let add = b.clone() * v.clone();
                    match row.iter_mut().find(|(c, _)| c == j) {
                        Some(slot) => slot.1 = slot.1.clone() + add,
                        None => row.push((*j, add)),
                    }
                }
                row
            })
            .collect();
        Ok(Self::from_rows(rows, p.stochastic && q.stochastic))
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = T::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.dim + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `self · rhs` with `rhs` sparse.
    pub fn mul_sparse(&self, rhs: &TransitionMatrix<T>) -> Result<Self> {
        if rhs.dim() != self.dim {
            return Err(Error::SizeMismatch {
                expected: self.dim,
                found: rhs.dim(),
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let src = &self.data[i * n..(i + 1) * n];
            let dst = &mut out.data[i * n..(i + 1) * n];
            for (k, a) in src.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in rhs.row(k) {
                    dst[*j] = dst[*j].clone() + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if rhs.dim != self.dim {
            return Err(Error::SizeMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &rhs.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] = out.data[i * n + j].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| !v.is_zero()).count()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .fold(0.0, f64::max)
    }

    /// Sparse copy dropping explicit zeros.
    pub fn to_sparse(&self, stochastic: bool) -> TransitionMatrix<T> {
        let n = self.dim;
        let rows = (0..n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j, v.clone()))
                    .collect()
            })
            .collect();
        TransitionMatrix::from_rows(rows, stochastic)
    }
}

/// `P₁ᵃ · P₂ᵇ` accumulated densely, starting from the identity.
pub fn dense_pattern_product<T: Scalar>(
    first: &TransitionMatrix<T>,
    first_power: usize,
    second: &TransitionMatrix<T>,
    second_power: usize,
) -> Result<DenseMatrix<T>> {
    let mut acc = DenseMatrix::identity(first.dim());
    for _ in 0..first_power {
        acc = acc.mul_sparse(first)?;
    }
    for _ in 0..second_power {
        acc = acc.mul_sparse(second)?;
    }
    Ok(acc)
}

/// Nonzero count of the product `F₁ F₂ ⋯ F_k` of matrices with nonnegative
/// entries, computed row by row without forming the product.
pub fn product_support_size<T: Scalar>(factors: &[&TransitionMatrix<T>]) -> Result<usize> {
    let Some(first) = factors.first() else {
        return Err(Error::InvalidParameter("empty product".into()));
    };
    let dim = first.dim();
    if let Some(bad) = factors.iter().find(|f| f.dim() != dim) {
        return Err(Error::SizeMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let zero = T::zero();
    let count = (0..dim)
        .into_par_iter()
        .map_init(
            || (vec![false; dim], Vec::new(), Vec::new()),
            |(mark, frontier, next), i| {
                frontier.clear();
                frontier.push(i);
                for f in factors {
                    next.clear();
                    for &u in frontier.iter() {
                        for (v, value) in f.row(u) {
                            if *value != zero && !mark[*v] {
                                mark[*v] = true;
                                next.push(*v);
                            }
                        }
                    }
                    for &v in next.iter() {
                        mark[v] = false;
                    }
                    std::mem::swap(frontier, next);
                }
                frontier.len()
            },
        )
        .sum();
    Ok(count)
}
