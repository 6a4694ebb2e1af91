//! Compressed-sparse-row matrices and direct solves.
//!
//! The row pattern doubles as the node neighbourhood `S_i` of the limiter, so
//! builders keep explicit zeros and the pattern is always structurally
//! symmetric.

use std::fmt::Write as _;
use std::io::{self, Write};

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix on the given per-row column lists. Rows are sorted and
    /// deduplicated; the pattern is symmetrized.
    pub fn from_pattern(n: usize, rows: &[Vec<usize>]) -> Self {
        let mut sym: Vec<Vec<usize>> = rows.to_vec();
        sym.resize(n, Vec::new());
        for (i, row) in rows.iter().enumerate() {
            for &j in row {
                sym[j].push(i);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &mut sym {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        let rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut m = Self::from_pattern(n, &rows);
        m.values.fill(1.0);
        m
    }

    /// Dense row-major matrix with every nonzero (and its transpose slot)
    /// stored.
    pub fn from_dense(dense: &[Vec<f64>]) -> Self {
        let n = dense.len();
        let rows: Vec<Vec<usize>> = dense
            .iter()
            .map(|r| (0..n).filter(|&j| r[j] != 0.0).collect())
            .collect();
        let mut m = Self::from_pattern(n, &rows);
        for i in 0..n {
            for k in m.row_range(i) {
                m.values[k] = dense[i][m.col_idx[k]];
            }
        }
        m
    }

    /// A matrix with the same pattern and all values zero.
    pub fn zeros_like(&self) -> Self {
        Self {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: vec![0.0; self.values.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Storage slot of `(i, j)`, if it is in the pattern.
    #[inline]
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        let range = self.row_range(i);
        self.col_idx[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| range.start + k)
    }

    /// Value at `(i, j)`; zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.index_of(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` at `(i, j)`. Panics if the slot is not in the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .index_of(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) not in the sparsity pattern"));
        self.values[k] += v;
    }

    /// For each stored slot `(i, j)`, the slot of `(j, i)`.
    pub fn transpose_slots(&self) -> Vec<usize> {
        let mut out = vec![0; self.values.len()];
        for i in 0..self.n {
            for k in self.row_range(i) {
                let j = self.col_idx[k];
                out[k] = self.index_of(j, i).expect("pattern is structurally symmetric");
            }
        }
        out
    }

    pub fn is_pattern_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            self.row_range(i)
                .all(|k| self.index_of(self.col_idx[k], i).is_some())
        })
    }

    /// `self + scale * other` on identical patterns.
    pub fn add_scaled(&self, other: &CsrMatrix, scale: f64) -> Result<Self> {
        if self.col_idx != other.col_idx || self.row_ptr != other.row_ptr {
            return Err(Error::DimensionMismatch {
                expected: self.nnz(),
                got: other.nnz(),
            });
        }
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_range(i) {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// Replaces the listed rows by identity rows, keeping the pattern.
    pub fn with_identity_rows(&self, rows: &[bool]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            if rows[i] {
                for k in out.row_range(i) {
                    out.values[k] = if out.col_idx[k] == i { 1.0 } else { 0.0 };
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for k in self.row_range(i) {
                d[i][self.col_idx[k]] = self.values[k];
            }
        }
        d
    }

    /// MatrixMarket coordinate format, 1-based indices, explicit zeros kept.
    pub fn write_matrix_market(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        let mut line = String::new();
        for i in 0..self.n {
            for k in self.row_range(i) {
                line.clear();
                let _ = writeln!(line, "{} {} {:.16e}", i + 1, self.col_idx[k] + 1, self.values[k]);
                w.write_all(line.as_bytes())?;
            }
        }
        Ok(())
    }
}

/// A sparse LU factorization that can be reused for many right-hand sides.
pub struct LuFactorization {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    matrix: CsrMatrix,
}

impl std::fmt::Debug for LuFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuFactorization").field("n", &self.n).finish()
    }
}

impl LuFactorization {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let mut triplets = Vec::with_capacity(a.nnz());
        for i in 0..n {
            for k in a.row_range(i) {
                triplets.push(Triplet::new(i, a.col_idx[k], a.values[k]));
            }
        }
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Parse(format!("sparse matrix creation: {e:?}")))?;
        let lu = csc.sp_lu().map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => Error::Singular { row: index },
            faer::sparse::linalg::LuError::Generic(e) => Error::Parse(format!("{e:?}")),
        })?;
        Ok(Self {
            n,
            lu,
            matrix: a.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = rhs`. A solution whose residual exceeds `1e-10 * |rhs|`
    /// (or is not finite) is reported as a singular matrix.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let b = Col::<f64>::from_fn(self.n, |i| rhs[i]);
        let x = self.lu.solve(&b);
        let x: Vec<f64> = (0..self.n).map(|i| x[i]).collect();
        if let Some(row) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular { row });
        }
        let ax = self.matrix.matvec(&x)?;
        let (mut res, mut norm) = (0.0, 0.0);
        let mut worst = (0, 0.0);
        for i in 0..self.n {
            let r = (ax[i] - rhs[i]).abs();
            if r > worst.1 {
                worst = (i, r);
            }
            res += r * r;
            norm += rhs[i] * rhs[i];
        }
        if res.sqrt() > 1e-10 * norm.sqrt().max(f64::MIN_POSITIVE) {
            return Err(Error::Singular { row: worst.0 });
        }
        Ok(x)
    }
}

/// One-shot factorization and solve.
pub fn factor_and_solve(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    LuFactorization::new(a)?.solve(rhs)
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
