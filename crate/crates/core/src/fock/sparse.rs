use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::BasisTag;
use crate::C64;

/// Complex sparse matrix in compressed-row layout, tied to one basis.
///
/// The `hermitian` flag records what the constructor believed; it is an
/// assertion aid only and is never used to skip work.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    tag: BasisTag,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        tag: BasisTag,
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<C64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            row_ptr[r + 1] += 1;
            keep_cols.push(c);
            keep_vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut op = Self { tag, dim, row_ptr, cols: keep_cols, vals: keep_vals, hermitian: false };
        op.hermitian = op.hermitian_defect() == 0.0;
        op
    }

    pub fn zeros(tag: BasisTag, dim: usize) -> Self {
        Self::from_triplets(tag, dim, std::iter::empty())
    }

    pub fn identity(tag: BasisTag, dim: usize) -> Self {
        Self::diagonal(tag, (0..dim).map(|_| C64::new(1.0, 0.0)).collect())
    }

    pub fn diagonal(tag: BasisTag, diag: Vec<C64>) -> Self {
        let dim = diag.len();
        Self::from_triplets(tag, dim, diag.into_iter().enumerate().map(|(k, v)| (k, k, v)))
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// The constructor's belief about hermiticity.
    pub fn hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn with_hermitian_flag(mut self, flag: bool) -> Self {
        self.hermitian = flag;
        self
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.tag != other.tag || self.dim != other.dim {
            Err(Error::BasisMismatch { left: self.tag, right: other.tag })
        } else {
            Ok(())
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut op = Self::from_triplets(
            self.tag,
            self.dim,
            self.entries().map(|(r, c, v)| (c, r, v.conj())),
        );
        op.hermitian = self.hermitian;
        op
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut op = self.clone();
        op.vals.iter_mut().for_each(|v| *v *= s);
        op.hermitian = self.hermitian && s.im == 0.0;
        op
    }

    pub fn add_op(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_triplets(self.tag, self.dim, self.entries().chain(other.entries())))
    }

    pub fn sub_op(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_triplets(
            self.tag,
            self.dim,
            self.entries().chain(other.entries().map(|(r, c, v)| (r, c, -v))),
        ))
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut list = Vec::new();
        let mut trip = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        list.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &list {
                trip.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                touched[c] = false;
            }
            list.clear();
        }
        Ok(Self::from_triplets(self.tag, self.dim, trip))
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for (c, v) in self.row(r) {
                s += v * x[c];
            }
            *out = s;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `out = A M` for a row-major dense `dim x dim` matrix `m`.
    pub fn mul_dense_into(&self, m: &[C64], out: &mut [C64]) {
        let d = self.dim;
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for r in 0..d {
            let orow = &mut out[r * d..(r + 1) * d];
            for (k, a) in self.row(r) {
                let mrow = &m[k * d..(k + 1) * d];
                for (o, &b) in orow.iter_mut().zip(mrow) {
                    *o += a * b;
                }
            }
        }
    }

    /// `<x|A|x>` without normalization.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (r, xr) in x.iter().enumerate() {
            let mut row = C64::new(0.0, 0.0);
            for (c, v) in self.row(r) {
                row += v * x[c];
            }
            s += xr.conj() * row;
        }
        s
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(r, c, _)| r == c)
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.dim).map(|k| self.get(k, k)).collect()
    }

    /// Largest `|A_rc - conj(A_cr)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `[A, B]`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ab.sub_op(&ba)?.frobenius_norm())
    }

    /// Keeps only entries whose row and column both satisfy `keep`.
    pub fn restrict(&self, keep: &[bool]) -> Self {
        Self::from_triplets(
            self.tag,
            self.dim,
            self.entries().filter(|&(r, c, _)| keep[r] && keep[c]),
        )
    }
}
