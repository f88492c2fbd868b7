//! Diagonal-stored sparse operators and the two products the Lindblad
//! generators need on dense column-major matrices.
//!
//! Ladder operators of the two-mode Fock basis live on a handful of fixed
//! diagonals, so every product reduces to streaming column updates. Each
//! output column is computed independently, so the rayon split never changes
//! the order of floating-point additions.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::{CMatrix, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SparseOp {
    dim: usize,
    /// `(o, v)` with `v[i] = A[i, i + o]`; entries outside the matrix are 0.
    diags: Vec<(isize, Vec<C64>)>,
}

impl SparseOp {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// all-zero diagonals dropped.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut diags: BTreeMap<isize, Vec<C64>> = BTreeMap::new();
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "entry ({i}, {j}) outside dimension {dim}");
            diags.entry(j as isize - i as isize).or_insert_with(|| vec![ZERO; dim])[i] += v;
        }
        SparseOp {
            dim,
            diags: diags.into_iter().filter(|(_, v)| v.iter().any(|&x| x != ZERO)).collect(),
        }
    }

    #[cfg(test)]
    pub fn from_dense(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let trip = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j, m[(i, j)])));
        Self::from_triplets(dim, trip)
    }

    #[cfg(test)]
    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.diags.iter().flat_map(move |(o, v)| {
            v.iter()
                .enumerate()
                .filter(|(_, x)| **x != ZERO)
                .map(move |(i, &x)| (i, (i as isize + o) as usize, x))
        })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn matmul(&self, other: &SparseOp) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for (k, j, b) in other.triplets() {
            rows[k].push((j, b));
        }
        let trip: Vec<_> = self
            .triplets()
            .flat_map(|(i, k, a)| rows[k].iter().map(move |&(j, b)| (i, j, a * b)))
            .collect();
        Self::from_triplets(self.dim, trip)
    }

    pub fn scaled_sum(&self, a: f64, other: &SparseOp, b: f64) -> Self {
        let trip = self
            .triplets()
            .map(|(i, j, v)| (i, j, v * a))
            .chain(other.triplets().map(|(i, j, v)| (i, j, v * b)));
        Self::from_triplets(self.dim, trip)
    }

    /// Max absolute row sum, an upper bound on the spectral norm for
    /// hermitian operators.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.diags.iter().map(|(_, v)| v[i].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Rows `i` for which column `i + o` exists.
    fn span(&self, o: isize) -> std::ops::Range<usize> {
        let n = self.dim as isize;
        (0.max(-o) as usize)..((n - o).min(n).max(0) as usize)
    }

    /// `out += scale * (self * x)`.
    pub fn left_mul_acc(&self, x: &CMatrix, scale: C64, out: &mut CMatrix) {
        let n = self.dim;
        debug_assert_eq!(x.nrows(), n);
        let xs = x.as_slice();
        let diags: Vec<(isize, Vec<C64>)> = self
            .diags
            .iter()
            .map(|(o, v)| (*o, v.iter().map(|&a| a * scale).collect()))
            .collect();
        out.as_mut_slice()
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(j, col)| {
                let xcol = &xs[j * n..(j + 1) * n];
                for (o, v) in &diags {
                    let r = self.span(*o);
                    let shift = (r.start as isize + o) as usize;
                    let len = r.len();
                    let dst = &mut col[r.clone()];
                    let src = &xcol[shift..shift + len];
                    for ((d, &a), &b) in dst.iter_mut().zip(&v[r]).zip(src) {
                        *d += a * b;
                    }
                }
            });
    }

    /// `self * x` as a fresh matrix.
    pub fn left_mul(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        self.left_mul_acc(x, C64::new(1.0, 0.0), &mut out);
        out
    }

    /// `out += scale * (x * self^+)`.
    pub fn right_mul_adj_acc(&self, x: &CMatrix, scale: C64, out: &mut CMatrix) {
        let n = self.dim;
        debug_assert_eq!(x.ncols(), n);
        let rows = x.nrows();
        let xs = x.as_slice();
        out.as_mut_slice()
            .par_chunks_mut(rows)
            .enumerate()
            .for_each(|(j, col)| {
                // (x A^+)[:, j] = sum_k x[:, k] conj(A[j, k]), k = j + o
                for (o, v) in &self.diags {
                    let k = j as isize + o;
                    if k < 0 || k >= n as isize || v[j] == ZERO {
                        continue;
                    }
                    let f = scale * v[j].conj();
                    let k = k as usize;
                    let xcol = &xs[k * rows..(k + 1) * rows];
                    for (d, &b) in col.iter_mut().zip(xcol) {
                        *d += f * b;
                    }
                }
            });
    }
}
