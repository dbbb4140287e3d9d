//! Up-looking sparse LDLᵀ factorization (elimination-tree based) for
//! symmetric positive definite matrices.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

use super::ordering::nested_dissection;
use super::SymSparseMatrix;

const NONE: usize = usize::MAX;

/// `P A Pᵀ = L D Lᵀ` with unit lower-triangular `L` stored by columns.
#[derive(Clone, Debug)]
pub struct LdlFactor<T> {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> LdlFactor<T> {
    /// Factorizes `a`. A pivot that is not clearly positive means the matrix
    /// is singular or indefinite (typically: no Dirichlet constraints).
    pub fn new(a: &SymSparseMatrix<T>) -> Result<Self> {
        let (ap, ai, _) = a.raw();
        Self::with_ordering(a, nested_dissection(a.dim(), ap, ai))
    }

    /// Factorizes `a` eliminating unknown `perm[k]` at step `k`.
    pub fn with_ordering(a: &SymSparseMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let (ap, ai, ax) = a.raw();
        if perm.len() != n {
            return Err(invalid("ordering length differs from the matrix dimension"));
        }
        let mut pinv = vec![0usize; n];
        let mut seen = vec![false; n];
        for (k, &p) in perm.iter().enumerate() {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(invalid("ordering is not a permutation"));
            }
            pinv[p] = k;
        }

        // Symbolic: elimination tree and column counts.
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let kk = perm[k];
            for &col in &ai[ap[kk]..ap[kk + 1]] {
                let mut i = pinv[col];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == NONE {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        let total = lp[n];
        let mut li = vec![0usize; total];
        let mut lx = vec![T::zero(); total];
        let mut d = vec![T::zero(); n];

        let max_diag = a.diagonal().into_iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tol = max_diag * T::epsilon() * T::from_usize_lossy(n.max(1000));

        // Numeric.
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        for v in flag.iter_mut() {
            *v = NONE;
        }
        for v in lnz.iter_mut() {
            *v = 0;
        }
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let kk = perm[k];
            for (&col, &val) in ai[ap[kk]..ap[kk + 1]].iter().zip(&ax[ap[kk]..ap[kk + 1]]) {
                let mut i = pinv[col];
                if i <= k {
                    y[i] += val;
                    let mut len = 0;
                    while flag[i] != k {
                        pattern[len] = i;
                        len += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                    while len > 0 {
                        top -= 1;
                        len -= 1;
                        pattern[top] = pattern[len];
                    }
                }
            }
            let mut dk = y[k];
            y[k] = T::zero();
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = T::zero();
                let end = lp[i] + lnz[i];
                for p in lp[i]..end {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                dk -= l_ki * yi;
                li[end] = k;
                lx[end] = l_ki;
                lnz[i] += 1;
            }
            if !(dk > tol) {
                return Err(Error::NotPositiveDefinite { pivot: perm[k], value: dk.to_f64_lossy() });
            }
            d[k] = dk;
        }
        Ok(LdlFactor { n, perm, lp, li, lx, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` plus the diagonal.
    pub fn nnz(&self) -> usize {
        self.lx.len() + self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        self.solve_permuted_in_place(&mut x);
        let mut out = vec![T::zero(); self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }

    fn solve_permuted_in_place(&self, x: &mut [T]) {
        for j in 0..self.n {
            let xj = x[j];
            if xj != T::zero() {
                for p in self.lp[j]..self.lp[j + 1] {
                    x[self.li[p]] -= self.lx[p] * xj;
                }
            }
        }
        for j in 0..self.n {
            x[j] /= self.d[j];
        }
        for j in (0..self.n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
    }
}
