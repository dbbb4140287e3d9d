use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletBuilder<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        TripletBuilder { rows, cols, entries: Vec::new() }
    }

    pub fn with_capacity(rows: usize, cols: usize, cap: usize) -> Self {
        TripletBuilder { rows, cols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.rows && col < self.cols);
        self.entries.push((row, col, value));
    }

    /// Compressed rows with sorted, merged columns and exact zeros removed.
    fn compress(mut self) -> (Vec<usize>, Vec<usize>, Vec<T>) {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        let mut out_cols = Vec::with_capacity(cols.len());
        let mut out_vals = Vec::with_capacity(cols.len());
        for ((c, v), r) in cols.into_iter().zip(vals).zip(row_of) {
            if v != T::zero() {
                out_cols.push(c);
                out_vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..self.rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        (row_ptr, out_cols, out_vals)
    }

    pub fn into_rows(self) -> SparseRows<T> {
        let (rows, cols) = (self.rows, self.cols);
        let (row_ptr, col_idx, values) = self.compress();
        SparseRows { rows, cols, row_ptr, col_idx, values }
    }

    /// Finalizes a square matrix that is symmetric by construction.
    pub fn into_symmetric(self) -> Result<SymSparseMatrix<T>> {
        if self.rows != self.cols {
            return Err(invalid("symmetric matrix must be square"));
        }
        let n = self.rows;
        let (row_ptr, col_idx, values) = self.compress();
        Ok(SymSparseMatrix { n, row_ptr, col_idx, values })
    }
}

/// Square symmetric matrix in compressed sparse row form (both triangles
/// stored).
#[derive(Clone, Debug, PartialEq)]
pub struct SymSparseMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SymSparseMatrix<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Largest relative asymmetry `|a_ij - a_ji| / max|a|`.
    pub fn asymmetry(&self) -> T {
        let scale = self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Principal submatrix on `keep` (in the given order) and the coupling
    /// block `A[keep, drop]` as sparse rows, where `drop` is addressed by
    /// `drop_index[j]`.
    pub fn split(&self, keep: &[usize], new_index: &[Option<usize>], drop_index: &[Option<usize>], n_drop: usize) -> (SymSparseMatrix<T>, SparseRows<T>) {
        let mut inner = TripletBuilder::new(keep.len(), keep.len());
        let mut coupling = TripletBuilder::new(keep.len(), n_drop);
        for (a, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if let Some(b) = new_index[j] {
                    inner.add(a, b, v);
                } else if let Some(b) = drop_index[j] {
                    coupling.add(a, b, v);
                }
            }
        }
        (inner.into_symmetric().expect("square"), coupling.into_rows())
    }

    pub(crate) fn raw(&self) -> (&[usize], &[usize], &[T]) {
        (&self.row_ptr, &self.col_idx, &self.values)
    }
}

/// Rectangular sparse matrix in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRows<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseRows<T> {
    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `y = Mᵀ x`.
    pub fn mul_transpose(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != T::zero() {
                for (j, v) in self.row(i) {
                    y[j] += v * xi;
                }
            }
        }
        y
    }

    /// Keeps only the columns with `map[j] = Some(new_j)`; returns the kept
    /// block and the block of dropped columns (indexed by `drop_map`).
    pub fn split_columns(&self, map: &[Option<usize>], n_keep: usize, drop_map: &[Option<usize>], n_drop: usize) -> (SparseRows<T>, SparseRows<T>) {
        let mut keep = TripletBuilder::new(self.rows, n_keep);
        let mut drop = TripletBuilder::new(self.rows, n_drop);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                if let Some(k) = map[j] {
                    keep.add(i, k, v);
                } else if let Some(k) = drop_map[j] {
                    drop.add(i, k, v);
                }
            }
        }
        (keep.into_rows(), drop.into_rows())
    }
}
