use super::dense::{norm2, DenseMatrix};
use crate::error::{Error, Result};

/// Compressed-sparse-column matrix in canonical form: row indices strictly
/// increasing within each column and no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrixCSC {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCSC {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrixCSC {
            rows,
            cols,
            col_ptr: vec![0; cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Canonicalizes `(row, col, value)` triplets: duplicates are summed and
    /// entries that end up zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(i, j, v) in &triplets {
            if i >= rows || j >= cols {
                return Err(Error::dim(format!(
                    "entry ({i}, {j}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::param("matrix entries must be finite"));
            }
        }
        // Stable sort keeps the input order of duplicates, so their sum is reproducible.
        triplets.sort_by_key(|&(i, j, _)| (j, i));

        let mut col_ptr = vec![0usize; cols + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((i, j, mut v)) = iter.next() {
            while let Some(&(i2, j2, v2)) = iter.peek() {
                if (i2, j2) != (i, j) {
                    break;
                }
                v += v2;
                iter.next();
            }
            if v != 0.0 {
                row_idx.push(i);
                values.push(v);
                col_ptr[j + 1] += 1;
            }
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(SparseMatrixCSC {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Validates raw CSC arrays and canonicalizes them.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != cols + 1 || col_ptr[0] != 0 {
            return Err(Error::dim("col_ptr must have cols+1 entries starting at 0"));
        }
        if col_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::dim("col_ptr must be nondecreasing"));
        }
        if row_idx.len() != values.len() || col_ptr[cols] != row_idx.len() {
            return Err(Error::dim("col_ptr, row_idx and values disagree on nnz"));
        }
        let mut triplets = Vec::with_capacity(values.len());
        for j in 0..cols {
            for p in col_ptr[j]..col_ptr[j + 1] {
                triplets.push((row_idx[p], j, values[p]));
            }
        }
        Self::from_triplets(rows, cols, triplets)
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut col_ptr = Vec::with_capacity(a.cols() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..a.cols() {
            for (i, &v) in a.col(j).iter().enumerate() {
                if v != 0.0 {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        SparseMatrixCSC {
            rows: a.rows(),
            cols: a.cols(),
            col_ptr,
            row_idx,
            values,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values stored in column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            out[(i, j)] = v;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.values)
    }

    /// `self * rhs` with `rhs` dense; cost `O(nnz * rhs.cols)`.
    pub fn mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows() {
            return Err(Error::dim(format!(
                "{}x{} times {}x{}",
                self.rows,
                self.cols,
                rhs.rows(),
                rhs.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols());
        for c in 0..rhs.cols() {
            let dst = out.col_mut(c);
            for (k, &b) in rhs.col(c).iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let (rows, vals) = self.col(k);
                for (&i, &v) in rows.iter().zip(vals) {
                    dst[i] += v * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * rhs` with `rhs` dense.
    pub fn t_mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != rhs.rows() {
            return Err(Error::dim(format!(
                "({}x{})^T times {}x{}",
                self.rows,
                self.cols,
                rhs.rows(),
                rhs.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.cols, rhs.cols());
        for c in 0..rhs.cols() {
            let b = rhs.col(c);
            for j in 0..self.cols {
                let (rows, vals) = self.col(j);
                out[(j, c)] = rows.iter().zip(vals).map(|(&i, &v)| v * b[i]).sum();
            }
        }
        Ok(out)
    }

    /// Dense `self * x` for a single vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                out[i] += v * xj;
            }
        }
        out
    }
}

/// Dense `a * x` for a single vector.
#[cfg(test)]
pub(crate) fn dense_mul_vec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), a.cols());
    let mut out = vec![0.0; a.rows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            super::dense::axpy(xj, a.col(j), &mut out);
        }
    }
    out
}
