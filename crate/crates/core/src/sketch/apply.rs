use rayon::prelude::*;

use super::Sketch;
use crate::error::{Error, Result};
use crate::matio::{DenseMatrix, Operand, SparseMatrixCSC};

/// `Π A` restricted to the rows of `Π A` that can be nonzero.
///
/// Dropping identically-zero rows leaves the Gram matrix `(ΠA)^T (ΠA)`, the
/// singular values and the row space unchanged, which is all the solvers need
/// when `m` is much larger than `s * n`.
#[derive(Clone, Debug)]
pub struct CompactProduct {
    /// Rows of the full product kept, ascending.
    pub row_indices: Vec<usize>,
    /// `row_indices.len() x d`.
    pub matrix: DenseMatrix,
}

impl Sketch {
    fn check_input(&self, a: &dyn Operand) -> Result<()> {
        if a.rows() != self.spec.n {
            return Err(Error::dim(format!(
                "sketch has n={} columns but input has {} rows",
                self.spec.n,
                a.rows()
            )));
        }
        Ok(())
    }

    /// `Π A` as a dense `m x d` matrix in `O(s * nnz(A))` time.
    ///
    /// Accumulation order is fixed: columns of `A` independently, entries
    /// within a column by ascending row, sketch nonzeros by ascending row.
    /// Output columns are filled in parallel; results do not depend on the
    /// thread count.
    pub fn apply(&self, a: &dyn Operand) -> Result<DenseMatrix> {
        self.check_input(a)?;
        let m = self.spec.m;
        let mut out = DenseMatrix::zeros(m, a.cols());
        out.data_mut()
            .par_chunks_mut(m)
            .enumerate()
            .for_each_init(Vec::new, |buf, (j, col)| {
                a.for_each_in_col(j, &mut |i, v| {
                    self.column_nonzeros_into(i, buf);
                    for &(r, w) in buf.iter() {
                        col[r] += w * v;
                    }
                });
            });
        Ok(out)
    }

    pub fn apply_sparse(&self, a: &SparseMatrixCSC) -> Result<DenseMatrix> {
        self.apply(a)
    }

    /// Same contract as [`Sketch::apply_sparse`]; zero entries of `a` are skipped,
    /// so the result is bit-identical to applying the CSC form of `a`.
    pub fn apply_dense(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        self.apply(a)
    }

    /// `Π A` with structurally zero rows removed. Kept rows carry bit-identical
    /// values to [`Sketch::apply`].
    pub fn apply_compact(&self, a: &dyn Operand) -> Result<CompactProduct> {
        self.check_input(a)?;
        let n = self.spec.n;
        let m = self.spec.m;
        let mut active = vec![false; n];
        for j in 0..a.cols() {
            a.for_each_in_col(j, &mut |i, _| active[i] = true);
        }
        let mut touched = vec![false; m];
        let mut buf = Vec::new();
        for i in (0..n).filter(|&i| active[i]) {
            self.column_nonzeros_into(i, &mut buf);
            for &(r, _) in &buf {
                touched[r] = true;
            }
        }
        let row_indices: Vec<usize> = (0..m).filter(|&r| touched[r]).collect();
        let mut slot = vec![usize::MAX; m];
        for (k, &r) in row_indices.iter().enumerate() {
            slot[r] = k;
        }
        let rows = row_indices.len();
        let mut matrix = DenseMatrix::zeros(rows, a.cols());
        if rows > 0 {
            matrix
                .data_mut()
                .par_chunks_mut(rows)
                .enumerate()
                .for_each_init(Vec::new, |buf, (j, col)| {
                    a.for_each_in_col(j, &mut |i, v| {
                        self.column_nonzeros_into(i, buf);
                        for &(r, w) in buf.iter() {
                            col[slot[r]] += w * v;
                        }
                    });
                });
        }
        Ok(CompactProduct {
            row_indices,
            matrix,
        })
    }
}
