//! Matrix storage, products and Matrix Market I/O.

mod csc;
mod dense;
mod market;

pub use csc::SparseMatrixCSC;
pub use dense::DenseMatrix;
pub use market::{
    parse_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to,
    MatrixMarketFormat,
};

#[cfg(test)]
pub(crate) use csc::dense_mul_vec;
pub(crate) use dense::{dot, norm2};

use crate::error::Result;

/// Either storage; what a Matrix Market file decodes to.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrixCSC),
}

impl From<DenseMatrix> for Matrix {
    fn from(m: DenseMatrix) -> Self {
        Matrix::Dense(m)
    }
}

impl From<SparseMatrixCSC> for Matrix {
    fn from(m: SparseMatrixCSC) -> Self {
        Matrix::Sparse(m)
    }
}

/// Column-oriented read access shared by dense and sparse input. Sketches and
/// solvers are written against this trait.
pub trait Operand: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// Number of stored entries visited by [`Operand::for_each_in_col`].
    fn nnz(&self) -> usize;

    /// Visits the nonzero entries `(row, value)` of column `j` in ascending row order.
    fn for_each_in_col(&self, j: usize, f: &mut dyn FnMut(usize, f64));

    /// `self * rhs`.
    fn mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix>;

    fn to_dense(&self) -> DenseMatrix;

    fn frobenius_norm(&self) -> f64;
}

impl Operand for DenseMatrix {
    fn rows(&self) -> usize {
        DenseMatrix::rows(self)
    }

    fn cols(&self) -> usize {
        DenseMatrix::cols(self)
    }

    fn nnz(&self) -> usize {
        self.data().iter().filter(|v| **v != 0.0).count()
    }

    fn for_each_in_col(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        for (i, &v) in self.col(j).iter().enumerate() {
            if v != 0.0 {
                f(i, v);
            }
        }
    }

    fn mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.matmul(rhs)
    }

    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }

    fn frobenius_norm(&self) -> f64 {
        DenseMatrix::frobenius_norm(self)
    }
}

impl Operand for SparseMatrixCSC {
    fn rows(&self) -> usize {
        SparseMatrixCSC::rows(self)
    }

    fn cols(&self) -> usize {
        SparseMatrixCSC::cols(self)
    }

    fn nnz(&self) -> usize {
        SparseMatrixCSC::nnz(self)
    }

    fn for_each_in_col(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        let (rows, vals) = self.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            f(i, v);
        }
    }

    fn mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        SparseMatrixCSC::mul_dense(self, rhs)
    }

    fn to_dense(&self) -> DenseMatrix {
        SparseMatrixCSC::to_dense(self)
    }

    fn frobenius_norm(&self) -> f64 {
        SparseMatrixCSC::frobenius_norm(self)
    }
}

impl Operand for Matrix {
    fn rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows(),
            Matrix::Sparse(m) => m.rows(),
        }
    }

    fn cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.cols(),
            Matrix::Sparse(m) => m.cols(),
        }
    }

    fn nnz(&self) -> usize {
        match self {
            Matrix::Dense(m) => Operand::nnz(m),
            Matrix::Sparse(m) => m.nnz(),
        }
    }

    fn for_each_in_col(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        match self {
            Matrix::Dense(m) => m.for_each_in_col(j, f),
            Matrix::Sparse(m) => Operand::for_each_in_col(m, j, f),
        }
    }

    fn mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Matrix::Dense(m) => m.matmul(rhs),
            Matrix::Sparse(m) => m.mul_dense(rhs),
        }
    }

    fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => m.to_dense(),
        }
    }

    fn frobenius_norm(&self) -> f64 {
        match self {
            Matrix::Dense(m) => m.frobenius_norm(),
            Matrix::Sparse(m) => m.frobenius_norm(),
        }
    }
}
