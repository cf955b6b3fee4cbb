//! Sketch-and-solve applications: each reduces a problem on an `n`-row input
//! to a small dense problem on the sketched input.

mod leverage;
mod lowrank;
mod regression;

pub use leverage::{approx_leverage_scores, LeverageOptions, LeverageResult};
pub use lowrank::{low_rank_approx, LowRankOptions, LowRankResult};
pub use regression::{sketched_regression, RegressionOptions, RegressionResult};

use crate::error::Result;
use crate::matio::{DenseMatrix, Operand};

/// `[left right]` viewed as one operand without copying either side.
pub(crate) struct HStack<'a> {
    pub left: &'a dyn Operand,
    pub right: &'a dyn Operand,
}

impl Operand for HStack<'_> {
    fn rows(&self) -> usize {
        self.left.rows()
    }

    fn cols(&self) -> usize {
        self.left.cols() + self.right.cols()
    }

    fn nnz(&self) -> usize {
        self.left.nnz() + self.right.nnz()
    }

    fn for_each_in_col(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        let split = self.left.cols();
        if j < split {
            self.left.for_each_in_col(j, f)
        } else {
            self.right.for_each_in_col(j - split, f)
        }
    }

    fn mul_dense(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.to_dense().matmul(rhs)
    }

    fn to_dense(&self) -> DenseMatrix {
        self.left
            .to_dense()
            .hstack(&self.right.to_dense())
            .expect("equal row counts")
    }

    fn frobenius_norm(&self) -> f64 {
        self.left
            .frobenius_norm()
            .hypot(self.right.frobenius_norm())
    }
}
