//! Sparse oblivious subspace embeddings.
//!
//! The crate provides seed-defined sparse embedding matrices (the s=1
//! CountSketch-style construction and two OSNAP variants with `s` nonzeros
//! per column), applies them to dense or compressed-sparse-column input in
//! time proportional to `s * nnz(A)`, and builds three solvers on top:
//! sketch-and-solve least squares, approximate leverage scores and rank-k
//! approximation. The [`verify`] module re-checks the quantitative guarantees
//! by Monte Carlo against exact dense oracles from [`densela`].

// `!(x > t)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densela;
pub mod error;
pub mod hashkit;
pub mod matio;
pub mod rng;
pub mod sketch;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use hashkit::KWiseHash;
pub use matio::{DenseMatrix, Matrix, Operand, SparseMatrixCSC};
pub use sketch::{
    recommend_params, ParamConstants, Sketch, SketchKind, SketchParams, SketchSpec, SketchState,
};
