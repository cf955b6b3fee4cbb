use serde::Serialize;

use crate::densela::{qr_householder, svd};
use crate::error::{Error, Result};
use crate::matio::{DenseMatrix, Operand};
use crate::sketch::{recommend_params, ParamConstants, Sketch, SketchKind, SketchSpec};

#[derive(Clone, Copy, Debug)]
pub struct LowRankOptions {
    pub k: usize,
    pub eps: f64,
    pub seed: u64,
    /// Failure probability used when sizing the sketch.
    pub delta: f64,
    pub constants: ParamConstants,
    /// Overrides the recommended row count `m`; `s` is capped at `m`.
    pub sketch_rows: Option<usize>,
}

impl LowRankOptions {
    pub fn new(k: usize, eps: f64, seed: u64) -> Self {
        LowRankOptions {
            k,
            eps,
            seed,
            delta: 1.0 / 3.0,
            constants: ParamConstants::default(),
            sketch_rows: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LowRankResult {
    /// `n x k`.
    #[serde(skip)]
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    /// `d x k`.
    #[serde(skip)]
    pub v: DenseMatrix,
    /// `||A - U diag(sigma) V^T||_F`.
    pub error_frobenius: f64,
    pub sketch_spec_used: SketchSpec,
}

impl LowRankResult {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        us.scale_columns(&self.sigma);
        us.matmul_t(&self.v).expect("factor shapes agree")
    }
}

/// Rank-`k` approximation from the row space of a sketch `Y = Π A`.
///
/// An orthonormal basis `V_m` of the row space of `Y` is computed, `A` is
/// projected onto it (`B = A V_m`), and the best rank-`k` approximation of
/// `B` is mapped back: `A ≈ U Σ (V_m V_B)^T`. The sketch embeds a
/// `k`-dimensional space at accuracy `eps / 3`.
pub fn low_rank_approx(a: &dyn Operand, opts: &LowRankOptions) -> Result<LowRankResult> {
    let (n, d) = (a.rows(), a.cols());
    let k = opts.k;
    if k == 0 || k > n.min(d) {
        return Err(Error::param(format!(
            "rank k={k} must lie in [1, {}]",
            n.min(d)
        )));
    }
    let mut params = recommend_params(
        k,
        opts.eps / 3.0,
        opts.delta,
        SketchKind::OsnapGlobal,
        &opts.constants,
    )?;
    if let Some(m) = opts.sketch_rows {
        if m < k {
            return Err(Error::param(format!("sketch_rows={m} is below k={k}")));
        }
        params.m = m;
        params.s = params.s.min(m);
    }
    let spec = params.to_spec(n, opts.seed);
    let sk = Sketch::new(spec)?;
    let y = sk.apply_compact(a)?.matrix;

    // Orthonormal basis of the row space of Y (the column space of Y^T).
    let basis = if y.rows() == 0 {
        DenseMatrix::identity(d).leading_columns(k)
    } else if y.rows() < d {
        qr_householder(&y.transpose())?.q
    } else {
        let r = qr_householder(&y)?.r;
        qr_householder(&r.transpose())?.q
    };
    if basis.cols() < k {
        return Err(Error::param(format!(
            "the sketch spans {} directions, fewer than k={k}",
            basis.cols()
        )));
    }

    let b = a.mul_dense(&basis)?;
    let small = svd(&b).truncate_rank_k(k)?;
    let v = basis.matmul(&small.v)?;
    let mut result = LowRankResult {
        u: small.u,
        sigma: small.sigma,
        v,
        error_frobenius: 0.0,
        sketch_spec_used: spec,
    };
    result.error_frobenius = a.to_dense().sub(&result.reconstruct())?.frobenius_norm();
    Ok(result)
}
