use serde::Serialize;

use crate::densela::{invert_upper_triangular, qr_householder, singular_values};
use crate::error::{Error, Result};
use crate::matio::{DenseMatrix, Operand};
use crate::rng::{mix, CounterRng};
use crate::sketch::{recommend_params, ParamConstants, Sketch, SketchKind, SketchSpec};

const JL_TAG: u64 = 0x04;
const RANK_TOL: f64 = 1e-10;
/// Columns of `A G` formed per pass when accumulating row norms.
const COLUMN_BLOCK: usize = 64;

#[derive(Clone, Copy, Debug)]
pub struct LeverageOptions {
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub constants: ParamConstants,
    /// The row-norm JL projection has `t = ceil(jl_constant * ln(n) / eps^2)` columns.
    pub jl_constant: f64,
}

impl LeverageOptions {
    pub fn new(eps: f64, delta: f64, seed: u64) -> Self {
        LeverageOptions {
            eps,
            delta,
            seed,
            constants: ParamConstants::default(),
            jl_constant: 8.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LeverageResult {
    /// One score per row of `A`.
    pub scores: Vec<f64>,
    pub eps_used: f64,
    pub sketch_spec_used: SketchSpec,
    /// Columns of the JL projection.
    pub jl_dim: usize,
}

/// Approximate leverage scores of a full-column-rank `A`.
///
/// `R` from the QR factorization of `Π A` makes `A R^{-1}` nearly orthonormal;
/// its squared row norms are then estimated through a dense Rademacher
/// projection `G = R^{-1} Π'` as the squared row norms of `A G`.
pub fn approx_leverage_scores(a: &dyn Operand, opts: &LeverageOptions) -> Result<LeverageResult> {
    let (n, d) = (a.rows(), a.cols());
    if d == 0 || n == 0 {
        return Err(Error::param("A must be nonempty"));
    }
    if !(opts.jl_constant > 0.0) {
        return Err(Error::param("jl_constant must be positive"));
    }
    let params = recommend_params(
        d,
        opts.eps,
        opts.delta,
        SketchKind::OsnapGlobal,
        &opts.constants,
    )?;
    let spec = params.to_spec(n, opts.seed);
    let sk = Sketch::new(spec)?;
    let sa = sk.apply_compact(a)?.matrix;
    if sa.rows() < d {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let r = qr_householder(&sa)?.r;
    let sv = singular_values(&r);
    let (top, bottom) = (sv[0], sv[d - 1]);
    if !(bottom > RANK_TOL * top) {
        return Err(Error::RankDeficient {
            ratio: if top > 0.0 { bottom / top } else { 0.0 },
        });
    }
    let r_inv = invert_upper_triangular(&r)?;

    let t = ((opts.jl_constant * (n as f64).ln() / (opts.eps * opts.eps)).ceil() as usize).max(1);
    let mut rng = CounterRng::new(mix(opts.seed, JL_TAG));
    let scale = 1.0 / (t as f64).sqrt();
    let jl = DenseMatrix::from_fn(d, t, |_, _| rng.next_sign() * scale);
    let g = r_inv.matmul(&jl)?;

    let mut scores = vec![0.0; n];
    let mut start = 0;
    while start < t {
        let end = (start + COLUMN_BLOCK).min(t);
        let block: Vec<usize> = (start..end).collect();
        let ag = a.mul_dense(&g.select_columns(&block))?;
        for (s, v) in scores.iter_mut().zip(ag.row_norms_squared()) {
            *s += v;
        }
        start = end;
    }
    Ok(LeverageResult {
        scores,
        eps_used: opts.eps,
        sketch_spec_used: spec,
        jl_dim: t,
    })
}
