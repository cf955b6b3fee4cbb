use serde::Serialize;

use super::HStack;
use crate::densela::solve_least_squares_exact;
use crate::error::{Error, Result};
use crate::matio::{DenseMatrix, Operand};
use crate::rng::mix3;
use crate::sketch::{recommend_params, ParamConstants, Sketch, SketchKind, SketchSpec};

const REPEAT_TAG: u64 = 0x05;

#[derive(Clone, Copy, Debug)]
pub struct RegressionOptions {
    pub eps: f64,
    pub delta: f64,
    pub kind: SketchKind,
    pub seed: u64,
    /// Independent sketches to try; the one with the smallest true residual wins.
    pub repeats: usize,
    pub constants: ParamConstants,
}

impl RegressionOptions {
    pub fn new(eps: f64, delta: f64, kind: SketchKind, seed: u64) -> Self {
        RegressionOptions {
            eps,
            delta,
            kind,
            seed,
            repeats: 1,
            constants: ParamConstants::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegressionResult {
    /// `d x 1` solution of the sketched problem.
    #[serde(skip)]
    pub x: DenseMatrix,
    /// `||Π A x - Π b||`.
    pub sketched_residual: f64,
    /// `||A x - b||`.
    pub residual: f64,
    pub sketch_spec_used: SketchSpec,
}

/// Solves `argmin_x ||Π A x - Π b||` for a sketch sized to embed the
/// `(d+1)`-dimensional span of `A`'s columns and `b`.
pub fn sketched_regression(
    a: &dyn Operand,
    b: &DenseMatrix,
    opts: &RegressionOptions,
) -> Result<RegressionResult> {
    let (n, d) = (a.rows(), a.cols());
    if b.rows() != n || b.cols() != 1 {
        return Err(Error::dim(format!(
            "A is {n}x{d} but b is {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    if d == 0 {
        return Err(Error::param("A must have at least one column"));
    }
    if opts.repeats == 0 {
        return Err(Error::param("repeats must be at least 1"));
    }
    let params = recommend_params(d + 1, opts.eps, opts.delta, opts.kind, &opts.constants)?;
    let stacked = HStack { left: a, right: b };

    let mut best: Option<RegressionResult> = None;
    for r in 0..opts.repeats {
        let seed = if r == 0 {
            opts.seed
        } else {
            mix3(opts.seed, REPEAT_TAG, r as u64)
        };
        let spec = params.to_spec(n, seed);
        let sk = Sketch::new(spec)?;
        let sab = sk.apply_compact(&stacked)?.matrix;
        if sab.rows() < d {
            return Err(Error::dim(format!(
                "sketch kept {} rows, fewer than the {d} unknowns",
                sab.rows()
            )));
        }
        let cols: Vec<usize> = (0..d).collect();
        let sa = sab.select_columns(&cols);
        let sb = sab.select_columns(&[d]);
        let x = solve_least_squares_exact(&sa, &sb)?;
        let sketched_residual = sa.matmul(&x)?.sub(&sb)?.frobenius_norm();
        let residual = a.mul_dense(&x)?.sub(b)?.frobenius_norm();
        let candidate = RegressionResult {
            x,
            sketched_residual,
            residual,
            sketch_spec_used: spec,
        };
        if best
            .as_ref()
            .is_none_or(|cur| candidate.residual < cur.residual)
        {
            best = Some(candidate);
        }
    }
    Ok(best.expect("repeats >= 1"))
}
