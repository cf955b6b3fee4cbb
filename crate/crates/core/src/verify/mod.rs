//! Monte Carlo checks of the embedding guarantees against exact dense oracles.
//!
//! Trial `t` of an experiment with base seed `seed0` draws everything from
//! `mix(seed0, t)`, so statistics are identical under any thread schedule.
//! Success-rate experiments compare against a one-sided 99% binomial
//! threshold rather than the raw target probability.

mod report;

pub use report::{
    binomial_max_failures, binomial_min_successes, Comparison, VerificationReport, Z_99,
};

use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use crate::densela::{qr_householder, singular_values};
use crate::error::{Error, Result};
use crate::hashkit::is_prime;
use crate::matio::{DenseMatrix, Operand, SparseMatrixCSC};
use crate::rng::{mix, CounterRng};
use crate::sketch::{Sketch, SketchKind, SketchParams, SketchSpec};
use crate::solvers::HStack;

/// Success probability every embedding is required to reach.
pub const EMBEDDING_TARGET: f64 = 2.0 / 3.0;

/// Largest `p^k` that [`hash_independence_exhaustive`] will enumerate.
pub const MAX_ENUMERATION: u64 = 1 << 20;

fn trial_seeds(seed0: u64, trials: usize) -> Vec<u64> {
    (0..trials as u64).map(|t| mix(seed0, t)).collect()
}

fn require_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidExperiment(
            "zero trials leave the statistic undefined".into(),
        ));
    }
    Ok(())
}

/// Q-factor of an `n x d` standard Gaussian matrix: a uniformly random
/// `d`-dimensional subspace with an orthonormal basis.
pub fn random_orthonormal(n: usize, d: usize, seed: u64) -> Result<DenseMatrix> {
    if n < d {
        return Err(Error::param(format!(
            "need n >= d for an orthonormal basis, got n={n}, d={d}"
        )));
    }
    let mut rng = CounterRng::new(seed);
    let g = DenseMatrix::from_fn(n, d, |_, _| rng.next_normal());
    Ok(qr_householder(&g)?.q)
}

/// All `d` singular values of `Π U`, computed from the compacted product.
/// Missing rows contribute zero singular values.
fn sketched_singular_values(sketch: &Sketch, u: &DenseMatrix) -> Result<Vec<f64>> {
    let c = sketch.apply_compact(u)?;
    let mut sv = if c.matrix.rows() == 0 {
        Vec::new()
    } else {
        singular_values(&c.matrix)
    };
    sv.resize(u.cols(), 0.0);
    Ok(sv)
}

/// Fraction of trials in which a fresh sketch from `family` keeps every
/// singular value of `Π U` inside `[1 - eps, 1 + eps]` for a fresh random
/// `n x d` orthonormal `U`.
pub fn embedding_success_rate(
    family: &SketchParams,
    n: usize,
    d: usize,
    eps: f64,
    trials: usize,
    seed0: u64,
) -> Result<VerificationReport> {
    require_trials(trials)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1), got {eps}")));
    }
    family.to_spec(n, 0).validate()?;
    let seeds = trial_seeds(seed0, trials);
    let outcomes: Vec<bool> = seeds
        .par_iter()
        .map(|&ts| -> Result<bool> {
            let u = random_orthonormal(n, d, mix(ts, 1))?;
            let sketch = Sketch::new(family.to_spec(n, mix(ts, 2)))?;
            let sv = sketched_singular_values(&sketch, &u)?;
            Ok(sv.iter().all(|&x| x >= 1.0 - eps && x <= 1.0 + eps))
        })
        .collect::<Result<_>>()?;
    let successes = outcomes.iter().filter(|&&ok| ok).count();
    let threshold = binomial_min_successes(trials, EMBEDDING_TARGET) as f64 / trials as f64;
    Ok(VerificationReport::new(
        "embedding",
        json!({
            "kind": family.kind.to_string(),
            "m": family.m,
            "s": family.s,
            "independence_k": family.independence_k,
            "n": n,
            "d": d,
            "eps": eps,
            "seed0": seed0,
            "successes": successes,
        }),
        trials,
        successes as f64 / trials as f64,
        EMBEDDING_TARGET,
        threshold,
        Comparison::AtLeast,
        seeds,
    ))
}

fn frobenius_trial(u: &DenseMatrix, m: usize, seed: u64) -> Result<f64> {
    let sketch = Sketch::new(SketchSpec {
        kind: SketchKind::Tz,
        m,
        n: u.rows(),
        s: 1,
        independence_k: 2,
        seed,
    })?;
    let pu = sketch.apply_compact(u)?.matrix;
    let d = u.cols();
    let mut s = pu.t_matmul(&pu)?;
    for i in 0..d {
        s[(i, i)] -= 1.0;
    }
    Ok(s.data().iter().map(|v| v * v).sum())
}

fn moment_report(
    params: serde_json::Value,
    values: Vec<f64>,
    d: usize,
    m: usize,
    seeds: Vec<u64>,
) -> VerificationReport {
    let trials = values.len();
    let mean = values.iter().sum::<f64>() / trials as f64;
    let bound = (d * d + d) as f64 / m as f64;
    let threshold = bound * (1.0 + 4.0 / (trials as f64).sqrt());
    VerificationReport::new(
        "frobenius",
        params,
        trials,
        mean,
        bound,
        threshold,
        Comparison::AtMost,
        seeds,
    )
}

/// Mean of `||S - I||_F^2` with `S = (Π U)^T (Π U)` for the s=1 sketch, against
/// `(d^2 + d) / m`. A fresh `U` is drawn per trial.
pub fn frobenius_moment_check(
    n: usize,
    d: usize,
    m: usize,
    trials: usize,
    seed0: u64,
) -> Result<VerificationReport> {
    require_trials(trials)?;
    if m == 0 {
        return Err(Error::param("m must be at least 1"));
    }
    let seeds = trial_seeds(seed0, trials);
    let values = seeds
        .par_iter()
        .map(|&ts| frobenius_trial(&random_orthonormal(n, d, mix(ts, 1))?, m, mix(ts, 2)))
        .collect::<Result<Vec<_>>>()?;
    let params = json!({"n": n, "d": d, "m": m, "seed0": seed0});
    Ok(moment_report(params, values, d, m, seeds))
}

/// [`frobenius_moment_check`] with a caller-supplied orthonormal basis that is
/// kept fixed across trials.
pub fn frobenius_moment_check_with_basis(
    u: &DenseMatrix,
    m: usize,
    trials: usize,
    seed0: u64,
) -> Result<VerificationReport> {
    require_trials(trials)?;
    if m == 0 {
        return Err(Error::param("m must be at least 1"));
    }
    let seeds = trial_seeds(seed0, trials);
    let values = seeds
        .par_iter()
        .map(|&ts| frobenius_trial(u, m, mix(ts, 2)))
        .collect::<Result<Vec<_>>>()?;
    let params = json!({"n": u.rows(), "d": u.cols(), "m": m, "seed0": seed0, "basis": "fixed"});
    Ok(moment_report(params, values, u.cols(), m, seeds))
}

/// Fraction of trials with `||(Π A)^T (Π B) - A^T B||_F > 1.5 eps ||A||_F ||B||_F`,
/// checked against `delta_target` plus binomial slack.
pub fn matrix_product_error_check(
    a: &dyn Operand,
    b: &dyn Operand,
    family: &SketchParams,
    trials: usize,
    eps: f64,
    seed0: u64,
    delta_target: f64,
) -> Result<VerificationReport> {
    require_trials(trials)?;
    if a.rows() != b.rows() {
        return Err(Error::dim(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    if !(delta_target > 0.0 && delta_target < 1.0) {
        return Err(Error::param(format!(
            "delta must lie in (0, 1), got {delta_target}"
        )));
    }
    let n = a.rows();
    family.to_spec(n, 0).validate()?;
    let exact = a.to_dense().t_matmul(&b.to_dense())?;
    let limit = 1.5 * eps * a.frobenius_norm() * b.frobenius_norm();
    let both = HStack { left: a, right: b };
    let split = a.cols();
    let seeds = trial_seeds(seed0, trials);
    let errors = seeds
        .par_iter()
        .map(|&ts| -> Result<f64> {
            let sketch = Sketch::new(family.to_spec(n, ts))?;
            let y = sketch.apply_compact(&both)?.matrix;
            let cols: Vec<usize> = (0..y.cols()).collect();
            let pa = y.select_columns(&cols[..split]);
            let pb = y.select_columns(&cols[split..]);
            Ok(pa.t_matmul(&pb)?.sub(&exact)?.frobenius_norm())
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = errors.iter().filter(|&&e| e > limit).count();
    let max_ratio = if limit > 0.0 {
        errors.iter().fold(0.0f64, |acc, &e| acc.max(e / limit))
    } else {
        0.0
    };
    let threshold = binomial_max_failures(trials, delta_target) as f64 / trials as f64;
    Ok(VerificationReport::new(
        "product",
        json!({
            "kind": family.kind.to_string(),
            "m": family.m,
            "s": family.s,
            "n": n,
            "a_cols": a.cols(),
            "b_cols": b.cols(),
            "eps": eps,
            "seed0": seed0,
            "failures": failures,
            "max_error_over_limit": max_ratio,
        }),
        trials,
        failures as f64 / trials as f64,
        delta_target,
        threshold,
        Comparison::AtMost,
        seeds,
    ))
}

/// Enumerates every degree-`(k-1)` polynomial over GF(p) and, for every set of
/// `k` distinct inputs, counts how often each output `k`-tuple occurs. Exact
/// `k`-wise independence means every tuple occurs exactly once; the statistic
/// is the largest deviation from one.
pub fn hash_independence_exhaustive(k: usize, p: u64) -> Result<VerificationReport> {
    if !is_prime(p) {
        return Err(Error::param(format!("{p} is not prime")));
    }
    if k == 0 || k as u64 > p {
        return Err(Error::param(format!("need 1 <= k <= p, got k={k}, p={p}")));
    }
    let cases = p
        .checked_pow(k as u32)
        .filter(|&c| c <= MAX_ENUMERATION)
        .ok_or_else(|| {
            Error::param(format!(
                "{p}^{k} coefficient vectors is too many to enumerate"
            ))
        })? as usize;
    let pu = p as usize;

    // values[c * p + x] = h_c(x), coefficient vector c in base-p digits.
    let mut values = vec![0u64; cases * pu];
    for c in 0..cases {
        let mut rest = c as u64;
        let coeffs: Vec<u64> = (0..k)
            .map(|_| {
                let digit = rest % p;
                rest /= p;
                digit
            })
            .collect();
        let h = crate::hashkit::KWiseHash::from_coefficients(coeffs, p, p)?;
        for x in 0..p {
            values[c * pu + x as usize] = h.eval(x);
        }
    }

    let mut worst = 0u64;
    let mut subsets = 0usize;
    let mut counts = vec![0u64; cases];
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        subsets += 1;
        counts.iter_mut().for_each(|c| *c = 0);
        for c in 0..cases {
            let row = &values[c * pu..(c + 1) * pu];
            let tuple = subset
                .iter()
                .fold(0usize, |acc, &x| acc * pu + row[x] as usize);
            counts[tuple] += 1;
        }
        for &cnt in &counts {
            worst = worst.max(cnt.abs_diff(1));
        }
        // Next k-subset of 0..p in lexicographic order.
        let Some(i) = (0..k).rev().find(|&i| subset[i] < pu - k + i) else {
            break;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }

    Ok(VerificationReport::new(
        "hash-independence",
        json!({"k": k, "p": p, "coefficient_vectors": cases, "input_sets": subsets}),
        cases,
        worst as f64,
        0.0,
        0.0,
        Comparison::AtMost,
        Vec::new(),
    ))
}

/// Random `n x d` CSC matrix with about `nnz` entries (duplicate positions merge).
pub fn random_sparse(n: usize, d: usize, nnz: usize, seed: u64) -> Result<SparseMatrixCSC> {
    if nnz > 0 && (n == 0 || d == 0) {
        return Err(Error::param("cannot place entries in an empty shape"));
    }
    let mut rng = CounterRng::new(seed);
    let triplets = (0..nnz)
        .map(|_| {
            let i = rng.below(n as u64) as usize;
            let j = rng.below(d as u64) as usize;
            (i, j, rng.next_normal())
        })
        .collect();
    SparseMatrixCSC::from_triplets(n, d, triplets)
}

/// Times `apply_sparse` on random `spec.n x d` matrices at each requested nnz
/// level (best of `reps`). The statistic is the largest ratio of time growth
/// to nnz growth between adjacent nonempty levels; linear cost keeps it near
/// one. Empty levels are timed but excluded from the ratios.
pub fn nnz_scaling_benchmark(
    spec: &SketchSpec,
    d: usize,
    nnz_levels: &[usize],
    reps: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let mut levels = nnz_levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let positive: Vec<usize> = levels.iter().copied().filter(|&l| l > 0).collect();
    if positive.len() < 3 {
        return Err(Error::InvalidExperiment(
            "need at least 3 distinct nonzero nnz levels".into(),
        ));
    }
    if positive[positive.len() - 1] < 100 * positive[0] {
        return Err(Error::InvalidExperiment(
            "nnz levels must span at least a factor of 100".into(),
        ));
    }
    let reps = reps.max(1);
    let sketch = Sketch::new(*spec)?;

    let mut actual = Vec::with_capacity(levels.len());
    let mut times = Vec::with_capacity(levels.len());
    for (li, &level) in levels.iter().enumerate() {
        let a = random_sparse(spec.n, d, level, mix(seed, li as u64))?;
        let mut best = f64::INFINITY;
        for _ in 0..reps {
            let start = Instant::now();
            let out = sketch.apply_sparse(&a)?;
            best = best.min(start.elapsed().as_secs_f64());
            std::hint::black_box(out);
        }
        actual.push(a.nnz());
        times.push(best);
    }

    let timed: Vec<(usize, f64)> = actual
        .iter()
        .copied()
        .zip(times.iter().copied())
        .filter(|&(z, _)| z > 0)
        .collect();
    let statistic = timed
        .windows(2)
        .map(|w| {
            let nnz_ratio = w[1].0 as f64 / w[0].0 as f64;
            let time_ratio = w[1].1 / w[0].1.max(1e-9);
            time_ratio / nnz_ratio
        })
        .fold(0.0f64, f64::max);

    let mut report = VerificationReport::new(
        "nnz-scaling",
        json!({
            "kind": spec.kind.to_string(),
            "m": spec.m,
            "n": spec.n,
            "s": spec.s,
            "d": d,
            "nnz": actual,
            "reps": reps,
        }),
        levels.len(),
        statistic,
        1.0,
        2.0,
        Comparison::AtMost,
        vec![seed],
    );
    report.wall_times = Some(times);
    Ok(report)
}
