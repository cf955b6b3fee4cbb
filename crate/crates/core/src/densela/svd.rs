use super::qr::qr_householder;
use crate::error::{Error, Result};
use crate::matio::{dot, norm2, DenseMatrix};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(sigma) V^T` with `r = min(rows, cols)` triplets.
#[derive(Clone, Debug)]
pub struct SVDResult {
    /// `rows x r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Nonincreasing, nonnegative.
    pub sigma: Vec<f64>,
    /// `cols x r`, orthonormal columns.
    pub v: DenseMatrix,
}

impl SVDResult {
    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        us.scale_columns(&self.sigma);
        us.matmul_t(&self.v).expect("factor shapes agree")
    }

    /// Keeps the leading `k` singular triplets.
    pub fn truncate_rank_k(&self, k: usize) -> Result<SVDResult> {
        if k > self.sigma.len() {
            return Err(Error::param(format!(
                "rank {k} exceeds the {} available singular values",
                self.sigma.len()
            )));
        }
        Ok(SVDResult {
            u: self.u.leading_columns(k),
            sigma: self.sigma[..k].to_vec(),
            v: self.v.leading_columns(k),
        })
    }

    /// `sqrt(sum_{i >= k} sigma_i^2)`: the Frobenius error of the best rank-k
    /// approximation.
    pub fn tail_norm(&self, k: usize) -> f64 {
        norm2(&self.sigma[k.min(self.sigma.len())..])
    }
}

/// Free-function form of [`SVDResult::truncate_rank_k`].
pub fn truncate_rank_k(svd: &SVDResult, k: usize) -> Result<SVDResult> {
    svd.truncate_rank_k(k)
}

/// One-sided Jacobi SVD.
///
/// Tall input is first reduced by Householder QR so the rotations act on a
/// square triangular factor; wide input is handled through its transpose.
pub fn svd(a: &DenseMatrix) -> SVDResult {
    let (m, d) = a.shape();
    if m < d {
        let t = svd(&a.transpose());
        return SVDResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    if m > d {
        let qr = qr_householder(a).expect("tall input");
        let inner = svd_square(&qr.r);
        let u = qr.q.matmul(&inner.u).expect("factor shapes agree");
        return SVDResult {
            u,
            sigma: inner.sigma,
            v: inner.v,
        };
    }
    svd_square(a)
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let (m, d) = a.shape();
    if m < d {
        return singular_values(&a.transpose());
    }
    let base = if m > d {
        qr_householder(a).expect("tall input").r
    } else {
        a.clone()
    };
    let (w, _) = jacobi_rotate(base, false);
    let mut sigma: Vec<f64> = (0..w.cols()).map(|j| norm2(w.col(j))).collect();
    sigma.sort_by(|x, y| y.total_cmp(x));
    sigma
}

fn svd_square(a: &DenseMatrix) -> SVDResult {
    let n = a.rows();
    let (w, v) = jacobi_rotate(a.clone(), true);
    let v = v.expect("requested");
    let norms: Vec<f64> = (0..n).map(|j| norm2(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v = v.select_columns(&order);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let null_tol = smax * n as f64 * f64::EPSILON;

    let mut u = DenseMatrix::zeros(n, n);
    let mut filled = Vec::with_capacity(n);
    for (pos, &j) in order.iter().enumerate() {
        if sigma[pos] > null_tol && sigma[pos] > 0.0 {
            let inv = 1.0 / sigma[pos];
            for (dst, src) in u.col_mut(pos).iter_mut().zip(w.col(j)) {
                *dst = src * inv;
            }
            filled.push(pos);
        }
    }
    complete_orthonormal(&mut u, &filled);
    SVDResult { u, sigma, v }
}

/// Rotates column pairs of `w` until they are mutually orthogonal.
fn jacobi_rotate(mut w: DenseMatrix, track_v: bool) -> (DenseMatrix, Option<DenseMatrix>) {
    let n = w.cols();
    let rows = w.rows();
    let mut v = track_v.then(|| DenseMatrix::identity(n));
    let tol = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(w.col(p), w.col(p));
                let beta = dot(w.col(q), w.col(q));
                let gamma = dot(w.col(p), w.col(q));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(w.data_mut(), rows, p, q, c, s);
                if let Some(v) = v.as_mut() {
                    rotate_columns(v.data_mut(), n, p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

#[inline]
fn rotate_columns(data: &mut [f64], rows: usize, p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = data.split_at_mut(q * rows);
    let cp = &mut left[p * rows..(p + 1) * rows];
    let cq = &mut right[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the columns of `u` not listed in `filled` with unit vectors
/// orthogonal to everything already present.
fn complete_orthonormal(u: &mut DenseMatrix, filled: &[usize]) {
    let n = u.rows();
    let mut basis: Vec<usize> = filled.to_vec();
    for pos in 0..u.cols() {
        if filled.contains(&pos) {
            continue;
        }
        // Pick the coordinate axis with the largest component outside the span.
        let best = (0..n)
            .max_by(|&i, &k| {
                let ri = 1.0 - basis.iter().map(|&b| u[(i, b)].powi(2)).sum::<f64>();
                let rk = 1.0 - basis.iter().map(|&b| u[(k, b)].powi(2)).sum::<f64>();
                ri.total_cmp(&rk)
            })
            .unwrap_or(0);
        let mut x = vec![0.0; n];
        x[best] = 1.0;
        for _ in 0..2 {
            for &b in &basis {
                let proj = dot(u.col(b), &x);
                for (xi, ui) in x.iter_mut().zip(u.col(b)) {
                    *xi -= proj * ui;
                }
            }
        }
        let nrm = norm2(&x);
        for (dst, xi) in u.col_mut(pos).iter_mut().zip(&x) {
            *dst = xi / nrm;
        }
        basis.push(pos);
    }
}
