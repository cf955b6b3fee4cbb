use crate::error::{Error, Result};
use crate::matio::{dot, DenseMatrix};

/// Thin QR factorization `A = QR`.
#[derive(Clone, Debug)]
pub struct QRResult {
    /// `m x d`, orthonormal columns.
    pub q: DenseMatrix,
    /// `d x d`, upper triangular with nonnegative diagonal.
    pub r: DenseMatrix,
}

/// Householder QR of a tall matrix (`rows >= cols`).
///
/// The diagonal of `R` is made nonnegative by flipping the signs of matching
/// rows of `R` and columns of `Q`, so the factorization is unique for full
/// column rank input.
pub fn qr_householder(a: &DenseMatrix) -> Result<QRResult> {
    let (m, d) = a.shape();
    if m < d {
        return Err(Error::dim(format!(
            "QR needs at least as many rows as columns, got {m}x{d}"
        )));
    }
    let mut work = a.clone();
    // Householder vectors, v_k stored in rows k..m of column k.
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut betas = Vec::with_capacity(d);

    for k in 0..d {
        let x = &work.col(k)[k..];
        let alpha = crate::matio::norm2(x);
        let mut v = x.to_vec();
        let beta = if alpha == 0.0 {
            0.0
        } else {
            let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
            v[0] += sign * alpha;
            let vnorm2 = dot(&v, &v);
            if vnorm2 == 0.0 {
                0.0
            } else {
                2.0 / vnorm2
            }
        };
        if beta != 0.0 {
            for j in k..d {
                let col = &mut work.col_mut(j)[k..];
                let t = beta * dot(&v, col);
                for (c, vi) in col.iter_mut().zip(&v) {
                    *c -= t * vi;
                }
            }
        }
        vs.push(v);
        betas.push(beta);
    }

    let mut r = DenseMatrix::from_fn(d, d, |i, j| if i <= j { work[(i, j)] } else { 0.0 });

    // Q = H_0 H_1 ... H_{d-1} applied to the first d columns of I.
    let mut q = DenseMatrix::from_fn(m, d, |i, j| if i == j { 1.0 } else { 0.0 });
    for k in (0..d).rev() {
        let beta = betas[k];
        if beta == 0.0 {
            continue;
        }
        let v = &vs[k];
        for j in 0..d {
            let col = &mut q.col_mut(j)[k..];
            let t = beta * dot(v, col);
            if t != 0.0 {
                for (c, vi) in col.iter_mut().zip(v) {
                    *c -= t * vi;
                }
            }
        }
    }

    for i in 0..d {
        if r[(i, i)] < 0.0 {
            for j in i..d {
                r[(i, j)] = -r[(i, j)];
            }
            q.col_mut(i).iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(QRResult { q, r })
}
