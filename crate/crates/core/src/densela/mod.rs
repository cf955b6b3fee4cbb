//! Dense factorizations for the small matrices left after sketching, and the
//! exact oracles the verification code compares against.

mod qr;
mod svd;

pub use qr::{qr_householder, QRResult};
pub use svd::{singular_values, svd, truncate_rank_k, SVDResult};

use crate::error::{Error, Result};
use crate::matio::DenseMatrix;

/// Relative threshold below which a diagonal entry of `R` counts as zero.
const DIAGONAL_TOL: f64 = 1e-12;

/// Inverse of a square upper triangular matrix by column-wise back-substitution.
pub fn invert_upper_triangular(r: &DenseMatrix) -> Result<DenseMatrix> {
    let n = r.rows();
    if r.cols() != n {
        return Err(Error::dim(format!("{}x{} is not square", n, r.cols())));
    }
    let scale = r.max_abs();
    for i in 0..n {
        if !(r[(i, i)].abs() > DIAGONAL_TOL * scale) {
            return Err(Error::Singular { index: i });
        }
    }
    let mut inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        // Column j of R^{-1} solves R x = e_j and vanishes below row j.
        for i in (0..=j).rev() {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in (i + 1)..=j {
                s -= r[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = s / r[(i, i)];
        }
    }
    Ok(inv)
}

/// `argmin_x ||A x - b||` through Householder QR.
///
/// Directions whose `R` diagonal falls below `1e-12 * ||A||_F` are dropped
/// (the matching solution entries are set to zero), so for rank-deficient `A`
/// the result minimizes the residual but is not the minimum-norm solution.
pub fn solve_least_squares_exact(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::dim(format!(
            "A has {} rows but b has {}",
            a.rows(),
            b.rows()
        )));
    }
    let d = a.cols();
    let qr = qr_householder(a)?;
    let y = qr.q.t_matmul(b)?;
    let cutoff = DIAGONAL_TOL * a.frobenius_norm();
    let mut x = DenseMatrix::zeros(d, b.cols());
    for c in 0..b.cols() {
        for i in (0..d).rev() {
            let rii = qr.r[(i, i)];
            if rii.abs() <= cutoff {
                continue;
            }
            let mut s = y[(i, c)];
            for k in (i + 1)..d {
                s -= qr.r[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / rii;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = CounterRng::new(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.next_normal())
    }

    fn orthonormality_error(q: &DenseMatrix) -> f64 {
        let g = q.t_matmul(q).unwrap();
        g.sub(&DenseMatrix::identity(q.cols()))
            .unwrap()
            .frobenius_norm()
    }

    /// Cyclic Jacobi eigenvalues of a symmetric matrix, nonincreasing.
    fn jacobi_eigenvalues(mut s: DenseMatrix) -> Vec<f64> {
        let n = s.rows();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| s[(i, j)].powi(2))
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if s[(p, q)] == 0.0 {
                        continue;
                    }
                    let theta = (s[(q, q)] - s[(p, p)]) / (2.0 * s[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let (a, b) = (s[(k, p)], s[(k, q)]);
                        s[(k, p)] = c * a - sn * b;
                        s[(k, q)] = sn * a + c * b;
                    }
                    for k in 0..n {
                        let (a, b) = (s[(p, k)], s[(q, k)]);
                        s[(p, k)] = c * a - sn * b;
                        s[(q, k)] = sn * a + c * b;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| s[(i, i)]).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Largest singular value by power iteration on A^T A.
    fn power_norm(a: &DenseMatrix, iters: usize) -> f64 {
        let mut x = vec![1.0; a.cols()];
        let mut est = 0.0;
        for _ in 0..iters {
            let y = crate::matio::dense_mul_vec(a, &x);
            let z = crate::matio::dense_mul_vec(&a.transpose(), &y);
            let nz = crate::matio::norm2(&z);
            est = crate::matio::norm2(&y) / crate::matio::norm2(&x);
            x = z.iter().map(|v| v / nz).collect();
        }
        est
    }

    fn cholesky_solve(g: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
        let n = g.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut s = g[(j, j)];
            for k in 0..j {
                s -= l[(j, k)].powi(2);
            }
            l[(j, j)] = s.sqrt();
            for i in (j + 1)..n {
                let mut s = g[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / l[(j, j)];
            }
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        x
    }

    #[test]
    fn qr_of_identity() {
        let qr = qr_householder(&DenseMatrix::identity(5)).unwrap();
        assert!(
            qr.q.sub(&DenseMatrix::identity(5))
                .unwrap()
                .frobenius_norm()
                < 1e-15
        );
        assert!(
            qr.r.sub(&DenseMatrix::identity(5))
                .unwrap()
                .frobenius_norm()
                < 1e-15
        );
    }

    #[test]
    fn qr_of_orthonormal_columns_has_identity_r() {
        let u = qr_householder(&gaussian(30, 5, 1)).unwrap().q;
        let qr = qr_householder(&u).unwrap();
        assert!(
            qr.r.sub(&DenseMatrix::identity(5))
                .unwrap()
                .frobenius_norm()
                < 1e-10
        );
    }

    #[test]
    fn qr_reconstructs_random_input() {
        let a = gaussian(30, 5, 2);
        let qr = qr_householder(&a).unwrap();
        assert!(orthonormality_error(&qr.q) <= 1e-10 * 5.0);
        for i in 0..5 {
            assert!(qr.r[(i, i)] >= 0.0);
            for j in 0..i {
                assert_eq!(qr.r[(i, j)], 0.0);
            }
        }
        let back = qr.q.matmul(&qr.r).unwrap();
        assert!(back.sub(&a).unwrap().frobenius_norm() <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn qr_rejects_wide_input() {
        assert!(qr_householder(&gaussian(2, 3, 3)).is_err());
    }

    #[test]
    fn orthonormal_basis_properties() {
        for seed in 0..5 {
            let u = qr_householder(&gaussian(40, 6, seed)).unwrap().q;
            assert!(orthonormality_error(&u) <= 1e-10);
            assert!(u
                .row_norms_squared()
                .iter()
                .all(|&r| r.sqrt() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn svd_of_diagonal() {
        let s = svd(&DenseMatrix::from_diagonal(&[1.0, 3.0, 2.0]));
        assert!(s
            .sigma
            .iter()
            .zip([3.0, 2.0, 1.0])
            .all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn svd_of_orthonormal_columns() {
        let u = qr_householder(&gaussian(25, 4, 4)).unwrap().q;
        assert!(singular_values(&u).iter().all(|s| (s - 1.0).abs() < 1e-10));
    }

    #[test]
    fn svd_matches_gram_eigenvalues() {
        let a = gaussian(12, 4, 5);
        let ev = jacobi_eigenvalues(a.t_matmul(&a).unwrap());
        let s = svd(&a);
        for (sig, lam) in s.sigma.iter().zip(&ev) {
            assert!(
                (sig - lam.sqrt()).abs() <= 1e-8 * sig,
                "{sig} vs {}",
                lam.sqrt()
            );
        }
        assert!(orthonormality_error(&s.u) < 1e-10);
        assert!(orthonormality_error(&s.v) < 1e-10);
        assert!(s.reconstruct().sub(&a).unwrap().frobenius_norm() <= 1e-9 * a.frobenius_norm());
    }

    #[test]
    fn svd_of_wide_and_rank_deficient_input() {
        let a = gaussian(4, 9, 6);
        let s = svd(&a);
        assert_eq!(s.sigma.len(), 4);
        assert!(s.reconstruct().sub(&a).unwrap().frobenius_norm() <= 1e-9 * a.frobenius_norm());
        assert!(orthonormality_error(&s.u) < 1e-10 && orthonormality_error(&s.v) < 1e-10);

        // rank 2 embedded in 8x5
        let b = gaussian(8, 2, 7).matmul(&gaussian(2, 5, 8)).unwrap();
        let s = svd(&b);
        assert!(s.sigma[2] < 1e-12 * s.sigma[0]);
        assert!(orthonormality_error(&s.u) < 1e-10 && orthonormality_error(&s.v) < 1e-10);
        assert!(s.reconstruct().sub(&b).unwrap().frobenius_norm() <= 1e-9 * b.frobenius_norm());
    }

    #[test]
    fn singular_values_edge_cases() {
        assert_eq!(singular_values(&DenseMatrix::zeros(3, 2)), vec![0.0, 0.0]);
        let e = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(singular_values(&e), vec![1.0, 1.0]);
        let z = svd(&DenseMatrix::zeros(4, 3));
        assert!(orthonormality_error(&z.u) < 1e-12);
    }

    #[test]
    fn largest_singular_value_matches_power_method() {
        let a = gaussian(9, 6, 9);
        let top = singular_values(&a)[0];
        assert!((top - power_norm(&a, 1000)).abs() <= 1e-6 * top);
    }

    #[test]
    fn least_squares_consistent_system() {
        let a = gaussian(20, 4, 10);
        let x0 = gaussian(4, 1, 11);
        let b = a.matmul(&x0).unwrap();
        let x = solve_least_squares_exact(&a, &b).unwrap();
        let res = a.matmul(&x).unwrap().sub(&b).unwrap().frobenius_norm();
        assert!(res <= 1e-10 * b.frobenius_norm());
    }

    #[test]
    fn least_squares_identity() {
        let b = gaussian(5, 1, 12);
        let x = solve_least_squares_exact(&DenseMatrix::identity(5), &b).unwrap();
        assert!(x.sub(&b).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn least_squares_matches_normal_equations() {
        let a = gaussian(40, 6, 13);
        let b = gaussian(40, 1, 14);
        let x = solve_least_squares_exact(&a, &b).unwrap();
        let g = a.t_matmul(&a).unwrap();
        let atb = a.t_matmul(&b).unwrap();
        let x_ne = cholesky_solve(&g, atb.col(0));
        for (u, v) in x.col(0).iter().zip(&x_ne) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn least_squares_drops_dependent_columns() {
        let base = gaussian(15, 2, 15);
        let a = base.hstack(&base.select_columns(&[0])).unwrap();
        let b = gaussian(15, 1, 16);
        let x = solve_least_squares_exact(&a, &b).unwrap();
        let opt = solve_least_squares_exact(&base, &b).unwrap();
        let r = a.matmul(&x).unwrap().sub(&b).unwrap().frobenius_norm();
        let r_opt = base.matmul(&opt).unwrap().sub(&b).unwrap().frobenius_norm();
        assert!((r - r_opt).abs() < 1e-10);
        assert!(solve_least_squares_exact(&a, &gaussian(3, 1, 0)).is_err());
    }

    #[test]
    fn triangular_inverse() {
        assert_eq!(
            invert_upper_triangular(&DenseMatrix::identity(3)).unwrap(),
            DenseMatrix::identity(3)
        );
        let inv = invert_upper_triangular(&DenseMatrix::from_diagonal(&[2.0, 4.0])).unwrap();
        assert_eq!(inv, DenseMatrix::from_diagonal(&[0.5, 0.25]));

        let mut rng = CounterRng::new(17);
        let r = DenseMatrix::from_fn(6, 6, |i, j| {
            if i == j {
                2.0 + rng.next_f64()
            } else if i < j {
                rng.next_normal()
            } else {
                0.0
            }
        });
        let inv = invert_upper_triangular(&r).unwrap();
        let err = r
            .matmul(&inv)
            .unwrap()
            .sub(&DenseMatrix::identity(6))
            .unwrap()
            .frobenius_norm();
        assert!(err <= 1e-10 * 6.0);
    }

    #[test]
    fn triangular_inverse_reports_singular_index() {
        let r = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 3.0],
        ])
        .unwrap();
        assert!(matches!(
            invert_upper_triangular(&r),
            Err(Error::Singular { index: 1 })
        ));
    }

    #[test]
    fn truncation_error_is_tail_norm() {
        let s = svd(&DenseMatrix::from_diagonal(&[3.0, 2.0, 1.0]));
        let t = truncate_rank_k(&s, 2).unwrap();
        let err = DenseMatrix::from_diagonal(&[3.0, 2.0, 1.0])
            .sub(&t.reconstruct())
            .unwrap()
            .frobenius_norm();
        assert!((err - 1.0).abs() < 1e-14);
        assert!(truncate_rank_k(&s, 4).is_err());

        let a = gaussian(10, 8, 18);
        let s = svd(&a);
        let full = s.truncate_rank_k(8).unwrap().reconstruct();
        assert!(full.sub(&a).unwrap().frobenius_norm() < 1e-12 * a.frobenius_norm());
        let mut prev = f64::INFINITY;
        for k in 0..=8 {
            let err = a
                .sub(&s.truncate_rank_k(k).unwrap().reconstruct())
                .unwrap()
                .frobenius_norm();
            assert!(
                (err - s.tail_norm(k)).abs() <= 1e-9 * a.frobenius_norm(),
                "k={k}"
            );
            assert!(err <= prev + 1e-12);
            prev = err;
        }
    }
}
