//! Cyclic Jacobi eigensolver for symmetric matrices in high-precision
//! floats.
//!
//! The sweep order is fixed (row-major over the strict upper triangle) and
//! every operation rounds to the working precision with round-to-even, so a
//! solve is bit-reproducible for a given matrix and precision. After
//! convergence the residual `max_j ‖A v_j − λ_j v_j‖₂` is measured at a
//! guarded precision; callers use it to decide whether the smallest
//! eigenvalue can be trusted or the whole solve must be repeated at higher
//! precision.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{cmp, pow2, BigFloat, Prec};

pub(crate) struct SymEigen {
    /// Ascending.
    pub values: Vec<BigFloat>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: Mat<BigFloat>,
}

pub(crate) const DEFAULT_MAX_SWEEPS: usize = 64;

/// Frobenius norm at precision `p`.
pub(crate) fn frobenius(a: &Mat<BigFloat>, p: Prec) -> BigFloat {
    let mut acc = p.zero();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc = p.add(&acc, &p.mul(a.get(i, j), a.get(i, j)));
        }
    }
    p.sqrt(&acc)
}

fn off_diagonal_norm(a: &Mat<BigFloat>, p: Prec) -> BigFloat {
    let mut acc = p.zero();
    for i in 0..a.rows() {
        for j in (i + 1)..a.cols() {
            acc = p.add(&acc, &p.mul(a.get(i, j), a.get(i, j)));
        }
    }
    p.sqrt(&acc)
}

pub(crate) fn jacobi_sym(a: &Mat<BigFloat>, p: Prec, max_sweeps: usize) -> Result<SymEigen> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "jacobi needs a square matrix");
    let mut m = a.map(|v| v.clone());
    let mut vecs = Mat::from_fn(n, n, |i, j| if i == j { p.one() } else { p.zero() });
    if n <= 1 {
        return Ok(SymEigen {
            values: (0..n).map(|i| m.get(i, i).clone()).collect(),
            vectors: vecs,
        });
    }

    let norm = frobenius(&m, p);
    if norm.is_zero() {
        return Ok(SymEigen {
            values: vec![p.zero(); n],
            vectors: vecs,
        });
    }
    // stop when the off-diagonal mass is at the rounding floor of the norm
    let stop = p.mul(&norm, &pow2(-(p.bits() as i32) + 3));
    let mut sweeps = 0usize;
    while sweeps < max_sweeps {
        if cmp(&off_diagonal_norm(&m, p), &stop) != Ordering::Greater {
            break;
        }
        for pi in 0..(n - 1) {
            for qi in (pi + 1)..n {
                rotate(&mut m, &mut vecs, pi, qi, p);
            }
        }
        sweeps += 1;
    }
    if sweeps == max_sweeps && cmp(&off_diagonal_norm(&m, p), &stop) == Ordering::Greater {
        return Err(Error::NoConvergence {
            sweeps,
            bits: p.bits(),
        });
    }

    // sort ascending, carrying the eigenvector columns along
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp(m.get(i, i), m.get(j, j)));
    let values: Vec<BigFloat> = order.iter().map(|&i| m.get(i, i).clone()).collect();
    let vectors = Mat::from_fn(n, n, |i, j| vecs.get(i, order[j]).clone());
    Ok(SymEigen { values, vectors })
}

fn rotate(m: &mut Mat<BigFloat>, vecs: &mut Mat<BigFloat>, pi: usize, qi: usize, p: Prec) {
    let apq = m.get(pi, qi).clone();
    if apq.is_zero() {
        return;
    }
    let app = m.get(pi, pi).clone();
    let aqq = m.get(qi, qi).clone();
    // symmetric Schur: theta = (a_qq − a_pp) / (2 a_pq)
    let theta = p.div(&p.sub(&aqq, &app), &p.mul(&p.from_u64(2), &apq));
    let theta_abs = theta.abs();
    let root = p.sqrt(&p.add(&p.one(), &p.mul(&theta, &theta)));
    let mut t = p.recip(&p.add(&theta_abs, &root));
    if theta.is_negative() {
        t = t.neg();
    }
    let c = p.recip(&p.sqrt(&p.add(&p.one(), &p.mul(&t, &t))));
    let s = p.mul(&t, &c);

    let n = m.rows();
    // columns p and q of the symmetric matrix
    for k in 0..n {
        let akp = m.get(k, pi).clone();
        let akq = m.get(k, qi).clone();
        m.set(k, pi, p.sub(&p.mul(&c, &akp), &p.mul(&s, &akq)));
        m.set(k, qi, p.add(&p.mul(&s, &akp), &p.mul(&c, &akq)));
    }
    // rows p and q
    for k in 0..n {
        let apk = m.get(pi, k).clone();
        let aqk = m.get(qi, k).clone();
        m.set(pi, k, p.sub(&p.mul(&c, &apk), &p.mul(&s, &aqk)));
        m.set(qi, k, p.add(&p.mul(&s, &apk), &p.mul(&c, &aqk)));
    }
    // the rotation annihilates (p,q) in exact arithmetic; pin it
    m.set(pi, qi, p.zero());
    m.set(qi, pi, p.zero());
    // accumulate eigenvectors
    for k in 0..n {
        let vkp = vecs.get(k, pi).clone();
        let vkq = vecs.get(k, qi).clone();
        vecs.set(k, pi, p.sub(&p.mul(&c, &vkp), &p.mul(&s, &vkq)));
        vecs.set(k, qi, p.add(&p.mul(&s, &vkp), &p.mul(&c, &vkq)));
    }
}

/// Residuals of an eigendecomposition, measured at a guarded precision:
/// (`max_j ‖A v_j − λ_j v_j‖₂`, the same relative to `‖A‖_F`).
pub(crate) fn eigen_residual(
    a: &Mat<BigFloat>,
    eig: &SymEigen,
    p: Prec,
) -> (BigFloat, BigFloat) {
    let g = p.with_guard(64);
    let n = a.rows();
    let mut worst = g.zero();
    for j in 0..n {
        let mut col_sq = g.zero();
        for i in 0..n {
            let mut acc = g.zero();
            for k in 0..n {
                acc = g.add(&acc, &g.mul(a.get(i, k), eig.vectors.get(k, j)));
            }
            acc = g.sub(&acc, &g.mul(&eig.values[j], eig.vectors.get(i, j)));
            col_sq = g.add(&col_sq, &g.mul(&acc, &acc));
        }
        let col = g.sqrt(&col_sq);
        if cmp(&col, &worst) == Ordering::Greater {
            worst = col;
        }
    }
    let norm = frobenius(a, g);
    let rel = if norm.is_zero() {
        g.zero()
    } else {
        g.div(&worst, &norm)
    };
    (worst, rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::to_f64_lossy;

    fn fm(p: Prec, rows: &[&[i64]]) -> Mat<BigFloat> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| p.from_i64(rows[i][j]))
    }

    #[test]
    fn identity_eigenvalues() {
        let p = Prec::new(128);
        let a = fm(p, &[&[1, 0], &[0, 1]]);
        let e = jacobi_sym(&a, p, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(e.values.len(), 2);
        for v in &e.values {
            assert_eq!(cmp(v, &p.one()), Ordering::Equal);
        }
    }

    #[test]
    fn gaussian_h2_closed_form() {
        // eigenvalues of [[1,0,1],[0,1,0],[1,0,3]] are {2−√2, 1, 2+√2}
        let p = Prec::new(256);
        let a = fm(p, &[&[1, 0, 1], &[0, 1, 0], &[1, 0, 3]]);
        let e = jacobi_sym(&a, p, DEFAULT_MAX_SWEEPS).unwrap();
        let sqrt2 = p.sqrt(&p.from_u64(2));
        let expect = [
            p.sub(&p.from_u64(2), &sqrt2),
            p.one(),
            p.add(&p.from_u64(2), &sqrt2),
        ];
        let tol = pow2(-240);
        for (got, want) in e.values.iter().zip(&expect) {
            let diff = p.sub(got, want).abs();
            assert!(cmp(&diff, &tol) == Ordering::Less, "diff {diff:?}");
        }
        let (abs, rel) = eigen_residual(&a, &e, p);
        assert!(cmp(&abs, &pow2(-240)) == Ordering::Less);
        assert!(cmp(&rel, &pow2(-240)) == Ordering::Less);
    }

    #[test]
    fn rank_one_matrix() {
        let p = Prec::new(128);
        let a = fm(p, &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
        let e = jacobi_sym(&a, p, DEFAULT_MAX_SWEEPS).unwrap();
        assert!((to_f64_lossy(&e.values[0])).abs() < 1e-30);
        assert!((to_f64_lossy(&e.values[1])).abs() < 1e-30);
        assert!((to_f64_lossy(&e.values[2]) - 3.0).abs() < 1e-30);
    }

    #[test]
    fn random_symmetric_residual() {
        let p = Prec::new(192);
        let a = fm(
            p,
            &[
                &[5, 2, -1, 3],
                &[2, 8, 0, 1],
                &[-1, 0, 4, -2],
                &[3, 1, -2, 9],
            ],
        );
        let e = jacobi_sym(&a, p, DEFAULT_MAX_SWEEPS).unwrap();
        let (_, rel) = eigen_residual(&a, &e, p);
        assert!(cmp(&rel, &pow2(-170)) == Ordering::Less);
        // ascending
        for w in e.values.windows(2) {
            assert!(cmp(&w[0], &w[1]) != Ordering::Greater);
        }
    }

    #[test]
    fn zero_and_tiny_matrices() {
        let p = Prec::new(96);
        let z = fm(p, &[&[0, 0], &[0, 0]]);
        let e = jacobi_sym(&z, p, 8).unwrap();
        assert!(e.values.iter().all(|v| v.is_zero()));
        let one = fm(p, &[&[7]]);
        let e = jacobi_sym(&one, p, 8).unwrap();
        assert_eq!(cmp(&e.values[0], &p.from_u64(7)), Ordering::Equal);
    }
}
