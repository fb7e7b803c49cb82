//! Shared test oracles, independent of the library's computation paths.

#![allow(dead_code)]

use moment_kernel::scalar::{Rat, to_f64_lossy};
use moment_kernel::{BigFloat, Mat};
use num_traits::{One, Zero};

/// Exact characteristic polynomial of a rational matrix by the
/// Faddeev–LeVerrier recurrence. Returns the coefficients of
/// `det(xI − M) = x^n + c[n-1]·x^{n-1} + … + c[0]`, so `c.len() == n`.
pub fn char_poly(m: &Mat<Rat>) -> Vec<Rat> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let identity = |s: &Rat| {
        Mat::from_fn(n, n, |i, j| if i == j { s.clone() } else { Rat::zero() })
    };
    let mat_mul = |a: &Mat<Rat>, b: &Mat<Rat>| {
        Mat::from_fn(n, n, |i, j| {
            let mut acc = Rat::zero();
            for k in 0..n {
                acc += a.get(i, k).clone() * b.get(k, j).clone();
            }
            acc
        })
    };
    let mat_add = |a: &Mat<Rat>, b: &Mat<Rat>| {
        Mat::from_fn(n, n, |i, j| a.get(i, j).clone() + b.get(i, j).clone())
    };
    let trace = |a: &Mat<Rat>| {
        let mut acc = Rat::zero();
        for i in 0..n {
            acc += a.get(i, i).clone();
        }
        acc
    };

    let mut coeffs = vec![Rat::zero(); n];
    let mut aux = identity(&Rat::zero()); // M_0 = 0
    let mut c = Rat::one();
    for k in 1..=n {
        // M_k = M·(M_{k-1} + c_{n-k+1}·I)
        aux = mat_mul(m, &mat_add(&aux, &identity(&c)));
        c = -trace(&aux) / Rat::from_integer(k.into());
        coeffs[n - k] = c.clone();
    }
    coeffs
}

/// Elementary symmetric polynomial comparison: the coefficients of
/// `Π (x − r_i)` for the given roots, in the same layout as [`char_poly`].
pub fn poly_from_roots_f64(roots: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![1.0f64];
    for &r in roots {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        coeffs = next;
    }
    coeffs.pop(); // drop the leading 1
    coeffs
}

/// Trapezoidal quadrature of `f` over `[0, 2π]` with `nodes` points,
/// normalized by `2π` (exact for trigonometric polynomials of degree below
/// the node count).
pub fn torus_average(nodes: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        acc += f(theta);
    }
    acc / nodes as f64
}

/// Evaluate a real-coefficient polynomial (ascending powers) at `e^{iθ}`.
pub fn eval_on_torus(coeffs: &[f64], theta: f64) -> (f64, f64) {
    let z = (theta.cos(), theta.sin());
    let mut acc = (0.0f64, 0.0f64);
    for &c in coeffs.iter().rev() {
        let re = acc.0 * z.0 - acc.1 * z.1 + c;
        let im = acc.0 * z.1 + acc.1 * z.0;
        acc = (re, im);
    }
    acc
}

/// Row of a coefficient matrix as `f64`, for quadrature oracles.
pub fn row_f64(m: &Mat<BigFloat>, i: usize) -> Vec<f64> {
    (0..m.cols()).map(|j| to_f64_lossy(m.get(i, j))).collect()
}

/// Reference values frozen from a 1024-bit run of this pipeline
/// (regenerate with `cargo test --test acceptance -- --ignored
/// print_reference_tables`).
pub mod fixtures {
    /// Smallest eigenvalues of the lognormal(σ=1) truncations at R = 1 for
    /// N = 0..=12 stay above this floor (the N = 12 value is
    /// 0.441874630352…; the sequence is decreasing, so the floor holds for
    /// the whole range).
    pub const LOGNORMAL_ETA_FLOOR: &str = "0.4418";

    /// Leading digits of λ_min for lognormal(σ=1), N = 12, R = 1.
    pub const LOGNORMAL_LAMBDA_12: &str = "0.4418746303524996169130384545554";

    /// Gaussian at R = 2, N = 5: trace of the torus Gram matrix (the strict
    /// upper end of the trace chain).
    pub const GAUSS_R2_N5_TRACE_K: &str = "134.575";

    /// Gaussian at R = 2, N = 5: largest torus-Gram eigenvalue.
    pub const GAUSS_R2_N5_LAMBDA_MAX_K: &str = "83.9843445770252198172695704514265";

    /// Gaussian at R = 2, N = 5: smallest Hankel eigenvalue.
    pub const GAUSS_R2_N5_LAMBDA_MIN_H: &str = "0.0119069810574381772627963956209304";
}
