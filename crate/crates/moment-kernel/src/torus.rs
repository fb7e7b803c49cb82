//! The torus Gram matrix of an orthonormal basis and the spectral duality
//! with the Hankel truncation.
//!
//! Monomials are orthonormal with respect to normalized Lebesgue measure on
//! the unit torus, so the Gram matrix of the basis polynomials there,
//! `𝒦_{α,β} = ∫ P_{R,α}(e^{iθ}) conj(P_{R,β}(e^{iθ})) dθ/(2π)^d`, collapses
//! to the finite sum `𝒦 = C·Cᵀ` over the coefficient rows — no quadrature
//! enters the construction (quadrature survives only in tests, as an
//! independent oracle for this identity).
//!
//! With `H = G·Gᵀ` and `C = G⁻¹`, the spectrum of `𝒦 = C·Cᵀ` is exactly the
//! reciprocal spectrum of `H`; in particular
//! `λ_min(H_{R,N}) · λ_max(𝒦_{R,N}) = 1`. The check here certifies that
//! identity with a fully propagated error bound: eigensolver residuals on
//! both sides, the measured Gram residual of the basis, the measured gap
//! between the stored `𝒦` and `C·Cᵀ`, and the assembly rounding of `H`
//! itself. The duality holds or fails within that bound — one number that
//! exercises moment assembly, factorization, and two independent
//! eigensolves.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::hankel::{EigenOptions, HankelTruncation};
use crate::jacobi;
use crate::matrix::Mat;
use crate::ortho_basis::OrthoBasis;
use crate::scalar::{cmp, pow2, to_dec_string, BigFloat, Prec, Rat};

/// Gram matrix of the orthonormal polynomials on the unit torus.
pub struct TorusGram {
    source_desc: String,
    radius: Rat,
    degree: u32,
    matrix: Mat<BigFloat>,
    bits: usize,
    /// Measured `‖𝒦 − C·Cᵀ‖_F` at a guarded precision.
    product_residual: BigFloat,
    /// The basis's measured `‖C·H·Cᵀ − I‖_F`.
    gram_residual: BigFloat,
}

/// Build `𝒦 = C·Cᵀ` from a basis. Purely algebraic; self-adjoint by
/// construction.
pub fn build_torus_gram(basis: &OrthoBasis) -> TorusGram {
    let p = basis.prec();
    let c = basis.coefficients();
    let n = basis.len();
    let matrix = Mat::from_fn(n, n, |i, j| {
        let mut acc = p.zero();
        for k in 0..=i.min(j) {
            acc = p.add(&acc, &p.mul(c.get(i, k), c.get(j, k)));
        }
        acc
    });
    // measure the rounding gap against a guarded-precision product
    let g = p.with_guard(64);
    let mut gap_sq = g.zero();
    for i in 0..n {
        for j in 0..n {
            let mut acc = g.zero();
            for k in 0..=i.min(j) {
                acc = g.add(&acc, &g.mul(c.get(i, k), c.get(j, k)));
            }
            let diff = g.sub(matrix.get(i, j), &acc);
            gap_sq = g.add(&gap_sq, &g.mul(&diff, &diff));
        }
    }
    TorusGram {
        source_desc: basis.source().description().to_string(),
        radius: basis.radius().clone(),
        degree: basis.degree(),
        matrix,
        bits: basis.bits(),
        product_residual: g.sqrt(&gap_sq),
        gram_residual: basis.gram_residual().clone(),
    }
}

impl TorusGram {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn radius(&self) -> &Rat {
        &self.radius
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn matrix(&self) -> &Mat<BigFloat> {
        &self.matrix
    }

    pub fn trace(&self) -> BigFloat {
        let p = Prec::new(self.bits);
        let mut acc = p.zero();
        for i in 0..self.size() {
            acc = p.add(&acc, self.matrix.get(i, i));
        }
        acc
    }
}

/// Outcome of the duality check `λ_min(H)·λ_max(𝒦) = 1`.
pub struct DualityReport {
    pub lambda_min_h: BigFloat,
    pub lambda_max_k: BigFloat,
    /// `λ_min(H)·λ_max(𝒦)`.
    pub product: BigFloat,
    /// Certified bound on `|product − 1|` from all measured residuals.
    pub residual_bound: BigFloat,
    pub trace_k: BigFloat,
    /// Precision the Hankel eigensolve settled at.
    pub bits_h: usize,
    /// Precision of the torus-Gram side.
    pub bits_k: usize,
}

enum TrustTarget {
    Smallest,
    Largest,
}

/// Certified eigensolve of a fixed symmetric float matrix: the solver
/// precision escalates until the targeted extreme eigenvalue clears its
/// residual by the trust margin. The matrix itself never changes — only the
/// arithmetic refining its spectrum does.
fn certified_sym_eigen(
    mat: &Mat<BigFloat>,
    start_bits: usize,
    opts: &EigenOptions,
    target: TrustTarget,
) -> Result<(Vec<BigFloat>, BigFloat, usize)> {
    let mut bits = start_bits.max(opts.precision.bits());
    loop {
        let p = Prec::new(bits);
        match jacobi::jacobi_sym(mat, p, opts.max_sweeps) {
            Ok(eig) => {
                let (res_abs, _) = jacobi::eigen_residual(mat, &eig, p);
                let lam = match target {
                    TrustTarget::Smallest => eig.values.first(),
                    TrustTarget::Largest => eig.values.last(),
                }
                .expect("nonempty")
                .clone();
                let margin = p.mul(
                    &p.mul(&p.from_u64(10), &res_abs),
                    &pow2(opts.trust_shift as i32),
                );
                if lam.is_positive() && cmp(&margin, &lam) != Ordering::Greater {
                    return Ok((eig.values, res_abs, bits));
                }
            }
            Err(Error::NoConvergence { .. }) if bits < opts.precision_ceiling => {}
            Err(e) => return Err(e),
        }
        if bits >= opts.precision_ceiling {
            return Err(Error::PrecisionCeiling {
                ceiling: opts.precision_ceiling,
                context: "certifying an extreme eigenvalue of a fixed matrix".into(),
            });
        }
        bits = (bits * 2).min(opts.precision_ceiling);
    }
}

/// Verify the duality `λ_min(H_{R,N})·λ_max(𝒦_{R,N}) = 1` and report the
/// product with its certified bound.
pub fn duality_check(
    h: &HankelTruncation,
    k: &TorusGram,
    opts: &EigenOptions,
) -> Result<DualityReport> {
    if h.degree() != k.degree() || h.radius() != k.radius() {
        return Err(Error::InvalidParameter(format!(
            "mismatched parameters: H at (R={}, N={}), K at (R={}, N={})",
            crate::scalar::rat_to_string(h.radius()),
            h.degree(),
            crate::scalar::rat_to_string(k.radius()),
            k.degree(),
        )));
    }
    if h.source().description() != k.source_desc {
        return Err(Error::InvalidParameter(format!(
            "mismatched sources: `{}` vs `{}`",
            h.source().description(),
            k.source_desc
        )));
    }

    // Both eigensolves run against matrices pinned at the basis precision:
    // the Hankel matrix here is bit-identical to the one the basis factored
    // (assembly at a fixed precision is deterministic and memoized), so the
    // Gram residual connects the two spectra with no further rounding gap.
    let mut h_opts = *opts;
    h_opts.trust_shift = h_opts.trust_shift.max(60);
    let mat_h = h.to_float(Prec::new(k.bits))?;
    let (h_vals, res_h, bits_h) =
        certified_sym_eigen(&mat_h, k.bits, &h_opts, TrustTarget::Smallest)?;
    let (k_vals, res_k, bits_k) =
        certified_sym_eigen(k.matrix(), k.bits, &h_opts, TrustTarget::Largest)?;

    let lam_min = h_vals.first().expect("nonempty").clone();
    let lam_max = k_vals.last().expect("nonempty").clone();

    let g = Prec::new(bits_h.max(bits_k)).with_guard(64);
    let product = g.mul(&lam_min, &lam_max);

    // |product − 1| ≤ (g_res + r_H/λ_min) / (1 − r_H/λ_min) + λ_min·(w + r_K),
    // doubled for the rounding of this very evaluation
    let top = g.div(&res_h, &lam_min);
    let one = g.one();
    let denom = g.sub(&one, &top);
    if !denom.is_positive() {
        return Err(Error::PrecisionCeiling {
            ceiling: h_opts.precision_ceiling,
            context: format!(
                "duality bound not certifiable: residual {} vs lambda_min {}",
                to_dec_string(&res_h),
                to_dec_string(&lam_min)
            ),
        });
    }
    let first = g.div(&g.add(&k.gram_residual, &top), &denom);
    let second = g.mul(&lam_min, &g.add(&k.product_residual, &res_k));
    let residual_bound = g.mul(&g.from_u64(2), &g.add(&first, &second));

    Ok(DualityReport {
        lambda_min_h: lam_min,
        lambda_max_k: lam_max,
        product,
        residual_bound,
        trace_k: k.trace(),
        bits_h,
        bits_k,
    })
}

/// The trace chain `1/λ_min(H) ≤ λ_max(𝒦) ≤ trace(𝒦)`, with residual
/// allowances. The trace equals the torus average of the truncated kernel
/// sum, and also the total squared coefficient mass of the basis.
pub struct TraceBoundReport {
    pub trace_k: BigFloat,
    pub lambda_max_k: BigFloat,
    pub inv_lambda_min_h: BigFloat,
    pub chain_holds: bool,
}

pub fn trace_bound_check(
    k: &TorusGram,
    h: &HankelTruncation,
    opts: &EigenOptions,
) -> Result<TraceBoundReport> {
    let report = duality_check(h, k, opts)?;
    let g = Prec::new(report.bits_h.max(report.bits_k)).with_guard(32);
    let inv = g.recip(&report.lambda_min_h);
    let trace = report.trace_k.clone();
    // allowances: the duality bound scaled back through λ_min covers the
    // eigensolver uncertainty on both quantities
    let allow = g.mul(&inv, &report.residual_bound);
    let lam_max_hi = g.add(&report.lambda_max_k, &allow);
    let trace_hi = g.add(&trace, &allow);
    let chain_holds = cmp(&inv, &lam_max_hi) != Ordering::Greater
        && cmp(&report.lambda_max_k, &trace_hi) != Ordering::Greater;
    Ok(TraceBoundReport {
        trace_k: trace,
        lambda_max_k: report.lambda_max_k,
        inv_lambda_min_h: inv,
        chain_holds,
    })
}
