//! Orthonormal polynomial bases and reproducing-kernel partial sums.
//!
//! For a positive moment source the monomials carry the pre-inner product
//! `⟨p, q⟩ = L(p·conj(q))`, whose Gram matrix in the graded-lex layout is the
//! Hankel truncation `H_{R,N}`. The unique orthonormal system that is
//! triangular in that layout with positive leading coefficients is obtained
//! by inverting the lower Cholesky factor of `H_{R,N}`: the rows of
//! `C = G⁻¹` are the coefficient vectors of the orthonormal polynomials, and
//! `C·H·Cᵀ = I`.
//!
//! For exact-rational sources the factorization is kept in exact LDLᵀ form
//! (unit-triangular `L`, positive diagonal `d`), and square roots enter only
//! when coefficients are materialized as floats; Gram residuals then sit at
//! the rounding floor rather than accumulating through the elimination. For
//! float sources the Cholesky runs in high-precision floats, and the build
//! escalates its working precision until the measured Gram residual
//! `‖C·H·Cᵀ − I‖_F` meets the target implied by the configured precision.
//! Ill-conditioning is the norm here — moment matrices of indeterminate-type
//! families have condition numbers that grow superexponentially with the
//! degree — so escalation is part of the contract, not a failure mode.

use crate::error::{Error, Result};
use crate::exact::{self, LdlOutcome};
use crate::hankel::assemble;
use crate::matrix::Mat;
use crate::moment_source::{MomentSource, RatPoly};
use crate::multi_index::{enumerate, IndexOrder, MultiIndex};
use crate::scalar::{cmp, pow2, BigFloat, Complex, Prec, Rat};
use std::cmp::Ordering;

/// Options for basis construction.
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Configured precision: coefficients are delivered at least this
    /// accurate (the Gram target is derived from it).
    pub precision: Prec,
    /// Ceiling for internal escalation, in bits.
    pub precision_ceiling: usize,
}

impl BuildOptions {
    pub fn new(precision: Prec) -> Self {
        Self {
            precision,
            precision_ceiling: 4096,
        }
    }

    pub fn with_ceiling(mut self, bits: usize) -> Self {
        self.precision_ceiling = bits;
        self
    }

    /// Gram-residual target: `10^(−0.24·bits)` as a power of two.
    fn gram_target(&self) -> BigFloat {
        let bits = self.precision.bits() as f64;
        let exp2 = -(bits * 0.24 * std::f64::consts::LOG2_10).ceil();
        pow2(exp2 as i32)
    }
}

/// Exact factorization data retained for exact-rational sources.
struct ExactBasis {
    /// The exact Hankel matrix the basis orthonormalizes.
    h: Mat<Rat>,
    /// Inverse of the unit lower-triangular LDLᵀ factor.
    l_inv: Mat<Rat>,
    /// The positive LDLᵀ diagonal.
    d: Vec<Rat>,
}

/// Triangular orthonormal basis for a moment source at scaling `R`, up to
/// total degree `N`.
pub struct OrthoBasis {
    source: MomentSource,
    radius: Rat,
    degree: u32,
    order: IndexOrder,
    /// Row α holds the monomial coefficients of the α-th orthonormal
    /// polynomial; lower triangular with positive diagonal.
    coeff: Mat<BigFloat>,
    /// The float Hankel matrix the coefficients were derived from.
    h_float: Mat<BigFloat>,
    /// Working precision of `coeff` / `h_float`.
    bits: usize,
    /// Measured `‖C·H·Cᵀ − I‖_F`.
    gram_residual: BigFloat,
    exact: Option<ExactBasis>,
}

/// Truncation shape of a kernel partial sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelShape {
    /// All α with `|α| ≤ n`.
    TotalDegree,
    /// All α with `max_j α_j ≤ n`.
    Box,
}

impl std::fmt::Display for KernelShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelShape::TotalDegree => write!(f, "total"),
            KernelShape::Box => write!(f, "box"),
        }
    }
}

impl std::str::FromStr for KernelShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" | "total-degree" => Ok(KernelShape::TotalDegree),
            "box" => Ok(KernelShape::Box),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel shape `{other}` (expected `total` or `box`)"
            ))),
        }
    }
}

/// Partial sums of `Σ |P_{R,α}(z)|²` under a truncation shape.
pub struct KernelEvaluation {
    pub point: Vec<Complex>,
    pub shape: KernelShape,
    /// `partial_sums[n]` is the sum over the shape-`n` index set,
    /// `n = 0..=bound`. Nondecreasing, and `partial_sums[0] = 1`.
    pub partial_sums: Vec<BigFloat>,
}

/// Build the orthonormal basis of `source` at scaling `radius` up to total
/// degree `degree`.
///
/// Fails with [`Error::Degenerate`] (carrying a kernel vector) when the
/// truncation is singular, i.e. when some polynomial of degree ≤ N has zero
/// norm under the functional.
pub fn build_basis(
    source: &MomentSource,
    radius: &Rat,
    degree: u32,
    opts: &BuildOptions,
) -> Result<OrthoBasis> {
    let order = enumerate(source.d(), degree)?;
    let n = order.len();
    let target = opts.gram_target();

    if source.is_exact() {
        let h = assemble(source, radius, degree, opts.precision)?;
        let hm = h.exact_matrix().expect("exact source").clone();
        let fact = match exact::ldl(&hm) {
            LdlOutcome::PositiveDefinite(f) => f,
            LdlOutcome::Degenerate { null_vector, .. } => {
                let mut full = null_vector;
                full.resize(n, Rat::from_integer(0.into()));
                return Err(Error::Degenerate { null_vector: full });
            }
            LdlOutcome::Indefinite { step, pivot } => {
                return Err(Error::NotPositiveSemidefinite {
                    step,
                    pivot: crate::scalar::rat_to_string(&pivot),
                })
            }
        };
        let l_inv = exact::unit_lower_inverse(&fact.l);
        // materialize floats, escalating if the measured residual disagrees
        let mut bits = opts.precision.bits();
        loop {
            let p = Prec::new(bits);
            let coeff = Mat::from_fn(n, n, |i, j| {
                if j > i {
                    p.zero()
                } else {
                    let root = p.sqrt(&p.from_rat(&fact.d[i]));
                    p.div(&p.from_rat(l_inv.get(i, j)), &root)
                }
            });
            let h_float = hm.map(|r| p.from_rat(r));
            let gram_residual = gram_residual(&coeff, &h_float, p);
            if cmp(&gram_residual, &target) != Ordering::Greater {
                return Ok(OrthoBasis {
                    source: source.clone(),
                    radius: radius.clone(),
                    degree,
                    order,
                    coeff,
                    h_float,
                    bits,
                    gram_residual,
                    exact: Some(ExactBasis {
                        h: hm,
                        l_inv,
                        d: fact.d,
                    }),
                });
            }
            if bits >= opts.precision_ceiling {
                return Err(Error::PrecisionCeiling {
                    ceiling: opts.precision_ceiling,
                    context: "materializing an exact basis to the Gram target".into(),
                });
            }
            bits = (bits * 2).min(opts.precision_ceiling);
        }
    }

    // float path: Cholesky with escalation on breakdown or residual
    let mut bits = opts.precision.bits();
    loop {
        let p = Prec::new(bits);
        let h = assemble(source, radius, degree, p)?;
        let hm = h.to_float(p)?;
        match cholesky(&hm, p) {
            Ok(g) => {
                let coeff = lower_inverse(&g, p);
                let gram_res = gram_residual(&coeff, &hm, p);
                if cmp(&gram_res, &target) != Ordering::Greater {
                    return Ok(OrthoBasis {
                        source: source.clone(),
                        radius: radius.clone(),
                        degree,
                        order,
                        coeff,
                        h_float: hm,
                        bits,
                        gram_residual: gram_res,
                        exact: None,
                    });
                }
            }
            Err(_step) => {
                // breakdown: the matrix is numerically singular at this
                // precision; more bits decide whether it is truly singular
            }
        }
        if bits >= opts.precision_ceiling {
            return Err(Error::PrecisionCeiling {
                ceiling: opts.precision_ceiling,
                context: format!(
                    "building a degree-{degree} basis (source: {})",
                    source.description()
                ),
            });
        }
        bits = (bits * 2).min(opts.precision_ceiling);
    }
}

/// Lower-triangular Cholesky factor; `Err(step)` on a nonpositive pivot.
fn cholesky(h: &Mat<BigFloat>, p: Prec) -> std::result::Result<Mat<BigFloat>, usize> {
    let n = h.rows();
    let mut g = Mat::filled(n, n, p.zero());
    for j in 0..n {
        let mut v = h.get(j, j).clone();
        for k in 0..j {
            v = p.sub(&v, &p.mul(g.get(j, k), g.get(j, k)));
        }
        if v.is_nan() || !v.is_positive() {
            return Err(j);
        }
        let root = p.sqrt(&v);
        g.set(j, j, root.clone());
        for i in (j + 1)..n {
            let mut w = h.get(i, j).clone();
            for k in 0..j {
                w = p.sub(&w, &p.mul(g.get(i, k), g.get(j, k)));
            }
            g.set(i, j, p.div(&w, &root));
        }
    }
    Ok(g)
}

/// Inverse of a lower-triangular matrix with positive diagonal.
fn lower_inverse(g: &Mat<BigFloat>, p: Prec) -> Mat<BigFloat> {
    let n = g.rows();
    let mut inv = Mat::filled(n, n, p.zero());
    for col in 0..n {
        inv.set(col, col, p.recip(g.get(col, col)));
        for i in (col + 1)..n {
            let mut acc = p.zero();
            for k in col..i {
                acc = p.add(&acc, &p.mul(g.get(i, k), inv.get(k, col)));
            }
            inv.set(i, col, p.div(&acc.neg(), g.get(i, i)));
        }
    }
    inv
}

/// `‖C·H·Cᵀ − I‖_F` at a guarded precision.
fn gram_residual(c: &Mat<BigFloat>, h: &Mat<BigFloat>, p: Prec) -> BigFloat {
    let g = p.with_guard(64);
    let n = c.rows();
    // T = C·H (C lower triangular)
    let t = Mat::from_fn(n, n, |i, j| {
        let mut acc = g.zero();
        for k in 0..=i {
            acc = g.add(&acc, &g.mul(c.get(i, k), h.get(k, j)));
        }
        acc
    });
    let mut sum = g.zero();
    for i in 0..n {
        for j in 0..n {
            let mut acc = g.zero();
            for k in 0..=j {
                acc = g.add(&acc, &g.mul(t.get(i, k), c.get(j, k)));
            }
            if i == j {
                acc = g.sub(&acc, &g.one());
            }
            sum = g.add(&sum, &g.mul(&acc, &acc));
        }
    }
    g.sqrt(&sum)
}

impl std::fmt::Debug for OrthoBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "OrthoBasis({}, R={}, N={}, {} bits)",
            self.source.description(),
            crate::scalar::rat_to_string(&self.radius),
            self.degree,
            self.bits
        )
    }
}

impl OrthoBasis {
    pub fn source(&self) -> &MomentSource {
        &self.source
    }

    pub fn radius(&self) -> &Rat {
        &self.radius
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> &IndexOrder {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Working precision of the materialized coefficients.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn prec(&self) -> Prec {
        Prec::new(self.bits)
    }

    /// Measured `‖C·H·Cᵀ − I‖_F`.
    pub fn gram_residual(&self) -> &BigFloat {
        &self.gram_residual
    }

    /// Coefficient matrix `C` (rows = polynomials, lower triangular).
    pub fn coefficients(&self) -> &Mat<BigFloat> {
        &self.coeff
    }

    /// The float Hankel matrix the basis orthonormalizes.
    pub fn hankel_float(&self) -> &Mat<BigFloat> {
        &self.h_float
    }

    /// True when the basis carries exact LDLᵀ data.
    pub fn has_exact_factorization(&self) -> bool {
        self.exact.is_some()
    }

    /// Evaluate every `P_{R,α}` at a complex point.
    pub fn evaluate(&self, z: &[Complex]) -> Result<Vec<Complex>> {
        let p = self.prec();
        let monomials = self.monomial_table(z)?;
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Complex::zero(p);
            for (j, m) in monomials.iter().enumerate().take(i + 1) {
                let c = self.coeff.get(i, j);
                if c.is_zero() {
                    continue;
                }
                acc = acc.add(p, &m.scale(p, c));
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Monomial values `z^γ` for every γ in the order, by the graded
    /// recurrence `z^γ = z^{γ−e_j}·z_j`.
    fn monomial_table(&self, z: &[Complex]) -> Result<Vec<Complex>> {
        if z.len() != self.order.d() {
            return Err(Error::DimensionMismatch {
                expected: self.order.d(),
                got: z.len(),
            });
        }
        let p = self.prec();
        let mut table: Vec<Complex> = Vec::with_capacity(self.len());
        for (rank, gamma) in self.order.iter().enumerate() {
            if rank == 0 {
                table.push(Complex::one(p));
                continue;
            }
            let exps = gamma.exponents();
            let slot = exps
                .iter()
                .position(|&e| e > 0)
                .expect("nonzero index beyond rank 0");
            let mut prev = exps.to_vec();
            prev[slot] -= 1;
            let prev_rank = self.order.rank(&MultiIndex::new(prev)?)?;
            table.push(table[prev_rank].mul(p, &z[slot]));
        }
        Ok(table)
    }

    /// Partial sums of `Σ |P_{R,α}(z)|²` under the requested shape, up to
    /// shape bound `bound`.
    ///
    /// A box truncation of bound `n` spans total degrees up to `d·n`, so the
    /// basis must be built at least that deep.
    pub fn kernel_sum(
        &self,
        z: &[Complex],
        shape: KernelShape,
        bound: u32,
    ) -> Result<KernelEvaluation> {
        let needed = match shape {
            KernelShape::TotalDegree => bound,
            KernelShape::Box => bound * self.order.d() as u32,
        };
        if needed > self.degree {
            return Err(Error::DegreeOutOfRange {
                index: vec![],
                max_degree: self.degree,
            });
        }
        let p = self.prec();
        let values = self.evaluate(z)?;
        let mut sums = vec![p.zero(); bound as usize + 1];
        for (rank, alpha) in self.order.iter().enumerate() {
            let cell = match shape {
                KernelShape::TotalDegree => alpha.total_degree(),
                KernelShape::Box => alpha.box_degree(),
            };
            if cell <= bound {
                let sq = values[rank].abs_sq(p);
                sums[cell as usize] = p.add(&sums[cell as usize], &sq);
            }
        }
        // accumulate into partial sums
        for i in 1..sums.len() {
            let prev = sums[i - 1].clone();
            sums[i] = p.add(&sums[i], &prev);
        }
        Ok(KernelEvaluation {
            point: z.to_vec(),
            shape,
            partial_sums: sums,
        })
    }

    /// Apply the degree-N truncated reproducing kernel to a polynomial:
    /// `Σ_α ⟨p, P_α⟩ P_α(y)`. Reproduces `p(y)` for `deg p ≤ N`.
    pub fn truncated_kernel_apply(&self, poly: &RatPoly, y: &[Complex]) -> Result<Complex> {
        self.check_poly(poly)?;
        let p = self.prec();
        let n = self.len();
        // a: monomial coefficient vector of poly
        let mut a = vec![p.zero(); n];
        for (alpha, c) in poly.terms() {
            let rank = self.order.rank(&MultiIndex::new(alpha.clone())?)?;
            a[rank] = p.from_rat(c);
        }
        // u = C·(H·a): u_α = ⟨p, P_α⟩
        let ha: Vec<BigFloat> = (0..n)
            .map(|i| {
                let mut acc = p.zero();
                for k in 0..n {
                    acc = p.add(&acc, &p.mul(self.h_float.get(i, k), &a[k]));
                }
                acc
            })
            .collect();
        let u: Vec<BigFloat> = (0..n)
            .map(|i| {
                let mut acc = p.zero();
                for k in 0..=i {
                    acc = p.add(&acc, &p.mul(self.coeff.get(i, k), &ha[k]));
                }
                acc
            })
            .collect();
        let values = self.evaluate(y)?;
        let mut acc = Complex::zero(p);
        for i in 0..n {
            acc = acc.add(p, &values[i].scale(p, &u[i]));
        }
        Ok(acc)
    }

    /// Exact kernel application at a rational point, through the LDLᵀ data:
    /// the square roots of the diagonal cancel between `⟨p, P_α⟩` and
    /// `P_α(y)`, leaving rational arithmetic end to end.
    pub fn truncated_kernel_apply_exact(&self, poly: &RatPoly, y: &[Rat]) -> Result<Rat> {
        self.check_poly(poly)?;
        let ex = self
            .exact
            .as_ref()
            .ok_or(Error::RequiresExactMode("truncated_kernel_apply_exact"))?;
        if y.len() != self.order.d() {
            return Err(Error::DimensionMismatch {
                expected: self.order.d(),
                got: y.len(),
            });
        }
        let n = self.len();
        let zero = Rat::from_integer(0.into());
        let mut a = vec![zero.clone(); n];
        for (alpha, c) in poly.terms() {
            let rank = self.order.rank(&MultiIndex::new(alpha.clone())?)?;
            a[rank] = c.clone();
        }
        let ha = exact::mat_vec(&ex.h, &a);
        let w1 = exact::mat_vec(&ex.l_inv, &ha);
        // monomial vector at y
        let mut mono = vec![Rat::from_integer(1.into()); n];
        for (rank, gamma) in self.order.iter().enumerate() {
            if rank == 0 {
                continue;
            }
            let exps = gamma.exponents();
            let slot = exps.iter().position(|&e| e > 0).expect("nonzero");
            let mut prev = exps.to_vec();
            prev[slot] -= 1;
            let prev_rank = self.order.rank(&MultiIndex::new(prev)?)?;
            mono[rank] = mono[prev_rank].clone() * y[slot].clone();
        }
        let w2 = exact::mat_vec(&ex.l_inv, &mono);
        let mut acc = zero;
        for i in 0..n {
            acc += w1[i].clone() * w2[i].clone() / ex.d[i].clone();
        }
        Ok(acc)
    }

    fn check_poly(&self, poly: &RatPoly) -> Result<()> {
        if poly.d() != self.order.d() {
            return Err(Error::DimensionMismatch {
                expected: self.order.d(),
                got: poly.d(),
            });
        }
        if poly.degree() > self.degree {
            return Err(Error::DegreeOutOfRange {
                index: vec![],
                max_degree: self.degree,
            });
        }
        Ok(())
    }

    /// Row norms squared of the coefficient matrix: `Σ_γ C[α,γ]²` per α.
    /// Their total equals the trace of the torus Gram matrix.
    pub fn coefficient_row_norms_sq(&self) -> Vec<BigFloat> {
        let p = self.prec();
        (0..self.len())
            .map(|i| {
                let mut acc = p.zero();
                for j in 0..=i {
                    acc = p.add(&acc, &p.mul(self.coeff.get(i, j), self.coeff.get(i, j)));
                }
                acc
            })
            .collect()
    }
}
