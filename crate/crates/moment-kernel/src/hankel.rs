//! Truncated Hankel matrices of (scaled) moment multisequences and their
//! spectra.
//!
//! The degree-`N` truncation at scaling `R` is the matrix indexed by the
//! graded-lex order on `{|α| ≤ N}` with entries `s_{α+β} / R^{|α+β|}`. It is
//! symmetric, depends on `α + β` only, and is positive semidefinite exactly
//! when the underlying multisequence is positive on that range.
//!
//! Spectra are computed by cyclic Jacobi rotations with a measured residual.
//! When the residual is too large for the smallest eigenvalue to be trusted
//! (more than a tenth of it), the solve repeats at doubled precision up to a
//! ceiling; the smallest eigenvalues at play decay superexponentially, so
//! this escalation is routine rather than exceptional. For exact-rational
//! sources the "λ_min = 0" predicate is never left to floats: an exact rank
//! computation decides it.

use crate::error::{Error, Result};
use crate::exact;
use crate::jacobi;
use crate::matrix::Mat;
use crate::moment_source::MomentSource;
use crate::multi_index::{enumerate, IndexOrder, MultiIndex};
use crate::scalar::{cmp, BigFloat, Prec, Rat, Scalar};
use std::cmp::Ordering;

/// Matrix payload of a truncation: exact when the source is.
pub enum HankelData {
    Exact(Mat<Rat>),
    Float { mat: Mat<BigFloat>, bits: usize },
}

/// A truncated Hankel matrix `H_{R,N}` with its layout metadata.
pub struct HankelTruncation {
    source: MomentSource,
    radius: Rat,
    degree: u32,
    order: IndexOrder,
    data: HankelData,
}

/// Assemble `H_{R,N}` for a moment source. Exact sources produce exact
/// entries; float sources evaluate at `prec`.
pub fn assemble(
    source: &MomentSource,
    radius: &Rat,
    degree: u32,
    prec: Prec,
) -> Result<HankelTruncation> {
    let scaled = source.scaled(radius)?; // validates positivity of R
    let order = enumerate(source.d(), degree)?;
    let n = order.len();
    let data = if source.is_exact() {
        let mut cache: std::collections::HashMap<Vec<u32>, Rat> = Default::default();
        let mut get = |gamma: &MultiIndex| -> Result<Rat> {
            if let Some(v) = cache.get(gamma.exponents()) {
                return Ok(v.clone());
            }
            let v = scaled.moment_exact(gamma)?;
            cache.insert(gamma.exponents().to_vec(), v.clone());
            Ok(v)
        };
        let mut m = Mat::filled(n, n, Rat::from_integer(0.into()));
        for i in 0..n {
            for j in i..n {
                let gamma = order.index(i).add(order.index(j))?;
                let v = get(&gamma)?;
                m.set(i, j, v.clone());
                m.set(j, i, v);
            }
        }
        HankelData::Exact(m)
    } else {
        let mut cache: std::collections::HashMap<Vec<u32>, BigFloat> = Default::default();
        let mut get = |gamma: &MultiIndex| -> Result<BigFloat> {
            if let Some(v) = cache.get(gamma.exponents()) {
                return Ok(v.clone());
            }
            let v = scaled.moment_float(gamma, prec)?;
            cache.insert(gamma.exponents().to_vec(), v.clone());
            Ok(v)
        };
        let mut m = Mat::filled(n, n, prec.zero());
        for i in 0..n {
            for j in i..n {
                let gamma = order.index(i).add(order.index(j))?;
                let v = get(&gamma)?;
                m.set(i, j, v.clone());
                m.set(j, i, v);
            }
        }
        HankelData::Float {
            mat: m,
            bits: prec.bits(),
        }
    };
    Ok(HankelTruncation {
        source: source.clone(),
        radius: radius.clone(),
        degree,
        order,
        data,
    })
}

/// The marginal compression along coordinate `slot` (1-based): the
/// `(N+1)×(N+1)` Hankel matrix of the slot's one-dimensional marginal,
/// equal to the principal submatrix of the full truncation on indices
/// supported on that slot.
pub fn assemble_marginal(
    source: &MomentSource,
    slot: usize,
    degree: u32,
    prec: Prec,
) -> Result<HankelTruncation> {
    if source.d() < 2 {
        return Err(Error::SlotOutOfRange {
            slot,
            d: source.d(),
        });
    }
    let marginal = source.marginal(slot)?;
    assemble(&marginal, &Rat::from_integer(1.into()), degree, prec)
}

impl HankelTruncation {
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

    pub fn size(&self) -> usize {
        self.order.len()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.data, HankelData::Exact(_))
    }

    pub fn exact_matrix(&self) -> Option<&Mat<Rat>> {
        match &self.data {
            HankelData::Exact(m) => Some(m),
            HankelData::Float { .. } => None,
        }
    }

    /// The matrix as floats at precision `p`. Float sources re-assemble at
    /// exactly `p` (memoized), so any two callers asking for the same
    /// precision see the same bits — never a double rounding.
    pub fn to_float(&self, p: Prec) -> Result<Mat<BigFloat>> {
        match &self.data {
            HankelData::Exact(m) => Ok(m.map(|r| p.from_rat(r))),
            HankelData::Float { mat, bits } => {
                if p.bits() == *bits {
                    Ok(mat.map(|v| v.clone()))
                } else {
                    let rebuilt = assemble(&self.source, &self.radius, self.degree, p)?;
                    match rebuilt.data {
                        HankelData::Float { mat, .. } => Ok(mat),
                        HankelData::Exact(m) => Ok(m.map(|r| p.from_rat(r))),
                    }
                }
            }
        }
    }

    /// Entry as a float at the stored precision (test/diagnostic access).
    pub fn entry_to_float(&self, i: usize, j: usize, p: Prec) -> BigFloat {
        match &self.data {
            HankelData::Exact(m) => p.from_rat(m.get(i, j)),
            HankelData::Float { mat, .. } => Scalar::Float(mat.get(i, j).clone()).to_float(p),
        }
    }

    /// The truncation of a smaller degree, sharing the source. Cheap: the
    /// graded order is prefix-stable, so this is the leading block.
    pub fn leading_truncation(&self, degree: u32) -> Result<HankelTruncation> {
        if degree > self.degree {
            return Err(Error::DegreeOutOfRange {
                index: vec![],
                max_degree: self.degree,
            });
        }
        let order = enumerate(self.source.d(), degree)?;
        let k = order.len();
        let data = match &self.data {
            HankelData::Exact(m) => HankelData::Exact(m.leading_block(k)),
            HankelData::Float { mat, bits } => HankelData::Float {
                mat: mat.leading_block(k),
                bits: *bits,
            },
        };
        Ok(HankelTruncation {
            source: self.source.clone(),
            radius: self.radius.clone(),
            degree,
            order,
            data,
        })
    }
}

/// Options for certified eigensolves.
#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Working precision to start from.
    pub precision: Prec,
    /// Hard ceiling for precision escalation, in bits.
    pub precision_ceiling: usize,
    /// Jacobi sweep budget per solve.
    pub max_sweeps: usize,
    /// Extra trust margin: the residual must clear `λ/10` by this many
    /// further powers of two before a solve is accepted. Zero is the plain
    /// trustworthiness rule; the duality check tightens it so its certified
    /// bound is driven by measured residuals, not by borderline solves.
    pub trust_shift: u32,
}

impl EigenOptions {
    pub fn new(precision: Prec) -> Self {
        Self {
            precision,
            precision_ceiling: 4096,
            max_sweeps: jacobi::DEFAULT_MAX_SWEEPS,
            trust_shift: 0,
        }
    }

    pub fn with_ceiling(mut self, bits: usize) -> Self {
        self.precision_ceiling = bits;
        self
    }
}

/// Full spectrum of a truncation, with the certification trail.
pub struct SpectrumResult {
    /// Ascending eigenvalues at the final working precision.
    pub eigenvalues: Vec<BigFloat>,
    /// `max_j ‖H v_j − λ_j v_j‖₂`.
    pub residual_abs: BigFloat,
    /// The same, relative to `‖H‖_F`.
    pub residual_rel: BigFloat,
    /// Frobenius norm of the solved matrix.
    pub h_norm: BigFloat,
    /// Precision the accepted solve ran at.
    pub bits_used: usize,
    /// Set when an exact rank computation certified `λ_min = 0`.
    pub exact_zero: bool,
    /// Exact rank, when it was computed.
    pub exact_rank: Option<usize>,
}

impl SpectrumResult {
    pub fn lambda_min(&self) -> &BigFloat {
        &self.eigenvalues[0]
    }

    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// True when `λ_min > 0` is certified (exactly, or beyond the residual).
    pub fn positive_definite(&self) -> bool {
        if self.exact_zero {
            return false;
        }
        if let Some(rank) = self.exact_rank {
            return rank == self.size();
        }
        !self.lambda_min().is_negative()
            && cmp(self.lambda_min(), &self.residual_abs) == Ordering::Greater
    }
}

/// Eigenvalues of `H` with residual certification and precision escalation.
///
/// The smallest eigenvalue equals the Rayleigh-quotient minimum over unit
/// coefficient vectors of degree ≤ N; the graded layout makes the matrix
/// form faithful to that definition.
pub fn spectrum(h: &HankelTruncation, opts: &EigenOptions) -> Result<SpectrumResult> {
    if h.size() == 0 {
        return Err(Error::InvalidParameter("empty truncation".into()));
    }
    let mut bits = opts.precision.bits();
    let mut exact_rank: Option<usize> = None;
    loop {
        let p = Prec::new(bits);
        let mat = h.to_float(p)?;
        match jacobi::jacobi_sym(&mat, p, opts.max_sweeps) {
            Ok(eig) => {
                let (res_abs, res_rel) = jacobi::eigen_residual(&mat, &eig, p);
                let h_norm = jacobi::frobenius(&mat, p.with_guard(64));
                let lam = eig.values[0].clone();
                let margin = p.mul(
                    &p.mul(&p.from_u64(10), &res_abs),
                    &crate::scalar::pow2(opts.trust_shift as i32),
                );
                let trustworthy =
                    lam.is_positive() && cmp(&margin, &lam) != Ordering::Greater;
                if trustworthy {
                    return Ok(SpectrumResult {
                        eigenvalues: eig.values,
                        residual_abs: res_abs,
                        residual_rel: res_rel,
                        h_norm,
                        bits_used: bits,
                        exact_zero: false,
                        exact_rank,
                    });
                }
                // Only when λ̂ cannot even be told apart from zero does the
                // exact predicate fire; a merely-untrusted positive value
                // escalates precision instead.
                let ambiguous = !lam.is_positive()
                    || cmp(&p.mul(&p.from_u64(10), &res_abs), &lam) != Ordering::Less;
                if ambiguous && h.is_exact() {
                    let rank = match exact_rank {
                        Some(r) => r,
                        None => {
                            let m = h.exact_matrix().expect("exact data");
                            let (r, _) = exact::rank_nullspace(m);
                            exact_rank = Some(r);
                            r
                        }
                    };
                    if rank < h.size() {
                        // certified singular: λ_min is exactly zero
                        return Ok(SpectrumResult {
                            eigenvalues: eig.values,
                            residual_abs: res_abs,
                            residual_rel: res_rel,
                            h_norm,
                            bits_used: bits,
                            exact_zero: true,
                            exact_rank,
                        });
                    }
                    // full rank: positive but below the residual floor;
                    // escalate until certified
                }
                if bits >= opts.precision_ceiling {
                    return Err(Error::PrecisionCeiling {
                        ceiling: opts.precision_ceiling,
                        context: format!(
                            "certifying lambda_min of a size-{} truncation (residual {} vs value {})",
                            h.size(),
                            crate::scalar::to_dec_string(&res_abs),
                            crate::scalar::to_dec_string(&lam),
                        ),
                    });
                }
                bits = (bits * 2).min(opts.precision_ceiling);
            }
            Err(Error::NoConvergence { .. }) if bits < opts.precision_ceiling => {
                bits = (bits * 2).min(opts.precision_ceiling);
            }
            Err(e) => return Err(e),
        }
    }
}

/// The smallest-eigenvalue sequence `N ↦ λ_{R,N}` for `N = 0..=n_max`.
///
/// Nonincreasing in `N` up to the certified residuals; in exact mode, once a
/// value is zero every later value is zero.
pub fn eigen_sequence(
    source: &MomentSource,
    radius: &Rat,
    n_max: u32,
    opts: &EigenOptions,
) -> Result<Vec<SpectrumResult>> {
    let full = assemble(source, radius, n_max, opts.precision)?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    // matrices grow monotonically harder along the sequence: start each
    // solve at the precision its predecessor settled at
    let mut hint = opts.precision.bits();
    for n in 0..=n_max {
        let h = full.leading_truncation(n)?;
        let mut cell_opts = *opts;
        cell_opts.precision = Prec::new(hint);
        let s = spectrum(&h, &cell_opts)?;
        hint = hint.max(s.bits_used);
        out.push(s);
    }
    Ok(out)
}

/// Exact rank and kernel of an exact-mode truncation. Kernel vectors are
/// coefficient vectors (graded-lex layout) of polynomials `p` with
/// `L(p·conj(p)) = 0`.
pub fn rank_and_kernel(h: &HankelTruncation) -> Result<(usize, Vec<Vec<Rat>>)> {
    let m = h
        .exact_matrix()
        .ok_or(Error::RequiresExactMode("rank_and_kernel"))?;
    Ok(exact::rank_nullspace(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment_source::{
        atomic_moments, gaussian_moments, lognormal_moments, product, AtomicMeasure1D,
    };
    use crate::scalar::{parse_rat, pow2, to_f64_lossy};

    fn rat(s: &str) -> Rat {
        parse_rat(s).unwrap()
    }

    fn one() -> Rat {
        rat("1")
    }

    #[test]
    fn assemble_gaussian_examples() {
        let p = Prec::new(128);
        let g = gaussian_moments();
        let h1 = assemble(&g, &one(), 1, p).unwrap();
        let m = h1.exact_matrix().unwrap();
        assert_eq!(m.get(0, 0), &rat("1"));
        assert_eq!(m.get(0, 1), &rat("0"));
        assert_eq!(m.get(1, 1), &rat("1"));

        let h2 = assemble(&g, &one(), 2, p).unwrap();
        let m = h2.exact_matrix().unwrap();
        let expect = [[1, 0, 1], [0, 1, 0], [1, 0, 3]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), &Rat::from_integer(expect[i][j].into()));
            }
        }
    }

    #[test]
    fn assemble_all_ones_for_delta_one() {
        let p = Prec::new(128);
        let d1 = atomic_moments(AtomicMeasure1D::new(vec![(rat("1"), rat("1"))]).unwrap());
        let h = assemble(&d1, &one(), 2, p).unwrap();
        let m = h.exact_matrix().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), &rat("1"));
            }
        }
    }

    #[test]
    fn hankel_structure_entries_depend_on_index_sum() {
        // every entry must agree with the canonical value for its index
        // sum, which is equivalent to all equal-sum pairs agreeing
        let p = Prec::new(128);
        let g1 = gaussian_moments();
        let gg = product(vec![gaussian_moments(), gaussian_moments()]).unwrap();
        for (source, d_max) in [(&g1, 1usize), (&gg, 2)] {
            let _ = d_max;
            for n in 0..=6u32 {
                let h = assemble(source, &rat("1/2"), n, p).unwrap();
                let order = h.order();
                let m = h.exact_matrix().unwrap();
                let mut canonical: std::collections::HashMap<Vec<u32>, Rat> = Default::default();
                for i in 0..order.len() {
                    for j in 0..order.len() {
                        let sum = order.index(i).add(order.index(j)).unwrap();
                        let entry = m.get(i, j).clone();
                        match canonical.entry(sum.exponents().to_vec()) {
                            std::collections::hash_map::Entry::Vacant(v) => {
                                v.insert(entry);
                            }
                            std::collections::hash_map::Entry::Occupied(o) => {
                                assert_eq!(o.get(), &entry, "sum {:?}", sum.exponents());
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn spectrum_gaussian_truncations() {
        let g = gaussian_moments();
        let opts = EigenOptions::new(Prec::new(256));
        let h1 = assemble(&g, &one(), 1, opts.precision).unwrap();
        let s1 = spectrum(&h1, &opts).unwrap();
        assert_eq!(s1.size(), 2);
        assert_eq!(cmp(s1.lambda_min(), &opts.precision.one()), Ordering::Equal);

        let h2 = assemble(&g, &one(), 2, opts.precision).unwrap();
        let s2 = spectrum(&h2, &opts).unwrap();
        let p = opts.precision;
        let sqrt2 = p.sqrt(&p.from_u64(2));
        let lam = p.sub(&p.from_u64(2), &sqrt2);
        let diff = p.sub(s2.lambda_min(), &lam).abs();
        assert!(cmp(&diff, &pow2(-240)) == Ordering::Less);
        assert!(s2.positive_definite());
    }

    #[test]
    fn spectrum_detects_exact_zero() {
        let d1 = atomic_moments(AtomicMeasure1D::new(vec![(rat("1"), rat("1"))]).unwrap());
        let opts = EigenOptions::new(Prec::new(128));
        let h = assemble(&d1, &one(), 2, opts.precision).unwrap();
        let s = spectrum(&h, &opts).unwrap();
        assert!(s.exact_zero);
        assert_eq!(s.exact_rank, Some(1));
        assert!(!s.positive_definite());
        assert!((to_f64_lossy(&s.eigenvalues[2]) - 3.0).abs() < 1e-25);
    }

    #[test]
    fn eigen_sequence_gaussian() {
        let g = gaussian_moments();
        let opts = EigenOptions::new(Prec::new(256));
        let seq = eigen_sequence(&g, &one(), 2, &opts).unwrap();
        let p = opts.precision;
        assert_eq!(cmp(seq[0].lambda_min(), &p.one()), Ordering::Equal);
        assert_eq!(cmp(seq[1].lambda_min(), &p.one()), Ordering::Equal);
        let sqrt2 = p.sqrt(&p.from_u64(2));
        let lam = p.sub(&p.from_u64(2), &sqrt2);
        let diff = p.sub(seq[2].lambda_min(), &lam).abs();
        assert!(cmp(&diff, &pow2(-240)) == Ordering::Less);
    }

    #[test]
    fn eigen_sequence_two_atoms_hits_exact_zero() {
        let sym = atomic_moments(
            AtomicMeasure1D::new(vec![(rat("-1"), rat("1/2")), (rat("1"), rat("1/2"))]).unwrap(),
        );
        let opts = EigenOptions::new(Prec::new(128));
        let seq = eigen_sequence(&sym, &one(), 3, &opts).unwrap();
        assert!(!seq[0].exact_zero);
        assert!(!seq[1].exact_zero);
        assert!(seq[2].exact_zero); // rank ≤ 2 from N = 2 on
        assert!(seq[3].exact_zero);
        assert_eq!(
            cmp(seq[1].lambda_min(), &opts.precision.one()),
            Ordering::Equal
        );
    }

    #[test]
    fn eigen_sequence_delta_one() {
        let d1 = atomic_moments(AtomicMeasure1D::new(vec![(rat("1"), rat("1"))]).unwrap());
        let opts = EigenOptions::new(Prec::new(128));
        let seq = eigen_sequence(&d1, &one(), 3, &opts).unwrap();
        assert!(!seq[0].exact_zero);
        for s in &seq[1..] {
            assert!(s.exact_zero);
        }
    }

    #[test]
    fn rank_and_kernel_examples() {
        let p = Prec::new(128);
        let g = gaussian_moments();
        let h2 = assemble(&g, &one(), 2, p).unwrap();
        let (rank, kernel) = rank_and_kernel(&h2).unwrap();
        assert_eq!(rank, 3);
        assert!(kernel.is_empty());

        let d1 = atomic_moments(AtomicMeasure1D::new(vec![(rat("1"), rat("1"))]).unwrap());
        let h1 = assemble(&d1, &one(), 1, p).unwrap();
        let (rank, kernel) = rank_and_kernel(&h1).unwrap();
        assert_eq!(rank, 1);
        assert_eq!(kernel, vec![vec![rat("-1"), rat("1")]]); // x − 1

        let sym = atomic_moments(
            AtomicMeasure1D::new(vec![(rat("-1"), rat("1/2")), (rat("1"), rat("1/2"))]).unwrap(),
        );
        let h2 = assemble(&sym, &one(), 2, p).unwrap();
        let (rank, kernel) = rank_and_kernel(&h2).unwrap();
        assert_eq!(rank, 2);
        assert_eq!(kernel, vec![vec![rat("-1"), rat("0"), rat("1")]]); // x² − 1

        let ln = lognormal_moments(rat("1")).unwrap();
        let hf = assemble(&ln, &one(), 1, p).unwrap();
        assert!(matches!(
            rank_and_kernel(&hf),
            Err(Error::RequiresExactMode(_))
        ));
    }

    #[test]
    fn marginal_matches_principal_submatrix() {
        let p = Prec::new(192);
        let g = gaussian_moments();
        let l = lognormal_moments(rat("1")).unwrap();
        let gl = product(vec![g.clone(), l.clone()]).unwrap();

        // j = 1 marginal of gaussian⊗lognormal is the gaussian Hankel
        let j1 = assemble_marginal(&gl, 1, 2, p).unwrap();
        assert!(j1.is_exact());
        let m = j1.exact_matrix().unwrap();
        let expect = [[1, 0, 1], [0, 1, 0], [1, 0, 3]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), &Rat::from_integer(expect[i][j].into()));
            }
        }

        // j = 2 marginal: [[1, e^{1/2}], [e^{1/2}, e²]]
        let j2 = assemble_marginal(&gl, 2, 1, p).unwrap();
        let e_half = p.exp(&p.div(&p.one(), &p.from_u64(2)));
        let e2 = p.exp(&p.from_u64(2));
        let d01 = p.sub(&j2.entry_to_float(0, 1, p), &e_half).abs();
        let d11 = p.sub(&j2.entry_to_float(1, 1, p), &e2).abs();
        assert!(cmp(&d01, &pow2(-180)) == Ordering::Less);
        assert!(cmp(&d11, &p.mul(&e2.abs(), &pow2(-180))) == Ordering::Less);

        // the marginal equals the principal submatrix of the full truncation
        let full = assemble(&gl, &one(), 2, p).unwrap();
        let order = full.order();
        let marg = assemble_marginal(&gl, 2, 1, p).unwrap();
        for k in 0..=1u32 {
            for l2 in 0..=1u32 {
                let a = order
                    .rank(&MultiIndex::new(vec![0, k]).unwrap())
                    .unwrap();
                let b = order
                    .rank(&MultiIndex::new(vec![0, l2]).unwrap())
                    .unwrap();
                let lhs = marg.entry_to_float(k as usize, l2 as usize, p);
                let rhs = full.entry_to_float(a, b, p);
                assert_eq!(cmp(&lhs, &rhs), Ordering::Equal);
            }
        }

        // out-of-range slot
        assert!(assemble_marginal(&gl, 3, 1, p).is_err());
    }

    #[test]
    fn compression_bound_lambda_full_le_marginal() {
        let opts = EigenOptions::new(Prec::new(256));
        let p = opts.precision;
        let g = gaussian_moments();
        let l = lognormal_moments(rat("1")).unwrap();
        let gl = product(vec![g, l]).unwrap();
        for n in 1..=3u32 {
            let full = assemble(&gl, &one(), n, p).unwrap();
            let sf = spectrum(&full, &opts).unwrap();
            for slot in 1..=2usize {
                let marg = assemble_marginal(&gl, slot, n, p).unwrap();
                let sm = spectrum(&marg, &opts).unwrap();
                let slack = p.add(&sf.residual_abs, &sm.residual_abs);
                let lhs = p.sub(sf.lambda_min(), &slack);
                assert!(cmp(&lhs, sm.lambda_min()) != Ordering::Greater);
            }
        }
    }

    #[test]
    fn interlacing_under_scaling() {
        let opts = EigenOptions::new(Prec::new(256));
        let g = gaussian_moments();
        for r in ["1/2", "1", "2"] {
            let seq = eigen_sequence(&g, &rat(r), 6, &opts).unwrap();
            for w in seq.windows(2) {
                let p = opts.precision;
                let slack = p.add(&w[0].residual_abs, &w[1].residual_abs);
                let bound = p.add(w[0].lambda_min(), &slack);
                assert!(cmp(w[1].lambda_min(), &bound) != Ordering::Greater);
            }
        }
    }

    #[test]
    fn ill_conditioned_spectrum_escalates() {
        // ‖H‖ ≈ 1e125 at degree 12 for the lognormal family: a 256-bit
        // Jacobi residual is ~1e49, far above λ_min ≈ 0.44, so the solve
        // must escalate before its smallest eigenvalue can be trusted
        let ln = lognormal_moments(rat("1")).unwrap();
        let opts = EigenOptions::new(Prec::new(256));
        let h = assemble(&ln, &one(), 12, opts.precision).unwrap();
        let s = spectrum(&h, &opts).unwrap();
        assert!(s.bits_used >= 512, "got {} bits", s.bits_used);
        let lam = to_f64_lossy(s.lambda_min());
        assert!(lam > 0.1 && lam < 1.0, "lambda_min {lam}");
        let ten_res = to_f64_lossy(&s.residual_abs) * 10.0;
        assert!(ten_res < lam);
    }

    #[test]
    fn scaling_rank_transfer() {
        // exact rank of H_{R,N} does not depend on R
        let p = Prec::new(128);
        let sym = atomic_moments(
            AtomicMeasure1D::new(vec![(rat("-1"), rat("1/2")), (rat("1"), rat("1/2"))]).unwrap(),
        );
        for n in 0..=3u32 {
            let ranks: Vec<usize> = ["1/2", "1", "2"]
                .iter()
                .map(|r| {
                    let h = assemble(&sym, &rat(r), n, p).unwrap();
                    rank_and_kernel(&h).unwrap().0
                })
                .collect();
            assert!(ranks.windows(2).all(|w| w[0] == w[1]));
        }
    }
}
