//! Moment multisequences: built-in families, atomic measures, file tables,
//! and the product / scaling combinators.
//!
//! A [`MomentSource`] answers queries `α → s_α`. Sources are exact-rational
//! whenever the family admits it (the Gaussian family, atomic measures with
//! rational data, tables); the log-normal family forces high-precision float
//! mode, and a float query carries its working precision so escalating
//! callers can re-query at higher precision. Every constructible source is
//! normalized: `s_0 = 1`.
//!
//! Values are memoized per source; Hankel assembly to degree `N` touches each
//! `s_γ` with `|γ| ≤ 2N` many times.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::scalar::{
    parse_rat, rat_pow, rat_to_string, BigFloat, Complex, Prec, Rat, Scalar,
};

/// A finite positive combination of point masses on the line, with weights
/// summing to one.
#[derive(Clone, Debug)]
pub struct AtomicMeasure1D {
    atoms: Vec<(Rat, Rat)>, // (location, weight)
}

impl AtomicMeasure1D {
    pub fn new(atoms: Vec<(Rat, Rat)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter(
                "atomic measure needs at least one atom".into(),
            ));
        }
        let mut sum = Rat::zero();
        for (i, (loc, w)) in atoms.iter().enumerate() {
            if !w.is_positive() {
                return Err(Error::InvalidParameter(format!(
                    "atom weight {} must be positive",
                    rat_to_string(w)
                )));
            }
            for (loc2, _) in &atoms[..i] {
                if loc == loc2 {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate atom location {}",
                        rat_to_string(loc)
                    )));
                }
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(Error::InvalidParameter(format!(
                "atom weights must sum to 1, got {}",
                rat_to_string(&sum)
            )));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(Rat, Rat)] {
        &self.atoms
    }
}

enum Kind {
    Gaussian,
    LogNormal { sigma: Rat },
    Atomic { atoms: AtomicMeasure1D },
    Table { bound: u32, entries: HashMap<Vec<u32>, Rat> },
    Product { factors: Vec<MomentSource> },
    Scaled { base: MomentSource, radius: Rat },
    Marginal { base: MomentSource, slot: usize },
}

struct Inner {
    d: usize,
    kind: Kind,
    exact: bool,
    description: String,
    cache: Mutex<HashMap<(Vec<u32>, usize), Scalar>>,
}

/// A queryable moment multisequence.
///
/// Cloning is cheap (shared backing); the memo cache behaves as if queries
/// were serialized.
#[derive(Clone)]
pub struct MomentSource {
    inner: Arc<Inner>,
}

impl fmt::Debug for MomentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MomentSource({})", self.inner.description)
    }
}

fn make(d: usize, kind: Kind, exact: bool, description: String) -> MomentSource {
    MomentSource {
        inner: Arc::new(Inner {
            d,
            kind,
            exact,
            description,
            cache: Mutex::new(HashMap::new()),
        }),
    }
}

/// Moments of the standard normal distribution: `s_{2k} = (2k−1)!!`,
/// zero at odd orders. Exact-rational.
pub fn gaussian_moments() -> MomentSource {
    make(1, Kind::Gaussian, true, "gaussian".into())
}

/// Moments of the log-normal distribution with shape `σ`:
/// `s_n = exp(n²σ²/2)`. High-precision float mode.
pub fn lognormal_moments(sigma: Rat) -> Result<MomentSource> {
    if !sigma.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "lognormal sigma must be positive, got {}",
            rat_to_string(&sigma)
        )));
    }
    let description = format!("lognormal(sigma={})", rat_to_string(&sigma));
    Ok(make(1, Kind::LogNormal { sigma }, false, description))
}

/// Moments of a finite atomic measure: `s_n = Σ w_i a_i^n`. Exact-rational.
pub fn atomic_moments(atoms: AtomicMeasure1D) -> MomentSource {
    let desc = format!(
        "atomic({})",
        atoms
            .atoms()
            .iter()
            .map(|(a, w)| format!("{}@{}", rat_to_string(w), rat_to_string(a)))
            .collect::<Vec<_>>()
            .join("+")
    );
    make(1, Kind::Atomic { atoms }, true, desc)
}

/// Product multisequence of one-dimensional factors:
/// `s_α = Π_j s_{j,α_j}`. Exact iff every factor is exact.
pub fn product(factors: Vec<MomentSource>) -> Result<MomentSource> {
    if factors.is_empty() {
        return Err(Error::InvalidParameter("empty product".into()));
    }
    for f in &factors {
        if f.d() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: f.d(),
            });
        }
    }
    let d = factors.len();
    let exact = factors.iter().all(|f| f.is_exact());
    let desc = format!(
        "product({})",
        factors
            .iter()
            .map(|f| f.description().to_string())
            .collect::<Vec<_>>()
            .join(" (x) ")
    );
    Ok(make(d, Kind::Product { factors }, exact, desc))
}

impl MomentSource {
    pub fn d(&self) -> usize {
        self.inner.d
    }

    /// True when every query returns an exact rational.
    pub fn is_exact(&self) -> bool {
        self.inner.exact
    }

    pub fn description(&self) -> &str {
        &self.inner.description
    }

    /// Factors of a product source, if this source was built by [`product`].
    pub fn factors(&self) -> Option<&[MomentSource]> {
        match &self.inner.kind {
            Kind::Product { factors } => Some(factors),
            _ => None,
        }
    }

    /// The scaled multisequence `α → s_α / R^{|α|}`.
    ///
    /// Scaling by `R` then `S` agrees with scaling by `R·S`; scaling by 1 is
    /// the identity on every queried value.
    pub fn scaled(&self, radius: &Rat) -> Result<MomentSource> {
        if !radius.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "scaling radius must be positive, got {}",
                rat_to_string(radius)
            )));
        }
        let desc = format!(
            "scaled({}, R={})",
            self.description(),
            rat_to_string(radius)
        );
        Ok(make(
            self.d(),
            Kind::Scaled {
                base: self.clone(),
                radius: radius.clone(),
            },
            self.is_exact(),
            desc,
        ))
    }

    /// One-dimensional marginal along coordinate `slot` (1-based): the
    /// sequence `n → s_{(0,…,n,…,0)}`. For a product source this is exactly
    /// the corresponding factor.
    pub fn marginal(&self, slot: usize) -> Result<MomentSource> {
        if slot == 0 || slot > self.d() {
            return Err(Error::SlotOutOfRange {
                slot,
                d: self.d(),
            });
        }
        if self.d() == 1 {
            return Ok(self.clone());
        }
        if let Kind::Product { factors } = &self.inner.kind {
            return Ok(factors[slot - 1].clone());
        }
        let desc = format!("marginal({}, slot={})", self.description(), slot);
        Ok(make(
            1,
            Kind::Marginal {
                base: self.clone(),
                slot: slot - 1,
            },
            self.is_exact(),
            desc,
        ))
    }

    /// Query `s_α`. Float-mode sources evaluate at precision `prec`.
    pub fn moment(&self, alpha: &MultiIndex, prec: Prec) -> Result<Scalar> {
        if alpha.d() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: alpha.d(),
            });
        }
        let bits = if self.is_exact() { 0 } else { prec.bits() };
        let key = (alpha.exponents().to_vec(), bits);
        if let Some(v) = self.inner.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let value = self.compute(alpha, prec)?;
        self.inner
            .cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| value.clone());
        Ok(value)
    }

    /// Query as a float at the given precision.
    pub fn moment_float(&self, alpha: &MultiIndex, prec: Prec) -> Result<BigFloat> {
        Ok(self.moment(alpha, prec)?.to_float(prec))
    }

    /// Query an exact source.
    pub fn moment_exact(&self, alpha: &MultiIndex) -> Result<Rat> {
        let v = self.moment(alpha, Prec::new(crate::scalar::MIN_PRECISION_BITS))?;
        match v {
            Scalar::Exact(r) => Ok(r),
            Scalar::Float(_) => Err(Error::RequiresExactMode("moment_exact")),
        }
    }

    fn compute(&self, alpha: &MultiIndex, prec: Prec) -> Result<Scalar> {
        match &self.inner.kind {
            Kind::Gaussian => {
                let n = alpha.exponents()[0];
                Ok(Scalar::Exact(gaussian_moment_rat(n)))
            }
            Kind::LogNormal { sigma } => {
                let n = alpha.exponents()[0];
                if n == 0 {
                    return Ok(Scalar::one());
                }
                // exact exponent n²σ²/2, one rounding into float, then exp
                let expo = Rat::from_integer(BigInt::from(n) * BigInt::from(n))
                    * sigma
                    * sigma
                    / Rat::from_integer(2.into());
                let guard = prec.with_guard(32);
                let x = guard.from_rat(&expo);
                Ok(Scalar::Float(prec.exp(&x)))
            }
            Kind::Atomic { atoms } => {
                let n = alpha.exponents()[0];
                let mut acc = Rat::zero();
                for (loc, w) in atoms.atoms() {
                    acc += w * rat_pow(loc, n);
                }
                Ok(Scalar::Exact(acc))
            }
            Kind::Table { bound, entries } => {
                if alpha.total_degree() > *bound {
                    return Err(Error::DegreeOutOfRange {
                        index: alpha.exponents().to_vec(),
                        max_degree: *bound,
                    });
                }
                entries
                    .get(alpha.exponents())
                    .cloned()
                    .map(Scalar::Exact)
                    .ok_or_else(|| {
                        Error::Table(format!(
                            "missing entry for alpha={:?}",
                            alpha.exponents()
                        ))
                    })
            }
            Kind::Product { factors } => {
                let mut exact_acc = Rat::one();
                let mut float_acc: Option<BigFloat> = None;
                for (j, factor) in factors.iter().enumerate() {
                    let aj = MultiIndex::new(vec![alpha.exponents()[j]])?;
                    match factor.moment(&aj, prec)? {
                        Scalar::Exact(r) => exact_acc *= r,
                        Scalar::Float(f) => {
                            float_acc = Some(match float_acc {
                                None => f,
                                Some(acc) => prec.mul(&acc, &f),
                            });
                        }
                    }
                }
                Ok(match float_acc {
                    None => Scalar::Exact(exact_acc),
                    Some(f) => {
                        if exact_acc.is_one() {
                            Scalar::Float(f)
                        } else {
                            Scalar::Float(prec.mul(&prec.from_rat(&exact_acc), &f))
                        }
                    }
                })
            }
            Kind::Scaled { base, radius } => {
                let scale = rat_pow(radius, alpha.total_degree());
                match base.moment(alpha, prec)? {
                    Scalar::Exact(r) => Ok(Scalar::Exact(r / scale)),
                    Scalar::Float(f) => {
                        Ok(Scalar::Float(prec.div(&f, &prec.from_rat(&scale))))
                    }
                }
            }
            Kind::Marginal { base, slot } => {
                let full = MultiIndex::single(base.d(), *slot, alpha.exponents()[0])?;
                base.moment(&full, prec)
            }
        }
    }

    /// Apply the moment functional to a polynomial: `L(p) = Σ c_α s_α`.
    pub fn apply_functional(&self, p: &RatPoly, prec: Prec) -> Result<Scalar> {
        if p.d() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: p.d(),
            });
        }
        let mut exact_acc = Rat::zero();
        let mut float_acc: Option<BigFloat> = None;
        for (alpha, c) in p.terms() {
            let idx = MultiIndex::new(alpha.clone())?;
            match self.moment(&idx, prec)? {
                Scalar::Exact(s) => exact_acc += c * s,
                Scalar::Float(s) => {
                    let term = prec.mul(&prec.from_rat(c), &s);
                    float_acc = Some(match float_acc {
                        None => term,
                        Some(acc) => prec.add(&acc, &term),
                    });
                }
            }
        }
        Ok(match float_acc {
            None => Scalar::Exact(exact_acc),
            Some(f) => Scalar::Float(if exact_acc.is_zero() {
                f
            } else {
                prec.add(&prec.from_rat(&exact_acc), &f)
            }),
        })
    }

    /// `L(p·conj(p))` for a real-coefficient polynomial: expands the square
    /// and sums. Nonnegative for positive sources.
    pub fn apply_functional_abs2(&self, p: &RatPoly, prec: Prec) -> Result<Scalar> {
        if p.d() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: p.d(),
            });
        }
        // combine coefficient products by the summed index first, exactly
        let mut combined: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        let terms: Vec<_> = p.terms().collect();
        for (a, ca) in &terms {
            for (b, cb) in &terms {
                let sum: Vec<u32> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                *combined.entry(sum).or_insert_with(Rat::zero) += *ca * *cb;
            }
        }
        let square = RatPoly {
            d: p.d(),
            terms: combined,
        };
        self.apply_functional(&square, prec)
    }
}

fn gaussian_moment_rat(n: u32) -> Rat {
    if n % 2 == 1 {
        return Rat::zero();
    }
    // (n−1)!!, equivalently the recurrence s_{2k} = (2k−1)·s_{2k−2}
    let mut acc = BigInt::one();
    let mut k = 1u32;
    while k < n {
        acc *= BigInt::from(k);
        k += 2;
    }
    Rat::from_integer(acc)
}

/// Sparse polynomial with exact rational coefficients, keyed by exponent
/// tuple. The argument type of the moment functional and kernel application.
#[derive(Clone, Debug, PartialEq)]
pub struct RatPoly {
    d: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl RatPoly {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: Rat) -> Self {
        let mut p = Self::new(d);
        p.set_term(&vec![0; d], c);
        p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn set_term(&mut self, alpha: &[u32], c: Rat) {
        assert_eq!(alpha.len(), self.d, "term dimension");
        if c.is_zero() {
            self.terms.remove(alpha);
        } else {
            self.terms.insert(alpha.to_vec(), c);
        }
    }

    pub fn with_term(mut self, alpha: &[u32], c: Rat) -> Self {
        self.set_term(alpha, c);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rat(&self, x: &[Rat]) -> Result<Rat> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let mut acc = Rat::zero();
        for (alpha, c) in &self.terms {
            let mut term = c.clone();
            for (j, &e) in alpha.iter().enumerate() {
                term *= rat_pow(&x[j], e);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Float evaluation at a complex point.
    pub fn eval_complex(&self, p: Prec, z: &[Complex]) -> Result<Complex> {
        if z.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: z.len(),
            });
        }
        let mut acc = Complex::zero(p);
        for (alpha, c) in &self.terms {
            let mut term = Complex::one(p).scale(p, &p.from_rat(c));
            for (j, &e) in alpha.iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(p, &z[j]);
                }
            }
            acc = acc.add(p, &term);
        }
        Ok(acc)
    }
}

/// On-disk moment table.
#[derive(Serialize, Deserialize)]
struct TableFile {
    d: usize,
    max_total_degree: u32,
    entries: Vec<TableEntry>,
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    alpha: Vec<u32>,
    value: String,
}

/// Load a moment table from a JSON file. The Hankel assembly to degree `n`
/// needs every `s_γ` with `|γ| ≤ 2n`, so the table must cover that range.
pub fn load_table(path: &Path, d: usize, n: u32) -> Result<MomentSource> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
    let file: TableFile =
        serde_json::from_str(&text).map_err(|e| Error::Table(format!("malformed: {e}")))?;
    table_from_entries(
        d,
        n,
        file.d,
        file.max_total_degree,
        file.entries
            .iter()
            .map(|e| (e.alpha.clone(), e.value.as_str())),
        &format!("table({})", path.display()),
    )
}

fn table_from_entries<'a>(
    d: usize,
    n: u32,
    file_d: usize,
    file_bound: u32,
    raw: impl Iterator<Item = (Vec<u32>, &'a str)>,
    description: &str,
) -> Result<MomentSource> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if file_d != d {
        return Err(Error::Table(format!(
            "dimension {file_d} declared, {d} requested"
        )));
    }
    let need = 2 * n;
    if file_bound < need {
        return Err(Error::Table(format!(
            "declares max_total_degree {file_bound}, need {need} for degree-{n} truncations"
        )));
    }
    let mut entries: HashMap<Vec<u32>, Rat> = HashMap::new();
    for (alpha, text) in raw {
        if alpha.len() != d {
            return Err(Error::Table(format!(
                "entry alpha={alpha:?} has wrong dimension"
            )));
        }
        let value = parse_rat(text)?;
        if entries.insert(alpha.clone(), value).is_some() {
            return Err(Error::Table(format!("duplicate entry alpha={alpha:?}")));
        }
    }
    // completeness over |α| ≤ 2n
    let order = crate::multi_index::enumerate(d, need)?;
    for idx in order.iter() {
        if !entries.contains_key(idx.exponents()) {
            return Err(Error::Table(format!(
                "missing entry for alpha={:?}",
                idx.exponents()
            )));
        }
    }
    let zero_key = vec![0u32; d];
    let s0 = &entries[&zero_key];
    if !s0.is_one() {
        return Err(Error::NotNormalized {
            got: rat_to_string(s0),
        });
    }
    // queries are gated at the validated range
    Ok(make(
        d,
        Kind::Table { bound: need, entries },
        true,
        description.to_string(),
    ))
}

/// Build an in-memory table source (used by tests and the table round-trip).
pub fn table_from_values(d: usize, n: u32, values: Vec<(Vec<u32>, Rat)>) -> Result<MomentSource> {
    let strings: Vec<(Vec<u32>, String)> = values
        .into_iter()
        .map(|(a, v)| (a, rat_to_string(&v)))
        .collect();
    table_from_entries(
        d,
        n,
        d,
        2 * n,
        strings.iter().map(|(a, s)| (a.clone(), s.as_str())),
        "table(in-memory)",
    )
}

/// Dump a source's moments up to total degree `max_degree` in the table
/// schema. Exact values render as rationals, float values as decimal
/// strings at the given precision.
pub fn save_table(source: &MomentSource, max_degree: u32, prec: Prec) -> Result<String> {
    let order = crate::multi_index::enumerate(source.d(), max_degree)?;
    let mut entries = Vec::with_capacity(order.len());
    for idx in order.iter() {
        let v = source.moment(idx, prec)?;
        entries.push(TableEntry {
            alpha: idx.exponents().to_vec(),
            value: v.to_table_string(prec),
        });
    }
    let file = TableFile {
        d: source.d(),
        max_total_degree: max_degree,
        entries,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}
