//! Scalar layer: exact rationals and high-precision floats.
//!
//! Everything numeric in this crate flows through one of two scalar kinds:
//!
//! * exact rationals ([`Rat`]), used whenever a moment family admits them —
//!   equality questions (rank, null spaces, exact zeros) are only decidable
//!   there;
//! * arbitrary-precision binary floats ([`BigFloat`]), used for eigensolves,
//!   square roots, and moment families with transcendental values.
//!
//! Float operations always carry an explicit working precision ([`Prec`]) so
//! that callers can escalate precision and re-run; nothing reads a global
//! rounding state.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::str::FromStr;

use astro_float::{Consts, Exponent, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, Sign as IntSign};
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use astro_float::BigFloat;

/// Exact rational scalar.
pub type Rat = num_rational::BigRational;

/// Smallest accepted working precision, in bits.
pub const MIN_PRECISION_BITS: usize = 64;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache allocation"));
}

/// Working precision for float operations, in bits of mantissa.
///
/// All arithmetic helpers round to this precision with round-to-even, which
/// keeps every pipeline bit-reproducible for a fixed precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prec {
    bits: usize,
}

impl Prec {
    const RM: RoundingMode = RoundingMode::ToEven;

    pub fn new(bits: usize) -> Self {
        Self {
            bits: bits.max(MIN_PRECISION_BITS),
        }
    }

    pub fn bits(self) -> usize {
        self.bits
    }

    pub fn doubled(self) -> Self {
        Self::new(self.bits * 2)
    }

    /// Precision with `extra` guard bits, for residual evaluations.
    pub fn with_guard(self, extra: usize) -> Self {
        Self::new(self.bits + extra)
    }

    pub fn add(self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, Self::RM)
    }

    pub fn sub(self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, Self::RM)
    }

    pub fn mul(self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, Self::RM)
    }

    pub fn div(self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, Self::RM)
    }

    pub fn recip(self, a: &BigFloat) -> BigFloat {
        a.reciprocal(self.bits, Self::RM)
    }

    pub fn sqrt(self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.bits, Self::RM)
    }

    pub fn exp(self, a: &BigFloat) -> BigFloat {
        CONSTS.with(|cc| a.exp(self.bits, Self::RM, &mut cc.borrow_mut()))
    }

    pub fn sin(self, a: &BigFloat) -> BigFloat {
        CONSTS.with(|cc| a.sin(self.bits, Self::RM, &mut cc.borrow_mut()))
    }

    pub fn cos(self, a: &BigFloat) -> BigFloat {
        CONSTS.with(|cc| a.cos(self.bits, Self::RM, &mut cc.borrow_mut()))
    }

    pub fn pi(self) -> BigFloat {
        CONSTS.with(|cc| cc.borrow_mut().pi(self.bits, Self::RM))
    }

    pub fn powi(self, a: &BigFloat, n: usize) -> BigFloat {
        a.powi(n, self.bits, Self::RM)
    }

    pub fn from_u64(self, v: u64) -> BigFloat {
        BigFloat::from_u64(v, self.bits)
    }

    pub fn from_i64(self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, self.bits)
    }

    pub fn zero(self) -> BigFloat {
        BigFloat::from_u64(0, self.bits)
    }

    pub fn one(self) -> BigFloat {
        BigFloat::from_u64(1, self.bits)
    }

    /// Convert an exact rational: both parts are taken exactly, the single
    /// division rounds once to the working precision.
    pub fn from_rat(self, r: &Rat) -> BigFloat {
        let n = bigint_to_float(r.numer());
        let d = bigint_to_float(r.denom());
        n.div(&d, self.bits, Self::RM)
    }

    /// Parse a decimal string at the working precision.
    pub fn parse_dec(self, s: &str) -> Result<BigFloat> {
        let v = CONSTS.with(|cc| {
            BigFloat::parse(s, Radix::Dec, self.bits, Self::RM, &mut cc.borrow_mut())
        });
        if v.is_nan() {
            return Err(Error::NumberParse(s.to_string()));
        }
        Ok(v)
    }
}

/// Exact conversion of a big integer into a float (no rounding).
pub fn bigint_to_float(n: &BigInt) -> BigFloat {
    if n.is_zero() {
        return BigFloat::from_u64(0, MIN_PRECISION_BITS);
    }
    let (sign, mag) = (n.sign(), n.magnitude());
    let words: Vec<u64> = mag.iter_u64_digits().collect();
    let exponent = (words.len() * 64) as Exponent;
    let s = if sign == IntSign::Minus {
        Sign::Neg
    } else {
        Sign::Pos
    };
    BigFloat::from_words(&words, s, exponent)
}

/// 2^k as a float.
pub fn pow2(k: i32) -> BigFloat {
    let mut v = BigFloat::from_u64(1, MIN_PRECISION_BITS);
    v.set_exponent((k + 1) as Exponent);
    v
}

/// Total order on finite floats; NaN is a programming error here.
pub fn cmp(a: &BigFloat, b: &BigFloat) -> Ordering {
    let c = a.cmp(b).expect("NaN in float comparison");
    c.cmp(&0)
}

pub fn max_f<'a>(a: &'a BigFloat, b: &'a BigFloat) -> &'a BigFloat {
    if cmp(a, b) == Ordering::Less {
        b
    } else {
        a
    }
}

/// Full-precision decimal rendering (deterministic for a fixed input).
pub fn to_dec_string(x: &BigFloat) -> String {
    format!("{x}")
}

/// Lossy conversion for coarse magnitude work (trend slopes, thresholds).
pub fn to_f64_lossy(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let (words, _, sign, exp, _) = x.as_raw_parts().expect("finite float");
    let top = *words.last().expect("nonzero mantissa") as f64;
    let frac = top / (u64::MAX as f64 + 1.0); // in [1/2, 1)
    let v = frac * 2f64.powi(exp);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// Natural log magnitude, usable even when the value over/underflows `f64`.
pub fn ln_abs_lossy(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (words, _, _, exp, _) = x.as_raw_parts().expect("finite float");
    let top = *words.last().expect("nonzero mantissa") as f64;
    let frac = top / (u64::MAX as f64 + 1.0);
    frac.ln() + (exp as f64) * std::f64::consts::LN_2
}

/// Parse a rational from either `p/q` or decimal notation, exactly.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::NumberParse(s.to_string()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let numer =
            BigInt::from_str(n.trim()).map_err(|_| Error::NumberParse(s.to_string()))?;
        let denom =
            BigInt::from_str(d.trim()).map_err(|_| Error::NumberParse(s.to_string()))?;
        if denom.is_zero() {
            return Err(Error::NumberParse(s.to_string()));
        }
        return Ok(Rat::new(numer, denom));
    }
    parse_decimal_rat(s)
}

fn parse_decimal_rat(s: &str) -> Result<Rat> {
    let err = || Error::NumberParse(s.to_string());
    let (mantissa_part, exp_part) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], Some(&s[pos + 1..])),
        None => (s, None),
    };
    let exp10: i64 = match exp_part {
        Some(e) if !e.is_empty() => e.parse().map_err(|_| err())?,
        Some(_) => return Err(err()),
        None => 0,
    };
    let (int_part, frac_part) = match mantissa_part.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa_part, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let mantissa = BigInt::from_str(&digits).map_err(|_| err())?;
    let shift = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    Ok(if shift >= 0 {
        Rat::from_integer(mantissa * ten.pow(shift as u32))
    } else {
        Rat::new(mantissa, ten.pow((-shift) as u32))
    })
}

/// Render a rational as `p/q` (or plain integer when q = 1).
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// r^n for a nonnegative integer exponent.
pub fn rat_pow(r: &Rat, n: u32) -> Rat {
    Rat::new(r.numer().pow(n), r.denom().pow(n))
}

/// A moment value: exact rational when the family admits it, otherwise a
/// high-precision float evaluated at the precision of the query.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rat),
    Float(BigFloat),
}

impl Scalar {
    pub fn one() -> Self {
        Scalar::Exact(Rat::one())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_float(&self, p: Prec) -> BigFloat {
        match self {
            Scalar::Exact(r) => p.from_rat(r),
            Scalar::Float(f) => {
                let mut v = f.clone();
                // Rounding only ever shrinks stored precision.
                if v.mantissa_max_bit_len().unwrap_or(0) > p.bits() {
                    v.set_precision(p.bits(), RoundingMode::ToEven)
                        .expect("precision change");
                }
                v
            }
        }
    }

    /// Decimal rendering for file output.
    pub fn to_dec_string(&self, p: Prec) -> String {
        to_dec_string(&self.to_float(p))
    }

    /// Exact rendering when available, decimal otherwise.
    pub fn to_table_string(&self, p: Prec) -> String {
        match self {
            Scalar::Exact(r) => rat_to_string(r),
            Scalar::Float(f) => {
                let _ = p;
                to_dec_string(f)
            }
        }
    }
}

/// Complex value over high-precision floats. Only the handful of operations
/// the kernel evaluations need.
#[derive(Clone, Debug)]
pub struct Complex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Complex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Self { re, im }
    }

    pub fn zero(p: Prec) -> Self {
        Self::new(p.zero(), p.zero())
    }

    pub fn one(p: Prec) -> Self {
        Self::new(p.one(), p.zero())
    }

    pub fn from_rat_parts(p: Prec, re: &Rat, im: &Rat) -> Self {
        Self::new(p.from_rat(re), p.from_rat(im))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), self.im.neg())
    }

    pub fn add(&self, p: Prec, other: &Self) -> Self {
        Self::new(p.add(&self.re, &other.re), p.add(&self.im, &other.im))
    }

    pub fn mul(&self, p: Prec, other: &Self) -> Self {
        let re = p.sub(
            &p.mul(&self.re, &other.re),
            &p.mul(&self.im, &other.im),
        );
        let im = p.add(
            &p.mul(&self.re, &other.im),
            &p.mul(&self.im, &other.re),
        );
        Self::new(re, im)
    }

    /// Multiply by a real scalar.
    pub fn scale(&self, p: Prec, f: &BigFloat) -> Self {
        Self::new(p.mul(&self.re, f), p.mul(&self.im, f))
    }

    pub fn abs_sq(&self, p: Prec) -> BigFloat {
        p.add(&p.mul(&self.re, &self.re), &p.mul(&self.im, &self.im))
    }

    pub fn sub(&self, p: Prec, other: &Self) -> Self {
        Self::new(p.sub(&self.re, &other.re), p.sub(&self.im, &other.im))
    }
}
