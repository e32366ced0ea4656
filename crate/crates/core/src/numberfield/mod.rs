//! Exact arithmetic in the multinacci fields `Q(beta_{q,m})`.
//!
//! `beta_{q,m}` is the unique root in `(q, q+1)` of
//! `x^m - q x^{m-1} - ... - q x - q`. Elements are stored as coordinate vectors
//! in the power basis `1, beta, ..., beta^{m-1}`; the minimal polynomial is
//! irreducible, so that representation is unique and the zero test is exact.
//! Signs and floors are decided against a rational [`RootEnclosure`] of beta.

mod element;
mod enclosure;

use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

pub use element::FieldElement;
pub use enclosure::{isolate_root, multinacci_poly_at, RootEnclosure};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

/// Default number of enclosure halvings a sign decision may spend.
pub const DEFAULT_SIGN_BUDGET: u32 = 1 << 16;

/// Width of the enclosure a field carries for its own decisions (2^-160).
const BASE_WIDTH_BITS: u32 = 160;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub(crate) fn pow2_recip(bits: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << bits as usize)
}

/// Three-valued sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn of_f64(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Positive => "+",
        })
    }
}

/// The field `Q(beta_{q,m})` together with a tight enclosure of its generator.
///
/// Reduction rule: `beta^m = q (beta^{m-1} + ... + beta + 1)`.
#[derive(Debug)]
pub struct MultinacciField {
    q: u32,
    m: usize,
    enclosure: RootEnclosure,
    /// `beta^i` for `0 <= i < m`, rounded to f64, for the fast sign filter.
    pows_f64: Vec<f64>,
    sign_budget: u32,
    /// The deepest refinement of `enclosure` made so far and its halving count.
    deep: RwLock<(RootEnclosure, u32)>,
}

impl MultinacciField {
    pub fn new(q: u32, m: usize) -> Result<Arc<Self>> {
        Self::with_budget(q, m, DEFAULT_SIGN_BUDGET)
    }

    pub fn with_budget(q: u32, m: usize, sign_budget: u32) -> Result<Arc<Self>> {
        if q == 0 || m < 2 {
            return invalid(format!("multinacci field needs q >= 1 and m >= 2, got ({q}, {m})"));
        }
        let enclosure = isolate_root(q, m, &pow2_recip(BASE_WIDTH_BITS))?;
        let mid = enclosure.midpoint();
        let mut pows_f64 = Vec::with_capacity(m);
        let mut p = Rational::one();
        for _ in 0..m {
            pows_f64.push(p.to_f64().unwrap_or(f64::NAN));
            p = &p * &mid;
        }
        let deep = RwLock::new((enclosure.clone(), 0));
        Ok(Arc::new(MultinacciField { q, m, enclosure, pows_f64, sign_budget, deep }))
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn enclosure(&self) -> &RootEnclosure {
        &self.enclosure
    }

    pub fn sign_budget(&self) -> u32 {
        self.sign_budget
    }

    /// Run `decide` against ever tighter enclosures until it returns a value,
    /// spending at most `sign_budget` halvings. Refinements are kept, so later
    /// decisions start from the tightest enclosure any earlier one needed.
    pub(crate) fn decide<T>(&self, mut decide: impl FnMut(&RootEnclosure) -> Option<T>) -> Result<T> {
        if let Some(t) = decide(&self.enclosure) {
            return Ok(t);
        }
        let mut tried = 0;
        loop {
            let (enc, depth) = self.deep.read().expect("enclosure lock").clone();
            if depth > tried {
                if let Some(t) = decide(&enc) {
                    return Ok(t);
                }
            }
            if depth >= self.sign_budget {
                return Err(Error::RefinementBudget { budget: self.sign_budget });
            }
            let target = (2 * depth).clamp(1, self.sign_budget);
            let mut e = enc;
            for _ in depth..target {
                e = e.halve();
            }
            tried = depth;
            let mut deep = self.deep.write().expect("enclosure lock");
            if deep.1 < target {
                *deep = (e, target);
            }
        }
    }

    pub fn beta_f64(&self) -> f64 {
        self.pows_f64[1]
    }

    pub(crate) fn pows_f64(&self) -> &[f64] {
        &self.pows_f64
    }

    /// Coefficients of the minimal polynomial, leading first: `(1, -q, ..., -q)`.
    pub fn minimal_polynomial(&self) -> Vec<i64> {
        let mut c = vec![1i64];
        c.extend(std::iter::repeat(-(self.q as i64)).take(self.m));
        c
    }

    pub fn same_as(&self, other: &MultinacciField) -> bool {
        self.q == other.q && self.m == other.m
    }
}

/// Render a rational as a decimal with `sig` significant digits (round half
/// away from zero). Used for human-facing output of exact values.
pub fn rational_to_decimal(r: &Rational, sig: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Decimal exponent estimate: 10^e <= a < 10^{e+1}.
    let ten = int(10);
    let mut e: i64 = 0;
    let mut scaled = a.clone();
    while scaled >= ten {
        scaled /= &ten;
        e += 1;
    }
    while scaled < Rational::one() {
        scaled *= &ten;
        e -= 1;
    }
    let shift = sig as i64 - 1 - e;
    let factor = BigInt::from(10).pow(shift.unsigned_abs() as u32);
    let v = if shift >= 0 { &a * Rational::from_integer(factor) } else { &a / Rational::from_integer(factor) };
    let digits = v.round().to_integer();
    let mut s = digits.to_string();
    // Rounding may add a digit (9.99 -> 10.0).
    let point_pos = s.len() as i64 - shift;
    if s.len() > sig {
        s.truncate(sig);
    }
    let body = if point_pos <= 0 {
        format!("0.{}{}", "0".repeat((-point_pos) as usize), s)
    } else if point_pos as usize >= s.len() {
        format!("{}{}", s, "0".repeat(point_pos as usize - s.len()))
    } else {
        let (a, b) = s.split_at(point_pos as usize);
        format!("{a}.{b}")
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}
