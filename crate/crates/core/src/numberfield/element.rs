use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{int, rational_to_decimal, MultinacciField, Rational, RootEnclosure, Sign};
use crate::error::{Error, Result};

/// Relative error bound of the f64 sign filter. The rounding analysis gives
/// roughly `(2m + 4) * 2^-53` relative to `sum |c_i| beta^i`; this leaves a
/// margin of two orders of magnitude for `m <= 32`.
const FILTER_REL: f64 = 1e-12;
const FILTER_MAX_DEGREE: usize = 32;

/// Element of `Q(beta_{q,m})` in the power basis `1, beta, ..., beta^{m-1}`.
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<MultinacciField>,
    coeffs: Vec<Rational>,
}

impl FieldElement {
    pub fn zero(field: &Arc<MultinacciField>) -> Self {
        FieldElement { field: field.clone(), coeffs: vec![Rational::zero(); field.m()] }
    }

    pub fn from_rational(field: &Arc<MultinacciField>, r: Rational) -> Self {
        let mut e = Self::zero(field);
        e.coeffs[0] = r;
        e
    }

    pub fn from_int(field: &Arc<MultinacciField>, n: i64) -> Self {
        Self::from_rational(field, int(n))
    }

    pub fn beta(field: &Arc<MultinacciField>) -> Self {
        let mut e = Self::zero(field);
        e.coeffs[1] = Rational::one();
        e
    }

    /// `beta^{-1} = (beta^{m-1} - q beta^{m-2} - ... - q) / q`.
    pub fn beta_inverse(field: &Arc<MultinacciField>) -> Self {
        let m = field.m();
        let mut e = Self::zero(field);
        for c in e.coeffs.iter_mut().take(m - 1) {
            *c = int(-1);
        }
        e.coeffs[m - 1] = Rational::new(BigInt::one(), BigInt::from(field.q()));
        e
    }

    /// Build from explicit coordinates; missing trailing coordinates are zero.
    pub fn from_coeffs(field: &Arc<MultinacciField>, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() > field.m() {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates for a degree-{} field",
                coeffs.len(),
                field.m()
            )));
        }
        let mut e = Self::zero(field);
        for (dst, c) in e.coeffs.iter_mut().zip(coeffs) {
            *dst = c;
        }
        Ok(e)
    }

    pub fn field(&self) -> &Arc<MultinacciField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational value, if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check_field(&self, other: &FieldElement) -> Result<()> {
        if self.field.same_as(&other.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch {
                q1: self.field.q(),
                m1: self.field.m(),
                q2: other.field.q(),
                m2: other.field.m(),
            })
        }
    }

    pub fn try_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_field(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_field(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn try_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &FieldElement) -> FieldElement {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        FieldElement { field: self.field.clone(), coeffs }
    }

    fn sub_unchecked(&self, other: &FieldElement) -> FieldElement {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        FieldElement { field: self.field.clone(), coeffs }
    }

    /// Common denominator and integer numerators of the coordinates.
    fn integer_form(&self) -> (BigInt, Vec<BigInt>) {
        let mut den = BigInt::one();
        for c in &self.coeffs {
            if !c.denom().is_one() {
                den = den.lcm(c.denom());
            }
        }
        let nums = self.coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        (den, nums)
    }

    // Integer numerators over one denominator: a single normalization per
    // coordinate instead of one per partial product.
    fn mul_unchecked(&self, other: &FieldElement) -> FieldElement {
        let m = self.field.m();
        let (da, na) = self.integer_form();
        let (db, nb) = other.integer_form();
        let mut prod = vec![BigInt::zero(); 2 * m - 1];
        for (i, a) in na.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in nb.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let q = BigInt::from(self.field.q());
        for d in (m..prod.len()).rev() {
            let top = std::mem::take(&mut prod[d]);
            if top.is_zero() {
                continue;
            }
            let t = &top * &q;
            for j in 1..=m {
                prod[d - j] += &t;
            }
        }
        prod.truncate(m);
        let den = da * db;
        let coeffs = prod.into_iter().map(|n| Rational::new(n, den.clone())).collect();
        FieldElement { field: self.field.clone(), coeffs }
    }

    pub fn mul_beta(&self) -> FieldElement {
        let m = self.field.m();
        let top = &self.coeffs[m - 1] * int(self.field.q() as i64);
        let mut coeffs = Vec::with_capacity(m);
        coeffs.push(top.clone());
        for i in 1..m {
            coeffs.push(&self.coeffs[i - 1] + &top);
        }
        FieldElement { field: self.field.clone(), coeffs }
    }

    pub fn div_beta(&self) -> FieldElement {
        // a / beta = c_0 beta^{-1} + sum_{i>=1} c_i beta^{i-1}.
        let m = self.field.m();
        let c0 = &self.coeffs[0];
        let mut coeffs: Vec<Rational> = self.coeffs[1..].to_vec();
        coeffs.push(Rational::zero());
        if !c0.is_zero() {
            for c in coeffs.iter_mut().take(m - 1) {
                *c -= c0;
            }
            coeffs[m - 1] += c0 / int(self.field.q() as i64);
        }
        FieldElement { field: self.field.clone(), coeffs }
    }

    pub fn scale(&self, r: &Rational) -> FieldElement {
        let coeffs = self.coeffs.iter().map(|c| c * r).collect();
        FieldElement { field: self.field.clone(), coeffs }
    }

    pub fn add_rational(&self, r: &Rational) -> FieldElement {
        let mut e = self.clone();
        e.coeffs[0] += r;
        e
    }

    pub fn pow(&self, n: u32) -> FieldElement {
        let mut acc = FieldElement::from_int(&self.field, 1);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by solving the multiplication-matrix system over `Q`.
    pub fn inverse(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let m = self.field.m();
        // Column j holds the coordinates of self * beta^j.
        let mut cols = Vec::with_capacity(m);
        let mut cur = self.clone();
        for _ in 0..m {
            cols.push(cur.coeffs.clone());
            cur = cur.mul_beta();
        }
        // Augmented row-major matrix [A | e_0].
        let mut a: Vec<Vec<Rational>> = (0..m)
            .map(|r| {
                let mut row: Vec<Rational> = (0..m).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { Rational::one() } else { Rational::zero() });
                row
            })
            .collect();
        for col in 0..m {
            let pivot = (col..m).find(|&r| !a[r][col].is_zero()).ok_or(Error::DivisionByZero)?;
            a.swap(col, pivot);
            let inv = a[col][col].recip();
            for v in a[col].iter_mut() {
                *v *= &inv;
            }
            let pivot_row = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r == col || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * p;
                }
            }
        }
        let coeffs = a.into_iter().map(|mut row| row.pop().unwrap()).collect();
        Ok(FieldElement { field: self.field.clone(), coeffs })
    }

    pub fn try_div(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(&other.inverse()?))
    }

    /// Nearest-f64-quality value. The plain f64 evaluation is used when the
    /// coordinates do not cancel; otherwise the value is read off a rational
    /// enclosure refined until its width is below a few ulps.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut v = 0.0f64;
        let mut mag = 0.0f64;
        for (c, p) in self.coeffs.iter().zip(self.field.pows_f64()) {
            let cf = c.to_f64().unwrap_or(f64::NAN);
            v += cf * p;
            mag += cf.abs() * p;
        }
        if mag.is_finite() && mag <= 4.0 * v.abs() {
            return v;
        }
        let mut bits = 160u32;
        loop {
            let enc = self.field.enclosure().refined_to(&super::pow2_recip(bits));
            let (lo, hi) = self.enclose(&enc);
            let mid = (&lo + &hi) / int(2);
            let width = (&hi - &lo).to_f64().unwrap_or(f64::INFINITY);
            if width <= mid.abs().to_f64().unwrap_or(0.0) * f64::EPSILON || bits >= 1 << 14 {
                return mid.to_f64().unwrap_or(f64::NAN);
            }
            bits *= 2;
        }
    }

    /// f64 estimate and a rigorous bound on its error, or `None` when the
    /// filter does not apply.
    fn filtered_estimate(&self) -> Option<(f64, f64)> {
        if self.field.m() > FILTER_MAX_DEGREE {
            return None;
        }
        let mut v = 0.0f64;
        let mut mag = 0.0f64;
        for (c, p) in self.coeffs.iter().zip(self.field.pows_f64()) {
            let cf = c.to_f64()?;
            if !cf.is_finite() {
                return None;
            }
            v += cf * p;
            mag += cf.abs() * p;
        }
        if !mag.is_finite() {
            return None;
        }
        Some((v, FILTER_REL * mag + f64::MIN_POSITIVE))
    }

    /// Interval `[lower, upper]` containing the value, for `beta` in `enc`.
    pub fn enclose(&self, enc: &RootEnclosure) -> (Rational, Rational) {
        let mut lo_sum = Rational::zero();
        let mut hi_sum = Rational::zero();
        let mut plo = Rational::one();
        let mut phi = Rational::one();
        for c in &self.coeffs {
            if c.is_positive() {
                lo_sum += c * &plo;
                hi_sum += c * &phi;
            } else if c.is_negative() {
                lo_sum += c * &phi;
                hi_sum += c * &plo;
            }
            plo *= enc.lo();
            phi *= enc.hi();
        }
        (lo_sum, hi_sum)
    }

    /// Certified sign. Exact zero test first, then the f64 filter, then exact
    /// interval evaluation with enclosure halving (at most `budget` halvings).
    pub fn sign_with(&self, enc: &RootEnclosure, budget: u32) -> Result<Sign> {
        if let Some(s) = self.quick_sign() {
            return Ok(s);
        }
        self.sign_by_intervals(enc, budget)
    }

    pub(crate) fn sign_by_intervals(&self, enc: &RootEnclosure, budget: u32) -> Result<Sign> {
        let mut e = enc.clone();
        let mut spent = 0;
        let mut step = 1;
        loop {
            let (lo, hi) = self.enclose(&e);
            if lo.is_positive() {
                return Ok(Sign::Positive);
            }
            if hi.is_negative() {
                return Ok(Sign::Negative);
            }
            if spent >= budget {
                return Err(Error::RefinementBudget { budget });
            }
            // Checks at doubling depths: tiny values need many bits at once.
            let n = step.min(budget - spent);
            for _ in 0..n {
                e = e.halve();
            }
            spent += n;
            step *= 2;
        }
    }

    /// Sign against the field's own enclosure and budget.
    pub fn sign(&self) -> Result<Sign> {
        if let Some(s) = self.quick_sign() {
            return Ok(s);
        }
        self.field.decide(|e| {
            let (lo, hi) = self.enclose(e);
            if lo.is_positive() {
                Some(Sign::Positive)
            } else if hi.is_negative() {
                Some(Sign::Negative)
            } else {
                None
            }
        })
    }

    /// The zero test and the f64 filter.
    fn quick_sign(&self) -> Option<Sign> {
        if self.is_zero() {
            return Some(Sign::Zero);
        }
        let (v, err) = self.filtered_estimate()?;
        if v > err {
            Some(Sign::Positive)
        } else if v < -err {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    /// `n` with `n <= self < n + 1`, exact even when the value is an integer.
    pub fn floor_with(&self, enc: &RootEnclosure, budget: u32) -> Result<i64> {
        self.floor_by(enc, |x| x.sign_with(enc, budget))
    }

    pub fn floor(&self) -> Result<i64> {
        self.floor_by(self.field.enclosure(), |x| x.sign())
    }

    fn floor_by(&self, enc: &RootEnclosure, sign: impl Fn(&FieldElement) -> Result<Sign>) -> Result<i64> {
        if let Some(r) = self.as_rational() {
            return r.floor().to_integer().to_i64().ok_or_else(|| {
                Error::InvalidParameter("floor does not fit in i64".into())
            });
        }
        let mut n = match self.filtered_estimate() {
            Some((v, err)) => {
                let n = v.floor();
                if v - n > err && n + 1.0 - v > err && n.abs() < 9.0e15 {
                    return Ok(n as i64);
                }
                n as i64
            }
            None => {
                let (lo, _) = self.enclose(enc);
                lo.floor().to_integer().to_i64().unwrap_or(0)
            }
        };
        loop {
            let below = sign(&self.add_rational(&int(-n)))?;
            if below == Sign::Negative {
                n -= 1;
                continue;
            }
            let above = sign(&self.add_rational(&int(-n - 1)))?;
            if above != Sign::Negative {
                n += 1;
                continue;
            }
            return Ok(n);
        }
    }

    /// Decimal string with `sig` significant digits, from a rational
    /// enclosure tight enough to fix those digits.
    pub fn to_decimal(&self, sig: usize) -> String {
        let width = super::pow2_recip((sig as f64 * 3.33 + 24.0) as u32);
        let enc = self.field.enclosure().refined_to(&width);
        let (lo, hi) = self.enclose(&enc);
        rational_to_decimal(&((lo + hi) / int(2)), sig)
    }

    /// Coordinates as exact strings, `"c0 + c1*b + ..."` style list.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field.same_as(&other.field) && self.coeffs == other.coeffs
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.q().hash(state);
        self.field.m().hash(state);
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement[q={},m={}](", self.field.q(), self.field.m())?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ") ~ {}", self.to_f64())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 if a.is_one() => f.write_str("b")?,
                1 => write!(f, "{a}*b")?,
                _ if a.is_one() => write!(f, "b^{i}")?,
                _ => write!(f, "{a}*b^{i}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

// Operator forms panic on a field mismatch; use the `try_*` methods when the
// operands may come from different fields.
impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.try_add(rhs).expect("field mismatch")
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.try_sub(rhs).expect("field mismatch")
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.try_mul(rhs).expect("field mismatch")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::rat;

    fn golden() -> Arc<MultinacciField> {
        MultinacciField::new(1, 2).unwrap()
    }

    fn coeffs(e: &FieldElement) -> Vec<Rational> {
        e.coeffs().to_vec()
    }

    #[test]
    fn beta_squared_reduces() {
        let f = golden();
        let b = FieldElement::beta(&f);
        assert_eq!(coeffs(&(&b * &b)), vec![int(1), int(1)]);
    }

    #[test]
    fn tribonacci_beta_cubed() {
        let f = MultinacciField::new(1, 3).unwrap();
        let b = FieldElement::beta(&f);
        let b2 = &b * &b;
        assert_eq!(coeffs(&(&b * &b2)), vec![int(1), int(1), int(1)]);
    }

    #[test]
    fn difference_of_squares() {
        let f = golden();
        let b = FieldElement::beta(&f);
        let one = FieldElement::from_int(&f, 1);
        let p = &(&b - &one) * &(&b + &one);
        assert_eq!(p, b);
    }

    #[test]
    fn signs() {
        let f = golden();
        let b = FieldElement::beta(&f);
        let one = FieldElement::from_int(&f, 1);
        assert_eq!(FieldElement::zero(&f).sign().unwrap(), Sign::Zero);
        assert_eq!((&b - &one).sign().unwrap(), Sign::Positive);
        let minpoly = &(&(&b * &b) - &b) - &one;
        assert_eq!(minpoly.sign().unwrap(), Sign::Zero);
        assert_eq!((&one - &b).sign().unwrap(), Sign::Negative);
    }

    #[test]
    fn floors() {
        let f = golden();
        let b = FieldElement::beta(&f);
        assert_eq!(b.floor().unwrap(), 1);
        assert_eq!(b.add_rational(&rat(1, 2)).floor().unwrap(), 2);
        assert_eq!(FieldElement::from_rational(&f, rat(7, 2)).floor().unwrap(), 3);
        // beta^2 - beta = 1 exactly: an integer hiding in non-rational form
        // until reduced.
        let one = &(&b * &b) - &b;
        assert_eq!(one.floor().unwrap(), 1);
        // beta * (beta - 1) is exactly 1 as well.
        let x = &b * &b.add_rational(&int(-1));
        assert_eq!(x.floor().unwrap(), 1);
        assert_eq!((-&b).floor().unwrap(), -2);
    }

    #[test]
    fn sign_survives_tiny_values() {
        // (beta - 1)^40 * beta^-40 is positive and about 1e-16.7 ... well below
        // the filter's resolution once subtracted from its own approximation.
        let f = MultinacciField::new(2, 3).unwrap();
        let b = FieldElement::beta(&f);
        let small = (&b - &FieldElement::from_int(&f, 2)).pow(30);
        assert_eq!(small.sign().unwrap(), Sign::Positive);
        assert_eq!((-&small).sign().unwrap(), Sign::Negative);
        let via_intervals = small.sign_by_intervals(f.enclosure(), 256).unwrap();
        assert_eq!(via_intervals, Sign::Positive);
    }

    #[test]
    fn inverse_and_beta_inverse() {
        let f = MultinacciField::new(2, 4).unwrap();
        let b = FieldElement::beta(&f);
        let inv = b.inverse().unwrap();
        assert_eq!(inv, FieldElement::beta_inverse(&f));
        assert_eq!(&inv * &b, FieldElement::from_int(&f, 1));
        let x = FieldElement::from_coeffs(&f, vec![rat(1, 3), int(-2), int(0), rat(5, 7)]).unwrap();
        assert_eq!(&x.inverse().unwrap() * &x, FieldElement::from_int(&f, 1));
        assert_eq!(FieldElement::zero(&f).inverse(), Err(Error::DivisionByZero));
    }

    #[test]
    fn div_beta_matches_inverse_product() {
        let f = MultinacciField::new(3, 3).unwrap();
        let x = FieldElement::from_coeffs(&f, vec![rat(1, 2), int(3), rat(-4, 9)]).unwrap();
        assert_eq!(x.div_beta(), &x * &FieldElement::beta_inverse(&f));
        assert_eq!(x.div_beta().mul_beta(), x);
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let a = FieldElement::beta(&golden());
        let b = FieldElement::beta(&MultinacciField::new(1, 3).unwrap());
        assert!(matches!(a.try_add(&b), Err(Error::FieldMismatch { .. })));
        assert!(matches!(a.try_mul(&b), Err(Error::FieldMismatch { .. })));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = golden();
        let b = FieldElement::beta(&f);
        let x = &b - &FieldElement::from_rational(&f, rat(16180339887, 10000000000));
        // One halving from the unit bracket cannot separate x from zero.
        let coarse = crate::numberfield::isolate_root(1, 2, &int(1)).unwrap();
        assert_eq!(x.sign_by_intervals(&coarse, 1), Err(Error::RefinementBudget { budget: 1 }));
        assert_eq!(x.sign_by_intervals(&coarse, 256), Ok(Sign::Positive));
    }

    #[test]
    fn decimal_output() {
        let b = FieldElement::beta(&golden());
        assert_eq!(b.to_decimal(30), "1.61803398874989484820458683437");
    }

    #[test]
    fn display() {
        let f = golden();
        let x = FieldElement::from_coeffs(&f, vec![rat(-1, 2), int(1)]).unwrap();
        assert_eq!(x.to_string(), "-1/2 + b");
    }
}
