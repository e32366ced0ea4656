//! Arithmetic backends. Every map, density and functional in the crate is
//! written once against [`Arithmetic`]; [`ExactArith`] evaluates in
//! `Q(beta_{q,m})` and [`FloatArith`] in any `num_traits::Float` type.

use std::fmt::Debug;
use std::sync::Arc;

use num_traits::{Float, ToPrimitive};

use crate::error::{Error, Result};
use crate::numberfield::{FieldElement, MultinacciField, Rational, Sign};

/// Result of a floor decision. `ambiguous` is only ever set by floating
/// backends, when the value sits within `epsilon` of an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Floor {
    pub value: i64,
    pub ambiguous: bool,
}

pub trait Arithmetic: Clone + Send + Sync + Debug {
    type Elem: Clone + Send + Sync + Debug + PartialEq;

    fn int(&self, n: i64) -> Self::Elem;
    fn rational(&self, r: &Rational) -> Self::Elem;
    fn beta(&self) -> Self::Elem;
    /// `floor(beta)`, as an exact integer.
    fn beta_floor(&self) -> i64;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul_beta(&self, a: &Self::Elem) -> Self::Elem;
    fn div_beta(&self, a: &Self::Elem) -> Self::Elem;
    fn mul_int(&self, a: &Self::Elem, n: i64) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;

    fn sign(&self, a: &Self::Elem) -> Result<Sign>;
    fn floor(&self, a: &Self::Elem) -> Result<Floor>;
    /// Matching-grade zero test: exact for exact backends, `|a| <= match_epsilon` otherwise.
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn to_f64(&self, a: &Self::Elem) -> f64;

    fn is_exact(&self) -> bool;
    /// Branch-decision tolerance (0 for exact backends).
    fn epsilon(&self) -> f64;
    /// Tolerance of the matching zero test (0 for exact backends).
    fn match_epsilon(&self) -> f64;
    fn beta_f64(&self) -> f64;

    /// Multinacci parameters `(q, m)` when beta is an exact multinacci number.
    fn multinacci(&self) -> Option<(u32, usize)> {
        None
    }

    fn ceil(&self, a: &Self::Elem) -> Result<Floor> {
        let f = self.floor(&self.neg(a))?;
        Ok(Floor { value: -f.value, ambiguous: f.ambiguous })
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn beta_pow(&self, n: u32) -> Self::Elem {
        let mut p = self.int(1);
        for _ in 0..n {
            p = self.mul_beta(&p);
        }
        p
    }

    fn beta_pow_recip(&self, n: u32) -> Self::Elem {
        let mut base = self.div_beta(&self.int(1));
        let mut p = self.int(1);
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                p = self.mul(&p, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        p
    }

    /// `sign(a - b)`.
    fn cmp(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Sign> {
        self.sign(&self.sub(a, b))
    }

    fn less(&self, a: &Self::Elem, b: &Self::Elem) -> Result<bool> {
        Ok(self.cmp(a, b)? == Sign::Negative)
    }

    fn min(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(if self.less(b, a)? { b.clone() } else { a.clone() })
    }

    fn max(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(if self.less(a, b)? { b.clone() } else { a.clone() })
    }

    /// Fractional part `a - floor(a)`.
    fn fract(&self, a: &Self::Elem) -> Result<Self::Elem> {
        let f = self.floor(a)?;
        Ok(self.sub(a, &self.int(f.value)))
    }

    /// Run both critical orbits (of 0 and of 1) up to `max_iter` steps.
    /// Backends may override this with a faster kernel; the result must be
    /// identical to [`crate::dynamics::critical_run_generic`].
    fn critical_run(
        &self,
        alpha: &Self::Elem,
        max_iter: usize,
        opts: crate::dynamics::RunOptions,
    ) -> Result<crate::dynamics::CriticalRun<Self::Elem>> {
        crate::dynamics::critical_run_generic(self, alpha, max_iter, opts)
    }

    /// `(N, Q)` with `M = N / Q` and `Q > 0` for a parameter whose critical
    /// orbits first meet at step `time`, when the backend has a shortcut.
    fn matched_moments(&self, _alpha: &Self::Elem, _time: usize) -> Result<Option<(Self::Elem, Self::Elem)>> {
        Ok(None)
    }
}

/// Exact arithmetic in `Q(beta_{q,m})`.
#[derive(Debug, Clone)]
pub struct ExactArith {
    field: Arc<MultinacciField>,
}

impl ExactArith {
    pub fn new(q: u32, m: usize) -> Result<Self> {
        Ok(ExactArith { field: MultinacciField::new(q, m)? })
    }

    pub fn from_field(field: Arc<MultinacciField>) -> Self {
        ExactArith { field }
    }

    pub fn field(&self) -> &Arc<MultinacciField> {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn m(&self) -> usize {
        self.field.m()
    }
}

impl Arithmetic for ExactArith {
    type Elem = FieldElement;

    fn int(&self, n: i64) -> FieldElement {
        FieldElement::from_int(&self.field, n)
    }

    fn rational(&self, r: &Rational) -> FieldElement {
        FieldElement::from_rational(&self.field, r.clone())
    }

    fn beta(&self) -> FieldElement {
        FieldElement::beta(&self.field)
    }

    fn beta_floor(&self) -> i64 {
        self.field.q() as i64
    }

    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a + b
    }

    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a - b
    }

    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        a * b
    }

    fn neg(&self, a: &FieldElement) -> FieldElement {
        -a
    }

    fn mul_beta(&self, a: &FieldElement) -> FieldElement {
        a.mul_beta()
    }

    fn div_beta(&self, a: &FieldElement) -> FieldElement {
        a.div_beta()
    }

    fn mul_int(&self, a: &FieldElement, n: i64) -> FieldElement {
        a.scale(&crate::numberfield::int(n))
    }

    fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        a.inverse()
    }

    fn sign(&self, a: &FieldElement) -> Result<Sign> {
        a.sign()
    }

    fn floor(&self, a: &FieldElement) -> Result<Floor> {
        Ok(Floor { value: a.floor()?, ambiguous: false })
    }

    fn is_zero(&self, a: &FieldElement) -> bool {
        a.is_zero()
    }

    fn to_f64(&self, a: &FieldElement) -> f64 {
        a.to_f64()
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn epsilon(&self) -> f64 {
        0.0
    }

    fn match_epsilon(&self) -> f64 {
        0.0
    }

    fn beta_f64(&self) -> f64 {
        self.field.beta_f64()
    }

    fn multinacci(&self) -> Option<(u32, usize)> {
        Some((self.field.q(), self.field.m()))
    }

    fn critical_run(
        &self,
        alpha: &FieldElement,
        max_iter: usize,
        opts: crate::dynamics::RunOptions,
    ) -> Result<crate::dynamics::CriticalRun<FieldElement>> {
        match crate::kernel::critical_run_fast(&self.field, alpha, max_iter, opts)? {
            Some(run) => Ok(run),
            None => crate::dynamics::critical_run_generic(self, alpha, max_iter, opts),
        }
    }

    fn matched_moments(&self, alpha: &FieldElement, time: usize) -> Result<Option<(FieldElement, FieldElement)>> {
        crate::kernel::matched_moments(&self.field, alpha, time)
    }
}

/// Floating arithmetic with tolerance-guarded branch decisions.
#[derive(Debug, Clone, Copy)]
pub struct FloatArith<F> {
    beta: F,
    eps: F,
    match_eps: F,
}

impl<F: Float + Send + Sync + Debug> FloatArith<F> {
    /// Default tolerances: `1e-12` for branch decisions and `1e-10` for the
    /// matching zero test, widened for low-precision types.
    pub fn new(beta: F) -> Result<Self> {
        if !(beta > F::one()) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be a finite number > 1, got {:?}",
                beta.to_f64()
            )));
        }
        let unit = F::epsilon();
        let eps = F::from(1e-12).unwrap().max(unit * F::from(64.0).unwrap());
        let match_eps = F::from(1e-10).unwrap().max(unit * F::from(1024.0).unwrap());
        Ok(FloatArith { beta, eps, match_eps })
    }

    pub fn with_tolerances(beta: F, eps: F, match_eps: F) -> Result<Self> {
        let mut a = Self::new(beta)?;
        a.eps = eps;
        a.match_eps = match_eps;
        Ok(a)
    }

    pub fn beta_value(&self) -> F {
        self.beta
    }
}

fn cast<F: Float>(x: f64) -> F {
    F::from(x).unwrap_or_else(F::nan)
}

impl<F: Float + Send + Sync + Debug> Arithmetic for FloatArith<F> {
    type Elem = F;

    fn int(&self, n: i64) -> F {
        cast(n as f64)
    }

    fn rational(&self, r: &Rational) -> F {
        cast(r.to_f64().unwrap_or(f64::NAN))
    }

    fn beta(&self) -> F {
        self.beta
    }

    fn beta_floor(&self) -> i64 {
        self.beta.floor().to_i64().unwrap_or(i64::MAX)
    }

    fn add(&self, a: &F, b: &F) -> F {
        *a + *b
    }

    fn sub(&self, a: &F, b: &F) -> F {
        *a - *b
    }

    fn mul(&self, a: &F, b: &F) -> F {
        *a * *b
    }

    fn neg(&self, a: &F) -> F {
        -*a
    }

    fn mul_beta(&self, a: &F) -> F {
        *a * self.beta
    }

    fn div_beta(&self, a: &F) -> F {
        *a / self.beta
    }

    fn mul_int(&self, a: &F, n: i64) -> F {
        *a * cast(n as f64)
    }

    fn inv(&self, a: &F) -> Result<F> {
        if a.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(a.recip())
        }
    }

    fn sign(&self, a: &F) -> Result<Sign> {
        Ok(Sign::of_f64(a.to_f64().unwrap_or(0.0)))
    }

    fn floor(&self, a: &F) -> Result<Floor> {
        let f = a.floor();
        let value = f.to_i64().ok_or_else(|| Error::InvalidParameter("floor of a non-finite value".into()))?;
        let nearest = a.round();
        let ambiguous = (*a - nearest).abs() < self.eps && nearest != F::zero();
        Ok(Floor { value, ambiguous })
    }

    fn is_zero(&self, a: &F) -> bool {
        a.abs() <= self.match_eps
    }

    fn to_f64(&self, a: &F) -> f64 {
        a.to_f64().unwrap_or(f64::NAN)
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn epsilon(&self) -> f64 {
        self.eps.to_f64().unwrap_or(0.0)
    }

    fn match_epsilon(&self) -> f64 {
        self.match_eps.to_f64().unwrap_or(0.0)
    }

    fn beta_f64(&self) -> f64 {
        self.beta.to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::rat;

    #[test]
    fn exact_floor_and_ceil_of_integers() {
        let a = ExactArith::new(1, 2).unwrap();
        let one = a.sub(&a.mul(&a.beta(), &a.beta()), &a.beta());
        assert_eq!(a.floor(&one).unwrap().value, 1);
        assert_eq!(a.ceil(&one).unwrap().value, 1);
        let x = a.rational(&rat(3, 2));
        assert_eq!(a.ceil(&x).unwrap().value, 2);
    }

    #[test]
    fn float_ambiguity_flag() {
        let a = FloatArith::new(2.5f64).unwrap();
        assert!(a.floor(&(3.0 - 1e-14)).unwrap().ambiguous);
        assert!(!a.floor(&2.7).unwrap().ambiguous);
        // Near 0 the only candidate digit is 0.
        assert!(!a.floor(&1e-15).unwrap().ambiguous);
    }

    #[test]
    fn f32_backend_has_wider_tolerances() {
        let a = FloatArith::new(1.5f32).unwrap();
        assert!(a.epsilon() > 1e-6);
        assert_eq!(a.beta_floor(), 1);
    }

    #[test]
    fn rejects_beta_at_most_one() {
        assert!(FloatArith::new(1.0f64).is_err());
        assert!(FloatArith::new(f64::NAN).is_err());
    }
}
