//! Parry's invariant density for `T_{beta,alpha}` (and for the left-continuous
//! `T~`), as a right-continuous step function
//!
//! `g~(x) = sum_{x < T^k(1)} beta^{-k} - sum_{x < T^k(0)} beta^{-k}`.
//!
//! The series is truncated at a certified depth, or is finite when the two
//! critical orbits meet. It is stored as a sorted breakpoint list so that
//! integrals against it are exact finite sums.

use std::cell::RefCell;
use std::cmp::Ordering;

use crate::arith::Arithmetic;
use crate::dynamics::{RunOptions, TransformParams, Variant};
use crate::error::{invalid, Error, Result};
use crate::numberfield::Sign;

/// Absolute slack allowed below zero before a density value counts as negative.
pub const NEGATIVITY_SLACK: f64 = 1e-12;

/// Smallest `N` with `2 / ((beta - 1) beta^N) <= tol`.
pub fn truncation_depth(beta: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) || !(beta > 1.0) || !beta.is_finite() {
        return invalid(format!("truncation depth needs beta > 1 and tol > 0, got ({beta}, {tol})"));
    }
    let mut bound = 2.0 / (beta - 1.0);
    let mut n = 0;
    while bound > tol {
        bound /= beta;
        n += 1;
    }
    Ok(n)
}

/// One jump of `g~`: just below `pos` the function is larger by `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoint<E> {
    pub pos: E,
    pub weight: E,
}

#[derive(Debug, Clone)]
pub struct DensitySeries<A: Arithmetic> {
    params: TransformParams<A>,
    variant: Variant,
    depth: usize,
    one_orbit: Vec<A::Elem>,
    zero_orbit: Vec<A::Elem>,
    tail_bound: f64,
    matched: bool,
    /// Sorted by position.
    breakpoints: Vec<Breakpoint<A::Elem>>,
    /// `suffix[j] = sum_{i >= j} weight_i`, so `g~ = suffix[j]` on `[pos_{j-1}, pos_j)`.
    suffix: Vec<A::Elem>,
    normalization: A::Elem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationIntegral<E> {
    /// `K = sum_k (T^k(1) - T^k(0)) / beta^k` over the stored depth.
    pub value: E,
    pub value_f64: f64,
    pub tail_bound: f64,
}

/// A pointwise evaluation of the normalized density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    /// Negative within the tolerance band and clipped to zero.
    pub clipped: bool,
}

fn sort_by_position<A: Arithmetic>(a: &A, v: &mut [Breakpoint<A::Elem>]) -> Result<()> {
    let err = RefCell::new(None);
    v.sort_by(|x, y| match a.cmp(&x.pos, &y.pos) {
        Ok(Sign::Negative) => Ordering::Less,
        Ok(Sign::Zero) => Ordering::Equal,
        Ok(Sign::Positive) => Ordering::Greater,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            Ordering::Equal
        }
    });
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Orbits of 0 and 1 to depth `truncation_depth(beta, tol)`, or to the
/// matching time when the orbits meet first (then the series is exact).
pub fn build_series<A: Arithmetic>(params: &TransformParams<A>, tol: f64, variant: Variant) -> Result<DensitySeries<A>> {
    let n = truncation_depth(params.arith().beta_f64(), tol)?;
    build_series_to_depth(params, n, variant)
}

/// As [`build_series`], with the truncation depth given directly.
pub fn build_series_to_depth<A: Arithmetic>(params: &TransformParams<A>, n: usize, variant: Variant) -> Result<DensitySeries<A>> {
    let a = params.arith();
    let beta = a.beta_f64();
    let run = a.critical_run(params.alpha(), n, RunOptions { keep_orbits: true, variant, ..RunOptions::default() })?;
    let (depth, terms, tail_bound, matched) = match run.matched_at {
        Some(k) => (k, k, 0.0, true),
        None => (n, n + 1, (2.0 / ((beta - 1.0) * beta.powi(n as i32))).max(f64::MIN_POSITIVE), false),
    };
    let one_orbit = run.orbit1[..=depth].to_vec();
    let zero_orbit = run.orbit0[..=depth].to_vec();

    let mut breakpoints = Vec::with_capacity(2 * terms);
    let mut w = a.int(1);
    for k in 0..terms {
        breakpoints.push(Breakpoint { pos: one_orbit[k].clone(), weight: w.clone() });
        breakpoints.push(Breakpoint { pos: zero_orbit[k].clone(), weight: a.neg(&w) });
        w = a.div_beta(&w);
    }
    let normalization = breakpoints
        .iter()
        .fold(a.int(0), |acc, b| a.add(&acc, &a.mul(&b.weight, &b.pos)));
    if a.sign(&normalization)? != Sign::Positive {
        return Err(Error::NonPositiveNormalization(a.to_f64(&normalization)));
    }
    sort_by_position(a, &mut breakpoints)?;
    let mut suffix = vec![a.int(0); breakpoints.len() + 1];
    for j in (0..breakpoints.len()).rev() {
        suffix[j] = a.add(&suffix[j + 1], &breakpoints[j].weight);
    }
    Ok(DensitySeries {
        params: params.clone(),
        variant,
        depth,
        one_orbit,
        zero_orbit,
        tail_bound,
        matched,
        breakpoints,
        suffix,
        normalization,
    })
}

impl<A: Arithmetic> DensitySeries<A> {
    pub fn params(&self) -> &TransformParams<A> {
        &self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `T^k(1)` for `k = 0..=depth`.
    pub fn one_orbit(&self) -> &[A::Elem] {
        &self.one_orbit
    }

    /// `T^k(0)` for `k = 0..=depth`.
    pub fn zero_orbit(&self) -> &[A::Elem] {
        &self.zero_orbit
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// The orbits met inside the horizon, so the series is a finite sum.
    pub fn is_exact(&self) -> bool {
        self.matched
    }

    /// The ergodic interpretation needs `beta > sqrt(2)`; below that the
    /// formulas are still evaluated.
    pub fn ergodicity_guaranteed(&self) -> bool {
        self.params.arith().beta_f64() > std::f64::consts::SQRT_2
    }

    pub fn breakpoints(&self) -> &[Breakpoint<A::Elem>] {
        &self.breakpoints
    }

    /// Unnormalized `g~(x)`.
    pub fn raw_at(&self, x: &A::Elem) -> Result<A::Elem> {
        let a = self.params.arith();
        // First breakpoint strictly to the right of x.
        let (mut lo, mut hi) = (0, self.breakpoints.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if a.less(x, &self.breakpoints[mid].pos)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(self.suffix[lo].clone())
    }

    /// `int_0^t g~ = sum_j w_j min(p_j, t)`.
    pub fn integral_to(&self, t: &A::Elem) -> Result<A::Elem> {
        let a = self.params.arith();
        let mut acc = a.int(0);
        for b in &self.breakpoints {
            acc = a.add(&acc, &a.mul(&b.weight, &a.min(&b.pos, t)?));
        }
        Ok(acc)
    }

    /// `int_0^1 x g~(x) dx = sum_j w_j p_j^2 / 2`.
    pub fn first_moment(&self) -> A::Elem {
        let a = self.params.arith();
        let s = self
            .breakpoints
            .iter()
            .fold(a.int(0), |acc, b| a.add(&acc, &a.mul(&b.weight, &a.mul(&b.pos, &b.pos))));
        a.mul(&s, &a.rational(&crate::numberfield::rat(1, 2)))
    }

    /// The same moment integrated piece by piece over the step function.
    pub fn first_moment_piecewise(&self) -> A::Elem {
        let a = self.params.arith();
        let mut acc = a.int(0);
        let mut left = a.int(0);
        for (j, b) in self.breakpoints.iter().enumerate() {
            let sq = a.sub(&a.mul(&b.pos, &b.pos), &a.mul(&left, &left));
            acc = a.add(&acc, &a.mul(&self.suffix[j], &sq));
            left = b.pos.clone();
        }
        a.mul(&acc, &a.rational(&crate::numberfield::rat(1, 2)))
    }

    /// `int_0^1 g~` summed segment by segment; equals the normalization.
    pub fn mass_piecewise(&self) -> A::Elem {
        let a = self.params.arith();
        let mut acc = a.int(0);
        let mut left = a.int(0);
        for (j, b) in self.breakpoints.iter().enumerate() {
            acc = a.add(&acc, &a.mul(&self.suffix[j], &a.sub(&b.pos, &left)));
            left = b.pos.clone();
        }
        acc
    }

    pub fn normalization(&self) -> NormalizationIntegral<A::Elem> {
        NormalizationIntegral {
            value: self.normalization.clone(),
            value_f64: self.params.arith().to_f64(&self.normalization),
            tail_bound: self.tail_bound,
        }
    }

    /// Normalized density `g(x) = g~(x) / K`.
    pub fn eval(&self, x: &A::Elem) -> Result<DensityValue> {
        let a = self.params.arith();
        if a.sign(x)? == Sign::Negative || a.less(&a.int(1), x)? {
            return invalid(format!("density argument must lie in [0, 1], got {}", a.to_f64(x)));
        }
        let k = a.to_f64(&self.normalization);
        let v = a.to_f64(&self.raw_at(x)?) / k;
        if v >= 0.0 {
            return Ok(DensityValue { value: v, clipped: false });
        }
        if v < -(self.tail_bound / k + NEGATIVITY_SLACK) {
            return Err(Error::NegativeDensity { x: a.to_f64(x), value: v });
        }
        Ok(DensityValue { value: 0.0, clipped: true })
    }

    /// `nu([0, t])` with `nu` the normalized measure.
    pub fn measure_to(&self, t: &A::Elem) -> Result<f64> {
        let a = self.params.arith();
        Ok(a.to_f64(&self.integral_to(t)?) / a.to_f64(&self.normalization))
    }

    /// `|nu([0,t]) - nu(T^{-1}[0,t])|`, the preimage taken branch by branch:
    /// `T^{-1}[0,t] = U_i [(i - alpha)/beta, (i - alpha + t)/beta] ∩ [0, 1]`.
    pub fn invariance_defect(&self, t: &A::Elem) -> Result<f64> {
        let a = self.params.arith();
        let alpha = self.params.alpha();
        let zero = a.int(0);
        let one = a.int(1);
        let direct = self.integral_to(t)?;
        let mut pre = a.int(0);
        for i in 0..=self.params.max_digit()? {
            let lo = a.div_beta(&a.sub(&a.int(i), alpha));
            let hi = a.div_beta(&a.add(&a.sub(&a.int(i), alpha), t));
            let lo = a.max(&lo, &zero)?;
            let hi = a.min(&hi, &one)?;
            if a.less(&lo, &hi)? {
                pre = a.add(&pre, &a.sub(&self.integral_to(&hi)?, &self.integral_to(&lo)?));
            }
        }
        let d = a.sub(&direct, &pre);
        Ok((a.to_f64(&d) / a.to_f64(&self.normalization)).abs())
    }
}

/// Free-function forms of the series accessors.
pub fn eval_density<A: Arithmetic>(series: &DensitySeries<A>, x: &A::Elem) -> Result<DensityValue> {
    series.eval(x)
}

pub fn normalization<A: Arithmetic>(series: &DensitySeries<A>) -> NormalizationIntegral<A::Elem> {
    series.normalization()
}

pub fn invariance_defect<A: Arithmetic>(series: &DensitySeries<A>, t: &A::Elem) -> Result<f64> {
    series.invariance_defect(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ExactArith, FloatArith};
    use crate::numberfield::{int, rat};

    fn golden(alpha: crate::numberfield::Rational) -> TransformParams<ExactArith> {
        let a = ExactArith::new(1, 2).unwrap();
        let al = a.rational(&alpha);
        TransformParams::new(a, al).unwrap()
    }

    #[test]
    fn depth_formula() {
        assert_eq!(truncation_depth(2.0, 0.5).unwrap(), 2);
        assert_eq!(truncation_depth(10.0, 1e-6).unwrap(), 6);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(truncation_depth(phi, 1e-9).unwrap(), 46);
        assert!(truncation_depth(1.0, 0.1).is_err());
        assert!(truncation_depth(2.0, 0.0).is_err());
    }

    #[test]
    fn golden_greedy_series() {
        let p = golden(int(0));
        let a = p.arith().clone();
        let s = build_series(&p, 1e-9, Variant::Standard).unwrap();
        assert!(s.is_exact());
        assert_eq!(s.depth(), 2);
        assert_eq!(s.tail_bound(), 0.0);
        let k = s.normalization();
        assert!((k.value_f64 - 1.381_966_011_250_105).abs() < 1e-12);
        let g = s.eval(&a.rational(&rat(4, 5))).unwrap().value;
        assert!((g - 0.723_606_797_749_979).abs() < 1e-12);
        let g = s.eval(&a.rational(&rat(3, 10))).unwrap().value;
        assert!((g - 1.170_820_393_249_937).abs() < 1e-12);
    }

    #[test]
    fn golden_half_series() {
        let p = golden(rat(1, 2));
        let s = build_series(&p, 1e-9, Variant::Standard).unwrap();
        assert!(s.is_exact());
        assert_eq!(s.depth(), 4);
        assert!((s.normalization().value_f64 - 1.055_728_090_000_841).abs() < 1e-12);
    }

    #[test]
    fn moments_agree_exactly() {
        for al in [int(0), rat(1, 2), rat(1, 5), rat(7, 9)] {
            let s = build_series(&golden(al), 1e-9, Variant::Standard).unwrap();
            assert_eq!(s.first_moment(), s.first_moment_piecewise());
        }
    }

    #[test]
    fn exact_invariance() {
        let p = golden(int(0));
        let a = p.arith().clone();
        let s = build_series(&p, 1e-9, Variant::Standard).unwrap();
        assert_eq!(s.invariance_defect(&a.rational(&rat(3, 10))).unwrap(), 0.0);
        let p = golden(rat(1, 2));
        let s = build_series(&p, 1e-9, Variant::Standard).unwrap();
        assert_eq!(s.invariance_defect(&a.rational(&rat(7, 10))).unwrap(), 0.0);
        assert_eq!(s.measure_to(&a.int(1)).unwrap(), 1.0);
    }

    #[test]
    fn doubling_map_is_lebesgue() {
        let a = FloatArith::new(2.0).unwrap();
        let p = TransformParams::new(a, 0.0).unwrap();
        let s = build_series(&p, 1e-9, Variant::Standard).unwrap();
        assert!(s.is_exact());
        assert_eq!(s.depth(), 1);
        assert_eq!(s.normalization().value_f64, 1.0);
        assert_eq!(s.eval(&0.3).unwrap().value, 1.0);
        assert_eq!(s.invariance_defect(&0.5).unwrap(), 0.0);
    }

    #[test]
    fn truncated_series_carries_tail() {
        let a = FloatArith::new(1.9).unwrap();
        let p = TransformParams::new(a, 0.2).unwrap();
        let s = build_series(&p, 1e-9, Variant::Standard).unwrap();
        assert!(!s.is_exact());
        assert!(s.tail_bound() <= 1e-9 && s.tail_bound() > 0.0);
        assert!(s.invariance_defect(&0.37).unwrap() <= 1e-8);
        assert!(s.ergodicity_guaranteed());
    }
}
