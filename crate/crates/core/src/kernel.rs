//! Fixed-denominator integer kernel for exact critical orbits.
//!
//! With `alpha = (1/D) sum a_i beta^i`, every point of the orbits of 0 and 1
//! has the form `(1/D) sum n_i beta^i` with integer `n_i`, and since
//! `beta_{q,m}` is Pisot those integers stay bounded. Stepping is then pure
//! integer arithmetic, in `i128` when it fits and `BigInt` otherwise; only
//! floor decisions near an integer, and the final delta sign, fall back to
//! `FieldElement`.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, ToPrimitive, Zero};

use crate::dynamics::{CriticalRun, Cycle, RunOptions, Variant};
use crate::error::Result;
use crate::numberfield::{FieldElement, MultinacciField, Rational, Sign};

const FILTER_REL: f64 = 1e-12;
/// Keeps `q * n_i` and the sums in `affine` far from the `i128` limit.
const MAX_DENOMINATOR: i128 = 1 << 80;

trait Coord: Clone + Eq + Hash + Zero + CheckedAdd + CheckedSub + CheckedMul + From<i64> {
    fn big(&self) -> BigInt;
    fn bits(&self) -> u64;
    /// `self / 2^shift` as a float, truncated.
    fn shifted_f64(&self, shift: u64) -> f64;
}

impl Coord for i128 {
    fn big(&self) -> BigInt {
        BigInt::from(*self)
    }

    fn bits(&self) -> u64 {
        128 - self.unsigned_abs().leading_zeros() as u64
    }

    fn shifted_f64(&self, shift: u64) -> f64 {
        (self >> shift.min(127)) as f64
    }
}

impl Coord for BigInt {
    fn big(&self) -> BigInt {
        self.clone()
    }

    fn bits(&self) -> u64 {
        BigInt::bits(self)
    }

    fn shifted_f64(&self, shift: u64) -> f64 {
        (self >> shift).to_f64().unwrap_or(f64::NAN)
    }
}

struct Lattice<'a, N> {
    field: &'a Arc<MultinacciField>,
    q: N,
    den: N,
    alpha: Vec<N>,
    /// Both `n_i` and `den` are shifted right by this much before going to floats.
    shift: u64,
    den_f64: f64,
}

impl<'a, N: Coord> Lattice<'a, N> {
    fn new(field: &'a Arc<MultinacciField>, den: N, alpha: Vec<N>) -> Self {
        let shift = den.bits().saturating_sub(60);
        let den_f64 = den.shifted_f64(shift);
        Lattice { field, q: N::from(field.q() as i64), den, alpha, shift, den_f64 }
    }

    fn to_element(&self, n: &[N]) -> FieldElement {
        let d = self.den.big();
        let coeffs = n.iter().map(|c| Rational::new(c.big(), d.clone())).collect();
        FieldElement::from_coeffs(self.field, coeffs).expect("coordinate count matches degree")
    }

    /// `beta x + alpha`, or `None` on overflow.
    fn affine(&self, x: &[N]) -> Option<Vec<N>> {
        let m = x.len();
        let top = x[m - 1].checked_mul(&self.q)?;
        let mut y = Vec::with_capacity(m);
        y.push(top.checked_add(&self.alpha[0])?);
        for i in 1..m {
            y.push(x[i - 1].checked_add(&top)?.checked_add(&self.alpha[i])?);
        }
        Some(y)
    }

    fn estimate(&self, n: &[N]) -> (f64, f64) {
        let mut v = 0.0;
        let mut mag = 0.0;
        let mut pows = 0.0;
        for (c, &p) in n.iter().zip(self.field.pows_f64()) {
            let c = c.shifted_f64(self.shift);
            v += c * p;
            mag += c.abs() * p;
            pows += p;
        }
        let d = self.den_f64;
        // Truncating the shift costs at most one unit per coordinate.
        let trunc = if self.shift > 0 { 2.0 * pows / d } else { 0.0 };
        (v / d, FILTER_REL * mag / d + trunc + f64::MIN_POSITIVE)
    }

    fn digit(&self, y: &[N], variant: Variant) -> Result<i64> {
        let (v, err) = self.estimate(y);
        match variant {
            Variant::Standard => {
                let n = v.floor();
                if v - n > err && n + 1.0 - v > err {
                    return Ok(n as i64);
                }
                self.to_element(y).floor()
            }
            Variant::Tilde => {
                let c = v.ceil();
                let ceil = if c - v > err && v - (c - 1.0) > err {
                    c as i64
                } else {
                    -(-&self.to_element(y)).floor()?
                };
                Ok((ceil - 1).max(0))
            }
        }
    }

    fn sign(&self, n: &[N]) -> Result<Sign> {
        if n.iter().all(|c| c.is_zero()) {
            return Ok(Sign::Zero);
        }
        let (v, err) = self.estimate(n);
        if v > err {
            Ok(Sign::Positive)
        } else if v < -err {
            Ok(Sign::Negative)
        } else {
            self.to_element(n).sign()
        }
    }

    /// `None` on overflow.
    fn run(&self, max_iter: usize, opts: RunOptions) -> Result<Option<CriticalRun<FieldElement>>> {
        let m = self.field.m();
        let mut x0 = vec![N::zero(); m];
        let mut x1 = vec![N::zero(); m];
        x1[0] = self.den.clone();

        let mut run = CriticalRun {
            digits0: Vec::new(),
            digits1: Vec::new(),
            matched_at: None,
            cycle: None,
            last_delta_sign: Sign::Positive,
            orbit0: Vec::new(),
            orbit1: Vec::new(),
            ambiguous: false,
        };
        if opts.keep_orbits {
            run.orbit0.push(self.to_element(&x0));
            run.orbit1.push(self.to_element(&x1));
        }
        let mut seen: HashMap<(Vec<N>, Vec<N>), usize> = HashMap::new();
        if opts.detect_cycles {
            seen.insert((x0.clone(), x1.clone()), 0);
        }
        let mut last_nonzero: Option<Vec<N>> = None;
        let diff = |x1: &[N], x0: &[N]| x1.iter().zip(x0).map(|(b, a)| b.checked_sub(a)).collect::<Option<Vec<N>>>();

        for k in 1..=max_iter {
            let Some(mut y0) = self.affine(&x0) else { return Ok(None) };
            let Some(mut y1) = self.affine(&x1) else { return Ok(None) };
            let d0 = self.digit(&y0, opts.variant)?;
            let d1 = self.digit(&y1, opts.variant)?;
            let Some(s0) = N::from(d0).checked_mul(&self.den).and_then(|s| y0[0].checked_sub(&s)) else { return Ok(None) };
            let Some(s1) = N::from(d1).checked_mul(&self.den).and_then(|s| y1[0].checked_sub(&s)) else { return Ok(None) };
            y0[0] = s0;
            y1[0] = s1;
            x0 = y0;
            x1 = y1;
            run.digits0.push(d0);
            run.digits1.push(d1);
            if opts.keep_orbits {
                run.orbit0.push(self.to_element(&x0));
                run.orbit1.push(self.to_element(&x1));
            }
            if run.matched_at.is_some() {
                continue;
            }
            if x0 == x1 {
                run.matched_at = Some(k);
                if opts.stop_at_match {
                    break;
                }
                continue;
            }
            let Some(d) = diff(&x1, &x0) else { return Ok(None) };
            last_nonzero = Some(d);
            if opts.detect_cycles {
                if let Some(&start) = seen.get(&(x0.clone(), x1.clone())) {
                    run.cycle = Some(Cycle { start, period: k - start });
                    break;
                }
                seen.insert((x0.clone(), x1.clone()), k);
            }
        }
        if let Some(d) = last_nonzero {
            run.last_delta_sign = self.sign(&d)?;
        }
        debug_assert!(run.last_delta_sign != Sign::Zero);
        Ok(Some(run))
    }
}

/// `(N, Q)` with `M = N / Q` for a parameter whose critical orbits first meet
/// at step `time`, where the density series is finite. With orbit points
/// `x_k / D` on integer coordinates, `N = sum_k beta^(time-1-k) (x1_k^2 - x0_k^2)`
/// and `Q = 2 D sum_k beta^(time-1-k) (x1_k - x0_k)`, both by Horner's rule.
/// `Ok(None)`: the kernel does not apply or the orbits meet at another step.
pub(crate) fn matched_moments(
    field: &Arc<MultinacciField>,
    alpha: &FieldElement,
    time: usize,
) -> Result<Option<(FieldElement, FieldElement)>> {
    if !alpha.field().same_as(field) || time == 0 {
        return Ok(None);
    }
    let (den, nums) = scaled(alpha);
    let lat = Lattice::new(field, den, nums);
    let m = field.m();
    let q = BigInt::from(field.q());
    let mut x0 = vec![BigInt::zero(); m];
    let mut x1 = vec![BigInt::zero(); m];
    x1[0] = lat.den.clone();
    let mut acc_k = vec![BigInt::zero(); m];
    let mut acc_f = vec![BigInt::zero(); m];
    let mul_beta = |v: &mut Vec<BigInt>| {
        let top = &v[m - 1] * &q;
        for i in (1..m).rev() {
            v[i] = &v[i - 1] + &top;
        }
        v[0] = top;
    };
    for _ in 0..time {
        if x0 == x1 {
            return Ok(None);
        }
        let d: Vec<BigInt> = x1.iter().zip(&x0).map(|(b, a)| b - a).collect();
        let s: Vec<BigInt> = x1.iter().zip(&x0).map(|(b, a)| b + a).collect();
        mul_beta(&mut acc_k);
        mul_beta(&mut acc_f);
        for (a, c) in acc_k.iter_mut().zip(&d) {
            *a += c;
        }
        for (a, c) in acc_f.iter_mut().zip(poly_mul_mod(&d, &s, &q)) {
            *a += c;
        }
        let y0 = lat.affine(&x0).expect("big integers do not overflow");
        let y1 = lat.affine(&x1).expect("big integers do not overflow");
        let d0 = lat.digit(&y0, Variant::Standard)?;
        let d1 = lat.digit(&y1, Variant::Standard)?;
        x0 = y0;
        x1 = y1;
        x0[0] -= BigInt::from(d0) * &lat.den;
        x1[0] -= BigInt::from(d1) * &lat.den;
    }
    if x0 != x1 {
        return Ok(None);
    }
    let to_element = |v: Vec<BigInt>| {
        let coeffs = v.into_iter().map(Rational::from_integer).collect();
        FieldElement::from_coeffs(field, coeffs).expect("coordinate count matches degree")
    };
    let two_d = BigInt::from(2) * &lat.den;
    let k_elem = to_element(acc_k.into_iter().map(|c| c * &two_d).collect());
    Ok(Some((to_element(acc_f), k_elem)))
}

/// Product of two coordinate vectors, reduced with `beta^m = q (beta^{m-1} + ... + 1)`.
fn poly_mul_mod(a: &[BigInt], b: &[BigInt], q: &BigInt) -> Vec<BigInt> {
    let m = a.len();
    let mut prod = vec![BigInt::zero(); 2 * m - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += x * y;
        }
    }
    for d in (m..prod.len()).rev() {
        let t = std::mem::take(&mut prod[d]) * q;
        for j in 1..=m {
            prod[d - j] += &t;
        }
    }
    prod.truncate(m);
    prod
}

/// Common denominator and integer numerators of `alpha`'s coordinates.
fn scaled(alpha: &FieldElement) -> (BigInt, Vec<BigInt>) {
    let mut den = BigInt::from(1);
    for c in alpha.coeffs() {
        den = den.lcm(c.denom());
    }
    let nums = alpha.coeffs().iter().map(|c| c.numer() * (&den / c.denom())).collect();
    (den, nums)
}

/// Same contract as [`crate::dynamics::critical_run_generic`], plus cycle
/// certificates when requested. `Ok(None)` means the kernel does not apply.
pub(crate) fn critical_run_fast(
    field: &Arc<MultinacciField>,
    alpha: &FieldElement,
    max_iter: usize,
    opts: RunOptions,
) -> Result<Option<CriticalRun<FieldElement>>> {
    if !alpha.field().same_as(field) {
        return Ok(None);
    }
    let (den, nums) = scaled(alpha);
    let small = den.to_i128().filter(|&d| d <= MAX_DENOMINATOR).and_then(|d| {
        let a = nums.iter().map(|c| c.to_i128()).collect::<Option<Vec<_>>>()?;
        Some((d, a))
    });
    if let Some((d, a)) = small {
        if let Some(run) = Lattice::new(field, d, a).run(max_iter, opts)? {
            return Ok(Some(run));
        }
    }
    Lattice::new(field, den, nums).run(max_iter, opts)
}
