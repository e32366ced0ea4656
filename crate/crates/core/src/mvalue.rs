//! The mean normalized error `M_beta(alpha) = int x g_{beta,alpha}(x) dx`,
//! evaluated three independent ways, and the closed forms for multinacci
//! bases on `[0, 1 - <beta>)`.

use std::ops::RangeInclusive;

use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{Arithmetic, ExactArith, FloatArith};
use crate::density::build_series;
use crate::dynamics::{symmetric_partner, RunOptions, TransformParams, Variant};
use crate::error::{invalid, Error, Result};
use crate::matching::{interval_line, MatchingRecord};
use crate::numberfield::{int, isolate_root, pow2_recip, rational_to_decimal, FieldElement, Rational, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    FiniteSum,
    Birkhoff,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MValue<E> {
    pub value: E,
    pub value_f64: f64,
    pub method: Method,
    /// Certified for `Series` and `FiniteSum`; a standard error for `Birkhoff`.
    pub error_bound: f64,
}

/// Density tolerance is tightened by this factor until the propagated bound fits.
const REBUILD_FACTOR: f64 = 1.0 / 16.0;
const MAX_REBUILDS: usize = 8;

fn check_range(v: f64, bound: f64) -> Result<()> {
    if !(v >= -bound - 1e-12 && v <= 1.0 + bound + 1e-12) {
        return Err(Error::Inconsistent(format!("M = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `M = (sum_k (T^k(1)^2 - T^k(0)^2) / (2 beta^k)) / K` over the truncated
/// (or, after matching, finite) density series. The moment is computed both
/// from the breakpoint formula and piece by piece, and the two must agree.
pub fn m_series<A: Arithmetic>(p: &TransformParams<A>, tol: f64) -> Result<MValue<A::Elem>> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let a = p.arith();
    let mut dtol = tol;
    let mut last = None;
    for _ in 0..MAX_REBUILDS {
        let s = build_series(p, dtol, Variant::Standard)?;
        let f = s.first_moment();
        let fp = s.first_moment_piecewise();
        if a.is_exact() {
            if f != fp {
                return Err(Error::Inconsistent("first moment differs between summation orders".into()));
            }
        } else if (a.to_f64(&f) - a.to_f64(&fp)).abs() > 1e-9 * (1.0 + a.to_f64(&f).abs()) {
            return Err(Error::Inconsistent("first moment differs between summation orders".into()));
        }
        let k = s.normalization().value;
        let value = a.div(&f, &k)?;
        let (ff, kf) = (a.to_f64(&f), a.to_f64(&k));
        // Omitted terms move F by at most t/2 and K by at most t.
        let t = s.tail_bound();
        let mut bound = if t == 0.0 {
            0.0
        } else if kf > t {
            t * (ff.abs() + kf) / (kf * (kf - t))
        } else {
            f64::INFINITY
        };
        if !a.is_exact() {
            bound += s.depth() as f64 * 64.0 * f64::EPSILON + a.match_epsilon() / kf;
        }
        let value_f64 = a.to_f64(&value);
        check_range(value_f64, bound)?;
        let mv = MValue { value, value_f64, method: Method::Series, error_bound: bound };
        if bound <= tol || s.is_exact() {
            return Ok(mv);
        }
        last = Some(mv);
        dtol *= REBUILD_FACTOR;
    }
    Ok(last.expect("at least one build"))
}

/// `M` of a parameter whose critical orbits meet at step `time`. The series
/// then stops there and is exact; no sorting is needed for the two sums
/// `K = sum_k beta^-k (T^k 1 - T^k 0)` and
/// `F = (1/2) sum_k beta^-k ((T^k 1)^2 - (T^k 0)^2)`, taken by Horner's rule.
pub fn m_matched<A: Arithmetic>(p: &TransformParams<A>, time: usize) -> Result<MValue<A::Elem>> {
    let a = p.arith();
    if let Some((n, q)) = a.matched_moments(p.alpha(), time)? {
        if a.sign(&q)? != Sign::Positive {
            return Err(Error::NonPositiveNormalization(a.to_f64(&q)));
        }
        let value = a.div(&n, &q)?;
        let value_f64 = a.to_f64(&value);
        check_range(value_f64, 0.0)?;
        return Ok(MValue { value, value_f64, method: Method::Series, error_bound: 0.0 });
    }
    let opts = RunOptions { keep_orbits: true, ..RunOptions::default() };
    let run = a.critical_run(p.alpha(), time, opts)?;
    if run.matched_at != Some(time) {
        return Err(Error::Unmatched);
    }
    let mut k = a.int(0);
    let mut f = a.int(0);
    for (x1, x0) in run.orbit1[..time].iter().zip(&run.orbit0[..time]).rev() {
        let d = a.sub(x1, x0);
        f = a.add(&a.div_beta(&f), &a.mul(&d, &a.add(x1, x0)));
        k = a.add(&a.div_beta(&k), &d);
    }
    let f = a.mul(&f, &a.rational(&crate::numberfield::rat(1, 2)));
    if a.sign(&k)? != Sign::Positive {
        return Err(Error::NonPositiveNormalization(a.to_f64(&k)));
    }
    let value = a.div(&f, &k)?;
    let value_f64 = a.to_f64(&value);
    check_range(value_f64, 0.0)?;
    Ok(MValue { value, value_f64, method: Method::Series, error_bound: 0.0 })
}

/// The affine law of `record`'s matching interval evaluated at `p.alpha()`,
/// i.e. `sum lambda_i g_i(alpha) / sum lambda_i`. Exact for exact backends.
pub fn m_finite<A: Arithmetic>(record: &MatchingRecord, p: &TransformParams<A>) -> Result<MValue<A::Elem>> {
    if !record.matched {
        return Err(Error::Unmatched);
    }
    let a = p.arith();
    let line = interval_line(record, a)?;
    let value = a.add(&a.mul(&line.slope, p.alpha()), &line.intercept);
    let value_f64 = a.to_f64(&value);
    let error_bound = if a.is_exact() { 0.0 } else { record.time.unwrap_or(0) as f64 * 64.0 * f64::EPSILON };
    Ok(MValue { value, value_f64, method: Method::FiniteSum, error_bound })
}

/// Number of batches for the batch-means standard error.
const BATCHES: usize = 100;
/// Upper end of the per-step dither.
const DITHER: f64 = 1.0 / (1u64 << 45) as f64;

/// Birkhoff average of `T^i(x_0)` from a uniform random `x_0`, in `f64`.
///
/// Floating orbits of Pisot bases collapse onto short cycles (for `beta = 2`
/// every orbit reaches 0 within 53 steps), so each step is dithered by
/// `x += eta (1 - x)` with `eta` uniform in `[0, 2^-45)`. The error bound is
/// a batch-means standard error: statistical, not certified.
pub fn m_birkhoff<A: Arithmetic>(p: &TransformParams<A>, iters: usize, burn_in: usize, seed: u64) -> Result<MValue<f64>> {
    if iters < 1000 {
        return invalid("Birkhoff averaging needs at least 1000 iterations");
    }
    let beta = p.arith().beta_f64();
    let alpha = p.alpha_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: f64 = rng.gen();
    let step = |x: f64, rng: &mut ChaCha8Rng| {
        let y = beta * x + alpha;
        let mut z = y - y.floor();
        z += rng.gen_range(0.0..DITHER) * (1.0 - z);
        if z >= 1.0 {
            z = 0.0;
        }
        z
    };
    for _ in 0..burn_in {
        x = step(x, &mut rng);
    }
    let per = iters / BATCHES;
    let mut means = Vec::with_capacity(BATCHES);
    let mut total = 0.0;
    let mut count = 0usize;
    for b in 0..BATCHES {
        let n = if b + 1 == BATCHES { iters - per * (BATCHES - 1) } else { per };
        let mut s = 0.0;
        for _ in 0..n {
            x = step(x, &mut rng);
            s += x;
        }
        total += s;
        count += n;
        means.push(s / n as f64);
    }
    let mean = total / count as f64;
    let bm = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    Ok(MValue { value: mean, value_f64: mean, method: Method::Birkhoff, error_bound: (var / BATCHES as f64).sqrt() })
}

/// Constants of `M_{beta_{q,m}}(alpha) = slope * alpha + intercept` on `[0, 1 - <beta>)`.
#[derive(Debug, Clone, Serialize)]
pub struct MultinacciConstants {
    pub q: u32,
    pub m: usize,
    /// `K_{q,m} = 1 / sum lambda_i = (beta - 1) / (beta - mq/beta^m)`. This is
    /// the reciprocal of the normalization integral of the density series.
    pub k_recip: f64,
    pub slope: f64,
    /// From the unsimplified finite sum.
    pub intercept: f64,
    /// The simplified closed form. Differs from `intercept`; kept
    /// for comparison only.
    pub simplified_intercept: f64,
    #[serde(skip)]
    pub exact: Option<ExactConstants>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConstants {
    pub k_recip: FieldElement,
    pub slope: FieldElement,
    pub intercept: FieldElement,
    pub simplified_intercept: FieldElement,
}

/// `[K, slope, intercept, simplified intercept]` in any backend.
fn constants_in<A: Arithmetic>(a: &A, q: u32, m: usize) -> Result<[A::Elem; 4]> {
    let qe = a.int(q as i64);
    let one = a.int(1);
    let b = a.beta();
    let bm_recip = a.beta_pow_recip(m as u32);
    let bm = a.beta_pow(m as u32);
    let b1 = a.sub(&b, &one);
    // beta - mq / beta^m
    let den = a.sub(&b, &a.mul_int(&bm_recip, (m as i64) * q as i64));
    let k = a.div(&b1, &den)?;

    let slope_num = a.mul(&qe, &a.add(&a.int(m as i64 - 1), &a.sub(&a.mul_int(&bm_recip, m as i64 + 1), &a.rational(&Rational::new(2.into(), (q as i64).into())))));
    let slope = a.div(&slope_num, &a.mul(&b1, &den))?;

    // (K/2) (1 + sum_{i=1}^{m-1} beta^i (sum_{j=i+1}^{m} q/beta^j)^2)
    let mut sum = one.clone();
    for i in 1..m {
        let mut inner = a.int(0);
        for j in i + 1..=m {
            inner = a.add(&inner, &a.mul(&qe, &a.beta_pow_recip(j as u32)));
        }
        sum = a.add(&sum, &a.mul(&a.beta_pow(i as u32), &a.mul(&inner, &inner)));
    }
    let half = a.rational(&Rational::new(1.into(), 2.into()));
    let intercept = a.mul(&a.mul(&k, &half), &sum);

    // (q + 1 + 2/(B-1) - q/(B(B-1)) - (2q^2(m-1) + q)/B) / (2(q + 1 - q(m+1)/B)), B = beta^m.
    let bm1 = a.sub(&bm, &one);
    let qi = q as i64;
    let mut num = a.int(qi + 1);
    num = a.add(&num, &a.div(&a.int(2), &bm1)?);
    num = a.sub(&num, &a.div(&qe, &a.mul(&bm, &bm1))?);
    num = a.sub(&num, &a.mul_int(&bm_recip, 2 * qi * qi * (m as i64 - 1) + qi));
    let pden = a.mul_int(&a.sub(&a.int(qi + 1), &a.mul_int(&bm_recip, qi * (m as i64 + 1))), 2);
    let simplified = a.div(&num, &pden)?;
    Ok([k, slope, intercept, simplified])
}

/// Closed forms for `beta_{q,m}`, evaluated exactly in `Q(beta_{q,m})` and
/// rounded at the end. `m = 1` is the integer base `q`, where `M = 1/2`.
pub fn closed_forms(q: u32, m: usize) -> Result<MultinacciConstants> {
    if q == 0 || m == 0 {
        return invalid("closed forms need q >= 1 and m >= 1");
    }
    if m == 1 {
        if q < 2 {
            return invalid("beta_{1,1} = 1 is not a valid base");
        }
        let a = FloatArith::new(q as f64)?;
        let [k, s, i, d] = constants_in(&a, q, 1)?;
        return Ok(MultinacciConstants { q, m, k_recip: k, slope: s, intercept: i, simplified_intercept: d, exact: None });
    }
    let a = ExactArith::new(q, m)?;
    let [k, s, i, d] = constants_in(&a, q, m)?;
    Ok(MultinacciConstants {
        q,
        m,
        k_recip: k.to_f64(),
        slope: s.to_f64(),
        intercept: i.to_f64(),
        simplified_intercept: d.to_f64(),
        exact: Some(ExactConstants { k_recip: k, slope: s, intercept: i, simplified_intercept: d }),
    })
}

/// Compare elements that may live in different fields by refining both
/// generator enclosures until the value intervals separate.
pub fn compare_elements(x: &FieldElement, y: &FieldElement) -> Result<Sign> {
    if x.field().same_as(y.field()) {
        return (x - y).sign();
    }
    let (ex, ey) = (x.field().enclosure(), y.field().enclosure());
    for bits in (64..=4096).step_by(64) {
        let w = pow2_recip(bits);
        let (xl, xh) = x.enclose(&ex.refined_to(&w));
        let (yl, yh) = y.enclose(&ey.refined_to(&w));
        if xh < yl {
            return Ok(Sign::Negative);
        }
        if yh < xl {
            return Ok(Sign::Positive);
        }
    }
    Err(Error::RefinementBudget { budget: 4096 })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneRow {
    pub m: usize,
    pub slope: f64,
    pub intercept: f64,
    /// `slope(m+1) > slope(m)`; `None` on the last row.
    pub slope_increases: Option<bool>,
    pub intercept_increases: Option<bool>,
}

/// Closed-form slope and intercept for each `m`, with strict-increase flags
/// decided exactly across fields.
pub fn monotone_table(q: u32, ms: RangeInclusive<usize>) -> Result<Vec<MonotoneRow>> {
    if *ms.start() < 2 || ms.is_empty() {
        return invalid("monotone table needs a nonempty range of m >= 2");
    }
    let consts: Vec<MultinacciConstants> = ms.map(|m| closed_forms(q, m)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(consts.len());
    for (i, c) in consts.iter().enumerate() {
        let (mut si, mut ii) = (None, None);
        if let Some(n) = consts.get(i + 1) {
            let (ce, ne) = (c.exact.as_ref().expect("m >= 2"), n.exact.as_ref().expect("m >= 2"));
            si = Some(compare_elements(&ne.slope, &ce.slope)? == Sign::Positive);
            ii = Some(compare_elements(&ne.intercept, &ce.intercept)? == Sign::Positive);
        }
        rows.push(MonotoneRow { m: c.m, slope: c.slope, intercept: c.intercept, slope_increases: si, intercept_increases: ii });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct GapBounds {
    pub q: u32,
    pub m: usize,
    /// `q / beta_{q,m+1}^m`.
    pub upper: f64,
    /// `beta_{q,m+1} - beta_{q,m}`.
    pub gap: f64,
    /// `q (1 - 1/beta_{q,m}) / beta_{q,m+1}^m`.
    pub lower: f64,
    pub upper_exceeds_gap: bool,
    pub gap_exceeds_lower: bool,
    /// Enclosure width `2^-bits` at which all three intervals separated.
    pub bits: u32,
    pub upper_decimal: String,
    pub gap_decimal: String,
    pub lower_decimal: String,
}

impl GapBounds {
    pub fn holds(&self) -> bool {
        self.upper_exceeds_gap && self.gap_exceeds_lower
    }
}

fn rpow(x: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| acc * x)
}

/// Interval bounds on both sides of `upper > gap > lower` from rational
/// enclosures of `beta_{q,m}` and `beta_{q,m+1}`, starting at width `2^-100`
/// (below `10^-30`) and refined until the intervals are pairwise disjoint.
pub fn beta_gap_bounds(q: u32, m: usize) -> Result<GapBounds> {
    if q == 0 || m < 2 {
        return invalid("gap bounds need q >= 1 and m >= 2");
    }
    let qr = int(q as i64);
    for bits in (100..=3200).step_by(100) {
        let w = pow2_recip(bits);
        let e0 = isolate_root(q, m, &w)?;
        let e1 = isolate_root(q, m + 1, &w)?;
        let (l0, h0) = (e0.lo(), e0.hi());
        let (l1, h1) = (e1.lo(), e1.hi());
        let (p_lo, p_hi) = (rpow(l1, m), rpow(h1, m));
        let upper = (&qr / &p_hi, &qr / &p_lo);
        let gap = (l1 - h0, h1 - l0);
        let one = Rational::one();
        let lower = (&qr * (&one - l0.recip()) / &p_hi, &qr * (&one - h0.recip()) / &p_lo);
        let ug = if upper.0 > gap.1 {
            Some(true)
        } else if upper.1 < gap.0 {
            Some(false)
        } else {
            None
        };
        let gl = if gap.0 > lower.1 {
            Some(true)
        } else if gap.1 < lower.0 {
            Some(false)
        } else {
            None
        };
        if let (Some(ug), Some(gl)) = (ug, gl) {
            let mid = |x: &(Rational, Rational)| (&x.0 + &x.1) / int(2);
            let (um, gm, lm) = (mid(&upper), mid(&gap), mid(&lower));
            return Ok(GapBounds {
                q,
                m,
                upper: um.to_f64().unwrap_or(f64::NAN),
                gap: gm.to_f64().unwrap_or(f64::NAN),
                lower: lm.to_f64().unwrap_or(f64::NAN),
                upper_exceeds_gap: ug,
                gap_exceeds_lower: gl,
                bits,
                upper_decimal: rational_to_decimal(&um, 30),
                gap_decimal: rational_to_decimal(&gm, 30),
                lower_decimal: rational_to_decimal(&lm, 30),
            });
        }
    }
    Err(Error::RefinementBudget { budget: 3200 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCheck {
    pub partner: f64,
    pub m_alpha: f64,
    pub m_partner: f64,
    /// `|M(alpha) + M(alpha*) - 1|`.
    pub defect: f64,
    /// Sum of the two certified series bounds.
    pub error_bound: f64,
}

pub fn symmetry_check<A: Arithmetic>(p: &TransformParams<A>, tol: f64) -> Result<SymmetryCheck> {
    let a = p.arith();
    let partner = symmetric_partner(p)?;
    let m1 = m_series(p, tol)?;
    let m2 = m_series(&p.with_alpha(partner.clone())?, tol)?;
    let d = a.sub(&a.add(&m1.value, &m2.value), &a.int(1));
    Ok(SymmetryCheck {
        partner: a.to_f64(&partner),
        m_alpha: m1.value_f64,
        m_partner: m2.value_f64,
        defect: a.to_f64(&d).abs(),
        error_bound: m1.error_bound + m2.error_bound,
    })
}

/// `|M(alpha) + M(1 - <beta + alpha>) - 1|`.
pub fn symmetry_defect<A: Arithmetic>(p: &TransformParams<A>, tol: f64) -> Result<f64> {
    Ok(symmetry_check(p, tol)?.defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::detect_matching;
    use crate::numberfield::{rat, MultinacciField};

    fn exact(q: u32, m: usize, alpha: Rational) -> TransformParams<ExactArith> {
        let a = ExactArith::new(q, m).unwrap();
        let al = a.rational(&alpha);
        TransformParams::new(a, al).unwrap()
    }

    #[test]
    fn matched_value_equals_series() {
        for (q, m) in [(1, 2), (1, 3), (2, 2)] {
            for (n, d) in [(1, 2), (3, 5), (7, 9), (9, 10)] {
                let p = exact(q, m, rat(n, d));
                let rec = detect_matching(&p, 10_000).unwrap();
                let Some(t) = rec.time else { continue };
                let fast = m_matched(&p, t).unwrap();
                assert_eq!(fast.value, m_series(&p, 1e-12).unwrap().value, "({q},{m}) at {n}/{d}");
                assert_eq!(m_matched(&p, t + 1), Err(Error::Unmatched));
                // Orbits of a float base meet only approximately: the generic path.
                let fa = FloatArith::new(p.arith().beta_f64()).unwrap();
                let fp = TransformParams::new(fa, n as f64 / d as f64).unwrap();
                if let Some(ft) = detect_matching(&fp, 10_000).unwrap().time {
                    assert!((m_matched(&fp, ft).unwrap().value - fast.value_f64).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn doubling_map_is_half() {
        let a = FloatArith::new(2.0).unwrap();
        let p = TransformParams::new(a, 0.37).unwrap();
        let v = m_series(&p, 1e-10).unwrap();
        assert!((v.value_f64 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn golden_series_and_finite_sum() {
        let p = exact(1, 2, int(0));
        let s = m_series(&p, 1e-12).unwrap();
        assert_eq!(s.error_bound, 0.0);
        assert!((s.value_f64 - 0.447_213_595_499_958).abs() < 1e-14);
        let r = detect_matching(&p, 100).unwrap();
        let f = m_finite(&r, &p).unwrap();
        assert_eq!(f.value, s.value);
        // Irrational alpha inside the same interval.
        let a = p.arith().clone();
        let al = a.sub(&a.sub(&a.int(2), &a.beta()), &a.rational(&rat(1, 1_000_000_000)));
        let f = m_finite(&r, &p.with_alpha(al).unwrap()).unwrap();
        assert!((f.value_f64 - 0.552_786_404_5).abs() < 1e-9);
    }

    #[test]
    fn golden_half() {
        let s = m_series(&exact(1, 2, rat(1, 2)), 1e-12).unwrap();
        assert!((s.value_f64 - 0.516_311_896).abs() < 1e-9);
    }

    #[test]
    fn birkhoff_uniform_doubling() {
        let a = FloatArith::new(2.0).unwrap();
        let p = TransformParams::new(a, 0.0).unwrap();
        let b = m_birkhoff(&p, 200_000, 1000, 42).unwrap();
        assert!((b.value - 0.5).abs() < 4.0 * b.error_bound, "{b:?}");
        assert!(b.error_bound > 0.0 && b.error_bound < 0.01);
        let again = m_birkhoff(&p, 200_000, 1000, 42).unwrap();
        assert_eq!(b, again);
    }

    #[test]
    fn closed_forms_golden() {
        let c = closed_forms(1, 2).unwrap();
        assert!((c.k_recip - 0.723_606_797_749_979).abs() < 1e-14);
        assert!((c.slope - 0.276_393_202_250_021).abs() < 1e-14);
        assert!((c.intercept - 0.447_213_595_499_958).abs() < 1e-14);
        assert!(c.simplified_intercept > 1.0);
        let d = closed_forms(3, 1).unwrap();
        assert_eq!((d.k_recip, d.slope, d.intercept), (1.0, 0.0, 0.5));
    }

    #[test]
    fn closed_form_slope_matches_interval_line() {
        for (q, m) in [(1, 2), (1, 3), (2, 3), (3, 5)] {
            let p = exact(q, m, int(0));
            let r = detect_matching(&p, 100).unwrap();
            let line = interval_line(&r, p.arith()).unwrap();
            let c = closed_forms(q, m).unwrap().exact.unwrap();
            assert_eq!(line.slope, c.slope);
            assert_eq!(line.intercept, c.intercept);
            assert_eq!(p.arith().inv(&line.lambda_sum).unwrap(), c.k_recip);
        }
    }

    #[test]
    fn gap_golden() {
        let g = beta_gap_bounds(1, 2).unwrap();
        assert!(g.holds());
        assert!((g.gap - 0.221_252_3).abs() < 1e-6);
        assert!((g.upper - 0.295_597_7).abs() < 1e-6);
        assert!((g.lower - 0.112_908).abs() < 1e-6);
    }

    #[test]
    fn cross_field_compare() {
        let a = FieldElement::beta(&MultinacciField::new(1, 2).unwrap());
        let b = FieldElement::beta(&MultinacciField::new(1, 3).unwrap());
        assert_eq!(compare_elements(&a, &b).unwrap(), Sign::Negative);
        assert_eq!(compare_elements(&b, &a).unwrap(), Sign::Positive);
    }

    #[test]
    fn symmetry_golden() {
        let c = symmetry_check(&exact(1, 2, int(0)), 1e-12).unwrap();
        assert!((c.partner - (2.0 - 1.618_033_988_749_895)).abs() < 1e-15);
        assert!(c.defect <= c.error_bound + 1e-15 && c.error_bound < 1e-12);
    }
}
