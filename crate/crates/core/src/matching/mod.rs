//! Matching of the critical orbits, delta-words, matching intervals and the
//! affine law of `M_beta` on them.

mod scan;
mod words;

use serde::Serialize;

use crate::arith::Arithmetic;
use crate::dynamics::{Cycle, RunOptions, TransformParams};
use crate::error::{Error, Result};
use crate::numberfield::Sign;

pub use scan::{classify_monotonicity, scan_intervals, Bracket, MatchingInterval, Monotonicity, MonotonicityReport, ResidualSample, ScanConfig, ScanResult};
pub use words::{delta_word_track, word_cardinality_bound, DeltaWord, WordTrack};

/// Default iteration cap for matching searches.
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatchMode {
    Exact,
    /// Float backend: "matched" means `|delta| <= epsilon`.
    Approximate { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingRecord {
    pub matched: bool,
    /// First `k` with `T^k(0) = T^k(1)`.
    pub time: Option<usize>,
    /// Iterations actually performed.
    pub steps: usize,
    /// `a_1 ... a_time`, digits of the orbit of 0 (all performed steps when unmatched).
    pub prefix0: Vec<i64>,
    /// `b_1 ... b_time`, digits of the orbit of 1.
    pub prefix1: Vec<i64>,
    /// Sign of the last nonzero `delta`.
    pub delta_k_sign: Sign,
    pub mode: MatchMode,
    /// Exact backends: the orbit pair repeated, so matching never happens.
    pub cycle: Option<Cycle>,
    pub ambiguous: bool,
}

impl MatchingRecord {
    /// Two parameters lie in the same matching interval class.
    pub fn same_class(&self, other: &MatchingRecord) -> bool {
        self.matched && other.matched && self.time == other.time && self.prefix0 == other.prefix0 && self.prefix1 == other.prefix1
    }

    /// The run ended without matching and without a certificate.
    pub fn undecided(&self) -> bool {
        !self.matched && self.cycle.is_none()
    }
}

/// Iterate both critical orbits until they meet, the pair repeats (exact
/// backends), or `max_iter` steps have been taken.
pub fn detect_matching<A: Arithmetic>(p: &TransformParams<A>, max_iter: usize) -> Result<MatchingRecord> {
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let a = p.arith();
    let run = a.critical_run(p.alpha(), max_iter, RunOptions { detect_cycles: true, ..RunOptions::default() })?;
    let steps = run.steps();
    Ok(MatchingRecord {
        matched: run.matched_at.is_some(),
        time: run.matched_at,
        steps,
        prefix0: run.digits0,
        prefix1: run.digits1,
        delta_k_sign: run.last_delta_sign,
        mode: if a.is_exact() { MatchMode::Exact } else { MatchMode::Approximate { epsilon: a.match_epsilon() } },
        cycle: run.cycle,
        ambiguous: run.ambiguous,
    })
}

/// `P = (floor(beta) - alpha) / (beta - 1)`, fixed by `T` whenever it lies in
/// the branch with digit `floor(beta)`.
pub fn fixed_point_p<A: Arithmetic>(p: &TransformParams<A>) -> Result<A::Elem> {
    let a = p.arith();
    let num = a.sub(&a.int(a.beta_floor()), p.alpha());
    a.div(&num, &a.sub(&a.beta(), &a.int(1)))
}

/// `lambda_i = 1 + sum_{j<=i} (a_j - b_j) / beta^j` for `0 <= i < time`.
pub fn lambdas<A: Arithmetic>(record: &MatchingRecord, a: &A) -> Result<Vec<A::Elem>> {
    let time = record.time.ok_or(Error::Unmatched)?;
    let mut out = Vec::with_capacity(time);
    let mut lam = a.int(1);
    let mut scale = a.int(1);
    out.push(lam.clone());
    for j in 0..time - 1 {
        scale = a.div_beta(&scale);
        lam = a.add(&lam, &a.mul_int(&scale, record.prefix0[j] - record.prefix1[j]));
        out.push(lam.clone());
    }
    Ok(out)
}

/// Affine law `M = slope * alpha + intercept` on the matching interval of `record`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line<E> {
    pub slope: E,
    pub intercept: E,
    /// `sum lambda_i`, the reciprocal of the normalization on the interval.
    pub lambda_sum: E,
}

pub fn interval_line<A: Arithmetic>(record: &MatchingRecord, a: &A) -> Result<Line<A::Elem>> {
    let sums = if a.is_exact() { scaled_sums(record, a)? } else { direct_sums(record, a)? };
    if a.sign(&sums.lambda_sum)? != Sign::Positive {
        return Err(Error::NonPositiveWeight);
    }
    let inv = a.inv(&sums.lambda_sum)?;
    Ok(Line { slope: a.mul(&sums.csum, &inv), intercept: a.mul(&sums.g0, &inv), lambda_sum: sums.lambda_sum })
}

/// `C^k = sum_{i=1}^{k} (beta^{i-1} + ... + 1) delta^i / beta^i`, with `delta^i / beta^i = lambda_i`.
/// It is also `sum lambda_i d g_i / d alpha`, the numerator of the slope.
pub fn coefficient_sum<A: Arithmetic>(record: &MatchingRecord, a: &A) -> Result<A::Elem> {
    Ok(if a.is_exact() { scaled_sums(record, a)? } else { direct_sums(record, a)? }.csum)
}

struct LineSums<E> {
    lambda_sum: E,
    /// `sum lambda_i (beta^i - 1) / (beta - 1)`.
    csum: E,
    /// `sum lambda_i g_i(0)`.
    g0: E,
}

// `2 g_i(0) = beta^i (1 - sum_{j<i} (a_j + b_j) / beta^{j+1})`, the orbit
// midpoints extrapolated to `alpha = 0` with the digits held fixed.
fn direct_sums<A: Arithmetic>(record: &MatchingRecord, a: &A) -> Result<LineSums<A::Elem>> {
    let lam = lambdas(record, a)?;
    let mut lambda_sum = a.int(0);
    let mut csum = a.int(0);
    let mut g0 = a.int(0);
    let mut geo = a.int(0);
    let mut pow = a.int(1);
    let mut twice_g = a.int(1);
    for (i, l) in lam.iter().enumerate() {
        lambda_sum = a.add(&lambda_sum, l);
        csum = a.add(&csum, &a.mul(l, &geo));
        g0 = a.add(&g0, &a.mul(l, &twice_g));
        geo = a.add(&geo, &pow);
        pow = a.mul_beta(&pow);
        twice_g = a.sub(&a.mul_beta(&twice_g), &a.int(record.prefix0[i] + record.prefix1[i]));
    }
    let g0 = a.mul(&g0, &a.rational(&crate::numberfield::rat(1, 2)));
    Ok(LineSums { lambda_sum, csum, g0 })
}

// The same sums with every term scaled by `beta^i`, which keeps exact
// coordinates integral: `L_i = beta^i lambda_i` obeys
// `L_{i+1} = beta L_i + a_i - b_i`, and the sums over `beta^-i L_i` are taken
// by Horner's rule and unscaled once at the end.
fn scaled_sums<A: Arithmetic>(record: &MatchingRecord, a: &A) -> Result<LineSums<A::Elem>> {
    let time = record.time.ok_or(Error::Unmatched)?;
    let mut big_l = a.int(1);
    let mut twice_g = a.int(1);
    let mut horner_l = a.int(0);
    let mut horner_g = a.int(0);
    let mut plain_l = a.int(0);
    for i in 0..time {
        horner_l = a.add(&a.mul_beta(&horner_l), &big_l);
        horner_g = a.add(&a.mul_beta(&horner_g), &a.mul(&big_l, &twice_g));
        plain_l = a.add(&plain_l, &big_l);
        big_l = a.add(&a.mul_beta(&big_l), &a.int(record.prefix0[i] - record.prefix1[i]));
        twice_g = a.sub(&a.mul_beta(&twice_g), &a.int(record.prefix0[i] + record.prefix1[i]));
    }
    let unscale = a.beta_pow_recip((time - 1) as u32);
    let lambda_sum = a.mul(&horner_l, &unscale);
    // sum lambda_i (beta^i - 1) / (beta - 1) = (sum L_i - sum lambda_i) / (beta - 1)
    let csum = a.div(&a.sub(&plain_l, &lambda_sum), &a.sub(&a.beta(), &a.int(1)))?;
    let g0 = a.mul(&a.mul(&horner_g, &unscale), &a.rational(&crate::numberfield::rat(1, 2)));
    Ok(LineSums { lambda_sum, csum, g0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ExactArith, FloatArith};
    use crate::numberfield::{int, rat};

    fn exact(q: u32, m: usize, alpha: crate::numberfield::Rational) -> TransformParams<ExactArith> {
        let a = ExactArith::new(q, m).unwrap();
        let al = a.rational(&alpha);
        TransformParams::new(a, al).unwrap()
    }

    /// `d g_i / d alpha = (beta^i - 1) / (beta - 1) = 1 + beta + ... + beta^{i-1}`,
    /// for `i = 0, 1, ..., n - 1`.
    fn geometric_terms<A: Arithmetic>(a: &A, n: usize) -> Vec<A::Elem> {
        let mut out = Vec::with_capacity(n);
        let mut s = a.int(0);
        let mut p = a.int(1);
        for _ in 0..n {
            out.push(s.clone());
            s = a.add(&s, &p);
            p = a.mul_beta(&p);
        }
        out
    }

    #[test]
    fn scaled_and_direct_sums_agree() {
        for (q, m) in [(1, 2), (1, 3), (2, 2), (3, 4)] {
            let a = ExactArith::new(q, m).unwrap();
            for (n, d) in [(1, 2), (3, 5), (7, 9), (9, 10), (1, 100)] {
                let r = detect_matching(&TransformParams::new(a.clone(), a.rational(&rat(n, d))).unwrap(), 10_000).unwrap();
                if !r.matched {
                    continue;
                }
                let (s, t) = (scaled_sums(&r, &a).unwrap(), direct_sums(&r, &a).unwrap());
                assert_eq!(s.lambda_sum, t.lambda_sum);
                assert_eq!(s.csum, t.csum);
                assert_eq!(s.g0, t.g0);
            }
        }
    }

    #[test]
    fn golden_half_record() {
        let r = detect_matching(&exact(1, 2, rat(1, 2)), 10).unwrap();
        assert!(r.matched);
        assert_eq!(r.time, Some(4));
        assert_eq!(r.prefix0, vec![0, 1, 1, 0]);
        assert_eq!(r.prefix1, vec![2, 0, 1, 1]);
        assert_eq!(r.delta_k_sign, Sign::Positive);
        assert_eq!(r.mode, MatchMode::Exact);
    }

    #[test]
    fn low_regime_matches_at_m() {
        for (q, m) in [(1, 2), (1, 3), (2, 4), (3, 5)] {
            let a = ExactArith::new(q, m).unwrap();
            let al = a.mul(&crate::dynamics::regime_boundary(&a), &a.rational(&rat(99, 100)));
            let r = detect_matching(&TransformParams::new(a, al).unwrap(), 50).unwrap();
            assert_eq!(r.time, Some(m), "({q},{m})");
            assert_eq!(r.prefix0, vec![0; m]);
            assert_eq!(r.prefix1, vec![q as i64; m]);
        }
    }

    #[test]
    fn float_non_algebraic_does_not_match() {
        let a = FloatArith::new(1.9).unwrap();
        let p = TransformParams::new(a, 0.2).unwrap();
        let r = detect_matching(&p, 1000).unwrap();
        assert!(!r.matched);
        assert!(matches!(r.mode, MatchMode::Approximate { .. }));
    }

    #[test]
    fn fixed_point() {
        let p = exact(1, 2, rat(1, 2));
        let a = p.arith().clone();
        let fp = fixed_point_p(&p).unwrap();
        assert!((a.to_f64(&fp) - 0.809_016_994_374_947_4).abs() < 1e-14);
        let s = crate::dynamics::step_t(&p, &fp).unwrap();
        assert_eq!(s.value, fp);
    }

    #[test]
    fn golden_low_line() {
        let p = exact(1, 2, int(0));
        let a = p.arith().clone();
        let r = detect_matching(&p, 10).unwrap();
        let line = interval_line(&r, &a).unwrap();
        assert!((a.to_f64(&line.slope) - 0.276_393_202_250_021).abs() < 1e-14);
        assert!((a.to_f64(&line.intercept) - 0.447_213_595_499_958).abs() < 1e-14);
        let c = coefficient_sum(&r, &a).unwrap();
        assert_eq!(c, a.div_beta(&a.sub(&a.beta(), &a.int(1))));
    }

    #[test]
    fn integer_base_line_is_flat() {
        let a = FloatArith::new(2.0).unwrap();
        let p = TransformParams::new(a, 0.37).unwrap();
        let r = detect_matching(&p, 10).unwrap();
        let line = interval_line(&r, &a).unwrap();
        assert_eq!(line.slope, 0.0);
        assert_eq!(line.intercept, 0.5);
    }

    #[test]
    fn golden_half_coefficient_sum() {
        let p = exact(1, 2, rat(1, 2));
        let a = p.arith().clone();
        let r = detect_matching(&p, 10).unwrap();
        let c = coefficient_sum(&r, &a).unwrap();
        let d = crate::dynamics::delta_sequence(&p, 3).unwrap().entries;
        let mut want = a.int(0);
        for (i, di) in d.iter().enumerate() {
            let k = i as u32 + 1;
            want = a.add(&want, &a.mul(&a.mul(&geometric_terms(&a, k as usize + 1)[k as usize], di), &a.beta_pow_recip(k)));
        }
        assert_eq!(c, want);
        assert_eq!(c.sign().unwrap(), Sign::Positive);
    }

    #[test]
    fn unmatched_record_has_no_line() {
        let a = FloatArith::new(1.9).unwrap();
        let p = TransformParams::new(a, 0.2).unwrap();
        let r = detect_matching(&p, 50).unwrap();
        assert_eq!(interval_line(&r, &a), Err(Error::Unmatched));
    }
}
