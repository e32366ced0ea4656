use rayon::prelude::*;
use serde::Serialize;

use super::{coefficient_sum, detect_matching, interval_line, Line, MatchingRecord};
use crate::arith::{Arithmetic, ExactArith};
use crate::dynamics::{Cycle, TransformParams};
use crate::error::{invalid, Result};
use crate::numberfield::{rat, FieldElement, Sign};

#[derive(Debug, Clone)]
pub struct ScanConfig {
    /// Inclusive lower end of the alpha range.
    pub lo: FieldElement,
    /// Exclusive upper end.
    pub hi: FieldElement,
    pub grid: usize,
    pub max_iter: usize,
    /// Boundaries are bisected to width `(hi - lo) / grid / 2^refine_bits`.
    pub refine_bits: u32,
}

impl ScanConfig {
    pub fn new(lo: FieldElement, hi: FieldElement, grid: usize, max_iter: usize) -> Self {
        ScanConfig { lo, hi, grid, max_iter, refine_bits: 10 }
    }
}

/// `lo <= boundary <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub lo: FieldElement,
    pub hi: FieldElement,
}

impl Bracket {
    fn point(x: &FieldElement) -> Self {
        Bracket { lo: x.clone(), hi: x.clone() }
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }
}

#[derive(Debug, Clone)]
pub struct MatchingInterval {
    /// The left endpoint lies in `lo`; `lo.hi` is inside the interval.
    pub lo: Bracket,
    /// The right endpoint lies in `hi`; `hi.lo` is inside the interval.
    pub hi: Bracket,
    pub samples: usize,
    pub record: MatchingRecord,
    pub line: Line<FieldElement>,
    pub csum: FieldElement,
}

impl MatchingInterval {
    pub fn slope_f64(&self) -> f64 {
        self.line.slope.to_f64()
    }

    pub fn intercept_f64(&self) -> f64 {
        self.line.intercept.to_f64()
    }

    /// `M` on this interval, from its line.
    pub fn m_at(&self, alpha: f64) -> f64 {
        self.slope_f64() * alpha + self.intercept_f64()
    }

    pub fn csum_sign(&self) -> Result<Sign> {
        self.csum.sign()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSample {
    pub alpha: f64,
    /// Certificate that the orbits never match, when one was found.
    pub cycle: Option<Cycle>,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub intervals: Vec<MatchingInterval>,
    pub residual: Vec<ResidualSample>,
    /// `#residual / grid * (hi - lo)`.
    pub residual_measure: f64,
    /// Boundary bisections that met a record different from both neighbours:
    /// some matching interval narrower than the grid spacing was skipped.
    pub hidden_boundaries: usize,
}

fn record_at(a: &ExactArith, alpha: &FieldElement, max_iter: usize) -> Result<MatchingRecord> {
    detect_matching(&TransformParams::new(a.clone(), alpha.clone())?, max_iter)
}

/// Bisect between `inner` (record `rec`) and `outer` until they are at most
/// `width` apart. Returns the final `(inner, outer)` pair. `outer_rec` is the
/// record at `outer` if that is a sample; a midpoint matching neither side
/// reveals an interval skipped by the grid.
fn refine(
    a: &ExactArith,
    rec: &MatchingRecord,
    inner: &FieldElement,
    outer: &FieldElement,
    outer_rec: Option<&MatchingRecord>,
    width: &FieldElement,
    max_iter: usize,
) -> Result<(FieldElement, FieldElement, bool)> {
    let half = rat(1, 2);
    let mut inn = inner.clone();
    let mut out = outer.clone();
    let mut hidden = false;
    loop {
        let gap = &inn - &out;
        let gap = if gap.sign()? == Sign::Negative { -&gap } else { gap };
        if (&gap - width).sign()? != Sign::Positive {
            break;
        }
        let mid = (&inn + &out).scale(&half);
        let r = record_at(a, &mid, max_iter)?;
        if r.same_class(rec) {
            inn = mid;
        } else {
            hidden |= outer_rec.is_some_and(|o| !r.same_class(o) && (r.matched || o.matched));
            out = mid;
        }
    }
    Ok((inn, out, hidden))
}

/// Sample `grid` cell midpoints of `[lo, hi)`, group maximal runs of samples
/// sharing one matching record, and bracket each boundary by bisection.
pub fn scan_intervals(a: &ExactArith, cfg: &ScanConfig) -> Result<ScanResult> {
    if cfg.grid < 2 {
        return invalid("scan grid must have at least 2 cells");
    }
    let span = &cfg.hi - &cfg.lo;
    if span.sign()? != Sign::Positive || cfg.lo.sign()? == Sign::Negative || (&cfg.hi - &a.int(1)).sign()? == Sign::Positive {
        return invalid("scan range must satisfy 0 <= lo < hi <= 1");
    }
    let g = cfg.grid as i64;
    let cell = span.scale(&rat(1, g));
    let width = cell.scale(&crate::numberfield::Rational::new(1.into(), num_bigint::BigInt::from(1u64) << cfg.refine_bits as usize));
    let alphas: Vec<FieldElement> = (0..g).map(|i| &cfg.lo + &span.scale(&rat(2 * i + 1, 2 * g))).collect();
    let records: Vec<MatchingRecord> = alphas
        .par_iter()
        .map(|al| record_at(a, al, cfg.max_iter))
        .collect::<Result<_>>()?;

    // Runs of equal, matched records.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut residual = Vec::new();
    let mut i = 0;
    while i < records.len() {
        if !records[i].matched {
            residual.push(ResidualSample { alpha: alphas[i].to_f64(), cycle: records[i].cycle });
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < records.len() && records[j].same_class(&records[i]) {
            j += 1;
        }
        runs.push((i, j - 1));
        i = j;
    }

    let lo_rec = record_at(a, &cfg.lo, cfg.max_iter)?;
    let built: Vec<(MatchingInterval, usize)> = runs
        .par_iter()
        .map(|&(s, e)| -> Result<(MatchingInterval, usize)> {
            let rec = &records[s];
            let mut hidden = 0;
            let lo = if s == 0 && lo_rec.same_class(rec) {
                Bracket::point(&cfg.lo)
            } else {
                let (left, left_rec) = if s == 0 { (&cfg.lo, Some(&lo_rec)) } else { (&alphas[s - 1], Some(&records[s - 1])) };
                let (inn, out, h) = refine(a, rec, &alphas[s], left, left_rec, &width, cfg.max_iter)?;
                hidden += h as usize;
                Bracket { lo: out, hi: inn }
            };
            let (right, right_rec) = if e + 1 < alphas.len() { (&alphas[e + 1], Some(&records[e + 1])) } else { (&cfg.hi, None) };
            let (inn, out, h) = refine(a, rec, &alphas[e], right, right_rec, &width, cfg.max_iter)?;
            hidden += h as usize;
            let hi = Bracket { lo: inn, hi: out };
            let line = interval_line(rec, a)?;
            let csum = coefficient_sum(rec, a)?;
            Ok((MatchingInterval { lo, hi, samples: e - s + 1, record: rec.clone(), line, csum }, hidden))
        })
        .collect::<Result<_>>()?;

    let hidden_boundaries = built.iter().map(|(_, h)| h).sum::<usize>();
    let intervals: Vec<MatchingInterval> = built.into_iter().map(|(iv, _)| iv).collect();
    let residual_measure = residual.len() as f64 / cfg.grid as f64 * span.to_f64();
    Ok(ScanResult { intervals, residual, residual_measure, hidden_boundaries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// The three signs that the monotonicity law ties together on one interval.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub by_delta: Sign,
    pub by_csum: Sign,
    /// Sign of `(M(alpha_2) - M(alpha_1)) / (alpha_2 - alpha_1)` with both
    /// values from independent exact density series at two points inside the interval.
    pub by_fit: Sign,
    pub verdict: Monotonicity,
    pub consistent: bool,
}

/// A point of the interval other than its single sample. Steps from the
/// sample toward either outer bracket end start near `beta^-time`, the
/// expected interval width, and halve from there.
fn second_point(a: &ExactArith, interval: &MatchingInterval) -> Result<Option<FieldElement>> {
    let x = &interval.lo.hi;
    let time = interval.record.time.unwrap_or(0);
    let max_iter = 4 * time + 64;
    let half = rat(1, 2);
    let target = time as f64 * a.beta_f64().log2() + 4.0;
    for end in [&interval.hi.hi, &interval.lo.lo] {
        let mut step = end - x;
        let start = (target + step.to_f64().abs().log2()).max(0.0) as usize;
        step = step.scale(&crate::numberfield::Rational::new(1.into(), num_bigint::BigInt::from(1u64) << start));
        for _ in 0..64 {
            let y = x + &step;
            if record_at(a, &y, max_iter)?.same_class(&interval.record) {
                return Ok(Some(y));
            }
            step = step.scale(&half);
        }
    }
    Ok(None)
}

/// Classify by the sign of the last nonzero delta and cross-check against
/// `C^k` and a slope fitted from two exact series evaluations.
pub fn classify_monotonicity(a: &ExactArith, interval: &MatchingInterval) -> Result<MonotonicityReport> {
    let by_delta = interval.record.delta_k_sign;
    let by_csum = interval.csum.sign()?;
    let x1 = interval.lo.hi.clone();
    let mut x2 = interval.hi.lo.clone();
    if x1 == x2 {
        x2 = match second_point(a, interval)? {
            Some(x) => x,
            None => x1.clone(),
        };
    }
    let by_fit = if x1 == x2 {
        Sign::Zero
    } else {
        // Both series end where the orbits meet, so both values are exact.
        let time = interval.record.time.ok_or(crate::error::Error::Unmatched)?;
        let m1 = crate::mvalue::m_matched(&TransformParams::new(a.clone(), x1.clone())?, time)?;
        let m2 = crate::mvalue::m_matched(&TransformParams::new(a.clone(), x2.clone())?, time)?;
        let num = (&m2.value - &m1.value).sign()?;
        let den = (&x2 - &x1).sign()?;
        if den == Sign::Negative { num.flip() } else { num }
    };
    let verdict = if by_delta == Sign::Positive { Monotonicity::Increasing } else { Monotonicity::Decreasing };
    let consistent = by_delta == by_csum && by_csum == by_fit;
    Ok(MonotonicityReport { by_delta, by_csum, by_fit, verdict, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::regime_boundary;

    #[test]
    fn golden_low_regime_is_one_interval() {
        let a = ExactArith::new(1, 2).unwrap();
        let cfg = ScanConfig::new(a.int(0), regime_boundary(&a), 64, 10);
        let r = scan_intervals(&a, &cfg).unwrap();
        assert_eq!(r.intervals.len(), 1);
        let iv = &r.intervals[0];
        assert_eq!(iv.record.time, Some(2));
        assert_eq!(iv.record.prefix0, vec![0, 0]);
        assert_eq!(iv.record.prefix1, vec![1, 1]);
        assert_eq!(iv.lo, Bracket::point(&a.int(0)));
        assert!(r.residual.is_empty());
        // The right end converges on 2 - phi.
        assert!((iv.hi.mid_f64() - (2.0 - a.beta_f64())).abs() < 1e-4);
    }

    #[test]
    fn golden_high_regime_monotonicity() {
        let a = ExactArith::new(1, 2).unwrap();
        let cfg = ScanConfig::new(regime_boundary(&a), a.int(1), 64, 1000);
        let r = scan_intervals(&a, &cfg).unwrap();
        assert!(r.intervals.len() > 3);
        let mut saw_time4 = false;
        for iv in &r.intervals {
            let rep = classify_monotonicity(&a, iv).unwrap();
            assert!(rep.consistent, "{:?} {:?}", iv.record, rep);
            let t = iv.record.time.unwrap();
            assert!(t >= 3);
            if t == 3 {
                assert_eq!(rep.verdict, Monotonicity::Decreasing);
            }
            if t == 4 {
                saw_time4 = true;
                assert_eq!(rep.verdict, Monotonicity::Increasing);
            }
        }
        assert!(saw_time4);
    }
}
