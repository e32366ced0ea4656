use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::arith::{Arithmetic, ExactArith};
use crate::dynamics::{Cycle, Regime, RunOptions, TransformParams};
use crate::error::{invalid, Error, Result};
use crate::numberfield::{int, FieldElement, Sign};

/// `delta = sign * (e_1/beta + ... + e_m/beta^m)` with every `e_j` in `{0, q}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DeltaWord {
    pub sign: Sign,
    pub e: Vec<u32>,
}

/// At most this many distinct nonzero words occur for `beta_{q,m}`.
pub fn word_cardinality_bound(m: usize) -> usize {
    (1usize << (m + 1)) - 3
}

impl DeltaWord {
    pub fn zero(m: usize) -> Self {
        DeltaWord { sign: Sign::Zero, e: vec![0; m] }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Read the word off the coordinates of `delta * beta^m`, which are
    /// exactly `e_m, ..., e_1` (times the sign) in the power basis.
    pub fn from_delta(delta: &FieldElement, step: usize) -> Result<Self> {
        let field = delta.field();
        let (q, m) = (field.q(), field.m());
        if delta.is_zero() {
            return Ok(DeltaWord::zero(m));
        }
        let mut scaled = delta.clone();
        for _ in 0..m {
            scaled = scaled.mul_beta();
        }
        let qq = int(q as i64);
        let mut sign = Sign::Zero;
        let mut e = vec![0u32; m];
        for (i, c) in scaled.coeffs().iter().enumerate() {
            let s = if *c == qq {
                Sign::Positive
            } else if *c == -&qq {
                Sign::Negative
            } else if num_traits::Zero::is_zero(c) {
                continue;
            } else {
                return Err(Error::Decomposition { step, reason: format!("coordinate {c} of delta*beta^m is not 0 or +-{q}") });
            };
            if sign != Sign::Zero && s != sign {
                return Err(Error::Decomposition { step, reason: "mixed signs".into() });
            }
            sign = s;
            e[m - 1 - i] = q;
        }
        if e.iter().all(|&x| x == q) {
            return Err(Error::Decomposition { step, reason: "forbidden word (q,...,q)".into() });
        }
        Ok(DeltaWord { sign, e })
    }

    /// `sign * sum e_j / beta^j`, evaluated independently of `from_delta`.
    pub fn value(&self, field: &std::sync::Arc<crate::numberfield::MultinacciField>) -> FieldElement {
        let mut acc = FieldElement::zero(field);
        for &ej in self.e.iter().rev() {
            acc = acc.add_rational(&int(ej as i64)).div_beta();
        }
        match self.sign {
            Sign::Negative => -&acc,
            Sign::Zero => FieldElement::zero(field),
            Sign::Positive => acc,
        }
    }

    /// The successor predicted by the evolution rules, given the branch shift
    /// `b_{k+1} - a_{k+1}` between the orbit of 1 and the orbit of 0.
    /// `None` when the shift is not one of the allowed cases.
    pub fn successor(&self, q: u32, shift: i64) -> Option<DeltaWord> {
        if self.is_zero() {
            return (shift == 0).then(|| self.clone());
        }
        let s = self.sign.as_i8() as i64;
        let q64 = q as i64;
        let m = self.e.len();
        let keep = || {
            let mut e: Vec<u32> = self.e[1..].to_vec();
            e.push(0);
            let sign = if e.iter().all(|&x| x == 0) { Sign::Zero } else { self.sign };
            DeltaWord { sign, e }
        };
        let flip = || {
            let mut e: Vec<u32> = self.e[1..].iter().map(|&x| q - x).collect();
            e.push(q);
            DeltaWord { sign: self.sign.flip(), e }
        };
        debug_assert_eq!(m, self.e.len());
        if self.e[0] == 0 {
            if shift == 0 {
                Some(keep())
            } else if shift == s {
                Some(flip())
            } else {
                None
            }
        } else if shift == s * q64 {
            Some(keep())
        } else if shift == s * (q64 + 1) {
            Some(flip())
        } else {
            None
        }
    }
}

impl fmt::Display for DeltaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        write!(f, "{}(", self.sign)?;
        for (i, e) in self.e.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordTrack {
    /// `words[k-1]` encodes `delta^k`; the last word is zero iff matched.
    pub words: Vec<DeltaWord>,
    /// `deltas[k-1] = T^k(1) - T^k(0)`.
    pub deltas: Vec<FieldElement>,
    pub digits0: Vec<i64>,
    pub digits1: Vec<i64>,
    pub matched_at: Option<usize>,
    pub cycle: Option<Cycle>,
    /// Indices `k` where `words[k]` does not follow from `words[k-1]` by the rules.
    pub transition_violations: Vec<usize>,
}

impl WordTrack {
    pub fn distinct_nonzero(&self) -> HashSet<DeltaWord> {
        self.words.iter().filter(|w| !w.is_zero()).cloned().collect()
    }
}

/// Decompose every `delta^k` up to matching (or `horizon`) into its word and
/// check each transition against the evolution rules. High regime only.
pub fn delta_word_track(p: &TransformParams<ExactArith>, horizon: usize) -> Result<WordTrack> {
    if p.regime() != Regime::High {
        return invalid("delta-word evolution is tracked for alpha in [1 - <beta>, 1) only");
    }
    let a = p.arith();
    let q = a.q();
    let run = a.critical_run(
        p.alpha(),
        horizon,
        RunOptions { keep_orbits: true, detect_cycles: true, ..RunOptions::default() },
    )?;
    let n = run.steps();
    let mut words = Vec::with_capacity(n);
    let mut deltas = Vec::with_capacity(n);
    for k in 1..=n {
        let d = a.sub(&run.orbit1[k], &run.orbit0[k]);
        words.push(DeltaWord::from_delta(&d, k)?);
        deltas.push(d);
    }
    let mut transition_violations = Vec::new();
    for k in 1..n {
        let shift = run.digits1[k] - run.digits0[k];
        if words[k - 1].successor(q, shift).as_ref() != Some(&words[k]) {
            transition_violations.push(k);
        }
    }
    Ok(WordTrack {
        words,
        deltas,
        digits0: run.digits0,
        digits1: run.digits1,
        matched_at: run.matched_at,
        cycle: run.cycle,
        transition_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::rat;

    fn track(q: u32, m: usize, alpha: FieldElement, h: usize) -> WordTrack {
        let a = ExactArith::new(q, m).unwrap();
        delta_word_track(&TransformParams::new(a, alpha).unwrap(), h).unwrap()
    }

    #[test]
    fn golden_half_words() {
        let a = ExactArith::new(1, 2).unwrap();
        let t = track(1, 2, a.rational(&rat(1, 2)), 10);
        let shown: Vec<String> = t.words.iter().map(|w| w.to_string()).collect();
        assert_eq!(shown, vec!["-(0,1)", "+(0,1)", "+(1,0)", "0"]);
        assert!(t.transition_violations.is_empty());
        for (w, d) in t.words.iter().zip(&t.deltas) {
            assert_eq!(&w.value(a.field()), d);
        }
    }

    #[test]
    fn first_word_in_high_regime() {
        for (q, m) in [(1, 3), (2, 2), (2, 3), (3, 4)] {
            let a = ExactArith::new(q, m).unwrap();
            let lo = crate::dynamics::regime_boundary(&a);
            let alpha = a.add(&lo, &a.rational(&rat(1, 1000)));
            let t = track(q, m, alpha, 1);
            let mut e = vec![0; m];
            e[m - 1] = q;
            assert_eq!(t.words[0], DeltaWord { sign: Sign::Negative, e });
        }
    }

    #[test]
    fn rejects_low_regime() {
        let a = ExactArith::new(1, 2).unwrap();
        let p = TransformParams::new(a.clone(), a.rational(&rat(1, 10))).unwrap();
        assert!(delta_word_track(&p, 10).is_err());
    }

    #[test]
    fn decomposition_failure_is_loud() {
        let a = ExactArith::new(1, 2).unwrap();
        let bad = a.rational(&rat(1, 3));
        assert!(matches!(DeltaWord::from_delta(&bad, 7), Err(Error::Decomposition { step: 7, .. })));
    }

    #[test]
    fn successor_rules() {
        let w = DeltaWord { sign: Sign::Negative, e: vec![0, 1] };
        assert_eq!(w.successor(1, 0), Some(DeltaWord { sign: Sign::Negative, e: vec![1, 0] }));
        assert_eq!(w.successor(1, -1), Some(DeltaWord { sign: Sign::Positive, e: vec![0, 1] }));
        assert_eq!(w.successor(1, 1), None);
        let w = DeltaWord { sign: Sign::Positive, e: vec![2, 0, 2] };
        assert_eq!(w.successor(2, 2), Some(DeltaWord { sign: Sign::Positive, e: vec![0, 2, 0] }));
        assert_eq!(w.successor(2, 3), Some(DeltaWord { sign: Sign::Negative, e: vec![2, 0, 2] }));
        assert_eq!(word_cardinality_bound(2), 5);
        assert_eq!(word_cardinality_bound(3), 13);
    }
}
