use num_traits::{One, Signed, Zero};

use super::{int, Rational};
use crate::error::{invalid, Result};

/// `P_{q,m}(x) = x^m - q x^{m-1} - ... - q x - q`, evaluated exactly.
pub fn multinacci_poly_at(q: u32, m: usize, x: &Rational) -> Rational {
    // Horner on the coefficient list (1, -q, ..., -q).
    let qq = int(q as i64);
    let mut acc = Rational::one();
    for _ in 0..m {
        acc = &acc * x - &qq;
    }
    acc
}

/// Rational bracket `[lo, hi]` around `beta_{q,m}` with `P(lo) < 0 < P(hi)`.
///
/// Refinement never mutates: each halving returns a new enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootEnclosure {
    q: u32,
    m: usize,
    lo: Rational,
    hi: Rational,
}

impl RootEnclosure {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    /// One sign-preserving bisection step.
    pub fn halve(&self) -> RootEnclosure {
        let mid = self.midpoint();
        let p = multinacci_poly_at(self.q, self.m, &mid);
        if p.is_zero() {
            // Unreachable for an irrational root; keep a valid bracket anyway.
            let eps = self.width() / int(4);
            return RootEnclosure { q: self.q, m: self.m, lo: &mid - &eps, hi: &mid + eps };
        }
        if p.is_negative() {
            RootEnclosure { q: self.q, m: self.m, lo: mid, hi: self.hi.clone() }
        } else {
            RootEnclosure { q: self.q, m: self.m, lo: self.lo.clone(), hi: mid }
        }
    }

    /// Halve until the width is at most `width`.
    pub fn refined_to(&self, width: &Rational) -> RootEnclosure {
        let mut e = self.clone();
        while e.width() > *width {
            e = e.halve();
        }
        e
    }

    /// True iff the polynomial changes sign across the bracket.
    pub fn brackets_root(&self) -> bool {
        multinacci_poly_at(self.q, self.m, &self.lo).is_negative()
            && multinacci_poly_at(self.q, self.m, &self.hi).is_positive()
    }
}

/// Enclose `beta_{q,m}` to within `width` by bisection of `P_{q,m}` on `(q, q+1)`.
pub fn isolate_root(q: u32, m: usize, width: &Rational) -> Result<RootEnclosure> {
    if q == 0 || m < 2 {
        return invalid(format!("root isolation needs q >= 1 and m >= 2, got ({q}, {m})"));
    }
    if !width.is_positive() {
        return invalid("enclosure width must be positive");
    }
    // P(q) = -q(q^{m-1} + ... + 1) + q^m < 0 and P(q+1) = 1 > 0.
    let start = RootEnclosure { q, m, lo: int(q as i64), hi: int(q as i64 + 1) };
    debug_assert!(start.brackets_root());
    Ok(start.refined_to(width))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::rat;
    use num_traits::ToPrimitive;

    fn contains(e: &RootEnclosure, x: f64) -> bool {
        e.lo().to_f64().unwrap() <= x && x <= e.hi().to_f64().unwrap()
    }

    #[test]
    fn golden_mean() {
        let e = isolate_root(1, 2, &rat(1, 1_000_000)).unwrap();
        assert!(e.width() <= rat(1, 1_000_000));
        assert!(contains(&e, 1.618_033_988_749_895));
    }

    #[test]
    fn tribonacci() {
        let e = isolate_root(1, 3, &rat(1, 1_000_000)).unwrap();
        assert!(contains(&e, 1.839_286_755_214_161));
    }

    #[test]
    fn q3_m2_inside_unit_bracket() {
        let e = isolate_root(3, 2, &rat(1, 1_000_000)).unwrap();
        assert!(*e.lo() > int(3) && *e.hi() < int(4));
        assert!(e.brackets_root());
    }

    #[test]
    fn halving_shrinks_and_keeps_root() {
        let mut e = isolate_root(2, 5, &rat(1, 10)).unwrap();
        for _ in 0..40 {
            let next = e.halve();
            assert!(next.width() < e.width());
            assert!(next.brackets_root());
            e = next;
        }
    }

    #[test]
    fn rejects_bad_width() {
        assert!(isolate_root(1, 2, &int(0)).is_err());
    }
}
