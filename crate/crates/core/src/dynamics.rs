//! The maps `T_{beta,alpha}(x) = beta x + alpha - floor(beta x + alpha)` and
//! the left-continuous variant `T~(x) = beta x + alpha - ceil(beta x + alpha) + 1`,
//! their orbits, digit expansions and critical-orbit differences.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::arith::{Arithmetic, ExactArith, FloatArith};
use crate::error::{invalid, Error, Result};
use crate::numberfield::Sign;

/// A base `beta > 1`: exact multinacci `beta_{q,m}` or a plain float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSpec {
    Multinacci { q: u32, m: usize },
    Float { value: f64 },
}

impl BetaSpec {
    pub fn multinacci(q: u32, m: usize) -> Result<Self> {
        if q == 0 || m < 2 {
            return invalid(format!("multinacci base needs q >= 1 and m >= 2, got ({q}, {m})"));
        }
        Ok(BetaSpec::Multinacci { q, m })
    }

    pub fn float(value: f64) -> Result<Self> {
        if !(value > 1.0) || !value.is_finite() {
            return invalid(format!("beta must be a finite number > 1, got {value}"));
        }
        Ok(BetaSpec::Float { value })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, BetaSpec::Multinacci { .. })
    }

    pub fn value_f64(&self) -> f64 {
        match *self {
            BetaSpec::Multinacci { q, m } => crate::numberfield::MultinacciField::new(q, m)
                .map(|f| f.beta_f64())
                .unwrap_or(f64::NAN),
            BetaSpec::Float { value } => value,
        }
    }

    pub fn floor(&self) -> i64 {
        match *self {
            BetaSpec::Multinacci { q, .. } => q as i64,
            BetaSpec::Float { value } => value.floor() as i64,
        }
    }

    pub fn fract_f64(&self) -> f64 {
        self.value_f64() - self.floor() as f64
    }

    pub fn exact_arith(&self) -> Result<ExactArith> {
        match *self {
            BetaSpec::Multinacci { q, m } => ExactArith::new(q, m),
            BetaSpec::Float { .. } => invalid("a float base has no exact backend"),
        }
    }

    pub fn float_arith(&self) -> Result<FloatArith<f64>> {
        FloatArith::new(self.value_f64())
    }
}

impl fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSpec::Multinacci { q, m } => write!(f, "mult:{q},{m}"),
            BetaSpec::Float { value } => write!(f, "float:{value}"),
        }
    }
}

/// `mult:Q,M`, `float:VALUE` or `int:N` (an integer base, evaluated in float mode).
impl FromStr for BetaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("beta spec '{s}' must look like mult:Q,M, float:V or int:N")))?;
        let bad = || Error::InvalidParameter(format!("malformed beta spec '{s}'"));
        match kind {
            "mult" => {
                let (q, m) = body.split_once(',').ok_or_else(bad)?;
                let q: u32 = q.trim().parse().map_err(|_| bad())?;
                let m: usize = m.trim().parse().map_err(|_| bad())?;
                BetaSpec::multinacci(q, m)
            }
            "float" => BetaSpec::float(body.trim().parse().map_err(|_| bad())?),
            "int" => {
                let n: u32 = body.trim().parse().map_err(|_| bad())?;
                if n < 2 {
                    return invalid("integer base must be >= 2");
                }
                BetaSpec::float(n as f64)
            }
            _ => Err(bad()),
        }
    }
}

/// `Low`: `alpha in [0, 1 - <beta>)`, `floor(beta) + 1` branches.
/// `High`: `alpha in [1 - <beta>, 1)`, `floor(beta) + 2` branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Standard,
    Tilde,
}

/// A map `T_{beta,alpha}` on a given backend.
#[derive(Debug, Clone)]
pub struct TransformParams<A: Arithmetic> {
    arith: A,
    alpha: A::Elem,
    regime: Regime,
}

impl<A: Arithmetic> TransformParams<A> {
    pub fn new(arith: A, alpha: A::Elem) -> Result<Self> {
        if arith.sign(&alpha)? == Sign::Negative || !arith.less(&alpha, &arith.int(1))? {
            return invalid(format!("alpha must lie in [0, 1), got {}", arith.to_f64(&alpha)));
        }
        let regime = regime_of(&arith, &alpha)?;
        Ok(TransformParams { arith, alpha, regime })
    }

    pub fn arith(&self) -> &A {
        &self.arith
    }

    pub fn alpha(&self) -> &A::Elem {
        &self.alpha
    }

    pub fn alpha_f64(&self) -> f64 {
        self.arith.to_f64(&self.alpha)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn with_alpha(&self, alpha: A::Elem) -> Result<Self> {
        Self::new(self.arith.clone(), alpha)
    }

    /// Largest digit, `floor(beta + alpha)`.
    pub fn max_digit(&self) -> Result<i64> {
        Ok(self.arith.floor(&self.arith.add(&self.arith.beta(), &self.alpha))?.value)
    }
}

/// `1 - <beta>`, the boundary between the two regimes.
pub fn regime_boundary<A: Arithmetic>(arith: &A) -> A::Elem {
    arith.sub(&arith.int(arith.beta_floor() + 1), &arith.beta())
}

fn regime_of<A: Arithmetic>(arith: &A, alpha: &A::Elem) -> Result<Regime> {
    Ok(if arith.less(alpha, &regime_boundary(arith))? { Regime::Low } else { Regime::High })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step<E> {
    pub value: E,
    pub digit: i64,
    /// Float backends only: the branch decision was within epsilon of a boundary.
    pub ambiguous: bool,
}

/// One application of `T_{beta,alpha}`. The digit is `floor(beta x + alpha)`,
/// so every branch interval is closed on the left and open on the right.
pub fn step_t<A: Arithmetic>(p: &TransformParams<A>, x: &A::Elem) -> Result<Step<A::Elem>> {
    step_with(&p.arith, &p.alpha, x, Variant::Standard)
}

/// One application of the left-continuous map `T~`. At `beta x + alpha = 0`
/// (only possible for `alpha = 0`, `x = 0`) the digit is clamped to 0.
pub fn step_t_tilde<A: Arithmetic>(p: &TransformParams<A>, x: &A::Elem) -> Result<Step<A::Elem>> {
    step_with(&p.arith, &p.alpha, x, Variant::Tilde)
}

pub(crate) fn step_with<A: Arithmetic + ?Sized>(
    a: &A,
    alpha: &A::Elem,
    x: &A::Elem,
    variant: Variant,
) -> Result<Step<A::Elem>> {
    let y = a.add(&a.mul_beta(x), alpha);
    let (digit, ambiguous) = match variant {
        Variant::Standard => {
            let f = a.floor(&y)?;
            (f.value, f.ambiguous)
        }
        Variant::Tilde => {
            let c = a.ceil(&y)?;
            ((c.value - 1).max(0), c.ambiguous)
        }
    };
    let value = a.sub(&y, &a.int(digit));
    Ok(Step { value, digit, ambiguous })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitStep<E> {
    pub n: usize,
    pub value: E,
    pub digit: i64,
    pub ambiguous: bool,
}

/// `T^1(x0), ..., T^n(x0)` with the digit emitted at each step.
pub fn orbit<A: Arithmetic>(
    p: &TransformParams<A>,
    x0: &A::Elem,
    n: usize,
    variant: Variant,
) -> Result<Vec<OrbitStep<A::Elem>>> {
    check_unit(&p.arith, x0)?;
    let mut out = Vec::with_capacity(n);
    let mut x = x0.clone();
    for i in 1..=n {
        let s = step_with(&p.arith, &p.alpha, &x, variant)?;
        x = s.value.clone();
        out.push(OrbitStep { n: i, value: s.value, digit: s.digit, ambiguous: s.ambiguous });
    }
    Ok(out)
}

fn check_unit<A: Arithmetic>(a: &A, x: &A::Elem) -> Result<()> {
    if a.sign(x)? == Sign::Negative || a.less(&a.int(1), x)? {
        return invalid(format!("x must lie in [0, 1], got {}", a.to_f64(x)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion<E> {
    pub digits: Vec<i64>,
    /// `x - sum_{i<=n} (c_i - alpha) / beta^i`, accumulated independently of the orbit.
    pub residual: E,
    /// `T^n(x) / beta^n`; equals `residual` exactly on exact backends.
    pub tail: E,
    pub ambiguous: bool,
}

/// First `n` digits of the intermediate expansion `x = sum (c_i - alpha)/beta^i`.
pub fn expand<A: Arithmetic>(p: &TransformParams<A>, x: &A::Elem, n: usize) -> Result<Expansion<A::Elem>> {
    let a = &p.arith;
    let steps = orbit(p, x, n, Variant::Standard)?;
    let mut residual = x.clone();
    let mut scale = a.int(1);
    let mut ambiguous = false;
    let mut digits = Vec::with_capacity(n);
    for s in &steps {
        scale = a.div_beta(&scale);
        residual = a.sub(&residual, &a.mul(&a.sub(&a.int(s.digit), &p.alpha), &scale));
        digits.push(s.digit);
        ambiguous |= s.ambiguous;
    }
    let last = steps.last().map(|s| s.value.clone()).unwrap_or_else(|| x.clone());
    let tail = a.mul(&last, &scale);
    Ok(Expansion { digits, residual, tail, ambiguous })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSequence<E> {
    /// `entries[k-1] = T^k(1) - T^k(0)`.
    pub entries: Vec<E>,
    /// 1-based index of the first zero entry.
    pub first_zero: Option<usize>,
    /// Set on float backends, where zero means `|delta| <= match_epsilon`.
    pub approximate: bool,
}

/// `delta^k = T^k(1) - T^k(0)` for `1 <= k <= n`; entries after the first zero are zero.
pub fn delta_sequence<A: Arithmetic>(p: &TransformParams<A>, n: usize) -> Result<DeltaSequence<A::Elem>> {
    let a = &p.arith;
    let run = a.critical_run(&p.alpha, n, RunOptions { keep_orbits: true, ..RunOptions::default() })?;
    let mut entries: Vec<A::Elem> = (1..run.orbit0.len()).map(|k| a.sub(&run.orbit1[k], &run.orbit0[k])).collect();
    if let Some(k) = run.matched_at {
        entries[k - 1] = a.int(0);
    }
    while entries.len() < n {
        entries.push(a.int(0));
    }
    Ok(DeltaSequence { entries, first_zero: run.matched_at, approximate: !a.is_exact() })
}

/// Largest `i <= horizon` such that the length-`i` digit prefixes of the orbits
/// of 0 and of 1 agree between the two parameters.
pub fn prefix_agreement<A: Arithmetic>(p1: &TransformParams<A>, p2: &TransformParams<A>, horizon: usize) -> Result<usize> {
    let opts = RunOptions { stop_at_match: false, ..RunOptions::default() };
    let r1 = p1.arith.critical_run(&p1.alpha, horizon, opts)?;
    let r2 = p2.arith.critical_run(&p2.alpha, horizon, opts)?;
    let n = (0..horizon)
        .take_while(|&i| r1.digits0[i] == r2.digits0[i] && r1.digits1[i] == r2.digits1[i])
        .count();
    Ok(n)
}

/// `alpha* = 1 - <beta + alpha>`, reduced mod 1. Then
/// `1 - T_{beta,alpha}(x) = T_{beta,alpha*}(1 - x)` off a finite set.
pub fn symmetric_partner<A: Arithmetic>(p: &TransformParams<A>) -> Result<A::Elem> {
    let a = &p.arith;
    let frac = a.fract(&a.add(&a.beta(), &p.alpha))?;
    a.fract(&a.sub(&a.int(1), &frac))
}

/// `1 - <beta - alpha>` reduced mod 1. Not the conjugacy partner (that is
/// `symmetric_partner`); kept for diagnostics only.
pub fn shifted_partner<A: Arithmetic>(p: &TransformParams<A>) -> Result<A::Elem> {
    let a = &p.arith;
    let frac = a.fract(&a.sub(&a.beta(), &p.alpha))?;
    a.fract(&a.sub(&a.int(1), &frac))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep `T^k(0)` and `T^k(1)` for `k = 0..=steps`.
    pub keep_orbits: bool,
    pub stop_at_match: bool,
    /// Exact backends: stop with a certificate when the orbit pair repeats.
    pub detect_cycles: bool,
    pub variant: Variant,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { keep_orbits: false, stop_at_match: true, detect_cycles: false, variant: Variant::Standard }
    }
}

/// The pair `(T^k(0), T^k(1))` first repeats at `start + period` after
/// occurring at `start`, with no matching before: the orbits never match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cycle {
    pub start: usize,
    pub period: usize,
}

/// Joint run of both critical orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRun<E> {
    /// `digits0[i] = a_{i+1}`, the digits of the orbit of 0.
    pub digits0: Vec<i64>,
    /// `digits1[i] = b_{i+1}`, the digits of the orbit of 1.
    pub digits1: Vec<i64>,
    /// First `k >= 1` with `T^k(0) = T^k(1)`.
    pub matched_at: Option<usize>,
    pub cycle: Option<Cycle>,
    /// Sign of the last nonzero `delta^k` seen.
    pub last_delta_sign: Sign,
    pub orbit0: Vec<E>,
    pub orbit1: Vec<E>,
    pub ambiguous: bool,
}

impl<E> CriticalRun<E> {
    pub fn steps(&self) -> usize {
        self.digits0.len()
    }
}

/// Reference implementation of [`Arithmetic::critical_run`] on top of the
/// backend's own operations. No cycle detection.
pub fn critical_run_generic<A: Arithmetic + ?Sized>(
    a: &A,
    alpha: &A::Elem,
    max_iter: usize,
    opts: RunOptions,
) -> Result<CriticalRun<A::Elem>> {
    let mut x0 = a.int(0);
    let mut x1 = a.int(1);
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
        run.orbit0.push(x0.clone());
        run.orbit1.push(x1.clone());
    }
    for k in 1..=max_iter {
        let s0 = step_with(a, alpha, &x0, opts.variant)?;
        let s1 = step_with(a, alpha, &x1, opts.variant)?;
        run.digits0.push(s0.digit);
        run.digits1.push(s1.digit);
        run.ambiguous |= s0.ambiguous | s1.ambiguous;
        x0 = s0.value;
        x1 = s1.value;
        if opts.keep_orbits {
            run.orbit0.push(x0.clone());
            run.orbit1.push(x1.clone());
        }
        let d = a.sub(&x1, &x0);
        if run.matched_at.is_none() {
            if a.is_zero(&d) {
                run.matched_at = Some(k);
                if opts.stop_at_match {
                    break;
                }
            } else {
                run.last_delta_sign = a.sign(&d)?;
            }
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::{int, rat};

    fn golden(alpha: crate::numberfield::Rational) -> TransformParams<ExactArith> {
        let a = ExactArith::new(1, 2).unwrap();
        let al = a.rational(&alpha);
        TransformParams::new(a, al).unwrap()
    }

    fn f(a: &ExactArith, x: &crate::numberfield::FieldElement) -> f64 {
        a.to_f64(x)
    }

    #[test]
    fn beta_spec_grammar() {
        assert_eq!("mult:1,2".parse::<BetaSpec>().unwrap(), BetaSpec::Multinacci { q: 1, m: 2 });
        assert_eq!("float:1.9".parse::<BetaSpec>().unwrap(), BetaSpec::Float { value: 1.9 });
        assert_eq!("int:3".parse::<BetaSpec>().unwrap(), BetaSpec::Float { value: 3.0 });
        for bad in ["mult:0,2", "mult:1", "float:0.5", "int:1", "exact:2", "float:x"] {
            assert!(bad.parse::<BetaSpec>().is_err(), "{bad}");
        }
        assert_eq!(BetaSpec::Multinacci { q: 2, m: 4 }.to_string(), "mult:2,4");
    }

    #[test]
    fn golden_steps() {
        let p = golden(int(0));
        let a = p.arith().clone();
        let s = step_t(&p, &a.int(1)).unwrap();
        assert_eq!(s.digit, 1);
        assert_eq!(s.value, a.sub(&a.beta(), &a.int(1)));

        let p = golden(rat(1, 2));
        let s = step_t(&p, &a.int(1)).unwrap();
        assert_eq!(s.digit, 2);
        assert_eq!(s.value, a.sub(&a.beta(), &a.rational(&rat(3, 2))));
        let s = step_t(&p, &a.int(0)).unwrap();
        assert_eq!((s.digit, s.value), (0, a.rational(&rat(1, 2))));
    }

    #[test]
    fn tilde_endpoint_goes_to_one() {
        let p = golden(rat(1, 2));
        let a = p.arith().clone();
        let x = a.div_beta(&a.rational(&rat(1, 2)));
        let s = step_t_tilde(&p, &x).unwrap();
        assert_eq!((s.digit, s.value), (0, a.int(1)));
        let s = step_t(&p, &x).unwrap();
        assert_eq!((s.digit, s.value), (1, a.int(0)));
        let s = step_t_tilde(&p, &a.int(1)).unwrap();
        assert_eq!(s.digit, 2);
    }

    #[test]
    fn golden_orbits() {
        let p = golden(int(0));
        let a = p.arith().clone();
        let o = orbit(&p, &a.int(1), 3, Variant::Standard).unwrap();
        assert_eq!(o.iter().map(|s| s.digit).collect::<Vec<_>>(), vec![1, 1, 0]);
        assert_eq!(o[1].value, a.int(0));

        let p = golden(rat(1, 2));
        let o = orbit(&p, &a.int(1), 4, Variant::Standard).unwrap();
        let v: Vec<f64> = o.iter().map(|s| f(&a, &s.value)).collect();
        let want = [0.118_033_988_7, 0.690_983_005_6, 0.618_033_988_7, 0.5];
        for (x, w) in v.iter().zip(want) {
            assert!((x - w).abs() < 1e-9, "{v:?}");
        }
        assert_eq!(o[3].value, a.rational(&rat(1, 2)));
    }

    #[test]
    fn expansion_examples() {
        let p = golden(int(0));
        let a = p.arith().clone();
        let e = expand(&p, &a.int(1), 3).unwrap();
        assert_eq!(e.digits, vec![1, 1, 0]);
        assert!(e.residual.is_zero());

        let p = golden(rat(1, 2));
        let e = expand(&p, &a.int(0), 1).unwrap();
        assert_eq!(e.digits, vec![0]);
        assert_eq!(e.residual, a.div_beta(&a.rational(&rat(1, 2))));
        assert_eq!(e.residual, e.tail);

        let b = FloatArith::new(2.0).unwrap();
        let p = TransformParams::new(b, 0.0).unwrap();
        let e = expand(&p, &0.625, 3).unwrap();
        assert_eq!(e.digits, vec![1, 0, 1]);
        assert_eq!(e.residual, 0.0);
    }

    #[test]
    fn delta_examples() {
        let p = golden(rat(1, 10));
        let a = p.arith().clone();
        let d = delta_sequence(&p, 2).unwrap();
        assert_eq!(d.entries, vec![a.sub(&a.beta(), &a.int(1)), a.int(0)]);
        assert_eq!(d.first_zero, Some(2));

        let p = golden(rat(1, 2));
        let d = delta_sequence(&p, 4).unwrap();
        let binv = a.div_beta(&a.int(1));
        let binv2 = a.div_beta(&binv);
        assert_eq!(d.entries, vec![a.neg(&binv2), binv2.clone(), binv, a.int(0)]);
        assert_eq!(d.first_zero, Some(4));
        assert!(!d.approximate);
    }

    #[test]
    fn first_delta_in_high_regime() {
        for (q, m) in [(1, 2), (2, 3), (3, 4)] {
            let a = ExactArith::new(q, m).unwrap();
            let lo = regime_boundary(&a);
            for t in [rat(0, 1), rat(1, 3), rat(9, 10)] {
                // alpha = lo + t (1 - lo)
                let alpha = a.add(&lo, &a.mul(&a.rational(&t), &a.sub(&a.int(1), &lo)));
                let p = TransformParams::new(a.clone(), alpha).unwrap();
                assert_eq!(p.regime(), Regime::High);
                let d = delta_sequence(&p, 1).unwrap();
                let want = a.neg(&a.mul_int(&a.beta_pow_recip(m as u32), q as i64));
                assert_eq!(d.entries[0], want);
            }
        }
    }

    #[test]
    fn partners() {
        let p = golden(int(0));
        let a = p.arith().clone();
        assert_eq!(symmetric_partner(&p).unwrap(), a.sub(&a.int(2), &a.beta()));
        // <beta - 0> = <beta> as well, so both readings agree at alpha = 0.
        assert_eq!(shifted_partner(&p).unwrap(), a.sub(&a.int(2), &a.beta()));
        let p = golden(rat(1, 10));
        assert_ne!(symmetric_partner(&p).unwrap(), shifted_partner(&p).unwrap());
    }

    #[test]
    fn prefix_agreement_examples() {
        let p1 = golden(rat(1, 10));
        let p2 = golden(rat(3, 10));
        assert!(prefix_agreement(&p1, &p2, 50).unwrap() >= 1);
        let p3 = golden(rat(1, 10) + rat(1, 1_000_000));
        let n = prefix_agreement(&p1, &p3, 200).unwrap();
        let phi = p1.arith().beta_f64();
        assert!(n as f64 <= (1.0 + (phi - 1.0) / 1e-6).ln() / phi.ln());
        assert_eq!(prefix_agreement(&p1, &p1, 30).unwrap(), 30);
    }

    #[test]
    fn rejects_alpha_outside_unit_interval() {
        let a = ExactArith::new(1, 2).unwrap();
        assert!(TransformParams::new(a.clone(), a.int(1)).is_err());
        assert!(TransformParams::new(a.clone(), a.rational(&rat(-1, 5))).is_err());
        let p = golden(int(0));
        assert!(orbit(&p, &a.rational(&rat(3, 2)), 2, Variant::Standard).is_err());
    }
}
