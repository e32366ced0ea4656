//! Values computed independently at 100 significant digits and frozen here.

use ibeta::arith::Arithmetic;
use ibeta::matching::detect_matching;
use ibeta::mvalue::{closed_forms, m_finite, m_series};
use ibeta::numberfield::rat;
use ibeta::{BetaSpec, ExactArith, FloatArith, MultinacciField, TransformParams};

fn exact_m(q: u32, m: usize, n: i64, d: i64) -> f64 {
    let a = ExactArith::new(q, m).unwrap();
    let alpha = a.rational(&rat(n, d));
    let p = TransformParams::new(a, alpha).unwrap();
    m_series(&p, 1e-14).unwrap().value_f64
}

#[test]
fn multinacci_roots() {
    for (q, m, beta) in [
        (1, 2, 1.6180339887498948482),
        (1, 3, 1.8392867552141611326),
        (2, 3, 2.9196395658394181451),
        (2, 4, 2.9744492445524616171),
        (3, 5, 3.9970595203530198574),
    ] {
        let f = MultinacciField::new(q, m).unwrap();
        assert!((f.beta_f64() - beta).abs() < 1e-15, "({q},{m}): {}", f.beta_f64());
    }
}

#[test]
fn m_at_selected_parameters() {
    let cases = [
        (1, 2, 1, 2, 0.51631189606246319687),
        (1, 2, 0, 1, 0.44721359549995793928),
        (1, 3, 3, 10, 0.49781340177224202872),
        (2, 2, 7, 10, 0.50810586777713784968),
        (2, 4, 1, 5, 0.50055235357774199295),
        (3, 5, 2, 3, 0.49958866382860366824),
        (1, 3, 9, 10, 0.45537690539025296893),
        (2, 3, 1, 3, 0.51311874653666203762),
    ];
    for (q, m, n, d, want) in cases {
        let got = exact_m(q, m, n, d);
        assert!((got - want).abs() < 1e-12, "({q},{m}) alpha {n}/{d}: {got} vs {want}");
    }
}

#[test]
fn finite_sum_reproduces_oracle() {
    let a = ExactArith::new(1, 3).unwrap();
    let alpha = a.rational(&rat(3, 10));
    let p = TransformParams::new(a, alpha).unwrap();
    let rec = detect_matching(&p, 10_000).unwrap();
    assert!(rec.matched);
    let v = m_finite(&rec, &p).unwrap().value_f64;
    assert!((v - 0.49781340177224202872).abs() < 1e-12, "{v}");
}

#[test]
fn float_base() {
    let a = FloatArith::new(1.9f64).unwrap();
    let p = TransformParams::new(a, 0.2).unwrap();
    let v = m_series(&p, 1e-12).unwrap().value_f64;
    assert!((v - 0.54025159796851153226).abs() < 1e-9, "{v}");
}

#[test]
fn integer_base_gives_one_half() {
    let spec: BetaSpec = "int:3".parse().unwrap();
    let a = spec.float_arith().unwrap();
    let p = TransformParams::new(a, 0.25).unwrap();
    let v = m_series(&p, 1e-12).unwrap().value_f64;
    assert!((v - 0.5).abs() < 1e-12, "{v}");
}

#[test]
fn low_regime_line() {
    for (q, m, slope, intercept) in [
        (1, 2, 0.27639320225002103036, 0.44721359549995793928),
        (1, 3, 0.56438361064890291344, 0.45464803931433364517),
        (2, 3, 0.45147842169213043594, 0.48185949900934307069),
        (3, 5, 0.83932464246526288108, 0.49876599148581100471),
        (2, 4, 0.72785713279633297956, 0.49070135019958721347),
    ] {
        let c = closed_forms(q, m).unwrap();
        assert!((c.slope - slope).abs() < 1e-12, "({q},{m}) slope {}", c.slope);
        assert!((c.intercept - intercept).abs() < 1e-12, "({q},{m}) intercept {}", c.intercept);
    }
}
