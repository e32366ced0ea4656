use serde_json::{json, Map, Value};

use ibeta::arith::{Arithmetic, ExactArith, FloatArith};
use ibeta::density::build_series;
use ibeta::dynamics::{expand, orbit, regime_boundary, BetaSpec, Regime, TransformParams, Variant};
use ibeta::matching::{
    classify_monotonicity, coefficient_sum, delta_word_track, detect_matching, interval_line, scan_intervals, ScanConfig,
};
use ibeta::mvalue::{closed_forms, m_birkhoff, m_finite, m_series};
use ibeta::numberfield::{isolate_root, MultinacciField};
use ibeta::verify::{run_suite, Suite, SuiteReport, VerifyConfig};
use ibeta::{Error, Rational};

use crate::output::{parse_rational, rational_json, write_csv, Render, Sink};
use crate::{Command, Common, Format, MethodArg};

pub enum Failure {
    /// Bad flags or parameters: exit code 2.
    Usage(String),
    /// The computation itself failed: exit code 1.
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Usage(msg.into()))
}

fn rational_arg(s: &str) -> Res<Rational> {
    parse_rational(s).map_err(Failure::Usage)
}

/// Run `$body` with `$a` bound to the backend selected by `$beta`.
macro_rules! with_backend {
    ($beta:expr, |$a:ident| $body:expr) => {
        match *$beta {
            BetaSpec::Multinacci { q, m } => {
                let $a = ExactArith::new(q, m)?;
                $body
            }
            BetaSpec::Float { value } => {
                let $a = FloatArith::new(value)?;
                $body
            }
        }
    };
}

enum Emit {
    Json(Value),
    Csv { header: Vec<&'static str>, rows: Vec<Vec<String>> },
}

/// Execute one command. `Ok(false)` means the run completed but a requested
/// check failed.
pub fn run(common: &Common, cmd: &Command) -> Res<bool> {
    let config = json!({ "run": cmd, "format": common.format });
    let (emit, ok) = execute(common, cmd, &config)?;
    let mut sink = Sink::open(common.output.as_deref())?;
    match emit {
        Emit::Json(v) => {
            let mut obj = Map::new();
            obj.insert("config".into(), config);
            if let Value::Object(m) = v {
                obj.extend(m);
            }
            sink.json(&Value::Object(obj))?;
        }
        Emit::Csv { header, rows } => sink.csv(&config, &header, &rows)?,
    }
    Ok(ok)
}

fn format_or(common: &Common, default: Format, allowed: &[Format]) -> Res<Format> {
    let f = common.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return usage(format!("this command does not support --format {f:?}").to_lowercase());
    }
    Ok(f)
}

fn execute(common: &Common, cmd: &Command, config: &Value) -> Res<(Emit, bool)> {
    match cmd {
        Command::Multinacci { q, m, width } => {
            format_or(common, Format::Json, &[Format::Json])?;
            if !(*width > 0.0) {
                return usage("--width must be positive");
            }
            let w = Rational::from_float(*width).ok_or_else(|| Failure::Usage("--width must be finite".into()))?;
            let field = MultinacciField::new(*q, *m)?;
            let enc = isolate_root(*q, *m, &w)?;
            let mid = enc.midpoint();
            Ok((
                Emit::Json(json!({
                    "q": q,
                    "m": m,
                    "minimal_polynomial": field.minimal_polynomial(),
                    "beta": rational_json(&mid),
                    "enclosure": { "lo": rational_json(enc.lo()), "hi": rational_json(enc.hi()), "width": rational_json(&enc.width()) },
                })),
                true,
            ))
        }
        Command::Orbit { beta, alpha, x, n, tilde } => {
            let fmt = format_or(common, Format::Csv, &[Format::Csv, Format::Json])?;
            let (al, x0) = (rational_arg(alpha)?, rational_arg(x)?);
            let variant = if *tilde { Variant::Tilde } else { Variant::Standard };
            with_backend!(beta, |a| {
                let p = TransformParams::new(a.clone(), a.rational(&al))?;
                let steps = orbit(&p, &a.rational(&x0), *n, variant)?;
                let emit = match fmt {
                    Format::Csv => Emit::Csv {
                        header: vec!["n", "value", "digit", "exact"],
                        rows: steps
                            .iter()
                            .map(|s| vec![s.n.to_string(), s.value.decimal(), s.digit.to_string(), s.value.exact().unwrap_or_default()])
                            .collect(),
                    },
                    Format::Json => Emit::Json(json!({
                        "steps": steps.iter().map(|s| json!({ "n": s.n, "value": s.value.json(), "digit": s.digit, "ambiguous": s.ambiguous })).collect::<Vec<_>>()
                    })),
                };
                Ok((emit, true))
            })
        }
        Command::Expand { beta, alpha, x, n } => {
            format_or(common, Format::Json, &[Format::Json])?;
            let (al, x0) = (rational_arg(alpha)?, rational_arg(x)?);
            with_backend!(beta, |a| {
                let p = TransformParams::new(a.clone(), a.rational(&al))?;
                let e = expand(&p, &a.rational(&x0), *n)?;
                Ok((
                    Emit::Json(json!({
                        "digits": e.digits,
                        "residual": e.residual.json(),
                        "tail": e.tail.json(),
                        "ambiguous": e.ambiguous,
                    })),
                    true,
                ))
            })
        }
        Command::Matching { beta, alpha, max_iter } => {
            format_or(common, Format::Json, &[Format::Json])?;
            let al = rational_arg(alpha)?;
            with_backend!(beta, |a| {
                let p = TransformParams::new(a.clone(), a.rational(&al))?;
                let rec = detect_matching(&p, *max_iter)?;
                let mut out = json!({ "regime": p.regime(), "record": rec });
                if rec.matched {
                    let line = interval_line(&rec, &a)?;
                    out["line"] = json!({ "slope": line.slope.json(), "intercept": line.intercept.json(), "lambda_sum": line.lambda_sum.json() });
                    out["coefficient_sum"] = coefficient_sum(&rec, &a)?.json();
                }
                if let BetaSpec::Multinacci { q, m } = *beta {
                    out["delta_words"] = exact_words(q, m, &al, *max_iter)?;
                }
                Ok((Emit::Json(out), true))
            })
        }
        Command::Density { beta, alpha, grid, tol, tilde } => {
            let fmt = format_or(common, Format::Csv, &[Format::Csv, Format::Json])?;
            if *grid == 0 {
                return usage("--grid must be at least 1");
            }
            let al = rational_arg(alpha)?;
            let variant = if *tilde { Variant::Tilde } else { Variant::Standard };
            with_backend!(beta, |a| {
                let p = TransformParams::new(a.clone(), a.rational(&al))?;
                let s = build_series(&p, *tol, variant)?;
                let mut rows = Vec::with_capacity(grid + 1);
                for i in 0..=*grid {
                    let x = Rational::new((i as i64).into(), (*grid as i64).into());
                    let v = s.eval(&a.rational(&x))?;
                    rows.push((x, v));
                }
                let k = s.normalization();
                let emit = match fmt {
                    Format::Csv => Emit::Csv {
                        header: vec!["x", "g", "clipped"],
                        rows: rows
                            .iter()
                            .map(|(x, v)| vec![num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN).to_string(), v.value.to_string(), v.clipped.to_string()])
                            .collect(),
                    },
                    Format::Json => Emit::Json(json!({
                        "normalization": k.value.json(),
                        "tail_bound": k.tail_bound,
                        "exact_series": s.is_exact(),
                        "depth": s.depth(),
                        "x": rows.iter().map(|(x, _)| num_traits::ToPrimitive::to_f64(x)).collect::<Vec<_>>(),
                        "g": rows.iter().map(|(_, v)| v.value).collect::<Vec<_>>(),
                    })),
                };
                Ok((emit, true))
            })
        }
        Command::Mvalue { beta, alpha, method, tol, iters, burn_in, seed, max_iter } => {
            format_or(common, Format::Json, &[Format::Json])?;
            let al = rational_arg(alpha)?;
            with_backend!(beta, |a| {
                let p = TransformParams::new(a.clone(), a.rational(&al))?;
                let out = match method {
                    MethodArg::Series => {
                        let v = m_series(&p, *tol)?;
                        json!({ "value": v.value.json(), "value_f64": v.value_f64, "method": v.method, "error_bound": v.error_bound })
                    }
                    MethodArg::Finite => {
                        let rec = detect_matching(&p, *max_iter)?;
                        if !rec.matched {
                            return Err(Failure::Compute(format!("no matching within {max_iter} iterations; the finite sum is undefined")));
                        }
                        let v = m_finite(&rec, &p)?;
                        json!({ "value": v.value.json(), "value_f64": v.value_f64, "method": v.method, "error_bound": v.error_bound, "matching_time": rec.time })
                    }
                    MethodArg::Birkhoff => {
                        let v = m_birkhoff(&p, *iters, *burn_in, *seed)?;
                        json!({ "value": v.value, "value_f64": v.value_f64, "method": v.method, "error_bound": v.error_bound, "error_kind": "batch-means standard error" })
                    }
                };
                Ok((Emit::Json(out), true))
            })
        }
        Command::Constants { q, m, diagnostic } => {
            format_or(common, Format::Json, &[Format::Json])?;
            let c = closed_forms(*q, *m)?;
            let mut out = match &c.exact {
                Some(e) => json!({ "q": q, "m": m, "k_recip": e.k_recip.json(), "slope": e.slope.json(), "intercept": e.intercept.json() }),
                None => json!({ "q": q, "m": m, "k_recip": c.k_recip, "slope": c.slope, "intercept": c.intercept }),
            };
            if *diagnostic {
                out["simplified_intercept"] = match &c.exact {
                    Some(e) => e.simplified_intercept.json(),
                    None => json!(c.simplified_intercept),
                };
            }
            Ok((Emit::Json(out), true))
        }
        Command::Scan { q, m, range, grid, max_iter, refine_bits, classify, points, csv } => {
            let fmt = format_or(common, Format::Json, &[Format::Csv, Format::Json])?;
            let (lo, hi) = range.split_once(',').ok_or_else(|| Failure::Usage("--range must be LO,HI".into()))?;
            let a = ExactArith::new(*q, *m)?;
            let mut cfg = ScanConfig::new(a.rational(&rational_arg(lo)?), a.rational(&rational_arg(hi)?), *grid, *max_iter);
            cfg.refine_bits = *refine_bits;
            let scan = scan_intervals(&a, &cfg)?;
            let (header, rows) = scan_rows(&scan, *points);
            if let Some(path) = csv {
                let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
                write_csv(&mut f, config, &header, &rows)?;
            }
            if fmt == Format::Csv {
                return Ok((Emit::Csv { header, rows }, true));
            }
            let mut list = Vec::with_capacity(scan.intervals.len());
            for iv in &scan.intervals {
                let mut o = json!({
                    "lo": [iv.lo.lo.to_f64(), iv.lo.hi.to_f64()],
                    "hi": [iv.hi.lo.to_f64(), iv.hi.hi.to_f64()],
                    "samples": iv.samples,
                    "time": iv.record.time,
                    "prefix0": iv.record.prefix0,
                    "prefix1": iv.record.prefix1,
                    "delta_sign": iv.record.delta_k_sign,
                    "slope": iv.line.slope.json(),
                    "intercept": iv.line.intercept.json(),
                    "coefficient_sum_sign": iv.csum_sign()?,
                });
                if *classify {
                    o["monotonicity"] = serde_json::to_value(classify_monotonicity(&a, iv)?).expect("plain data");
                }
                list.push(o);
            }
            Ok((
                Emit::Json(json!({
                    "regime_boundary": regime_boundary(&a).json(),
                    "intervals": list,
                    "residual": scan.residual,
                    "residual_measure": scan.residual_measure,
                    "hidden_boundaries": scan.hidden_boundaries,
                })),
                true,
            ))
        }
        Command::Verify { suite, q, q_max, m_max, samples, horizon, grid, iters, seed } => {
            format_or(common, Format::Json, &[Format::Json])?;
            let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
            let vc = VerifyConfig { q: *q, q_max: *q_max, m_max: *m_max, samples: *samples, horizon: *horizon, grid: *grid, iters: *iters, seed: *seed };
            let reports: Vec<SuiteReport> = suites.iter().map(|&s| run_suite(s, &vc)).collect::<ibeta::Result<_>>()?;
            let pass = reports.iter().all(|r| r.pass);
            for r in &reports {
                eprintln!("{}: {}", r.suite, if r.pass { "PASS" } else { "FAIL" });
            }
            Ok((Emit::Json(json!({ "pass": pass, "reports": reports })), pass))
        }
    }
}

/// Delta-words of the critical orbits for an exact base (high regime only).
fn exact_words(q: u32, m: usize, alpha: &Rational, horizon: usize) -> Res<Value> {
    let a = ExactArith::new(q, m)?;
    let p = TransformParams::new(a.clone(), a.rational(alpha))?;
    if p.regime() == Regime::Low {
        return Ok(Value::Null);
    }
    let t = delta_word_track(&p, horizon)?;
    Ok(json!({
        "words": t.words.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "transition_violations": t.transition_violations,
        "distinct_nonzero": t.distinct_nonzero().len(),
    }))
}

/// Plotting rows `(interval, alpha, M)`: both inner bracket ends of each
/// interval plus `points` interior samples.
fn scan_rows(scan: &ibeta::matching::ScanResult, points: usize) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    for (i, iv) in scan.intervals.iter().enumerate() {
        let (x0, x1) = (iv.lo.hi.to_f64(), iv.hi.lo.to_f64());
        let mut xs = vec![x0];
        xs.extend((1..=points).map(|k| x0 + (x1 - x0) * k as f64 / (points + 1) as f64));
        if x1 > x0 {
            xs.push(x1);
        }
        for x in xs {
            rows.push(vec![
                i.to_string(),
                x.to_string(),
                iv.m_at(x).to_string(),
                iv.record.time.map(|t| t.to_string()).unwrap_or_default(),
            ]);
        }
    }
    (vec!["interval", "alpha", "m", "matching_time"], rows)
}
