//! One line per acceptance criterion. Exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ibeta::verify::{run_suite, Suite, SuiteReport, VerifyConfig};
use serde_json::Value;

struct Criterion {
    id: u32,
    title: &'static str,
    suite: Suite,
    limit: Option<Duration>,
}

const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, title: "matching at time m in the low regime", suite: Suite::MatchingTime, limit: Some(Duration::from_secs(10)) },
    Criterion { id: 2, title: "linearity and closed forms", suite: Suite::Linearity, limit: None },
    Criterion { id: 3, title: "slope and intercept increase in m", suite: Suite::Monotone, limit: Some(Duration::from_secs(5)) },
    Criterion { id: 4, title: "symmetry M(a) + M(1 - <beta + a>) = 1", suite: Suite::Symmetry, limit: None },
    Criterion { id: 5, title: "gap bounds upper > gap > lower", suite: Suite::Gap, limit: None },
    Criterion { id: 6, title: "delta-word laws", suite: Suite::Cardinality, limit: None },
    Criterion { id: 7, title: "matching for almost every alpha", suite: Suite::AeMatching, limit: None },
    Criterion { id: 8, title: "slope-sign law on every scanned interval", suite: Suite::SlopeSign, limit: None },
    Criterion { id: 9, title: "finite sum, series and Birkhoff agree", suite: Suite::TripleAgreement, limit: None },
    Criterion { id: 10, title: "density validity and invariance", suite: Suite::Invariance, limit: None },
    Criterion { id: 11, title: "scan curves continuous across boundaries", suite: Suite::Continuity, limit: None },
];

fn summary(report: &SuiteReport) -> String {
    let failed: Vec<&str> = report.failures().map(|c| c.label.as_str()).collect();
    let mut s = format!("{} cases", report.cases.len());
    if !failed.is_empty() {
        s += &format!(", failing: {}", failed.join("; "));
    }
    s
}

/// Extra detail worth printing for some criteria.
fn detail(id: u32, report: &SuiteReport) -> Option<String> {
    let total = |key: &str| report.cases.iter().filter_map(|c| c.values.get(key)).sum::<f64>();
    let worst = |key: &str| report.cases.iter().filter_map(|c| c.values.get(key)).fold(0.0f64, |a, &b| a.max(b));
    match id {
        2 => report.findings.first().cloned(),
        4 => Some(format!("max defect {:.3e}", worst("max_defect"))),
        6 => Some(format!("max distinct nonzero words {}", worst("distinct_nonzero_words"))),
        7 => Some(format!("min matched fraction {:.4}", report.cases.iter().filter_map(|c| c.values.get("matched_fraction")).fold(1.0f64, |a, &b| a.min(b)))),
        8 => Some(format!("{} intervals, {} violations", total("intervals"), total("violations"))),
        11 => Some(format!("max jump {:.3e}", worst("max_jump"))),
        _ => None,
    }
}

fn decimal(v: &Value) -> f64 {
    v["decimal"].as_str().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN)
}

/// The curves as `ibeta scan` emits them: one line per interval, and
/// neighbouring lines agree where their boundary brackets overlap.
fn scan_output_continuous(q: u32, m: usize) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ibeta"))
        .args(["scan", "--q", &q.to_string(), "--m", &m.to_string(), "--range", "0,1", "--grid", "2048"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let doc: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let intervals = doc["intervals"].as_array().ok_or("no intervals")?;
    let bracket = |v: &Value| (v[0].as_f64().unwrap_or(f64::NAN), v[1].as_f64().unwrap_or(f64::NAN));
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for w in intervals.windows(2) {
        let (l, r) = (bracket(&w[0]["hi"]), bracket(&w[1]["lo"]));
        if l.1 < r.0 || r.1 < l.0 {
            continue;
        }
        let x = 0.25 * (l.0 + l.1 + r.0 + r.1);
        let at = |v: &Value| decimal(&v["slope"]) * x + decimal(&v["intercept"]);
        worst = worst.max((at(&w[0]) - at(&w[1])).abs());
        checked += 1;
    }
    if checked == 0 || !(worst <= 1e-4) {
        return Err(format!("({q},{m}): {checked} boundaries, max jump {worst:.3e}"));
    }
    Ok(format!("({q},{m}) scan output: {} intervals, {checked} boundaries, max jump {worst:.3e}", intervals.len()))
}

fn main() -> ExitCode {
    let cfg = VerifyConfig { seed: 42, ..VerifyConfig::default() };
    let mut failures = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let result = run_suite(c.suite, &cfg);
        let elapsed = start.elapsed();
        let (mut pass, mut text) = match &result {
            Ok(r) => {
                let mut t = summary(r);
                if let Some(d) = detail(c.id, r) {
                    t += &format!("; {d}");
                }
                (r.pass, t)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(limit) = c.limit {
            if elapsed > limit {
                pass = false;
                text += &format!("; over the {} s limit", limit.as_secs());
            }
        }
        if c.id == 11 {
            for (q, m) in [(1, 2), (2, 4)] {
                match scan_output_continuous(q, m) {
                    Ok(t) => text += &format!("; {t}"),
                    Err(e) => {
                        pass = false;
                        text += &format!("; {e}");
                    }
                }
            }
        }
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} [{}] {}: {} ({:.2} s)",
            c.id,
            c.suite,
            c.title,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        println!("             {text}");
    }
    println!("{} of {} criteria pass", CRITERIA.len() - failures, CRITERIA.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
