use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use ibeta::{FieldElement, Rational};

/// Significant digits of decimals rendered from exact values.
pub const DECIMAL_DIGITS: usize = 30;

/// JSON and CSV rendering of backend values.
pub trait Render {
    fn json(&self) -> Value;
    fn decimal(&self) -> String;
    /// Exact representation, when there is one.
    fn exact(&self) -> Option<String> {
        None
    }
}

impl Render for f64 {
    fn json(&self) -> Value {
        json!(self)
    }

    fn decimal(&self) -> String {
        format!("{self}")
    }
}

impl Render for FieldElement {
    fn json(&self) -> Value {
        json!({ "decimal": self.to_decimal(DECIMAL_DIGITS), "exact": self.to_string() })
    }

    fn decimal(&self) -> String {
        self.to_decimal(DECIMAL_DIGITS)
    }

    fn exact(&self) -> Option<String> {
        Some(self.to_string())
    }
}

pub fn rational_json(r: &Rational) -> Value {
    json!({ "decimal": ibeta::numberfield::rational_to_decimal(r, DECIMAL_DIGITS), "exact": r.to_string() })
}

/// `P/Q`, an integer, or a plain decimal such as `-0.375` or `2.5e-3`, read exactly.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let bad = || format!("cannot read {s:?} as a rational number (use a decimal or P/Q)");
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(p, q));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() || !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{ip}{fp}").parse().map_err(|_| bad())?;
    let ten = Rational::from_integer(10.into());
    let scale = exp - fp.len() as i32;
    let mut r = Rational::from_integer(digits);
    let mut p = Rational::one();
    for _ in 0..scale.unsigned_abs() {
        p *= &ten;
    }
    r = if scale >= 0 { r * p } else { r / p };
    Ok(if neg { -r } else { r })
}

/// Destination of a run: standard output or a file.
pub struct Sink {
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Sink { inner })
    }

    pub fn json(&mut self, v: &Value) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut self.inner, v)?;
        writeln!(self.inner)?;
        self.inner.flush()
    }

    /// A comment line carrying the resolved config, the header row, then rows.
    pub fn csv<C: Serialize>(&mut self, config: &C, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        write_csv(&mut self.inner, config, header, rows)?;
        self.inner.flush()
    }
}

pub fn write_csv<W: Write, C: Serialize>(w: &mut W, config: &C, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(header)?;
    for r in rows {
        cw.write_record(r)?;
    }
    cw.flush()?;
    Ok(())
}
