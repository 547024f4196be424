//! Comparison against the frozen high-precision reference table.

use serde::Serialize;

use super::{bessel_i, bessel_k, derived, Dimension};
use crate::error::{Error, Result};
use crate::scaled::ScaledValue;

/// Reference values produced by `tools/golden.py`.
pub const GOLDEN_CSV: &str = include_str!("../../tests/data/golden_specfun.csv");

#[derive(Clone, Debug, Serialize)]
pub struct GoldenRow {
    pub d: f64,
    pub function: String,
    pub argument: String,
    pub expected: String,
    pub computed: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldenReport {
    pub rows: Vec<GoldenRow>,
    pub max_rel_error: f64,
}

impl GoldenReport {
    pub fn pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }
}

/// `(sign, ln|v|)` of a decimal literal, valid far outside the `f64` range.
fn parse_log(s: &str) -> Result<(i8, f64)> {
    let bad = || Error::Config(format!("bad number {s:?}"));
    let (mant, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let m: f64 = mant.parse().map_err(|_| bad())?;
    if m == 0.0 {
        return Ok((0, f64::NEG_INFINITY));
    }
    Ok((m.signum() as i8, m.abs().ln() + exp10 as f64 * std::f64::consts::LN_10))
}

fn evaluate(d: f64, function: &str, argument: &str) -> Result<ScaledValue> {
    let dim = Dimension::new(d)?;
    let n = dim.order();
    let (lambda, z) = match argument.split_once(':') {
        Some((a, b)) => (
            a.parse::<f64>().map_err(|e| Error::Config(e.to_string()))?,
            b.parse::<f64>().map_err(|e| Error::Config(e.to_string()))?,
        ),
        None => (f64::NAN, argument.parse::<f64>().map_err(|e| Error::Config(e.to_string()))?),
    };
    match function {
        "I" => bessel_i(n, z),
        "K" => bessel_k(n, z),
        "l" => derived::small_l(dim, z),
        "lp" => derived::small_l_prime(dim, z),
        "k" => derived::small_k(dim, z),
        "kp" => derived::small_k_prime(dim, z),
        "A" => derived::ratio_a(dim, z),
        "B" => derived::ratio_b(dim, z),
        "tau" => derived::tau(dim, lambda, z),
        "tau_prime" => derived::tau_prime(dim, lambda, z),
        "psi" => derived::psi(dim, lambda, z),
        "psi_prime" => derived::psi_prime(dim, lambda, z),
        other => Err(Error::Config(format!("unknown function {other:?}"))),
    }
}

/// Evaluates every row of a `d,function,argument,expected,tolerance` table.
pub fn check_golden(csv: &str) -> Result<GoldenReport> {
    let mut rows = Vec::new();
    for line in csv.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(Error::Config(format!("malformed golden row {line:?}")));
        }
        let d: f64 = f[0].parse().map_err(|_| Error::Config(format!("bad d in {line:?}")))?;
        let tolerance: f64 = f[4].parse().map_err(|_| Error::Config(format!("bad tolerance in {line:?}")))?;
        let (sign, log_expected) = parse_log(f[3])?;
        let (computed, rel_error) = match evaluate(d, f[1], f[2]) {
            Ok(v) if v.sign() == sign => {
                // relative error from the log difference
                (v.to_f64(), (v.log_mag() - log_expected).exp_m1().abs())
            }
            Ok(v) => (v.to_f64(), f64::INFINITY),
            Err(_) => (f64::NAN, f64::INFINITY),
        };
        rows.push(GoldenRow {
            d,
            function: f[1].to_string(),
            argument: f[2].to_string(),
            expected: f[3].to_string(),
            computed,
            rel_error,
            tolerance,
            pass: rel_error <= tolerance,
        });
    }
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(GoldenReport { rows, max_rel_error })
}
