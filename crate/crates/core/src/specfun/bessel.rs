//! Modified Bessel functions `I_ν` and `K_ν` of real order `ν ≥ 0` and real
//! argument `z > 0`, returned in extended range.
//!
//! * `I_ν`: ascending series below `max(30, ν²)`, Hankel expansion above.
//! * `K_ν`: Temme's series (`z < 2`) or Steed's continued fraction (`z ≥ 2`)
//!   for the reduced order `|μ| ≤ 1/2`, forward recurrence up to `ν`; Hankel
//!   expansion above `max(30, ν²)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scaled::ScaledValue;

const EPS: f64 = 1e-17;
const MAXIT: usize = 100_000;

/// Taylor coefficients of `1/Γ(1+μ)` about `μ = 0`.
const RGAMMA: [f64; 28] = [
    1.0,
    0.577_215_664_901_532_860_606_5,
    -0.655_878_071_520_253_881_077,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_501_7,
    -0.042_197_734_555_544_336_748_21,
    -0.009_621_971_527_876_973_562_115,
    0.007_218_943_246_663_099_542_395,
    -0.001_165_167_591_859_065_112_114,
    -0.000_215_241_674_114_950_972_815_7,
    0.000_128_050_282_388_116_186_153_2,
    -0.000_020_134_854_780_788_238_655_69,
    -0.000_001_250_493_482_142_670_657_345,
    0.000_001_133_027_231_981_695_882_374,
    -2.056_338_416_977_607_103_45e-7,
    6.116_095_104_481_415_817_862e-9,
    5.002_007_644_469_222_930_056e-9,
    -1.181_274_570_487_020_144_588e-9,
    1.043_426_711_691_100_510_492e-10,
    7.782_263_439_905_071_254_05e-12,
    -3.696_805_618_642_205_708_188e-12,
    5.100_370_287_454_475_979_015e-13,
    -2.058_326_053_566_506_783_222e-14,
    -5.348_122_539_423_017_982_37e-15,
    1.226_778_628_238_260_790_159e-15,
    -1.181_259_301_697_458_769_514e-16,
    1.186_692_254_751_600_332_58e-18,
    1.412_380_655_318_031_781_556e-18,
];

fn check(order: f64, z: f64) -> Result<()> {
    if !(order.is_finite() && z.is_finite()) {
        return Err(Error::domain("bessel", format!("non-finite input (order {order}, z {z})")));
    }
    if order < 0.0 {
        return Err(Error::domain("bessel", format!("negative order {order}")));
    }
    if z <= 0.0 {
        return Err(Error::domain("bessel", format!("argument z = {z} must be positive")));
    }
    Ok(())
}

fn hankel_threshold(order: f64) -> f64 {
    (order * order).max(30.0)
}

/// `Σ (±1)^k a_k(ν) / z^k`, truncated at the smallest term.
fn hankel_sum(order: f64, z: f64, alternating: bool) -> f64 {
    let mu = 4.0 * order * order;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        let next = if alternating { -next } else { next };
        if next.abs() >= last || next == 0.0 {
            break;
        }
        last = next.abs();
        term = next;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the first kind.
pub fn bessel_i(order: f64, z: f64) -> Result<ScaledValue> {
    check(order, z)?;
    if z >= hankel_threshold(order) {
        let s = hankel_sum(order, z, true);
        return Ok(ScaledValue::exp(z - 0.5 * (2.0 * PI * z).ln()) * s);
    }
    // (z/2)^ν / Γ(ν+1) · Σ (z²/4)^k / (k! (ν+1)_k)
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (order + k));
        sum += term;
        if term < EPS * sum {
            break;
        }
        k += 1.0;
    }
    let log_pref = order * (0.5 * z).ln() - libm::lgamma(order + 1.0);
    Ok(ScaledValue::exp(log_pref) * sum)
}

/// Modified Bessel function of the second kind.
pub fn bessel_k(order: f64, z: f64) -> Result<ScaledValue> {
    Ok(bessel_k_pair(order, z)?.0)
}

/// `(K_ν(z), K_{ν+1}(z))` from one evaluation.
pub fn bessel_k_pair(order: f64, z: f64) -> Result<(ScaledValue, ScaledValue)> {
    check(order, z)?;
    let decay = ScaledValue::exp(-z);
    if z >= hankel_threshold(order + 1.0) {
        let pref = ScaledValue::exp(-z) * (PI / (2.0 * z)).sqrt();
        return Ok((pref * hankel_sum(order, z, false), pref * hankel_sum(order + 1.0, z, false)));
    }
    let nl = (order + 0.5).floor();
    let mu = order - nl;
    // both values carry a factor e^{z}
    let (mut k_mu, mut k_mu1) = if z < 2.0 {
        let (a, b) = temme(mu, z);
        let g = z.exp();
        (a * g, b * g)
    } else {
        steed(mu, z)?
    };
    let xi2 = 2.0 / z;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok((decay * k_mu, decay * k_mu1))
}

/// `(K_μ(z), K_{μ+1}(z))` for `|μ| ≤ 1/2`, `z < 2`.
fn temme(mu: f64, z: f64) -> (f64, f64) {
    let x2 = 0.5 * z;
    let pimu = PI * mu;
    let fact = if pimu.abs() < 1e-300 { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < 1e-300 { 1.0 } else { e.sinh() / e };
    let (gam1, gam2) = gamma_parts(mu);
    let gampl = gam2 - mu * gam1;
    let gammi = gam2 + mu * gam1;
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    let mut i = 1.0;
    loop {
        ff = (i * ff + p + q) / (i * i - mu2);
        c *= dd / i;
        p /= i - mu;
        q /= i + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - i * ff);
        if del.abs() < sum.abs() * EPS {
            break;
        }
        i += 1.0;
    }
    (sum, sum1 * 2.0 / z)
}

/// `gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)` and `gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`.
fn gamma_parts(mu: f64) -> (f64, f64) {
    let m2 = mu * mu;
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    // Horner over even and odd coefficient subsequences
    for j in (0..RGAMMA.len()).rev() {
        if j % 2 == 1 {
            gam1 = gam1 * m2 + RGAMMA[j];
        } else {
            gam2 = gam2 * m2 + RGAMMA[j];
        }
    }
    (-gam1, gam2)
}

/// `e^{z}·(K_μ(z), K_{μ+1}(z))` for `|μ| ≤ 1/2`, `z ≥ 2`.
fn steed(mu: f64, z: f64) -> Result<(f64, f64)> {
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 1..MAXIT {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::domain("bessel_k", format!("continued fraction failed at z = {z}")));
    }
    h *= a1;
    let k_mu = (PI / (2.0 * z)).sqrt() / s;
    let k_mu1 = k_mu * (mu + z + 0.5 - h) / z;
    Ok((k_mu, k_mu1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_integer_closed_forms() {
        for &z in &[1e-5, 0.3, 1.0, 1.9, 2.0, 7.5, 29.0, 31.0, 120.0] {
            let i = bessel_i(0.5, z).unwrap();
            let expect_log = 0.5 * (2.0 / (PI * z)).ln() + z + (-(-2.0 * z).exp_m1()).ln() - 2f64.ln();
            assert!((i.log_mag() - expect_log).abs() < 1e-13, "I_1/2({z})");
            let k = bessel_k(0.5, z).unwrap();
            let expect = 0.5 * (PI / (2.0 * z)).ln() - z;
            assert!((k.log_mag() - expect).abs() < 1e-13, "K_1/2({z})");
            let k32 = bessel_k_pair(0.5, z).unwrap().1;
            let expect = expect + (1.0 + 1.0 / z).ln();
            assert!((k32.log_mag() - expect).abs() < 1e-13, "K_3/2({z})");
        }
    }

    #[test]
    fn reference_values() {
        assert!(rel(bessel_i(1.0, 1.0).unwrap().to_f64(), 0.565_159_103_992_485_0) < 1e-14);
        assert!(rel(bessel_k(1.0, 1.0).unwrap().to_f64(), 0.601_907_230_197_234_6) < 1e-14);
        assert!(rel(bessel_k(0.0, 1.0).unwrap().to_f64(), 0.421_024_438_240_708_3) < 1e-14);
    }

    #[test]
    fn wronskian_holds_across_branches() {
        // I_ν K_{ν+1} + I_{ν+1} K_ν = 1/z
        for &nu in &[0.0, 0.25, 0.5, 1.0, 1.7, 3.0] {
            for &z in &[1e-4, 0.5, 1.99, 2.01, 9.0, 29.9, 30.1, 250.0, 700.0] {
                let (k0, k1) = bessel_k_pair(nu, z).unwrap();
                let i0 = bessel_i(nu, z).unwrap();
                let i1 = bessel_i(nu + 1.0, z).unwrap();
                let w = (i0 * k1).add(i1 * k0).to_f64() * z;
                assert!((w - 1.0).abs() < 1e-13, "ν={nu} z={z}: {w}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_i(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -1.0).is_err());
        assert!(bessel_k(-0.5, 1.0).is_err());
        assert!(bessel_i(f64::NAN, 1.0).is_err());
    }
}
