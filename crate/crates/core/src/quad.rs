//! One-dimensional quadrature: cached Gauss–Legendre rules, globally
//! adaptive Gauss–Kronrod (7/15) integration, and an exponent-shifted variant
//! for positive integrands whose magnitude over- or underflows `f64`.

use std::cell::Cell;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scaled::ScaledValue;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for the adaptive integrators.
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    let value = resk * h;
    let err = ((resk - resg) * h).abs();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (v, e) = kronrod15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    loop {
        if !total.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
                evaluations,
                context: format!("non-finite integrand on [{a:e}, {b:e}]"),
            });
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
                evaluations,
                context: format!("interval budget {} exhausted on [{a:e}, {b:e}]", opts.max_intervals),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further; accept what we have
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(&mut f, worst.a, mid);
        let (v2, e2) = kronrod15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // resum to shed accumulated round-off from the running totals
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Integral over `[a, inf)` through `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Integral of a positive function given through its logarithm `g = ln f`,
/// returned in extended range. The integrand is shifted by (an estimate of)
/// its maximum before the adaptive rule runs.
pub fn integrate_log<G: FnMut(f64) -> f64>(
    mut g: G,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<ScaledValue> {
    if a == b {
        return Ok(ScaledValue::ZERO);
    }
    const SAMPLES: usize = 96;
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0.5 * (a + b);
    for i in 0..=SAMPLES {
        let theta = std::f64::consts::PI * i as f64 / SAMPLES as f64;
        let s = a + 0.5 * (b - a) * (1.0 - theta.cos());
        let v = g(s);
        if v > best {
            best = v;
            best_at = s;
        }
    }
    // golden-section polish around the best sample
    let width = (b - a) * std::f64::consts::PI / SAMPLES as f64;
    let (mut lo, mut hi) = ((best_at - width).max(a), (best_at + width).min(b));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        let (g1, g2) = (g(m1), g(m2));
        if g1.max(g2) > best {
            best = g1.max(g2);
            best_at = if g1 > g2 { m1 } else { m2 };
        }
        if g1 > g2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    if best == f64::NEG_INFINITY {
        return Ok(ScaledValue::ZERO);
    }
    let mut shift = best;
    // splitting at the peak keeps narrow maxima away from the initial panel
    let split = best_at > a && best_at < b;
    for _ in 0..4 {
        let seen = Cell::new(f64::NEG_INFINITY);
        let mut f = |s: f64| {
            let v = g(s);
            if v > seen.get() {
                seen.set(v);
            }
            (v - shift).exp()
        };
        let r = if split {
            integrate(&mut f, a, best_at, opts).and_then(|p| {
                integrate(&mut f, best_at, b, opts).map(|q| QuadResult {
                    value: p.value + q.value,
                    error: p.error + q.error,
                    evaluations: p.evaluations + q.evaluations,
                })
            })
        } else {
            integrate(&mut f, a, b, opts)
        };
        match r {
            Ok(q) if q.value.is_finite() => return Ok(ScaledValue::exp(shift) * q.value),
            Ok(_) | Err(Error::Quadrature { .. }) if seen.get() > shift + 600.0 => {
                shift = seen.get();
            }
            Ok(q) => {
                return Err(Error::Quadrature {
                    estimate: q.value,
                    error: q.error,
                    evaluations: q.evaluations,
                    context: "log-scaled integrand".into(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Quadrature {
        estimate: f64::NAN,
        error: f64::NAN,
        evaluations: 0,
        context: "log-scaled integrand: could not bracket the maximum".into(),
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, cached per order.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    const MAX: usize = 128;
    static RULES: [OnceLock<Vec<(f64, f64)>>; MAX + 1] = [const { OnceLock::new() }; MAX + 1];
    assert!((1..=MAX).contains(&n), "Gauss–Legendre order {n} out of range");
    RULES[n].get_or_init(|| legendre_rule(n))
}

fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.reverse();
    rule
}

/// Fixed-order Gauss–Legendre sum of `f` over `[a, b]`.
pub fn gauss_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    gauss_legendre(n)
        .iter()
        .map(|&(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_polynomials() {
        // K15 integrates degree <= 22 exactly, G7 degree <= 13
        let mut f = |x: f64| x.powi(12) - 3.0 * x.powi(5) + 2.0;
        let (v, e) = kronrod15(&mut f, -1.0, 2.0);
        let exact = (2f64.powi(13) + 1.0) / 13.0 - 3.0 * (64.0 - 1.0) / 6.0 + 6.0;
        assert!((v - exact).abs() < 1e-11 * exact.abs());
        assert!(e < 1e-9 * exact.abs());
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in [1, 2, 5, 24, 64] {
            let s = gauss_fixed(|x| x.powi(2 * n as i32 - 1) + x.powi(2 * n as i32 - 2), -1.0, 1.0, n);
            let exact = 2.0 / (2 * n - 1) as f64;
            assert!((s - exact).abs() < 1e-13, "n = {n}: {s} vs {exact}");
        }
        let w: f64 = gauss_legendre(33).iter().map(|p| p.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, &QuadOptions::rel(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, &QuadOptions::rel(1e-12)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn log_scaled_integral_of_underflowing_gaussian() {
        // ∫_{0}^{1} exp(-1e4 - (s - 0.3)^2 / 1e-4) ds = e^{-1e4} * sqrt(pi) * 1e-2
        let v = integrate_log(|s| -1e4 - (s - 0.3) * (s - 0.3) / 1e-4, 0.0, 1.0, &QuadOptions::rel(1e-12)).unwrap();
        let expected = -1e4 + (std::f64::consts::PI.sqrt() * 1e-2).ln();
        assert!((v.log_mag() - expected).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-15,
            max_intervals: 3,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
