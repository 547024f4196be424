use super::bessel::{bessel_i, bessel_k_pair};
use super::Dimension;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::scaled::ScaledValue;

/// `l, l', k, k'` at one argument.
#[derive(Clone, Copy, Debug)]
pub struct Radial {
    pub l: ScaledValue,
    pub lp: ScaledValue,
    pub k: ScaledValue,
    pub kp: ScaledValue,
}

impl Radial {
    pub fn at(dim: Dimension, z: f64) -> Result<Self> {
        let n = dim.order();
        check_arg(z)?;
        let pow = ScaledValue::exp(-n * z.ln());
        let (k0, k1) = bessel_k_pair(n, z)?;
        Ok(Radial {
            l: pow * bessel_i(n, z)?,
            lp: pow * bessel_i(n + 1.0, z)?,
            k: pow * k0,
            kp: -(pow * k1),
        })
    }

    /// `k` only, skipping the `I` evaluations.
    pub fn k_only(dim: Dimension, z: f64) -> Result<(ScaledValue, ScaledValue)> {
        let n = dim.order();
        check_arg(z)?;
        let pow = ScaledValue::exp(-n * z.ln());
        let (k0, k1) = bessel_k_pair(n, z)?;
        Ok((pow * k0, -(pow * k1)))
    }

    pub fn a(&self) -> ScaledValue {
        self.l / self.k
    }

    pub fn b(&self) -> ScaledValue {
        self.lp / self.kp
    }
}

fn check_arg(z: f64) -> Result<()> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::domain("radial function", format!("argument {z} must be positive")));
    }
    Ok(())
}

fn check_tau(lambda: f64, z: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain("tau/psi", format!("λ = {lambda} must be positive")));
    }
    if !(z.is_finite() && z >= 1.0) {
        return Err(Error::domain("tau/psi", format!("z = {z} must be at least 1")));
    }
    Ok(())
}

pub fn small_l(dim: Dimension, z: f64) -> Result<ScaledValue> {
    check_arg(z)?;
    Ok(ScaledValue::exp(-dim.order() * z.ln()) * bessel_i(dim.order(), z)?)
}

pub fn small_l_prime(dim: Dimension, z: f64) -> Result<ScaledValue> {
    check_arg(z)?;
    Ok(ScaledValue::exp(-dim.order() * z.ln()) * bessel_i(dim.order() + 1.0, z)?)
}

pub fn small_k(dim: Dimension, z: f64) -> Result<ScaledValue> {
    Ok(Radial::k_only(dim, z)?.0)
}

pub fn small_k_prime(dim: Dimension, z: f64) -> Result<ScaledValue> {
    Ok(Radial::k_only(dim, z)?.1)
}

/// `z^{d-2} k(z)`.
pub fn k_tilde(dim: Dimension, z: f64) -> Result<ScaledValue> {
    Ok(ScaledValue::exp((dim.d() - 2.0) * z.ln()) * small_k(dim, z)?)
}

pub fn ratio_a(dim: Dimension, lambda: f64) -> Result<ScaledValue> {
    check_arg(lambda)?;
    let n = dim.order();
    Ok(bessel_i(n, lambda)? / bessel_k_pair(n, lambda)?.0)
}

pub fn ratio_b(dim: Dimension, lambda: f64) -> Result<ScaledValue> {
    check_arg(lambda)?;
    let n = dim.order();
    Ok(-(bessel_i(n + 1.0, lambda)? / bessel_k_pair(n, lambda)?.1))
}

/// Above this ratio of subtracted to leading term the difference is taken
/// from the Wronskian integral instead.
const CANCELLATION: f64 = 0.5;
const GL_NODES: usize = 24;

/// `∫_0^{ln z} (λe^v)^{2-d} / g(λe^v)^2 dv` in extended range, where `g` is
/// `k` or `k'` (selected by `use_prime`).
fn wronskian_integral(dim: Dimension, lambda: f64, z: f64, use_prime: bool) -> Result<ScaledValue> {
    let len = z.ln();
    let mut logs = [0.0; GL_NODES];
    let rule = gauss_legendre(GL_NODES);
    for (slot, &(x, _)) in logs.iter_mut().zip(rule) {
        let v = 0.5 * len * (1.0 + x);
        let s = lambda * v.exp();
        let (k, kp) = Radial::k_only(dim, s)?;
        let g = if use_prime { kp } else { k };
        *slot = (2.0 - dim.d()) * s.ln() - 2.0 * g.log_mag();
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs
        .iter()
        .zip(rule)
        .map(|(&lg, &(_, w))| w * (lg - top).exp())
        .sum();
    Ok(ScaledValue::exp(top) * (0.5 * len * sum))
}

/// `τ_λ(z) = l(λz) - A(λ) k(λz)`, positive for `z > 1`.
pub fn tau(dim: Dimension, lambda: f64, z: f64) -> Result<ScaledValue> {
    check_tau(lambda, z)?;
    if z == 1.0 {
        return Ok(ScaledValue::ZERO);
    }
    let a = ratio_a(dim, lambda)?;
    let at = Radial::at(dim, lambda * z)?;
    tau_from(dim, lambda, z, a, &at)
}

pub(crate) fn tau_from(dim: Dimension, lambda: f64, z: f64, a: ScaledValue, at: &Radial) -> Result<ScaledValue> {
    if z == 1.0 {
        return Ok(ScaledValue::ZERO);
    }
    let sub = a * at.k;
    if (sub / at.l).to_f64() <= CANCELLATION {
        return Ok(at.l.sub(sub));
    }
    // A(λz) - A(λ) = ∫ s^{1-d} / k(s)^2 ds
    Ok(at.k * wronskian_integral(dim, lambda, z, false)?)
}

/// `d/dz τ_λ(z) = λ (l'(λz) - A(λ) k'(λz))`; both terms are positive.
pub fn tau_prime(dim: Dimension, lambda: f64, z: f64) -> Result<ScaledValue> {
    check_tau(lambda, z)?;
    let a = ratio_a(dim, lambda)?;
    let at = Radial::at(dim, lambda * z)?;
    Ok(tau_prime_from(lambda, a, &at))
}

pub(crate) fn tau_prime_from(lambda: f64, a: ScaledValue, at: &Radial) -> ScaledValue {
    at.lp.add(a * at.kp.abs()) * lambda
}

/// `ψ_λ(z) = l(λz) - B(λ) k(λz)`; `B < 0`, so both terms are positive.
pub fn psi(dim: Dimension, lambda: f64, z: f64) -> Result<ScaledValue> {
    check_tau(lambda, z)?;
    let b = ratio_b(dim, lambda)?;
    let at = Radial::at(dim, lambda * z)?;
    Ok(psi_from(b, &at))
}

pub(crate) fn psi_from(b: ScaledValue, at: &Radial) -> ScaledValue {
    at.l.add(b.abs() * at.k)
}

/// `d/dz ψ_λ(z) = λ (l'(λz) - B(λ) k'(λz))`, zero at `z = 1`.
pub fn psi_prime(dim: Dimension, lambda: f64, z: f64) -> Result<ScaledValue> {
    check_tau(lambda, z)?;
    if z == 1.0 {
        return Ok(ScaledValue::ZERO);
    }
    let b = ratio_b(dim, lambda)?;
    let at = Radial::at(dim, lambda * z)?;
    psi_prime_from(dim, lambda, z, b, &at)
}

pub(crate) fn psi_prime_from(dim: Dimension, lambda: f64, z: f64, b: ScaledValue, at: &Radial) -> Result<ScaledValue> {
    if z == 1.0 {
        return Ok(ScaledValue::ZERO);
    }
    let sub = b.abs() * at.kp.abs();
    if (sub / at.lp).to_f64() <= CANCELLATION {
        return Ok(at.lp.sub(sub) * lambda);
    }
    // B(λz) - B(λ) = -∫ s^{1-d} / k'(s)^2 ds
    Ok(at.kp.abs() * wronskian_integral(dim, lambda, z, true)? * lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn d3() -> Dimension {
        Dimension::new(3.0).unwrap()
    }

    /// d = 3 closed forms: l = sqrt(2/π) sinh z / z, k = sqrt(π/2) e^{-z}/z.
    fn tau3(lambda: f64, z: f64) -> f64 {
        let s = lambda * z;
        let a = (2.0 / PI) * lambda.sinh() * lambda.exp();
        ((2.0 / PI).sqrt() * s.sinh() - a * (PI / 2.0).sqrt() * (-s).exp()) / s
    }

    #[test]
    fn closed_forms_in_three_dimensions() {
        let l = small_l(d3(), 1.0).unwrap().to_f64();
        assert!((l - 0.937_674_888_245_488).abs() < 1e-14);
        let k = small_k(d3(), 1.0).unwrap().to_f64();
        assert!((k - 0.461_068_504_447_894).abs() < 1e-14);
        let a = ratio_a(d3(), 1.0).unwrap().to_f64();
        assert!((a - 2.033_699_719_672_5).abs() < 1e-12);
        let t = tau(d3(), 0.5, 2.0).unwrap().to_f64();
        assert!((t - 0.685_495_271_017_79).abs() < 1e-12);
    }

    #[test]
    fn cancellation_route_near_the_boundary() {
        // τ_λ(1+ε) ≈ τ'_λ(1) ε
        for &lambda in &[1e-3, 0.3, 1.0, 40.0, 3000.0] {
            for &step in &[1e-9, 1e-7, 1e-6, 1e-3] {
                let z: f64 = 1.0 + step;
                let eps = z - 1.0;
                let t = tau(d3(), lambda, z).unwrap();
                // τ'_λ(1) = λ · λ^{1-d} / k(λ)
                let slope = ScaledValue::exp((2.0 - 3.0) * lambda.ln()) / small_k(d3(), lambda).unwrap();
                let expect = slope * eps;
                let err = (t / expect).to_f64() - 1.0;
                assert!(err.abs() < (2.0 * lambda + 2.0) * eps + 1e-9, "λ={lambda} ε={eps}: {err}");
            }
        }
        let t = tau(d3(), 0.5, 1.0 + 1e-6).unwrap().to_f64();
        assert!((t / tau3(0.5, 1.0 + 1e-6) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn boundary_values_vanish_exactly() {
        let dim = Dimension::new(3.7).unwrap();
        assert!(tau(dim, 2.0, 1.0).unwrap().is_zero());
        assert!(psi_prime(dim, 2.0, 1.0).unwrap().is_zero());
        assert!(tau(dim, 0.0, 2.0).is_err());
        assert!(psi(dim, 1.0, 0.5).is_err());
    }

    #[test]
    fn large_lambda_stays_finite() {
        let dim = Dimension::new(4.0).unwrap();
        let a = ratio_a(dim, 5000.0).unwrap();
        assert!(a.is_finite() && (a.log_mag() - 10_000.0).abs() < 20.0);
        let b = ratio_b(dim, 5000.0).unwrap();
        assert_eq!(b.sign(), -1);
        let t = tau(dim, 5000.0, 1.5).unwrap();
        assert!(t.is_finite() && t.sign() == 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn signs_and_positivity(d in 2.05f64..6.0, lambda in 1e-3f64..200.0, z in 1.0f64..50.0) {
            let dim = Dimension::new(d).unwrap();
            prop_assert!(ratio_a(dim, lambda).unwrap().sign() > 0);
            prop_assert!(ratio_b(dim, lambda).unwrap().sign() < 0);
            prop_assert!(small_k_prime(dim, lambda).unwrap().sign() < 0);
            prop_assert!(psi(dim, lambda, z).unwrap().sign() > 0);
            prop_assert!(tau_prime(dim, lambda, z).unwrap().sign() > 0);
            if z > 1.0 {
                prop_assert!(tau(dim, lambda, z).unwrap().sign() > 0);
                prop_assert!(psi_prime(dim, lambda, z).unwrap().sign() > 0);
            }
        }

        #[test]
        fn wronskian_identity(d in 2.05f64..8.0, z in 1e-4f64..600.0) {
            // l'k - k'l = z^{1-d}
            let dim = Dimension::new(d).unwrap();
            let r = Radial::at(dim, z).unwrap();
            let w = (r.lp * r.k).sub(r.kp * r.l);
            prop_assert!((w.log_mag() - (1.0 - d) * z.ln()).abs() < 1e-12);
        }

        #[test]
        fn a_times_k_is_l(d in 2.05f64..6.0, lambda in 1e-4f64..2000.0) {
            let dim = Dimension::new(d).unwrap();
            let r = Radial::at(dim, lambda).unwrap();
            let back = ratio_a(dim, lambda).unwrap() * r.k;
            prop_assert!(((back / r.l).to_f64() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn a_is_increasing(d in 2.05f64..6.0, lambda in 1e-3f64..500.0, step in 1e-3f64..1.0) {
            let dim = Dimension::new(d).unwrap();
            prop_assert!(ratio_a(dim, lambda * (1.0 + step)).unwrap() > ratio_a(dim, lambda).unwrap());
        }

        #[test]
        fn integral_route_matches_direct_where_both_apply(d in 2.05f64..6.0, lambda in 1e-2f64..2.0, z in 1.05f64..2.0) {
            // where cancellation is mild both paths are accurate
            let dim = Dimension::new(d).unwrap();
            let at = Radial::at(dim, lambda * z).unwrap();
            let a = ratio_a(dim, lambda).unwrap();
            let direct = at.l.sub(a * at.k);
            let integral = at.k * wronskian_integral(dim, lambda, z, false).unwrap();
            let rel = (direct.sub(integral) / direct).to_f64().abs();
            let cancel = (a * at.k / at.l).to_f64();
            prop_assert!(rel < 1e-13 / (1.0 - cancel) + 1e-11, "rel {rel} cancel {cancel}");
        }
    }
}
