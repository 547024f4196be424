//! Special functions of the Bessel operator `-f'' - (d-1)/x f'`.
//!
//! With `n = d/2 - 1`, the radial solutions are
//! `l(z) = z^{-n} I_n(z)` (regular at 0) and `k(z) = z^{-n} K_n(z)`
//! (decaying at infinity). Derived quantities used by the Riesz kernels are
//! the ratios `A = l/k`, `B = l'/k'` and the boundary-adapted solutions
//! `τ_λ(z) = l(λz) - A(λ) k(λz)` and `ψ_λ(z) = l(λz) - B(λ) k(λz)`.

mod asymptotics;
mod bessel;
mod derived;
pub mod golden;

pub use asymptotics::{verify_asymptotics, AsymptoticRow, AsymptoticsReport, SLOPE_TOLERANCE};
pub use bessel::{bessel_i, bessel_k, bessel_k_pair};
pub use derived::{
    k_tilde, psi, psi_prime, ratio_a, ratio_b, small_k, small_k_prime, small_l, small_l_prime, tau,
    tau_prime, Radial,
};
pub(crate) use derived::{psi_from, psi_prime_from, tau_from, tau_prime_from};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The dimension parameter `d` of the Bessel operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    d: f64,
}

impl Dimension {
    /// `d > 2`, the transient regime in which `h_±` exist.
    pub fn new(d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 2.0) {
            return Err(Error::domain("Dimension", format!("d = {d} must exceed 2")));
        }
        Ok(Dimension { d })
    }

    /// `d > 0`; enough for Neumann-only computations.
    pub fn relaxed(d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::domain("Dimension", format!("d = {d} must be positive")));
        }
        Ok(Dimension { d })
    }

    pub fn d(self) -> f64 {
        self.d
    }

    /// `ν = d - 2` for `d < 3`, else 1.
    pub fn nu(self) -> f64 {
        if self.d < 3.0 {
            self.d - 2.0
        } else {
            1.0
        }
    }

    /// Bessel order `d/2 - 1`.
    pub fn order(self) -> f64 {
        0.5 * self.d - 1.0
    }

    /// Whether `d/2 - 1` is an integer, where `K` picks up log terms.
    pub fn integer_order(self) -> bool {
        let n = self.order();
        (n - n.round()).abs() < 1e-12
    }

    pub fn constants(self) -> BesselConstants {
        BesselConstants::new(self)
    }
}

/// Leading coefficients of the small- and large-argument behaviour of
/// `l, l', k, k'`:
///
/// ```text
/// l  ~ c_l,             l  ~ ct_l z^{(1-d)/2} e^{z}
/// l' ~ c_lp z,          l' ~ ct_l z^{(1-d)/2} e^{z}
/// k  ~ c_k z^{2-d},     k  ~ ct_k z^{(1-d)/2} e^{-z}
/// k' ~ -c_kp z^{1-d},   k' ~ -ct_k z^{(1-d)/2} e^{-z}
/// ```
///
/// `c_k = 2^{d/2-2} Γ(d/2-1)` follows from `K_n(z) ~ Γ(n) 2^{n-1} z^{-n}`,
/// and `c_l = 2^{1-d/2}/Γ(d/2)` from `I_n(z) ~ (z/2)^n / Γ(n+1)`.
/// `d_k` is the coefficient of the first correction
/// `k(z) - c_k z^{2-d} ~ d_k z^{2-d+ν}`, available for `2 < d ≤ 3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselConstants {
    pub c_l: f64,
    pub c_lp: f64,
    pub c_k: f64,
    pub c_kp: f64,
    pub d_k: Option<f64>,
    pub ct_l: f64,
    pub ct_k: f64,
}

impl BesselConstants {
    pub fn new(dim: Dimension) -> Self {
        let d = dim.d();
        let n = dim.order();
        let c_k = 2f64.powf(n - 1.0) * libm::tgamma(n);
        let d_k = if d < 3.0 {
            let s = (n * std::f64::consts::PI).sin();
            Some(-std::f64::consts::FRAC_PI_2 * 2f64.powf(-n) / (s * libm::tgamma(1.0 + n)))
        } else if d == 3.0 {
            Some(-std::f64::consts::FRAC_PI_2.sqrt())
        } else {
            None
        };
        BesselConstants {
            c_l: 2f64.powf(-n) / libm::tgamma(n + 1.0),
            c_lp: 1.0 / (2f64.powf(n + 1.0) * libm::tgamma(n + 2.0)),
            c_k,
            c_kp: (d - 2.0) * c_k,
            d_k,
            ct_l: (2.0 * std::f64::consts::PI).sqrt().recip(),
            ct_k: std::f64::consts::FRAC_PI_2.sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_invariants() {
        assert!(Dimension::new(2.0).is_err());
        assert!(Dimension::relaxed(1.0).is_ok());
        let d = Dimension::new(2.5).unwrap();
        assert!((d.nu() - 0.5).abs() < 1e-15);
        assert_eq!(Dimension::new(5.0).unwrap().nu(), 1.0);
        assert!(Dimension::new(4.0).unwrap().integer_order());
        assert!(!Dimension::new(3.0).unwrap().integer_order());
    }

    #[test]
    fn constant_relations() {
        for d in [2.3, 3.0, 3.5, 4.0, 6.0] {
            let c = Dimension::new(d).unwrap().constants();
            assert!((c.c_kp / c.c_k - (d - 2.0)).abs() < 1e-14);
            assert!((c.ct_l - (2.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-16);
        }
        let c3 = Dimension::new(3.0).unwrap().constants();
        // k(z) = sqrt(pi/2) e^{-z}/z for d = 3
        assert!((c3.c_k - std::f64::consts::FRAC_PI_2.sqrt()).abs() < 1e-15);
        assert!((c3.c_l - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!((Dimension::new(4.0).unwrap().constants().c_l - 0.5).abs() < 1e-15);
    }
}
