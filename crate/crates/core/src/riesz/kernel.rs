//! Riesz kernels as semi-infinite λ-integrals of the boundary-adapted radial
//! solutions. Writing `a = min(x, y)`, `b = max(x, y)`:
//!
//! ```text
//! R(x, y)    = 2/π ∫ λ^{d-2} φ'_λ(a) k(λb) dλ     x < y
//! R(x, y)    = 2/π ∫ λ^{d-1} φ_λ(a) k'(λb) dλ     y < x
//! ∂_y R(x,y) = 2/π ∫ λ^{d-1} φ'_λ(a) k'(λb) dλ    either side
//! ```
//!
//! with `φ = ψ` (Neumann) or `φ = τ` (Dirichlet).

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::scaled::ScaledValue;
use crate::space::GluedPoint;
use crate::specfun::{psi_from, psi_prime_from, ratio_a, ratio_b, tau_from, tau_prime_from, Dimension, Radial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bc {
    #[serde(alias = "n", alias = "N")]
    Neumann,
    #[serde(alias = "d", alias = "D")]
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelOptions {
    pub delta_min: f64,
    pub rel_tol: f64,
    /// `Λ = 1/min(x,y) + decay / |x - y|`.
    pub decay: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            delta_min: 1e-3,
            rel_tol: 1e-9,
            decay: 40.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub est_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Kernel,
    SlopeY,
}

#[derive(Clone, Copy)]
struct Branch {
    slope_at_a: bool,
    slope_at_b: bool,
    power: f64,
}

fn integrand(dim: Dimension, bc: Bc, lambda: f64, a: f64, b: f64, br: Branch) -> Result<ScaledValue> {
    let at = Radial::at(dim, lambda * a)?;
    let near = match (bc, br.slope_at_a) {
        (Bc::Neumann, true) => psi_prime_from(dim, lambda, a, ratio_b(dim, lambda)?, &at)?,
        (Bc::Neumann, false) => psi_from(ratio_b(dim, lambda)?, &at),
        (Bc::Dirichlet, true) => tau_prime_from(lambda, ratio_a(dim, lambda)?, &at),
        (Bc::Dirichlet, false) => tau_from(dim, lambda, a, ratio_a(dim, lambda)?, &at)?,
    };
    let (k, kp) = Radial::k_only(dim, lambda * b)?;
    let far = if br.slope_at_b { kp } else { k };
    Ok(ScaledValue::exp(br.power * lambda.ln()) * near * far)
}

fn evaluate(bc: Bc, dim: Dimension, x: f64, y: f64, shape: Shape, opts: &KernelOptions) -> Result<KernelValue> {
    for v in [x, y] {
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::domain("riesz kernel", format!("point {v} must be at least 1")));
        }
    }
    let sep = (x - y).abs();
    if sep < opts.delta_min {
        return Err(Error::NearDiagonal {
            separation: sep,
            minimum: opts.delta_min,
        });
    }
    let (a, b) = (x.min(y), x.max(y));
    let d = dim.d();
    let (slope_at_a, slope_at_b, power) = match shape {
        Shape::Kernel if x < y => (true, false, d - 2.0),
        Shape::Kernel => (false, true, d - 1.0),
        Shape::SlopeY => (true, true, d - 1.0),
    };
    let br = Branch {
        slope_at_a,
        slope_at_b,
        power,
    };
    let mut failure = None;
    let mut f = |lambda: f64| match integrand(dim, bc, lambda, a, b, br) {
        Ok(v) => v.to_f64(),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let qo = QuadOptions::rel(opts.rel_tol);
    let mut top = 1.0 / a + opts.decay / sep;
    let cuts = [0.0, 1.0 / b, 1.0 / a, top];
    let mut value = 0.0;
    let mut error = 0.0;
    for w in cuts.windows(2) {
        let r = integrate(&mut f, w[0], w[1], &qo)?;
        value += r.value;
        error += r.error;
    }
    // extend while the integrand at the cutoff could still matter
    let mut guard = 0;
    while (f(top) / sep).abs() > 1e-12 * value.abs() && guard < 20 {
        let next = top + opts.decay / sep;
        let r = integrate(&mut f, top, next, &qo)?;
        value += r.value;
        error += r.error;
        top = next;
        guard += 1;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(KernelValue {
        value: FRAC_2_PI * value,
        est_error: FRAC_2_PI * error,
    })
}

/// `R_N(x, y)` or `R_D(x, y)` for `x, y ≥ 1` off the diagonal.
pub fn riesz_kernel(bc: Bc, dim: Dimension, x: f64, y: f64, opts: &KernelOptions) -> Result<KernelValue> {
    evaluate(bc, dim, x, y, Shape::Kernel, opts)
}

/// `∂_y R(x, y)`, differentiated under the integral.
pub fn riesz_kernel_dy(bc: Bc, dim: Dimension, x: f64, y: f64, opts: &KernelOptions) -> Result<KernelValue> {
    evaluate(bc, dim, x, y, Shape::SlopeY, opts)
}

/// Kernel of `R̃`: `½(R_N ± R_D)(|x|, |y|)`, `+` on the same side. `R̃f` is
/// two-valued at the junction; there the mean of both sides, `½R_N`, is used.
pub fn glued_riesz_kernel(dim: Dimension, x: GluedPoint, y: GluedPoint, opts: &KernelOptions) -> Result<f64> {
    let n = riesz_kernel(Bc::Neumann, dim, x.r, y.r, opts)?.value;
    if x.r == 1.0 {
        return Ok(0.5 * n);
    }
    let d = riesz_kernel(Bc::Dirichlet, dim, x.r, y.r, opts)?.value;
    let sign = if x.side == y.side { 1.0 } else { -1.0 };
    Ok(0.5 * (n + sign * d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d3() -> Dimension {
        Dimension::new(3.0).unwrap()
    }

    #[test]
    fn refuses_the_diagonal() {
        let e = riesz_kernel(Bc::Neumann, d3(), 2.0, 2.0005, &KernelOptions::default()).unwrap_err();
        assert!(matches!(e, Error::NearDiagonal { .. }));
        assert!(riesz_kernel(Bc::Neumann, d3(), 0.5, 2.0, &KernelOptions::default()).is_err());
    }
}
