//! The opposite-side kernel through the boundary hitting time: the
//! quantities `Π`, `Ψ`, `Φ`, the hitting-density shape and its convolution
//! with the Neumann kernel from the junction.

use serde::{Deserialize, Serialize};

use super::bounds::{fit_sandwich, SandwichCell, SandwichFit};
use super::kernel::HeatKernelField;
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_log, integrate_to_infinity, QuadOptions};
use crate::scaled::ScaledValue;
use crate::space::Side;
use crate::specfun::Dimension;

const W_MAX: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn check(what: &'static str, ok: bool, detail: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain(what, detail))
    }
}

/// `Π_{c1,c2}(x,y,t)`, integrated in `s = t w²` on `(0, t/2)` and
/// `t - s = t v²` on `(t/2, t)` so both endpoint singularities become
/// bounded.
pub fn pi_integral(dim: Dimension, c1: f64, c2: f64, x: f64, y: f64, t: f64, opts: &QuadOptions) -> Result<ScaledValue> {
    check("pi_integral", x >= 1.0 && y >= 1.0 && t > 0.0 && c1 > 0.0 && c2 > 0.0, "needs x, y ≥ 1 and t, c > 0")?;
    if y == 1.0 {
        return Ok(ScaledValue::ZERO);
    }
    let d = dim.d();
    let (ax, ay) = ((x - 1.0).powi(2) / c1, (y - 1.0).powi(2) / c2);
    let common = ((y - 1.0) / y).ln();
    let ln_t = t.ln();
    let head = integrate_log(
        |w| {
            if w <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let s = t * w * w;
            let u = t - s;
            std::f64::consts::LN_2 - 0.5 * ln_t - 2.0 * w.ln() - 0.5 * u.ln() - (d - 1.0) * (x + u.sqrt()).ln() + common
                - 0.5 * (d - 3.0) * (s + y).ln()
                - ax / u
                - ay / s
        },
        0.0,
        W_MAX,
        opts,
    )?;
    let tail = integrate_log(
        |v| {
            let u = t * v * v;
            let s = t - u;
            let gauss_x = if ax == 0.0 {
                0.0
            } else if v <= 0.0 {
                return f64::NEG_INFINITY;
            } else {
                ax / u
            };
            std::f64::consts::LN_2 + 0.5 * ln_t - (d - 1.0) * (x + u.sqrt()).ln() + common - 1.5 * s.ln()
                - 0.5 * (d - 3.0) * (s + y).ln()
                - gauss_x
                - ay / s
        },
        0.0,
        W_MAX,
        opts,
    )?;
    Ok(head.add(tail))
}

/// `Ψ(y,t) = ∫_0^{t/2} s^{-3/2} (s+y)^{-(d-3)/2} e^{-y²/(c4 s)} ds`.
pub fn psi_integral(dim: Dimension, c4: f64, y: f64, t: f64, opts: &QuadOptions) -> Result<ScaledValue> {
    check("psi_integral", y >= 1.0 && t > 0.0 && c4 > 0.0, "needs y ≥ 1 and t, c4 > 0")?;
    let d = dim.d();
    let a = y * y / c4;
    let ln_t = t.ln();
    integrate_log(
        |w| {
            if w <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let s = t * w * w;
            std::f64::consts::LN_2 - 0.5 * ln_t - 2.0 * w.ln() - 0.5 * (d - 3.0) * (s + y).ln() - a / s
        },
        0.0,
        W_MAX,
        opts,
    )
}

/// `Φ(x,t) = ∫_0^{t/2} s^{-1/2} (x+√s)^{1-d} e^{-x²/(c1 s)} ds`.
pub fn phi_integral(dim: Dimension, c1: f64, x: f64, t: f64, opts: &QuadOptions) -> Result<ScaledValue> {
    check("phi_integral", x >= 1.0 && t > 0.0 && c1 > 0.0, "needs x ≥ 1 and t, c1 > 0")?;
    let d = dim.d();
    let a = x * x / c1;
    let half_ln_t = 0.5 * t.ln();
    integrate_log(
        |w| {
            if w <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let s = t * w * w;
            std::f64::consts::LN_2 + half_ln_t - (d - 1.0) * (x + s.sqrt()).ln() - a / s
        },
        0.0,
        W_MAX,
        opts,
    )
}

/// Log of the hitting-density shape at `s > 0`.
pub fn log_hitting_density_comparand(dim: Dimension, y: f64, s: f64) -> f64 {
    if s <= 0.0 || y <= 1.0 {
        return f64::NEG_INFINITY;
    }
    let d = dim.d();
    (y - 1.0).ln() + (d - 3.0) * y.ln() - (1.0 + y.powf(d - 2.0)).ln() - (y - 1.0).powi(2) / (4.0 * s)
        - 0.5 * (d - 3.0) * (s + y).ln()
        - 1.5 * s.ln()
}

/// `(y-1) y^{d-3}/(1+y^{d-2}) · e^{-(y-1)²/(4s)} / ((s+y)^{(d-3)/2} s^{3/2})`.
pub fn hitting_density_comparand(dim: Dimension, y: f64, s: f64) -> f64 {
    log_hitting_density_comparand(dim, y, s).exp()
}

/// `∫_0^S` of the hitting-density shape.
pub fn hitting_mass_until(dim: Dimension, y: f64, s_max: f64, opts: &QuadOptions) -> Result<f64> {
    if s_max <= 0.0 || y <= 1.0 {
        return Ok(0.0);
    }
    // s = S w²
    let v = integrate_log(
        |w| {
            if w <= 0.0 {
                return f64::NEG_INFINITY;
            }
            log_hitting_density_comparand(dim, y, s_max * w * w) + (2.0 * s_max * w).ln()
        },
        0.0,
        1.0,
        opts,
    )?;
    Ok(v.to_f64())
}

/// Total mass `∫_0^∞` of the hitting-density shape.
pub fn hitting_total_mass(dim: Dimension, y: f64, opts: &QuadOptions) -> Result<f64> {
    let split = (y - 1.0).powi(2).max(1.0);
    let head = hitting_mass_until(dim, y, split, opts)?;
    let tail = integrate_to_infinity(|s| hitting_density_comparand(dim, y, s), split, opts)?;
    Ok(head + tail.value)
}

/// Normalized CDF of the hitting-density shape at each of `s`.
pub fn hitting_cdf(dim: Dimension, y: f64, s: &[f64], opts: &QuadOptions) -> Result<Vec<f64>> {
    let total = hitting_total_mass(dim, y, opts)?;
    s.iter().map(|&v| Ok(hitting_mass_until(dim, y, v, opts)? / total)).collect()
}

/// `τ ↦ T_{τ,N}(x, 1)` tabulated on a geometric time grid, interpolated
/// log-linearly.
#[derive(Clone, Debug)]
pub struct JunctionKernel {
    pub x: f64,
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
}

impl JunctionKernel {
    /// Reads the column of each field whose source is the junction.
    pub fn from_fields(fields: &[HeatKernelField], x: f64) -> Result<Self> {
        let mut tau = Vec::new();
        let mut values = Vec::new();
        for f in fields {
            let j = f.cols.iter().position(|c| c.r == 1.0).ok_or_else(|| Error::domain("JunctionKernel", "no source at the junction"))?;
            let i = f
                .rows
                .iter()
                .position(|r| r.side == Side::Plus && (r.r - x).abs() < 1e-12)
                .ok_or_else(|| Error::domain("JunctionKernel", format!("no row at x = {x}")))?;
            tau.push(f.t);
            values.push(f.get(i, j).max(1e-300));
        }
        Ok(JunctionKernel { x, tau, values })
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let n = self.tau.len();
        if tau <= 0.0 {
            return 0.0;
        }
        if tau <= self.tau[0] {
            // below the table: the Gaussian factor dominates away from 1,
            // the τ^{-1/2} growth at 1
            return if self.x == 1.0 {
                self.values[0] * (self.tau[0] / tau).sqrt()
            } else {
                let a = (self.x - 1.0).powi(2) / 4.0;
                self.values[0] * (a / self.tau[0] - a / tau).exp()
            };
        }
        let k = self.tau.partition_point(|&v| v < tau).min(n - 1);
        let (t0, t1) = (self.tau[k - 1].ln(), self.tau[k].ln());
        let (v0, v1) = (self.values[k - 1].ln(), self.values[k].ln());
        let w = (tau.ln() - t0) / (t1 - t0);
        (v0 + w * (v1 - v0)).exp()
    }
}

/// `∫_0^t T_{t-s,N}(x,1) · shape(y, s) ds`.
pub fn eq435_convolution(dim: Dimension, kernel: &JunctionKernel, y: f64, t: f64, opts: &QuadOptions) -> Result<f64> {
    let f = |s: f64| kernel.eval(t - s) * hitting_density_comparand(dim, y, s);
    let mid = 0.5 * t;
    Ok(integrate(f, 0.0, mid, opts)?.value + integrate(f, mid, t, opts)?.value)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiRow {
    pub c5: f64,
    /// `min y^{d-2} Ψ e^{y²/(c5 t)}` over the grid.
    pub c_low: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiReport {
    pub d: f64,
    pub c4: f64,
    pub rel_tol: f64,
    /// `max y^{d-2} Ψ`.
    pub c_up: f64,
    pub rows: Vec<PsiRow>,
    pub pass: bool,
}

impl PsiReport {
    /// Lower constant at `c5 = c4/4`.
    pub fn c_low(&self) -> f64 {
        self.rows.iter().find(|r| r.c5 == self.c4 / 4.0).map_or(f64::NAN, |r| r.c_low)
    }
}

/// `c e^{-y²/(c5 t)} ≤ y^{d-2} Ψ(y,t) ≤ C` over `ys × ts`.
pub fn verify_psi(dim: Dimension, c4: f64, ys: &[f64], ts: &[f64], rel_tol: f64) -> Result<PsiReport> {
    let opts = QuadOptions::rel(rel_tol);
    let c5s = [c4 / 8.0, c4 / 4.0, c4 / 2.0];
    let mut c_up = 0.0f64;
    let mut lows = [f64::INFINITY; 3];
    for &y in ys {
        for &t in ts {
            let lp = psi_integral(dim, c4, y, t, &opts)?.log_mag() + (dim.d() - 2.0) * y.ln();
            c_up = c_up.max(lp.exp());
            for (k, c5) in c5s.iter().enumerate() {
                lows[k] = lows[k].min((lp + y * y / (c5 * t)).exp());
            }
        }
    }
    let rows: Vec<PsiRow> = c5s.iter().zip(lows).map(|(&c5, c_low)| PsiRow { c5, c_low }).collect();
    let pass = c_up.is_finite() && rows[1].c_low > 0.0 && rows[1].c_low.is_finite();
    Ok(PsiReport { d: dim.d(), c4, rel_tol, c_up, rows, pass })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PiReport {
    pub d: f64,
    pub rel_tol: f64,
    pub fit: Option<SandwichFit>,
    pub cells: usize,
    pub pass: bool,
}

/// Opposite-side cells `(x, y, t, T_t(x,-y))` read from glued fields with
/// sources on the plus side. Cells below `floor · column max` or at `y = 1`
/// are dropped; `keep` selects the rows.
pub fn opposite_cells(fields: &[HeatKernelField], floor: f64, keep: impl Fn(f64) -> bool) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for f in fields {
        for (j, src) in f.cols.iter().enumerate() {
            if src.side != Side::Plus {
                continue;
            }
            let lim = floor * f.column_max(j);
            for (i, row) in f.rows.iter().enumerate() {
                let v = f.get(i, j);
                if row.side == Side::Minus && row.r > 1.0 && keep(row.r) && v > lim {
                    // T(-a, b) = T(b, -a): x = b, y = a
                    out.push((src.r, row.r, f.t, v));
                }
            }
        }
    }
    out
}

/// `Π_{c1',c2'} ≲ T_t(x,-y) ≲ Π_{c1'',c2''}` with the pairs drawn from
/// `cs × cs`.
pub fn verify_pi(dim: Dimension, cells: &[(f64, f64, f64, f64)], cs: &[f64], rel_tol: f64) -> Result<PiReport> {
    let opts = QuadOptions::rel(rel_tol);
    let pairs: Vec<(f64, f64)> = cs.iter().flat_map(|&a| cs.iter().map(move |&b| (a, b))).collect();
    let labels: Vec<String> = pairs.iter().map(|(a, b)| format!("c1={a},c2={b}")).collect();
    let mut sc = Vec::with_capacity(cells.len());
    for &(x, y, t, v) in cells {
        let shapes = pairs
            .iter()
            .map(|&(a, b)| pi_integral(dim, a, b, x, y, t, &opts).map(|p| p.log_mag()))
            .collect::<Result<Vec<f64>>>()?;
        sc.push(SandwichCell { x, y, t, log_value: v.ln(), log_lower: shapes.clone(), log_upper: shapes });
    }
    let fit = fit_sandwich(&sc, &labels, &labels);
    let pass = fit.as_ref().is_some_and(|f| f.constant.is_finite());
    Ok(PiReport { d: dim.d(), rel_tol, fit, cells: sc.len(), pass })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Eq435Report {
    pub d: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max(max_ratio, 1/min_ratio)`.
    pub constant: f64,
    pub cells: usize,
}

/// Ratios `T_t(x,-y) / ∫_0^t T_{t-s,N}(x,1) shape(y,s) ds`.
pub fn verify_eq435(dim: Dimension, kernels: &[JunctionKernel], cells: &[(f64, f64, f64, f64)], rel_tol: f64) -> Result<Eq435Report> {
    let opts = QuadOptions::rel(rel_tol);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut n = 0;
    for &(x, y, t, v) in cells {
        let Some(k) = kernels.iter().find(|k| (k.x - x).abs() < 1e-12) else { continue };
        let c = eq435_convolution(dim, k, y, t, &opts)?;
        if c > 0.0 {
            let r = v / c;
            lo = lo.min(r);
            hi = hi.max(r);
            n += 1;
        }
    }
    Ok(Eq435Report { d: dim.d(), min_ratio: lo, max_ratio: hi, constant: hi.max(1.0 / lo), cells: n })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiReport {
    pub d: f64,
    pub c1: f64,
    /// `max Φ(x,t) / (x^{2-d} e^{-x²/(c1 t)})`.
    pub constant: f64,
}

pub fn verify_phi(dim: Dimension, c1: f64, xs: &[f64], ts: &[f64], rel_tol: f64) -> Result<PhiReport> {
    let opts = QuadOptions::rel(rel_tol);
    let mut worst = 0.0f64;
    for &x in xs {
        for &t in ts {
            let l = phi_integral(dim, c1, x, t, &opts)?.log_mag() - (2.0 - dim.d()) * x.ln() + x * x / (c1 * t);
            worst = worst.max(l.exp());
        }
    }
    Ok(PhiReport { d: dim.d(), c1, constant: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d3() -> Dimension {
        Dimension::new(3.0).unwrap()
    }

    #[test]
    fn psi_matches_incomplete_gamma_for_d3() {
        // d = 3: Ψ = √(π c4)/y · erfc(y √(2/(c4 t)))
        let opts = QuadOptions::rel(1e-10);
        for (y, t) in [(2.0f64, 0.1f64), (2.0, 10.0), (10.0, 5.0), (50.0, 1000.0), (3.0, 1e3)] {
            let c4 = 4.0f64;
            let exact_log = (std::f64::consts::PI * c4).sqrt().ln() - y.ln() + libm::erfc(y * (2.0 / (c4 * t)).sqrt()).ln();
            let got = psi_integral(d3(), c4, y, t, &opts).unwrap().log_mag();
            assert!((got - exact_log).abs() < 1e-8, "{y} {t}: {got} vs {exact_log}");
        }
        // far in the tail erfc underflows; compare with its asymptotic form
        let (y, t, c4) = (50.0f64, 0.1f64, 4.0f64);
        let a = 2.0 * y * y / (c4 * t);
        let approx = (c4.sqrt() / y).ln() - a - 0.5 * a.ln() + (1.0 - 0.5 / a).ln();
        let got = psi_integral(d3(), c4, y, t, &opts).unwrap().log_mag();
        assert!((got - approx).abs() < 1e-6);
    }

    #[test]
    fn pi_matches_brute_force() {
        let dim = Dimension::new(4.0).unwrap();
        let (c1, c2, x, y, t) = (4.0, 2.0, 1.5, 2.5, 3.0);
        let d = dim.d();
        let f = |s: f64| {
            if s <= 0.0 || s >= t {
                return 0.0;
            }
            (t - s).powf(-0.5) / (x + (t - s).sqrt()).powf(d - 1.0) * (y - 1.0) / y * s.powf(-1.5) / (s + y).powf(0.5 * (d - 3.0))
                * (-(x - 1.0).powi(2) / (c1 * (t - s)) - (y - 1.0).powi(2) / (c2 * s)).exp()
        };
        let brute = integrate(f, 0.0, t, &QuadOptions { max_intervals: 20000, ..QuadOptions::rel(1e-12) }).unwrap().value;
        let got = pi_integral(dim, c1, c2, x, y, t, &QuadOptions::rel(1e-10)).unwrap().to_f64();
        assert!((got - brute).abs() < 1e-8 * brute, "{got} vs {brute}");
        // the x = 1 endpoint singularity (t-s)^{-1/2} is integrable
        assert!(pi_integral(dim, c1, c2, 1.0, y, t, &QuadOptions::rel(1e-10)).unwrap().to_f64() > 0.0);
        assert!(pi_integral(dim, c1, c2, x, 1.0, t, &QuadOptions::rel(1e-10)).unwrap().is_zero());
    }

    #[test]
    fn tiny_pi_values_stay_finite() {
        let v = pi_integral(d3(), 2.0, 2.0, 20.0, 20.0, 0.01, &QuadOptions::rel(1e-8)).unwrap();
        assert!(v.log_mag().is_finite() && v.log_mag() < -1e4);
    }

    #[test]
    fn hitting_shape_for_d3_is_levy() {
        // d = 3: shape = (y-1)/(1+y) · e^{-(y-1)²/(4s)} s^{-3/2}
        let y = 2.0;
        let opts = QuadOptions::rel(1e-10);
        assert_eq!(hitting_density_comparand(d3(), y, 0.0), 0.0);
        assert!(hitting_density_comparand(d3(), y, 1e-3) < 1e-100);
        let total = hitting_total_mass(d3(), y, &opts).unwrap();
        let exact = (4.0 * std::f64::consts::PI).sqrt() / (1.0 + y);
        assert!((total - exact).abs() < 1e-8 * exact);
        let cdf = hitting_cdf(d3(), y, &[0.5, 4.0], &opts).unwrap();
        for (s, c) in [0.5f64, 4.0].iter().zip(cdf) {
            assert!((c - libm::erfc((y - 1.0) / (2.0 * s.sqrt()))).abs() < 1e-8);
        }
    }

    #[test]
    fn psi_and_phi_sandwiches() {
        let ys = crate::fit::geomspace(2.0, 50.0, 8);
        let ts = crate::fit::geomspace(0.1, 1e3, 9);
        let rep = verify_psi(d3(), 4.0, &ys, &ts, 1e-8).unwrap();
        assert!(rep.pass && rep.c_up <= (4.0 * std::f64::consts::PI).sqrt() * (1.0 + 1e-8));
        assert!(rep.c_low() > 0.1);
        let phi = verify_phi(d3(), 4.0, &ys, &ts, 1e-8).unwrap();
        assert!(phi.constant.is_finite() && phi.constant > 0.0);
    }
}
