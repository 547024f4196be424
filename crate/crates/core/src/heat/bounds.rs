//! Two-sided Gaussian sandwiches for sampled heat kernels.

use serde::{Deserialize, Serialize};

use super::kernel::HeatKernelField;
use crate::fit::{line_fit, LineFit};
use crate::space::{
    half_ball_measure, half_ball_measure_hd2, hat_ball_measure_h2, h_d, h_hat, measure_ball, rho, Ball, GluedPoint,
};
use crate::error::Result;
use crate::specfun::Dimension;

/// One `(x, y, t)` cell: the log kernel value and the log of each candidate
/// lower and upper shape.
#[derive(Clone, Debug)]
pub struct SandwichCell {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub log_value: f64,
    pub log_lower: Vec<f64>,
    pub log_upper: Vec<f64>,
}

/// Best constants: `C⁻¹ lower ≤ value ≤ C upper` on every cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichFit {
    pub lower_label: String,
    pub upper_label: String,
    pub c_low: f64,
    pub c_up: f64,
    /// `max(c_low, c_up)`.
    pub constant: f64,
    pub worst_low: (f64, f64, f64),
    pub worst_up: (f64, f64, f64),
    pub cells: usize,
}

/// Picks the lower and upper candidates with the smallest constants.
pub fn fit_sandwich(cells: &[SandwichCell], lower_labels: &[String], upper_labels: &[String]) -> Option<SandwichFit> {
    if cells.is_empty() {
        return None;
    }
    let best = |n: usize, excess: &dyn Fn(&SandwichCell, usize) -> f64| {
        (0..n)
            .map(|k| {
                let (mut worst, mut at) = (f64::NEG_INFINITY, (0.0, 0.0, 0.0));
                for c in cells {
                    let e = excess(c, k);
                    if e > worst || e.is_nan() {
                        worst = if e.is_nan() { f64::INFINITY } else { e };
                        at = (c.x, c.y, c.t);
                    }
                }
                (k, worst, at)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
    };
    let (kl, low, at_low) = best(lower_labels.len(), &|c, k| c.log_lower[k] - c.log_value);
    let (ku, up, at_up) = best(upper_labels.len(), &|c, k| c.log_value - c.log_upper[k]);
    let (c_low, c_up) = (low.exp(), up.exp());
    Some(SandwichFit {
        lower_label: lower_labels[kl].clone(),
        upper_label: upper_labels[ku].clone(),
        c_low,
        c_up,
        constant: c_low.max(c_up),
        worst_low: at_low,
        worst_up: at_up,
        cells: cells.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SandwichConfig {
    /// Candidates for the lower Gaussian constant.
    pub c_lower: Vec<f64>,
    /// Candidates for the upper one (multiples of the natural scale 4).
    pub c_upper: Vec<f64>,
    /// Cells with `T < floor · max_x T(x, y)` are not resolved by the
    /// discretization and are skipped.
    pub floor: f64,
    pub x_range: f64,
    pub c_max: f64,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        SandwichConfig {
            c_lower: vec![2.0, 4.0, 8.0, 16.0],
            c_upper: vec![2.0, 4.0, 8.0, 16.0],
            floor: 1e-8,
            x_range: 20.0,
            c_max: 50.0,
        }
    }
}

impl SandwichConfig {
    fn labels(v: &[f64]) -> Vec<String> {
        v.iter().map(|c| format!("c={c}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    SameSide,
    OppositeSide,
}

/// `P(x, y) e^{-ρ²/(c t)} / μ(B(x, √t))` with `P = 1` on the same side and
/// `P = |x|^{2-d} + |y|^{2-d}` across the junction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundShape {
    pub kind: BoundKind,
    pub c_gauss: f64,
}

impl BoundShape {
    pub fn log_eval(&self, dim: Dimension, x: GluedPoint, y: GluedPoint, t: f64) -> f64 {
        let ball = Ball { center: x, radius: t.sqrt() };
        let e = 2.0 - dim.d();
        let pre = match self.kind {
            BoundKind::SameSide => 0.0,
            BoundKind::OppositeSide => (x.r.powf(e) + y.r.powf(e)).ln(),
        };
        pre - measure_ball(dim, &ball).ln() - rho(x, y).powi(2) / (self.c_gauss * t)
    }

    pub fn eval(&self, dim: Dimension, x: GluedPoint, y: GluedPoint, t: f64) -> f64 {
        self.log_eval(dim, x, y, t).exp()
    }
}

pub fn bound_kind(x: GluedPoint, y: GluedPoint) -> BoundKind {
    if x.side == y.side || x.r == 1.0 || y.r == 1.0 {
        BoundKind::SameSide
    } else {
        BoundKind::OppositeSide
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichReport {
    pub d: f64,
    pub config: SandwichConfig,
    /// Shared constants for both regimes.
    pub joint: Option<SandwichFit>,
    pub same_side: Option<SandwichFit>,
    pub opposite_side: Option<SandwichFit>,
    pub cells: usize,
    pub below_floor: usize,
    pub pass: bool,
}

fn cells_from<F>(fields: &[HeatKernelField], cfg: &SandwichConfig, mut shape: F) -> (Vec<(SandwichCell, BoundKind)>, usize)
where
    F: FnMut(GluedPoint, GluedPoint, f64, f64) -> Option<(f64, Vec<f64>, Vec<f64>, BoundKind)>,
{
    let mut out = Vec::new();
    let mut skipped = 0;
    for f in fields {
        for (j, &y) in f.cols.iter().enumerate() {
            if y.r > cfg.x_range {
                continue;
            }
            let floor = cfg.floor * f.column_max(j);
            for (i, &x) in f.rows.iter().enumerate() {
                if x.r > cfg.x_range {
                    continue;
                }
                let v = f.get(i, j);
                if !(v > floor) {
                    skipped += 1;
                    continue;
                }
                if let Some((log_value, lo, hi, kind)) = shape(x, y, f.t, v) {
                    out.push((
                        SandwichCell {
                            x: x.x(),
                            y: y.x(),
                            t: f.t,
                            log_value,
                            log_lower: lo,
                            log_upper: hi,
                        },
                        kind,
                    ));
                }
            }
        }
    }
    (out, skipped)
}

fn report(dim: Dimension, cfg: &SandwichConfig, cells: Vec<(SandwichCell, BoundKind)>, skipped: usize) -> SandwichReport {
    let lo = SandwichConfig::labels(&cfg.c_lower);
    let hi = SandwichConfig::labels(&cfg.c_upper);
    let pick = |k: BoundKind| -> Vec<SandwichCell> { cells.iter().filter(|c| c.1 == k).map(|c| c.0.clone()).collect() };
    let all: Vec<SandwichCell> = cells.iter().map(|c| c.0.clone()).collect();
    let joint = fit_sandwich(&all, &lo, &hi);
    let pass = joint.as_ref().is_some_and(|f| f.constant.is_finite() && f.constant <= cfg.c_max);
    SandwichReport {
        d: dim.d(),
        config: cfg.clone(),
        joint,
        same_side: fit_sandwich(&pick(BoundKind::SameSide), &lo, &hi),
        opposite_side: fit_sandwich(&pick(BoundKind::OppositeSide), &lo, &hi),
        cells: all.len(),
        below_floor: skipped,
        pass,
    }
}

/// Sandwich of the glued kernel by the same-side and opposite-side shapes.
pub fn verify_bounds(dim: Dimension, fields: &[HeatKernelField], cfg: &SandwichConfig) -> SandwichReport {
    let (cells, skipped) = cells_from(fields, cfg, |x, y, t, v| {
        let kind = bound_kind(x, y);
        let shape = |c: &f64| BoundShape { kind, c_gauss: *c }.log_eval(dim, x, y, t);
        Some((v.ln(), cfg.c_lower.iter().map(shape).collect(), cfg.c_upper.iter().map(shape).collect(), kind))
    });
    report(dim, cfg, cells, skipped)
}

/// `T_{t,D}(x,y) / (h_D(x) h_D(y))` against `e^{-|x-y|²/(ct)} / μ_{h_D²}(B(x,√t))`.
pub fn verify_gauss2(dim: Dimension, fields: &[HeatKernelField], cfg: &SandwichConfig) -> SandwichReport {
    let (cells, skipped) = cells_from(fields, cfg, |x, y, t, v| {
        if x.r <= 1.0 || y.r <= 1.0 {
            return None;
        }
        let base = -half_ball_measure_hd2(dim, x.r, t.sqrt()).ln();
        let q = (x.r - y.r).powi(2) / t;
        let shape = |c: &f64| base - q / c;
        let lv = v.ln() - h_d(dim, x.r).ln() - h_d(dim, y.r).ln();
        Some((lv, cfg.c_lower.iter().map(shape).collect(), cfg.c_upper.iter().map(shape).collect(), BoundKind::SameSide))
    });
    report(dim, cfg, cells, skipped)
}

/// `T̂_t(x,y) / (ĥ(x) ĥ(y))` against `e^{-ρ²/(ct)} / μ_{ĥ²}(B(x,√t))`.
pub fn verify_gauss3(dim: Dimension, fields: &[HeatKernelField], cfg: &SandwichConfig) -> SandwichReport {
    let (cells, skipped) = cells_from(fields, cfg, |x, y, t, v| {
        let (hx, hy) = (h_hat(dim, x).ok()?, h_hat(dim, y).ok()?);
        if hx <= 0.0 || hy <= 0.0 {
            return None;
        }
        let base = -hat_ball_measure_h2(dim, &Ball { center: x, radius: t.sqrt() }).ln();
        let q = rho(x, y).powi(2) / t;
        let shape = |c: &f64| base - q / c;
        Some((v.ln() - hx.ln() - hy.ln(), cfg.c_lower.iter().map(shape).collect(), cfg.c_upper.iter().map(shape).collect(), bound_kind(x, y)))
    });
    report(dim, cfg, cells, skipped)
}

/// Half-line Gaussian shape of the Neumann kernel, `e^{-|x-y|²/(ct)}/μ(B₊(x,√t))`.
pub fn verify_gauss1(dim: Dimension, fields: &[HeatKernelField], cfg: &SandwichConfig) -> SandwichReport {
    let (cells, skipped) = cells_from(fields, cfg, |x, y, t, v| {
        let base = -half_ball_measure(dim, x.r, t.sqrt()).ln();
        let q = (x.r - y.r).powi(2) / t;
        let shape = |c: &f64| base - q / c;
        Some((v.ln(), cfg.c_lower.iter().map(shape).collect(), cfg.c_upper.iter().map(shape).collect(), BoundKind::SameSide))
    });
    report(dim, cfg, cells, skipped)
}

/// Worst `(T̂ - T)/max T` over the rows shared by a glued field and a hat
/// field with the same time and sources.
pub fn hat_domination_defect(glued: &HeatKernelField, hat: &HeatKernelField) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (jh, y) in hat.cols.iter().enumerate() {
        let Some(jg) = glued.cols.iter().position(|c| c == y) else { continue };
        let scale = glued.column_max(jg);
        for (ih, x) in hat.rows.iter().enumerate() {
            if let Some(ig) = glued.rows.iter().position(|r| r == x) {
                worst = worst.max((hat.get(ih, jh) - glued.get(ig, jg)) / scale);
            }
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrefactorReport {
    pub d: f64,
    pub t: f64,
    pub m: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: LineFit,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Regression of `log T_t(m, -m)` against `log m`; the opposite-side
/// prefactor predicts slope `2 - d` once `t ≫ m²`.
pub fn prefactor_slope(dim: Dimension, field: &HeatKernelField, tol: f64) -> Result<PrefactorReport> {
    let mut m = Vec::new();
    let mut values = Vec::new();
    for (j, y) in field.cols.iter().enumerate() {
        if let Some(i) = field.rows.iter().position(|r| r.side != y.side && r.r == y.r) {
            m.push(y.r);
            values.push(field.get(i, j));
        }
    }
    let lx: Vec<f64> = m.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = line_fit(&lx, &ly);
    let expected = 2.0 - dim.d();
    Ok(PrefactorReport {
        d: dim.d(),
        t: field.t,
        m,
        values,
        pass: (fit.slope - expected).abs() <= tol,
        fit,
        expected,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(v: f64, lo: Vec<f64>, hi: Vec<f64>) -> SandwichCell {
        SandwichCell { x: 0.0, y: 0.0, t: 1.0, log_value: v, log_lower: lo, log_upper: hi }
    }

    #[test]
    fn fit_picks_the_tightest_candidates() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let cells = vec![cell(0.0, vec![1.0, -1.0], vec![-2.0, 0.5]), cell(1.0, vec![0.0, 0.5], vec![0.0, 2.0])];
        let f = fit_sandwich(&cells, &labels, &labels).unwrap();
        assert_eq!(f.lower_label, "b");
        assert_eq!(f.upper_label, "b");
        assert!((f.c_low.ln() + 0.5).abs() < 1e-12);
        assert!((f.c_up.ln() + 0.5).abs() < 1e-12);
        assert!((f.constant - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn shapes_are_positive_and_decay() {
        let dim = Dimension::new(3.0).unwrap();
        let x = GluedPoint::plus(2.0);
        let near = BoundShape { kind: BoundKind::OppositeSide, c_gauss: 4.0 }.eval(dim, x, GluedPoint::minus(2.0), 1.0);
        let far = BoundShape { kind: BoundKind::OppositeSide, c_gauss: 4.0 }.eval(dim, x, GluedPoint::minus(6.0), 1.0);
        assert!(near > far && far > 0.0);
        assert_eq!(bound_kind(GluedPoint::plus(1.0), GluedPoint::minus(3.0)), BoundKind::SameSide);
    }
}
