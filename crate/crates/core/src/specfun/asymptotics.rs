use serde::Serialize;

use super::derived::Radial;
use super::{BesselConstants, Dimension};
use crate::fit::{geomspace, line_fit, linspace};
use crate::scaled::ScaledValue;

pub const SLOPE_TOLERANCE: f64 = 0.01;
pub const COEFFICIENT_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticRow {
    pub function: &'static str,
    /// "small" fits a power of `z`, "large" an exponential rate.
    pub regime: &'static str,
    pub predicted_slope: f64,
    pub fitted_slope: f64,
    pub predicted_coefficient: f64,
    pub fitted_coefficient: f64,
    pub expected_sign: i8,
    pub sign_ok: bool,
    pub slope_ok: bool,
    pub coefficient_ok: bool,
    pub error: Option<String>,
}

impl AsymptoticRow {
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.sign_ok && self.slope_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    pub d: f64,
    pub constants: BesselConstants,
    pub rows: Vec<AsymptoticRow>,
    /// `(predicted, fitted)` correction coefficient of `k`; `None` where
    /// the fit is skipped (integer Bessel order).
    pub d_k: Option<(Option<f64>, f64)>,
    pub d_k_note: String,
}

impl AsymptoticsReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(AsymptoticRow::pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "function,regime,predicted_slope,fitted_slope,predicted_coefficient,fitted_coefficient,sign_ok,slope_ok,coefficient_ok,pass\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.10},{:.10},{:.10e},{:.10e},{},{},{},{}\n",
                r.function,
                r.regime,
                r.predicted_slope,
                r.fitted_slope,
                r.predicted_coefficient,
                r.fitted_coefficient,
                r.sign_ok,
                r.slope_ok,
                r.coefficient_ok,
                r.pass()
            ));
        }
        out
    }
}

type Pick = fn(&Radial) -> ScaledValue;

struct RowSpec {
    function: &'static str,
    pick: Pick,
    sign: i8,
    small_slope: f64,
    small_coef: f64,
    large_power: f64,
    large_rate: f64,
    large_coef: f64,
}

/// Fits every row of the small/large argument table for `l, l', k, k', k̃,
/// A, B`. Failures are recorded per row; the sweep always completes.
pub fn verify_asymptotics(dim: Dimension) -> AsymptoticsReport {
    let d = dim.d();
    let c = dim.constants();
    let half = 0.5 * (1.0 - d);
    let specs = [
        RowSpec { function: "l", pick: |r| r.l, sign: 1, small_slope: 0.0, small_coef: c.c_l, large_power: half, large_rate: 1.0, large_coef: c.ct_l },
        RowSpec { function: "l'", pick: |r| r.lp, sign: 1, small_slope: 1.0, small_coef: c.c_lp, large_power: half, large_rate: 1.0, large_coef: c.ct_l },
        RowSpec { function: "k", pick: |r| r.k, sign: 1, small_slope: 2.0 - d, small_coef: c.c_k, large_power: half, large_rate: -1.0, large_coef: c.ct_k },
        RowSpec { function: "k'", pick: |r| r.kp, sign: -1, small_slope: 1.0 - d, small_coef: c.c_kp, large_power: half, large_rate: -1.0, large_coef: c.ct_k },
        RowSpec { function: "A", pick: |r| r.a(), sign: 1, small_slope: d - 2.0, small_coef: c.c_l / c.c_k, large_power: 0.0, large_rate: 2.0, large_coef: c.ct_l / c.ct_k },
        RowSpec { function: "B", pick: |r| r.b(), sign: -1, small_slope: d, small_coef: c.c_lp / c.c_kp, large_power: 0.0, large_rate: 2.0, large_coef: c.ct_l / c.ct_k },
    ];
    let small_z = geomspace(1e-5, 1e-3, 21);
    let large_z = linspace(50.0, 500.0, 21);
    let eval = |zs: &[f64]| -> Result<Vec<Radial>, String> {
        zs.iter().map(|&z| Radial::at(dim, z).map_err(|e| e.to_string())).collect()
    };
    let small = eval(&small_z);
    let large = eval(&large_z);

    let mut rows = Vec::new();
    for s in &specs {
        rows.push(fit_row(s.function, "small", &small, &small_z, s.pick, s.sign, s.small_slope, s.small_coef, |z| z.ln(), 0.0));
        rows.push(fit_row(s.function, "large", &large, &large_z, s.pick, s.sign, s.large_rate, s.large_coef, |z| z, s.large_power));
    }
    // k̃ = z^{d-2} k tends to c_k at the origin
    let kt: Pick = |r| r.k;
    rows.push(fit_row("k~", "small", &small, &small_z, kt, 1, 0.0, c.c_k, |z| z.ln(), -(d - 2.0)));

    let (d_k, d_k_note) = if dim.integer_order() {
        (None, "fit skipped: integer Bessel order (logarithmic terms)".to_string())
    } else {
        match &small {
            Ok(vals) => {
                // k(z) - c_k z^{2-d} against z^{2-d+ν}
                let expo = 2.0 - d + dim.nu();
                let ratios: Vec<f64> = small_z
                    .iter()
                    .zip(vals)
                    .map(|(&z, r)| (r.k.to_f64() - c.c_k * z.powf(2.0 - d)) / z.powf(expo))
                    .collect();
                let fitted = ratios[0];
                let note = if d > 3.0 {
                    "the z^0 term dominates the z^(3-d) correction for 3 < d < 4; fitted value is not a limit".into()
                } else {
                    "fitted at the smallest sampled z".into()
                };
                (Some((c.d_k, fitted)), note)
            }
            Err(e) => (None, format!("evaluation failed: {e}")),
        }
    };

    AsymptoticsReport {
        d,
        constants: c,
        rows,
        d_k,
        d_k_note,
    }
}

#[allow(clippy::too_many_arguments)]
fn fit_row(
    function: &'static str,
    regime: &'static str,
    values: &Result<Vec<Radial>, String>,
    zs: &[f64],
    pick: Pick,
    sign: i8,
    slope: f64,
    coef: f64,
    abscissa: fn(f64) -> f64,
    power: f64,
) -> AsymptoticRow {
    let mut row = AsymptoticRow {
        function,
        regime,
        predicted_slope: slope,
        fitted_slope: f64::NAN,
        predicted_coefficient: coef,
        fitted_coefficient: f64::NAN,
        expected_sign: sign,
        sign_ok: false,
        slope_ok: false,
        coefficient_ok: false,
        error: None,
    };
    let vals = match values {
        Ok(v) => v,
        Err(e) => {
            row.error = Some(e.clone());
            return row;
        }
    };
    let picked: Vec<ScaledValue> = vals.iter().map(pick).collect();
    row.sign_ok = picked.iter().all(|v| v.sign() == sign);
    let x: Vec<f64> = zs.iter().map(|&z| abscissa(z)).collect();
    let y: Vec<f64> = zs
        .iter()
        .zip(&picked)
        .map(|(&z, v)| v.log_mag() - power * z.ln())
        .collect();
    if y.iter().any(|v| !v.is_finite()) {
        row.error = Some("non-finite value in sweep".into());
        return row;
    }
    let f = line_fit(&x, &y);
    row.fitted_slope = f.slope;
    row.fitted_coefficient = f.intercept.exp();
    row.slope_ok = (f.slope - slope).abs() <= SLOPE_TOLERANCE;
    row.coefficient_ok = ((row.fitted_coefficient - coef) / coef).abs() <= COEFFICIENT_TOLERANCE;
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_hold_in_three_and_four_dimensions() {
        for d in [3.0, 4.0, 5.0] {
            let rep = verify_asymptotics(Dimension::new(d).unwrap());
            for r in &rep.rows {
                assert!(r.pass(), "d={d}: {r:?}");
                // 1/z corrections grow with the order; coefficients are only
                // reported for larger d
                assert!(d > 4.0 || r.coefficient_ok, "d={d}: {r:?}");
            }
        }
    }

    #[test]
    fn d_k_matches_closed_form_below_three() {
        let rep = verify_asymptotics(Dimension::new(2.6).unwrap());
        let (pred, fitted) = rep.d_k.unwrap();
        let pred = pred.unwrap();
        assert!(((fitted - pred) / pred).abs() < 0.05, "{pred} vs {fitted}");
        assert!(verify_asymptotics(Dimension::new(4.0).unwrap()).d_k.is_none());
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let rep = verify_asymptotics(Dimension::new(3.0).unwrap());
        assert_eq!(rep.to_csv().lines().count(), rep.rows.len() + 1);
    }
}
