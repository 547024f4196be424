//! Heat maximal functions `sup_t |T_t f|` on the glued line and their `L¹`
//! norms for atoms, atomic sums and a control.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::atoms::{ball_measure, make_atom, Flavor};
use crate::error::{Error, Result};
use crate::fit::{line_fit, LineFit};
use crate::heat::{evolve_block, Block, DiscreteOperator, Domain, FarBoundary, StepControl};
use crate::space::{Ball, GluedPoint, GridSpec, Side};
use crate::specfun::Dimension;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub per_octave: usize,
    pub grid: GridSpec,
    pub step: StepControl,
    /// Allowed relative change of the norm when every other time is dropped.
    pub refine_tol: f64,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        MaximalConfig {
            t_min: 1e-4,
            t_max: 1e4,
            per_octave: 4,
            grid: GridSpec {
                x_max: 400.0,
                ..GridSpec::default()
            },
            step: StepControl::default(),
            refine_tol: 0.05,
        }
    }
}

/// `0` followed by `2^{k/n}` covering `[t_min, t_max]`.
pub fn dyadic_times(t_min: f64, t_max: f64, per_octave: usize) -> Vec<f64> {
    let n = per_octave as f64;
    let k0 = (t_min.log2() * n).floor() as i64;
    let k1 = (t_max.log2() * n).ceil() as i64;
    std::iter::once(0.0).chain((k0..=k1).map(|k| (k as f64 / n).exp2())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalEstimate {
    pub value: f64,
    /// The same norm using every other positive time.
    pub coarse: f64,
    pub change: f64,
    pub times: usize,
}

/// Evolves each column and keeps the pointwise sup of `|T_t f|` over all
/// times and over the even-indexed subset.
fn sups(op: &DiscreteOperator, fs: &[Vec<f64>], times: &[f64], ctl: &StepControl) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let (states, _) = evolve_block(op, &Block::from_columns(fs), times, ctl)?;
    let n = op.len();
    let mut fine = vec![vec![0.0; n]; fs.len()];
    let mut coarse = vec![vec![0.0; n]; fs.len()];
    for (k, s) in states.iter().enumerate() {
        for c in 0..fs.len() {
            let col = s.column(c);
            for i in 0..n {
                let v = col[i].abs();
                fine[c][i] = f64::max(fine[c][i], v);
                if k % 2 == 0 {
                    coarse[c][i] = f64::max(coarse[c][i], v);
                }
            }
        }
    }
    Ok((fine, coarse))
}

fn window_l1(op: &DiscreteOperator, f: &[f64], window: f64) -> f64 {
    (0..op.len()).filter(|&i| op.points[i].r - 1.0 <= window).map(|i| op.mass[i] * f[i]).sum()
}

fn estimate(op: &DiscreteOperator, fine: &[f64], coarse: &[f64], times: usize, tol: f64) -> Result<MaximalEstimate> {
    let value = op.l1(fine);
    let c = op.l1(coarse);
    let change = (value - c) / value.max(f64::MIN_POSITIVE);
    if change > tol {
        return Err(Error::Refinement(format!("maximal norm moved by {change:.3} when the t-grid was halved")));
    }
    Ok(MaximalEstimate {
        value,
        coarse: c,
        change,
        times,
    })
}

/// `‖sup_t |T_t f|‖_{L¹(μ)}` on the glued operator `op`.
pub fn maximal_h1_norm(op: &DiscreteOperator, f: &[f64], cfg: &MaximalConfig) -> Result<MaximalEstimate> {
    let times = dyadic_times(cfg.t_min, cfg.t_max, cfg.per_octave);
    let (fine, coarse) = sups(op, &[f.to_vec()], &times, &cfg.step)?;
    estimate(op, &fine[0], &coarse[0], times.len(), cfg.refine_tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub maximal: MaximalConfig,
    pub atoms: usize,
    pub seed: u64,
    pub center_range: (f64, f64),
    pub radius_range: (f64, f64),
    pub sums: usize,
    pub terms: usize,
    /// `ρ`-windows for the control's growth.
    pub windows: Vec<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            maximal: MaximalConfig::default(),
            atoms: 100,
            seed: 11,
            center_range: (1.0, 20.0),
            radius_range: (0.1, 10.0),
            sums: 20,
            terms: 5,
            windows: vec![10.0, 30.0, 100.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumCheck {
    pub norm: f64,
    pub coefficient_sum: f64,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub window: f64,
    pub atom_max: f64,
    pub control: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub d: f64,
    pub atom_norms: Vec<f64>,
    pub failures: usize,
    pub c_emp: f64,
    pub median: f64,
    pub max_change: f64,
    pub sums: Vec<SumCheck>,
    /// `max ‖Σ λ_k a_k‖ / (C_emp Σ |λ_k|)`.
    pub sum_ratio: f64,
    pub windows: Vec<WindowRow>,
    pub control_fit: LineFit,
    pub pass: bool,
}

/// The odd step `χ_{[2,3]} - χ_{[-3,-2]}` scaled to atom size on the ball of
/// radius 2 about the junction: mean zero but not two-harmonic.
pub fn odd_step_control(op: &DiscreteOperator) -> Result<Vec<f64>> {
    let ball = Ball::new(GluedPoint::plus(1.0), 2.0)?;
    let mut f: Vec<f64> = op
        .points
        .iter()
        .map(|p| if (2.0..=3.0).contains(&p.r) { p.side.sign() } else { 0.0 })
        .collect();
    let norm = op.norm(&f);
    let scale = 1.0 / (norm * ball_measure(op, &ball).sqrt());
    f.iter_mut().for_each(|v| *v *= scale);
    Ok(f)
}

/// Maximal norms of seeded two-harmonic atoms, of random finite atomic
/// sums, and of the odd-step control over growing windows.
pub fn compare_norms(dim: Dimension, cfg: &CompareConfig) -> Result<CompareReport> {
    let mc = &cfg.maximal;
    let grid = mc.grid.build()?;
    let op = DiscreteOperator::new(dim, &grid, Domain::Glued, FarBoundary::Absorbing)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let log_uniform = |rng: &mut ChaCha8Rng, (a, b): (f64, f64)| (a.ln() + (b / a).ln() * rng.random::<f64>()).exp();
    let mut cols = Vec::with_capacity(cfg.atoms + 1);
    let mut failures = 0;
    for _ in 0..cfg.atoms {
        let c = log_uniform(&mut rng, cfg.center_range);
        let r = log_uniform(&mut rng, cfg.radius_range);
        let side = if rng.random::<bool>() { Side::Minus } else { Side::Plus };
        let seed = rng.random();
        match Ball::new(GluedPoint::new(side, c)?, r).and_then(|b| make_atom(Flavor::TwoHarmonic, &op, b, seed)) {
            Ok(a) => cols.push(a.values),
            Err(_) => failures += 1,
        }
    }
    let n_atoms = cols.len();
    if n_atoms == 0 {
        return Err(Error::Refinement("no atom could be built".into()));
    }
    cols.push(odd_step_control(&op)?);
    let times = dyadic_times(mc.t_min, mc.t_max, mc.per_octave);
    let (states, _) = evolve_block(&op, &Block::from_columns(&cols), &times, &mc.step)?;
    let n = op.len();
    let mut fine = vec![vec![0.0; n]; cols.len()];
    let mut coarse = vec![vec![0.0; n]; cols.len()];
    let mut sum_fine = vec![vec![0.0; n]; cfg.sums];
    let lambdas: Vec<Vec<(usize, f64)>> = (0..cfg.sums)
        .map(|_| {
            (0..cfg.terms)
                .map(|_| (rng.random_range(0..n_atoms), 2.0 * rng.random::<f64>() - 1.0))
                .collect()
        })
        .collect();
    for (k, s) in states.iter().enumerate() {
        for c in 0..cols.len() {
            let col = s.column(c);
            for i in 0..n {
                fine[c][i] = f64::max(fine[c][i], col[i].abs());
                if k % 2 == 0 {
                    coarse[c][i] = f64::max(coarse[c][i], col[i].abs());
                }
            }
        }
        for (j, terms) in lambdas.iter().enumerate() {
            for i in 0..n {
                let v: f64 = terms.iter().map(|&(a, l)| l * s.get(i, a)).sum();
                sum_fine[j][i] = f64::max(sum_fine[j][i], v.abs());
            }
        }
    }
    let mut atom_norms = Vec::with_capacity(n_atoms);
    let mut max_change: f64 = 0.0;
    for c in 0..n_atoms {
        let e = estimate(&op, &fine[c], &coarse[c], times.len(), mc.refine_tol)?;
        max_change = max_change.max(e.change);
        atom_norms.push(e.value);
    }
    let c_emp = atom_norms.iter().copied().fold(0.0, f64::max);
    let mut sorted = atom_norms.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let sums: Vec<SumCheck> = lambdas
        .iter()
        .zip(&sum_fine)
        .map(|(terms, f)| {
            let norm = op.l1(f);
            let coefficient_sum: f64 = terms.iter().map(|t| t.1.abs()).sum();
            SumCheck {
                norm,
                coefficient_sum,
                ratio: norm / (c_emp * coefficient_sum),
            }
        })
        .collect();
    let sum_ratio = sums.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let control = &fine[n_atoms];
    let windows: Vec<WindowRow> = cfg
        .windows
        .iter()
        .map(|&w| WindowRow {
            window: w,
            atom_max: (0..n_atoms).map(|c| window_l1(&op, &fine[c], w)).fold(0.0, f64::max),
            control: window_l1(&op, control, w),
        })
        .collect();
    let control_fit = line_fit(
        &windows.iter().map(|r| r.window.ln()).collect::<Vec<_>>(),
        &windows.iter().map(|r| r.control).collect::<Vec<_>>(),
    );
    let first = windows.first().map_or(0.0, |r| r.atom_max);
    let last = windows.last().map_or(0.0, |r| r.atom_max);
    let atoms_flat = last - first <= 0.1 * (control_fit.slope * (cfg.windows.last().unwrap_or(&1.0) / cfg.windows[0]).ln());
    Ok(CompareReport {
        d: dim.d(),
        pass: c_emp.is_finite() && failures == 0 && sum_ratio <= 1.0 + 1e-9 && control_fit.slope > 0.0 && atoms_flat,
        atom_norms,
        failures,
        c_emp,
        median,
        max_change,
        sums,
        sum_ratio,
        windows,
        control_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op() -> DiscreteOperator {
        let grid = GridSpec { x_max: 40.0, ..GridSpec::default() }.build().unwrap();
        DiscreteOperator::new(Dimension::new(3.0).unwrap(), &grid, Domain::Glued, FarBoundary::Absorbing).unwrap()
    }

    #[test]
    fn dyadic_grid_is_nested() {
        let fine = dyadic_times(1e-4, 1e4, 4);
        let coarse = dyadic_times(1e-4, 1e4, 2);
        assert_eq!(fine[0], 0.0);
        assert!(fine[1] <= 1e-4 && *fine.last().unwrap() >= 1e4);
        assert!(coarse.iter().all(|t| fine.iter().any(|s| (s - t).abs() <= 1e-15 * t)));
    }

    #[test]
    fn nonnegative_data_dominates_its_l1_norm() {
        let op = op();
        let f = op.sample(|p| if (p.r - 3.0).abs() < 1.0 && p.side == Side::Plus { 1.0 } else { 0.0 });
        let cfg = MaximalConfig { t_max: 10.0, ..Default::default() };
        let m = maximal_h1_norm(&op, &f, &cfg).unwrap();
        assert!(m.value >= op.l1(&f) * (1.0 - 1e-12));
        assert!(m.coarse <= m.value);
    }
}
