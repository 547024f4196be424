//! Growth of `‖R̃g‖_{L¹(ρ ≤ M)}` for the odd step `g = χ_{[2,3]} - χ_{[-3,-2]}`.
//!
//! `g` is odd, so `R̃g` is the odd extension of `R_D χ_{[2,3]}` and
//! `‖R̃g‖_{L¹(ρ ≤ M)} = 2 ∫_1^{M+1} |R_D χ| dμ`. Near the support the image
//! comes from the resolvent solver; beyond `x_cut` the kernel is integrated
//! directly.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fit::{line_fit, LineFit};
use crate::heat::FarBoundary;
use crate::quad::gauss_legendre;
use crate::riesz::{riesz_kernel, Bc, KernelOptions, RieszSolver, RieszTarget};
use crate::space::{h_d, GridSpec};
use crate::specfun::Dimension;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub grid: GridSpec,
    pub x_cut: f64,
    /// Gauss nodes across `[2, 3]`.
    pub y_nodes: usize,
    /// Gauss nodes per octave of `x`.
    pub x_nodes: usize,
    /// Contrast slope must be below this fraction of the main slope.
    pub flat_fraction: f64,
    pub min_r2: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            grid: GridSpec {
                x_max: 600.0,
                breakpoints: vec![2.0, 3.0, 6.0],
                ..GridSpec::default()
            },
            x_cut: 6.0,
            y_nodes: 16,
            x_nodes: 8,
            flat_fraction: 0.1,
            min_r2: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub m: f64,
    pub step: f64,
    pub contrast: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub d: f64,
    pub rows: Vec<GrowthRow>,
    pub fit: LineFit,
    pub contrast_fit: LineFit,
    /// `∫ g ĥ_D dμ`, nonzero: `g` is not a two-harmonic atom.
    pub odd_moment: f64,
    /// Shift `c` making `χ_{[2,3]}(y)(y - c)` orthogonal to `h_D`.
    pub contrast_shift: f64,
    pub pass: bool,
}

fn moment(dim: Dimension, f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let d = dim.d();
    gauss_legendre(n)
        .iter()
        .map(|&(u, w)| {
            let y = 2.5 + 0.5 * u;
            0.5 * w * f(y) * y.powf(d - 1.0)
        })
        .sum()
}

/// `∫_2^3 ĥ_D g dμ` over both sides, i.e. `2 ∫_2^3 h_D dμ`.
pub fn step_odd_moment(dim: Dimension) -> f64 {
    2.0 * moment(dim, |y| h_d(dim, y), 32)
}

/// `c` with `∫_2^3 (y - c) h_D(y) dμ(y) = 0`.
pub fn contrast_shift(dim: Dimension) -> f64 {
    moment(dim, |y| y * h_d(dim, y), 32) / moment(dim, |y| h_d(dim, y), 32)
}

/// `∫_{x_cut}^{m} |∫_2^3 R_D(x, y) w(y) dμ(y)| dμ(x)` on octave panels.
fn far_l1(dim: Dimension, w: &dyn Fn(f64) -> f64, x_cut: f64, m: f64, cfg: &CounterexampleConfig) -> Result<f64> {
    let d = dim.d();
    let opts = KernelOptions::default();
    let ys: Vec<(f64, f64)> = gauss_legendre(cfg.y_nodes)
        .iter()
        .map(|&(u, wt)| {
            let y = 2.5 + 0.5 * u;
            (y, 0.5 * wt * w(y) * y.powf(d - 1.0))
        })
        .collect();
    let mut total = 0.0;
    let octaves = (m / x_cut).log2().ceil().max(1.0) as usize;
    let (l0, l1) = (x_cut.ln(), m.ln());
    for k in 0..octaves {
        let a = l0 + (l1 - l0) * k as f64 / octaves as f64;
        let b = l0 + (l1 - l0) * (k + 1) as f64 / octaves as f64;
        for &(u, wt) in gauss_legendre(cfg.x_nodes) {
            let x = (0.5 * (a + b) + 0.5 * (b - a) * u).exp();
            let mut f = 0.0;
            for &(y, wy) in &ys {
                f += wy * riesz_kernel(Bc::Dirichlet, dim, x, y, &opts)?.value;
            }
            total += 0.5 * (b - a) * wt * f.abs() * x.powf(d);
        }
    }
    Ok(total)
}

/// `2 ∫_1^{x_cut} |R_D w| dμ` from the grid, the node at `x_cut` counted
/// with half its cell.
fn near_l1(solver: &RieszSolver, w: &dyn Fn(f64) -> f64, x_cut: f64) -> Result<f64> {
    let op = solver.operator(RieszTarget::Dirichlet);
    let f: Vec<f64> = op
        .points
        .iter()
        .map(|p| {
            let edge = p.r == 2.0 || p.r == 3.0;
            if (2.0..=3.0).contains(&p.r) {
                w(p.r) * if edge { 0.5 } else { 1.0 }
            } else {
                0.0
            }
        })
        .collect();
    let img = solver.apply(RieszTarget::Dirichlet, &f)?.values;
    Ok(op
        .points
        .iter()
        .zip(&op.mass)
        .zip(&img)
        .filter(|((p, _), _)| p.r <= x_cut)
        .map(|((p, m), v)| m * v.abs() * if p.r == x_cut { 0.5 } else { 1.0 })
        .sum())
}

pub fn counterexample_growth(dim: Dimension, ms: &[f64], cfg: &CounterexampleConfig) -> Result<CounterexampleReport> {
    let grid = cfg.grid.build()?;
    let solver = RieszSolver::new(dim, &grid, FarBoundary::Absorbing, Default::default())?;
    let c = contrast_shift(dim);
    let step = |_: f64| 1.0;
    let contrast = move |y: f64| y - c;
    let near_step = near_l1(&solver, &step, cfg.x_cut)?;
    let near_contrast = near_l1(&solver, &contrast, cfg.x_cut)?;
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        let top = m + 1.0;
        rows.push(GrowthRow {
            m,
            step: 2.0 * (near_step + far_l1(dim, &step, cfg.x_cut, top, cfg)?),
            contrast: 2.0 * (near_contrast + far_l1(dim, &contrast, cfg.x_cut, top, cfg)?),
        });
    }
    let lm: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let fit = line_fit(&lm, &rows.iter().map(|r| r.step).collect::<Vec<_>>());
    let contrast_fit = line_fit(&lm, &rows.iter().map(|r| r.contrast).collect::<Vec<_>>());
    Ok(CounterexampleReport {
        d: dim.d(),
        pass: fit.slope > 0.0 && fit.r2 >= cfg.min_r2 && contrast_fit.slope.abs() <= cfg.flat_fraction * fit.slope,
        rows,
        fit,
        contrast_fit,
        odd_moment: step_odd_moment(dim),
        contrast_shift: c,
    })
}
