//! Numerical checks on the Riesz kernels and operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{riesz_kernel, riesz_kernel_dy, Bc, KernelOptions};
use super::resolvent::{RieszSolver, RieszTarget};
use crate::error::Result;
use crate::fit::{geomspace, line_fit, LineFit};
use crate::heat::FarBoundary;
use crate::quad::gauss_fixed;
use crate::space::{h_d, GluedPoint, GridSpec};
use crate::specfun::Dimension;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DerivativeConfig {
    /// Nodes per axis; refinement inserts geometric midpoints.
    pub nodes: usize,
    /// Nodes are `1 + geomspace(first_offset, hi - 1)`.
    pub first_offset: f64,
    pub hi: f64,
    pub min_sep: f64,
    pub fd_cells: usize,
    pub seed: u64,
    pub stability: f64,
    pub fd_tol: f64,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        DerivativeConfig {
            nodes: 25,
            first_offset: 0.01,
            hi: 30.0,
            min_sep: 0.1,
            fd_cells: 50,
            seed: 7,
            stability: 0.10,
            fd_tol: 1e-5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCell {
    pub x: f64,
    pub y: f64,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSup {
    pub coarse: WorstCell,
    pub refined: WorstCell,
    pub change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBoundReport {
    pub d: f64,
    pub config: DerivativeConfig,
    /// `|∂_y R_N| x^{d-1} (x-y)²`.
    pub neumann: BoundSup,
    /// `|∂_y(R_D/h_D)| h_D(y) (x-y)² x max(x,y)^{d-2}`.
    pub dirichlet: BoundSup,
    /// Worst relative gap between analytic and five-point differences.
    pub fd_max_rel: f64,
    pub fd_worst: (f64, f64),
    pub pass: bool,
}

fn axis(cfg: &DerivativeConfig, level: usize) -> Vec<f64> {
    let n = (cfg.nodes - 1) * (1 << level) + 1;
    geomspace(cfg.first_offset, cfg.hi - 1.0, n).into_iter().map(|v| 1.0 + v).collect()
}

fn neumann_ratio(dim: Dimension, x: f64, y: f64, opts: &KernelOptions) -> Result<f64> {
    let dy = riesz_kernel_dy(Bc::Neumann, dim, x, y, opts)?.value;
    Ok(dy.abs() * x.powf(dim.d() - 1.0) * (x - y).powi(2))
}

fn dirichlet_ratio(dim: Dimension, x: f64, y: f64, opts: &KernelOptions) -> Result<f64> {
    let d = dim.d();
    let r = riesz_kernel(Bc::Dirichlet, dim, x, y, opts)?.value;
    let dr = riesz_kernel_dy(Bc::Dirichlet, dim, x, y, opts)?.value;
    let h = h_d(dim, y);
    // h ∂_y(R/h) = ∂_y R - R h'/h
    let slope = dr - r * (d - 2.0) * y.powf(1.0 - d) / h;
    Ok(slope.abs() * (x - y).powi(2) * x * x.max(y).powf(d - 2.0))
}

fn sup(cells: &[(f64, f64)], f: impl Fn(f64, f64) -> Result<f64>) -> Result<WorstCell> {
    let mut worst = WorstCell { x: f64::NAN, y: f64::NAN, ratio: 0.0 };
    for &(x, y) in cells {
        let r = f(x, y)?;
        if !(r <= worst.ratio) {
            worst = WorstCell { x, y, ratio: r };
        }
    }
    Ok(worst)
}

/// Five-point central difference of the kernel in `y`.
fn fd_slope(bc: Bc, dim: Dimension, x: f64, y: f64, h: f64, opts: &KernelOptions) -> Result<f64> {
    let k = |s: f64| riesz_kernel(bc, dim, x, y + s * h, opts).map(|v| v.value);
    Ok((k(-2.0)? - 8.0 * k(-1.0)? + 8.0 * k(1.0)? - k(2.0)?) / (12.0 * h))
}

/// Empirical constants in the kernel derivative bounds, their stability
/// under grid refinement, and a finite-difference check of `∂_y`.
pub fn verify_derivative_bounds(dim: Dimension, cfg: &DerivativeConfig) -> Result<DerivativeBoundReport> {
    let opts = KernelOptions::default();
    let cells = |level| {
        let ax = axis(cfg, level);
        let mut out = Vec::new();
        for &x in &ax {
            for &y in &ax {
                if (x - y).abs() >= cfg.min_sep {
                    out.push((x, y));
                }
            }
        }
        out
    };
    let (c0, c1) = (cells(0), cells(1));
    let sup_pair = |f: &dyn Fn(f64, f64) -> Result<f64>| -> Result<BoundSup> {
        let coarse = sup(&c0, f)?;
        let refined = sup(&c1, f)?;
        Ok(BoundSup {
            coarse,
            refined,
            change: (refined.ratio - coarse.ratio).abs() / refined.ratio,
        })
    };
    let neumann = sup_pair(&|x, y| neumann_ratio(dim, x, y, &opts))?;
    let dirichlet = sup_pair(&|x, y| dirichlet_ratio(dim, x, y, &opts))?;

    let tight = KernelOptions {
        rel_tol: 1e-12,
        ..opts
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fd_max_rel: f64 = 0.0;
    let mut fd_worst = (f64::NAN, f64::NAN);
    let mut done = 0;
    while done < cfg.fd_cells {
        let x = 1.0 + (cfg.hi - 1.0) * rng.random::<f64>();
        let y = 1.1 + (cfg.hi - 1.1) * rng.random::<f64>();
        let sep = (x - y).abs();
        if sep < cfg.min_sep {
            continue;
        }
        let h = 0.01 * sep.min(y - 1.0);
        for bc in [Bc::Neumann, Bc::Dirichlet] {
            let exact = riesz_kernel_dy(bc, dim, x, y, &tight)?.value;
            let fd = fd_slope(bc, dim, x, y, h, &tight)?;
            let rel = (fd - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
            if !(rel <= fd_max_rel) {
                fd_max_rel = rel;
                fd_worst = (x, y);
            }
        }
        done += 1;
    }
    let finite = |b: &BoundSup| b.refined.ratio.is_finite() && b.change <= cfg.stability;
    Ok(DerivativeBoundReport {
        d: dim.d(),
        config: *cfg,
        pass: finite(&neumann) && finite(&dirichlet) && fd_max_rel <= cfg.fd_tol,
        neumann,
        dirichlet,
        fd_max_rel,
        fd_worst,
    })
}

/// A smooth bump `(1 - ((y - c)/w)²)²` on `|y - c| < w`.
pub fn bump(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |y| {
        let u = (y - center) / width;
        if u.abs() < 1.0 {
            (1.0 - u * u).powi(2)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckRow {
    pub bc: Bc,
    pub center: f64,
    pub x: f64,
    pub operator: f64,
    pub kernel: f64,
    pub rel_dev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub d: f64,
    pub width: f64,
    pub rows: Vec<CrossCheckRow>,
    pub max_rel_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Applies the resolvent-based operator to narrow bumps and compares with
/// kernel integration at points at least `gap` away from the support.
pub fn cross_check(solver: &RieszSolver, centers: &[f64], width: f64, xs: &[f64], gap: f64, tol: f64) -> Result<CrossCheckReport> {
    let dim = solver.dim;
    let d = dim.d();
    let opts = KernelOptions::default();
    let mut rows = Vec::new();
    for bc in [Bc::Neumann, Bc::Dirichlet] {
        let target = match bc {
            Bc::Neumann => RieszTarget::Neumann,
            Bc::Dirichlet => RieszTarget::Dirichlet,
        };
        let op = solver.operator(target);
        for &c in centers {
            let f = bump(c, width);
            let image = solver.apply(target, &op.sample(|p| f(p.r)))?.values;
            for &x0 in xs {
                let node = op.nearest(GluedPoint::plus(x0));
                let x = op.points[node].r;
                if (x - c).abs() < width + gap {
                    continue;
                }
                let mut failure = None;
                let kernel = gauss_fixed(
                    |y| match riesz_kernel(bc, dim, x, y, &opts) {
                        Ok(v) => v.value * f(y) * y.powf(d - 1.0),
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    },
                    (c - width).max(1.0),
                    c + width,
                    32,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                let operator = image[node];
                rows.push(CrossCheckRow {
                    bc,
                    center: c,
                    x,
                    operator,
                    kernel,
                    rel_dev: (operator - kernel).abs() / kernel.abs(),
                });
            }
        }
    }
    let max_rel_dev = rows.iter().map(|r| r.rel_dev).fold(0.0, f64::max);
    Ok(CrossCheckReport {
        d,
        width,
        rows,
        max_rel_dev,
        tol,
        pass: max_rel_dev <= tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub d: f64,
    pub cells: usize,
    pub max_value: f64,
    /// `min -R_D(x, y) x^d` over the cells.
    pub c_fit: f64,
    pub pass: bool,
}

/// `R_D(x, y) ≤ 0` and `-R_D(x, y) ≥ c x^{-d}` for `x ≥ 4`, `y ∈ [2, 3]`.
pub fn dirichlet_sign_check(dim: Dimension, xs: &[f64], ys: &[f64]) -> Result<SignReport> {
    let opts = KernelOptions::default();
    let mut max_value = f64::NEG_INFINITY;
    let mut c_fit = f64::INFINITY;
    for &x in xs {
        for &y in ys {
            let v = riesz_kernel(Bc::Dirichlet, dim, x, y, &opts)?.value;
            max_value = max_value.max(v);
            c_fit = c_fit.min(-v * x.powf(dim.d()));
        }
    }
    Ok(SignReport {
        d: dim.d(),
        cells: xs.len() * ys.len(),
        max_value,
        c_fit,
        pass: max_value <= 0.0 && c_fit > 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub delta: f64,
    pub above: f64,
    pub below: f64,
    /// `δ (R(x, x+δ) + R(x, x-δ))`; the odd `1/(x-y)` singularity cancels.
    pub symmetric_sum: f64,
}

/// Trend of the two kernel branches as `y → x` from either side.
pub fn branch_continuity(bc: Bc, dim: Dimension, x: f64, deltas: &[f64]) -> Result<Vec<ContinuityRow>> {
    let opts = KernelOptions {
        delta_min: deltas.iter().copied().fold(f64::INFINITY, f64::min).min(1e-3),
        ..Default::default()
    };
    deltas
        .iter()
        .map(|&delta| {
            let above = riesz_kernel(bc, dim, x, x + delta, &opts)?.value;
            let below = riesz_kernel(bc, dim, x, x - delta, &opts)?.value;
            Ok(ContinuityRow {
                delta,
                above,
                below,
                symmetric_sum: delta * (above + below),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Report {
    pub d: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

/// `‖R_N f‖₂ / ‖f‖₂` over random smooth-ish grid functions.
pub fn l2_ratios(solver: &RieszSolver, samples: usize, seed: u64) -> Result<L2Report> {
    let op = solver.operator(RieszTarget::Neumann);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let terms: Vec<(f64, f64, f64)> = (0..4)
            .map(|_| {
                let c = 1.0 + 20.0 * rng.random::<f64>();
                let w = 0.05 * (200.0f64).powf(rng.random::<f64>());
                (c, w, rng.random::<f64>() * 2.0 - 1.0)
            })
            .collect();
        let f = op.sample(|p| terms.iter().map(|&(c, w, a)| a * (-((p.r - c) / w).powi(2)).exp()).sum());
        let rf = solver.apply(RieszTarget::Neumann, &f)?.values;
        let ratio = op.norm(&rf) / op.norm(&f);
        max_ratio = max_ratio.max(ratio);
        min_ratio = min_ratio.min(ratio);
    }
    Ok(L2Report {
        d: solver.dim.d(),
        samples,
        max_ratio,
        min_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpGrowthRow {
    pub m: f64,
    pub f_norm: f64,
    pub rf_norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpGrowthReport {
    pub d: f64,
    pub p: f64,
    pub rows: Vec<LpGrowthRow>,
    /// Fit of `ln ratio` against `ln M`.
    pub fit: LineFit,
    pub growing: bool,
}

fn lp_norm(op: &crate::heat::DiscreteOperator, f: &[f64], p: f64) -> f64 {
    f.iter().zip(&op.mass).map(|(v, m)| m * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `‖R_D f_M‖_p / ‖f_M‖_p` for `f_M = 1_{[1, M]}`, on a grid reaching `20 M`.
pub fn lp_growth(dim: Dimension, p: f64, ms: &[f64], spec: &GridSpec) -> Result<LpGrowthReport> {
    let mut rows = Vec::new();
    for &m in ms {
        let grid = spec.with_x_max(20.0 * m).build()?;
        let solver = RieszSolver::new(dim, &grid, FarBoundary::Absorbing, Default::default())?;
        let op = solver.operator(RieszTarget::Dirichlet);
        let f = op.sample(|q| if q.r <= m { 1.0 } else { 0.0 });
        let rf = solver.apply(RieszTarget::Dirichlet, &f)?.values;
        let (f_norm, rf_norm) = (lp_norm(op, &f, p), lp_norm(op, &rf, p));
        rows.push(LpGrowthRow {
            m,
            f_norm,
            rf_norm,
            ratio: rf_norm / f_norm,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.m.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let fit = line_fit(&xs, &ys);
    Ok(LpGrowthReport {
        d: dim.d(),
        p,
        growing: rows.windows(2).all(|w| w[1].ratio > w[0].ratio) && fit.slope > 0.0,
        rows,
        fit,
    })
}
