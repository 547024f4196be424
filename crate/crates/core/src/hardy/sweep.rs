//! `‖R a‖_{L¹(μ)}` over seeded atom ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::atoms::{control_bump, make_atom, Atom, Flavor};
use crate::error::{Error, Result};
use crate::heat::{DiscreteOperator, FarBoundary};
use crate::linalg::solve_dense;
use crate::quad::gauss_legendre;
use crate::riesz::{riesz_kernel, Bc, KernelOptions, RieszSolver, RieszTarget};
use crate::space::{Ball, GluedPoint, GridSpec, HalfGrid, Side};
use crate::specfun::Dimension;

/// Which transform is tested, with its matching atom flavor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transform {
    /// `R_N` on `X₊` with Coifman–Weiss atoms.
    Neumann,
    /// `R_D` on `X₊` with `h_D`-atoms.
    Dirichlet,
    /// `R̃` on the glued line with two-harmonic atoms.
    Glued,
}

impl Transform {
    pub fn flavor(self) -> Flavor {
        match self {
            Transform::Neumann => Flavor::CoifmanWeiss,
            Transform::Dirichlet => Flavor::Dirichlet,
            Transform::Glued => Flavor::TwoHarmonic,
        }
    }

    pub fn target(self) -> RieszTarget {
        match self {
            Transform::Neumann => RieszTarget::Neumann,
            Transform::Dirichlet => RieszTarget::Dirichlet,
            Transform::Glued => RieszTarget::Glued,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub atoms: usize,
    pub seed: u64,
    pub center_range: (f64, f64),
    pub radius_range: (f64, f64),
    /// Window `ρ(x, junction) ≤ window` covered by the grid; beyond it the
    /// kernel is integrated directly.
    pub window: f64,
    /// Grid; `x_max` is raised to `4 · window` if smaller.
    pub grid: GridSpec,
    pub far_nodes: usize,
    pub interp_nodes: usize,
    /// Grid cells across each trace of the ball.
    pub ball_cells: usize,
    /// Cell growth ratio away from the ball.
    pub grading: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            atoms: 200,
            seed: 20_240_917,
            center_range: (1.0, 100.0),
            radius_range: (0.05, 50.0),
            window: 1e3,
            grid: GridSpec::default(),
            far_nodes: 12,
            interp_nodes: 10,
            ball_cells: 24,
            grading: 1.02,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomDraw {
    pub side: Side,
    pub center: f64,
    pub radius: f64,
    pub noise_seed: u64,
}

/// The `i`-th draw of the ensemble; independent of the ensemble size.
pub fn draw(cfg: &SweepConfig, transform: Transform, i: usize) -> AtomDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(i as u64);
    let log_uniform = |rng: &mut ChaCha8Rng, (a, b): (f64, f64)| (a.ln() + (b / a).ln() * rng.random::<f64>()).exp();
    let center = log_uniform(&mut rng, cfg.center_range);
    let radius = log_uniform(&mut rng, cfg.radius_range);
    let minus = rng.random::<bool>();
    let side = if transform == Transform::Glued && minus { Side::Minus } else { Side::Plus };
    AtomDraw {
        side,
        center,
        radius,
        noise_seed: rng.random(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub index: usize,
    pub draw: AtomDraw,
    pub nodes: usize,
    pub l1_window: f64,
    pub l1_far: f64,
    pub l1: f64,
    /// `‖R b‖_{L¹(ρ ≤ window)}` for the nonnegative bump `b` on the same ball.
    pub control_window: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomFailure {
    pub index: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub transform: Transform,
    pub d: f64,
    pub records: Vec<AtomRecord>,
    pub failures: Vec<AtomFailure>,
    pub max_l1: f64,
    pub worst: Option<usize>,
    pub median_l1: f64,
    pub q90_l1: f64,
    pub control_median: f64,
    pub control_min: f64,
}

fn quantile(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[((s.len() - 1) as f64 * q).round() as usize]
}

/// Point masses `(r, w)` whose kernel sums give the far field:
/// `F(±x) = Σ w_N R_N(x, r) ± Σ w_D R_D(x, r)`.
struct Moments {
    neumann: Vec<(f64, f64)>,
    dirichlet: Vec<(f64, f64)>,
}

fn moments(transform: Transform, op: &DiscreteOperator, a: &[f64]) -> Moments {
    let nz = || (0..op.len()).filter(move |&i| a[i] != 0.0);
    match transform {
        Transform::Neumann => Moments {
            neumann: nz().map(|i| (op.points[i].r, op.mass[i] * a[i])).collect(),
            dirichlet: Vec::new(),
        },
        Transform::Dirichlet => Moments {
            neumann: Vec::new(),
            dirichlet: nz().map(|i| (op.points[i].r, op.mass[i] * a[i])).collect(),
        },
        Transform::Glued => Moments {
            neumann: nz().map(|i| (op.points[i].r, 0.5 * op.mass[i] * a[i])).collect(),
            dirichlet: nz()
                .map(|i| {
                    let p = op.points[i];
                    let s = if p.side == Side::Minus { -1.0 } else { 1.0 };
                    (p.r, 0.5 * s * op.mass[i] * a[i])
                })
                .collect(),
        },
    }
}

/// Replaces a point-mass set by weights at `n` interpolation nodes, exact
/// for `y^{2-d}` and polynomials of degree `n - 2`. Cancellation against
/// `1` and `h_D` is therefore preserved exactly. On narrow supports, where
/// that basis is ill-conditioned and `y^{2-d}` is a polynomial to rounding,
/// degree `n - 1` polynomials are used instead.
fn condense(dim: Dimension, masses: &[(f64, f64)], n: usize) -> Result<Vec<(f64, f64)>> {
    if masses.len() <= n {
        return Ok(masses.to_vec());
    }
    let lo = masses.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let hi = masses.iter().map(|m| m.0).fold(f64::NEG_INFINITY, f64::max);
    let mixed = hi - lo > 0.25 * lo;
    let e = 2.0 - dim.d();
    let basis = |y: f64| -> Vec<f64> {
        let s = (2.0 * y - lo - hi) / (hi - lo);
        let mut out = Vec::with_capacity(n);
        if mixed {
            out.push(y.powf(e));
        }
        let (mut t0, mut t1) = (1.0, s);
        while out.len() < n {
            out.push(t0);
            let t2 = 2.0 * s * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        out
    };
    let nodes: Vec<f64> = (0..n)
        .map(|k| (0.5 * (lo + hi) - 0.5 * (hi - lo) * (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos()).clamp(lo, hi))
        .collect();
    // transpose Vandermonde: V^T w = Σ_j m_j φ(r_j)
    let mut vt = vec![0.0; n * n];
    for (i, &y) in nodes.iter().enumerate() {
        for (k, v) in basis(y).into_iter().enumerate() {
            vt[k * n + i] = v;
        }
    }
    let mut rhs = vec![0.0; n];
    for &(r, w) in masses {
        rhs.iter_mut().zip(basis(r)).for_each(|(acc, v)| *acc += w * v);
    }
    let w = solve_dense(vt, rhs)?;
    Ok(nodes.into_iter().zip(w).collect())
}

fn kernel_sum(bc: Bc, dim: Dimension, x: f64, masses: &[(f64, f64)], opts: &KernelOptions) -> Result<f64> {
    masses.iter().try_fold(0.0, |acc, &(r, w)| Ok(acc + w * riesz_kernel(bc, dim, x, r, opts)?.value))
}

/// `∫_{|x| > x0} |R a| dμ` by kernel integration, in `v = x0/x`.
fn far_field(dim: Dimension, transform: Transform, m: &Moments, x0: f64, cfg: &SweepConfig) -> Result<f64> {
    let opts = KernelOptions::default();
    let n_cond = condense(dim, &m.neumann, cfg.interp_nodes)?;
    let d_cond = condense(dim, &m.dirichlet, cfg.interp_nodes)?;
    let d = dim.d();
    let mut total = 0.0;
    for &(v, w) in gauss_legendre(cfg.far_nodes) {
        let v = 0.5 * (v + 1.0);
        let x = x0 / v;
        let fn_ = kernel_sum(Bc::Neumann, dim, x, &n_cond, &opts)?;
        let fd = kernel_sum(Bc::Dirichlet, dim, x, &d_cond, &opts)?;
        let jac = 0.5 * w * x0.powf(d) * v.powf(-d - 1.0);
        total += jac * (fn_ + fd).abs();
        if transform == Transform::Glued {
            total += jac * (fn_ - fd).abs();
        }
    }
    Ok(total)
}

fn window_l1(op: &DiscreteOperator, f: &[f64], x0: f64) -> f64 {
    (0..op.len()).filter(|&i| op.points[i].r <= x0).map(|i| op.mass[i] * f[i].abs()).sum()
}

/// The base grid, graded down near `ball` so that each of its traces spans
/// at least `cells` cells.
pub fn atom_grid(base: &HalfGrid, ball: &Ball, cells: usize, grading: f64) -> Result<HalfGrid> {
    let zones: Vec<(f64, f64, f64)> = [Side::Plus, Side::Minus]
        .into_iter()
        .filter_map(|side| ball.trace(side))
        .map(|(lo, hi)| (lo, hi, (hi - lo) / cells as f64))
        .collect();
    let r = &base.r;
    let x_max = base.x_max();
    let spacing = |x: f64| {
        let i = r.partition_point(|&v| v <= x).clamp(1, r.len() - 1);
        let mut h = r[i] - r[i - 1];
        for &(lo, hi, hb) in &zones {
            let dist = (lo - x).max(x - hi).max(0.0);
            h = h.min(hb + (grading - 1.0) * dist);
        }
        h
    };
    let mut nodes = vec![1.0];
    let mut x = 1.0;
    while x < x_max {
        x += spacing(x);
        nodes.push(x.min(x_max));
    }
    let last = nodes.len() - 1;
    if last >= 3 && nodes[last] - nodes[last - 1] < 0.5 * (nodes[last - 1] - nodes[last - 2]) {
        nodes.remove(last - 1);
    }
    HalfGrid::from_nodes(nodes)
}

struct Setup {
    base: HalfGrid,
    x0: f64,
}

fn setup(cfg: &SweepConfig) -> Result<Setup> {
    let spec = if cfg.grid.x_max < 4.0 * cfg.window { cfg.grid.with_x_max(4.0 * cfg.window) } else { cfg.grid.clone() };
    Ok(Setup {
        base: spec.build()?,
        x0: 1.0 + cfg.window,
    })
}

fn ball_for(draw: &AtomDraw) -> Result<Ball> {
    let center = GluedPoint::new(draw.side, draw.center)?;
    Ball::new(center, draw.radius)
}

/// `‖R a‖_{L¹}` split into the grid window and the far field.
pub fn atom_l1(solver: &RieszSolver, transform: Transform, atom: &Atom, window: f64, cfg: &SweepConfig) -> Result<(f64, f64)> {
    let op = solver.operator(transform.target());
    let image = solver.apply(transform.target(), &atom.values)?.values;
    let x0 = 1.0 + window;
    let near = window_l1(op, &image, x0);
    let far = far_field(solver.dim, transform, &moments(transform, op, &atom.values), x0, cfg)?;
    Ok((near, far))
}

/// `‖R a‖_{L¹}` outside the dilated ball `factor · B`; the far field is
/// included when `factor · B` lies inside the grid window.
pub fn atom_tail_l1(solver: &RieszSolver, transform: Transform, atom: &Atom, factor: f64, window: f64, cfg: &SweepConfig) -> Result<f64> {
    let op = solver.operator(transform.target());
    let big = Ball::new(atom.ball.center, factor * atom.ball.radius)?;
    let image = solver.apply(transform.target(), &atom.values)?.values;
    let x0 = 1.0 + window;
    let near: f64 = (0..op.len())
        .filter(|&i| op.points[i].r <= x0 && !big.contains(op.points[i]))
        .map(|i| op.mass[i] * image[i].abs())
        .sum();
    Ok(near + far_field(solver.dim, transform, &moments(transform, op, &atom.values), x0, cfg)?)
}

fn one_atom(s: &Setup, dim: Dimension, transform: Transform, cfg: &SweepConfig, index: usize) -> Result<AtomRecord> {
    let dr = draw(cfg, transform, index);
    let ball = ball_for(&dr)?;
    let grid = atom_grid(&s.base, &ball, cfg.ball_cells, cfg.grading)?;
    let solver = RieszSolver::new(dim, &grid, FarBoundary::Absorbing, Default::default())?;
    let target = transform.target();
    let op = solver.operator(target);
    let atom = make_atom(transform.flavor(), op, ball, dr.noise_seed)?;
    let (l1_window, l1_far) = atom_l1(&solver, transform, &atom, s.x0 - 1.0, cfg)?;
    let bump = control_bump(op, ball)?;
    let control = solver.apply(target, &bump.values)?.values;
    Ok(AtomRecord {
        index,
        draw: dr,
        nodes: atom.support.len(),
        l1_window,
        l1_far,
        l1: l1_window + l1_far,
        control_window: window_l1(op, &control, s.x0),
    })
}

fn summarize(transform: Transform, dim: Dimension, results: Vec<(usize, Result<AtomRecord>)>) -> SweepReport {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (index, r) in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(AtomFailure {
                index,
                error: e.to_string(),
            }),
        }
    }
    let l1: Vec<f64> = records.iter().map(|r| r.l1).collect();
    let ctl: Vec<f64> = records.iter().map(|r| r.control_window).collect();
    let worst = records.iter().max_by(|a, b| a.l1.total_cmp(&b.l1)).map(|r| r.index);
    SweepReport {
        transform,
        d: dim.d(),
        max_l1: l1.iter().copied().fold(f64::NAN, f64::max),
        worst,
        median_l1: quantile(&l1, 0.5),
        q90_l1: quantile(&l1, 0.9),
        control_median: quantile(&ctl, 0.5),
        control_min: ctl.iter().copied().fold(f64::NAN, f64::min),
        records,
        failures,
    }
}

/// Atoms `range` of the seeded ensemble.
pub fn h1_to_l1_sweep_range(transform: Transform, dim: Dimension, cfg: &SweepConfig, range: std::ops::Range<usize>) -> Result<SweepReport> {
    let s = setup(cfg)?;
    let results: Vec<(usize, Result<AtomRecord>)> = range.into_par_iter().map(|i| (i, one_atom(&s, dim, transform, cfg, i))).collect();
    Ok(summarize(transform, dim, results))
}

pub fn h1_to_l1_sweep(transform: Transform, dim: Dimension, cfg: &SweepConfig) -> Result<SweepReport> {
    h1_to_l1_sweep_range(transform, dim, cfg, 0..cfg.atoms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1StudyReport {
    pub transform: Transform,
    pub base: SweepReport,
    pub refined: SweepReport,
    /// Maximum over the first `2n` atoms on the base grid.
    pub doubled_max: f64,
    pub grid_change: f64,
    pub atoms_change: f64,
    /// `control median / max atom norm`.
    pub separation: f64,
    pub required_separation: f64,
    pub stability: f64,
    pub pass: bool,
}

/// The sweep with its stability checks: grid halving, doubled ensemble,
/// and separation from the control bumps.
pub fn h1_to_l1_study(transform: Transform, dim: Dimension, cfg: &SweepConfig, stability: f64, required_separation: f64) -> Result<H1StudyReport> {
    let base = h1_to_l1_sweep(transform, dim, cfg)?;
    let extra = h1_to_l1_sweep_range(transform, dim, cfg, cfg.atoms..2 * cfg.atoms)?;
    let refined = h1_to_l1_sweep(
        transform,
        dim,
        &SweepConfig {
            grid: cfg.grid.refined(),
            ball_cells: 2 * cfg.ball_cells,
            grading: cfg.grading.sqrt(),
            ..cfg.clone()
        },
    )?;
    if base.records.is_empty() {
        return Err(Error::Refinement("every atom failed".into()));
    }
    let doubled_max = base.max_l1.max(extra.max_l1);
    let grid_change = (refined.max_l1 - base.max_l1).abs() / base.max_l1;
    let atoms_change = (doubled_max - base.max_l1).abs() / base.max_l1;
    let separation = base.control_median / base.max_l1;
    let failures = base.failures.len() + refined.failures.len() + extra.failures.len();
    Ok(H1StudyReport {
        transform,
        pass: base.max_l1.is_finite()
            && failures == 0
            && grid_change <= stability
            && atoms_change <= stability
            && separation >= required_separation,
        base,
        refined,
        doubled_max,
        grid_change,
        atoms_change,
        separation,
        required_separation,
        stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condensed_moments_reproduce_smooth_sums() {
        let dim = Dimension::new(3.0).unwrap();
        let masses: Vec<(f64, f64)> = (0..400).map(|i| (1.0 + 0.1 * i as f64, ((i * 7919) % 13) as f64 - 6.0)).collect();
        let cond = condense(dim, &masses, 10).unwrap();
        for f in [|y: f64| 1.0 / y, |y: f64| 1.0 + y * y, |y: f64| (y / 41.0).powi(8)] {
            let exact: f64 = masses.iter().map(|&(r, w)| w * f(r)).sum();
            let approx: f64 = cond.iter().map(|&(r, w)| w * f(r)).sum();
            assert!((exact - approx).abs() < 1e-9 * masses.iter().map(|m| m.1.abs() * f(m.0).abs()).sum::<f64>());
        }
    }

    #[test]
    fn narrow_supports_condense_without_breaking_down() {
        let dim = Dimension::new(3.0).unwrap();
        let masses: Vec<(f64, f64)> = (0..30).map(|i| (80.0 + 0.003 * i as f64, (i % 5) as f64 - 2.0)).collect();
        let cond = condense(dim, &masses, 10).unwrap();
        let exact: f64 = masses.iter().map(|&(r, w)| w / r).sum();
        let approx: f64 = cond.iter().map(|&(r, w)| w / r).sum();
        assert!((exact - approx).abs() < 1e-12 * masses.iter().map(|m| m.1.abs() / m.0).sum::<f64>());
    }

    #[test]
    fn draws_do_not_depend_on_ensemble_size() {
        let cfg = SweepConfig::default();
        assert_eq!(draw(&cfg, Transform::Glued, 17), draw(&cfg, Transform::Glued, 17));
        assert_ne!(draw(&cfg, Transform::Glued, 17), draw(&cfg, Transform::Glued, 18));
    }
}
