//! Monte Carlo estimates compared against the harmonic functions and the
//! heat module.

use serde::{Deserialize, Serialize};

use super::process::{simulate, Boundary, Outcome, PathEnsemble, ProcessConfig};
use crate::error::{Error, Result};
use crate::heat::{evolve, hitting_density_comparand, hitting_mass_until, Domain, FarBoundary, HeatModel, StepControl};
use crate::quad::{gauss_fixed, QuadOptions};
use crate::space::{h_plus, GluedPoint, GridSpec, Side};
use crate::specfun::Dimension;

fn std_err(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitStats {
    pub d: f64,
    pub x0: f64,
    pub escape: f64,
    pub n_paths: usize,
    pub n_exit_plus: usize,
    pub n_exit_minus: usize,
    pub n_censored: usize,
    pub estimate: f64,
    pub std_err: f64,
    /// `h₊(x₀)`.
    pub target: f64,
    /// Exit probability through `+escape` before `-escape`, the exact value
    /// for the truncated problem.
    pub barrier_target: f64,
    /// `barrier_target - target`.
    pub truncation_bias: f64,
    /// `(estimate - target)/std_err`.
    pub z: f64,
    pub censor_flag: bool,
    /// Junction visits and plus-side restarts over all paths.
    pub junction_hits: u64,
    pub plus_restarts: u64,
}

/// `P(reach +R before -R)` for the glued process from `x`:
/// `½ + ½ ĥ_D(x)/h_D(R)`.
pub fn barrier_exit_probability(dim: Dimension, x: GluedPoint, escape: f64) -> f64 {
    let e = 2.0 - dim.d();
    0.5 + 0.5 * x.side.sign() * (1.0 - x.r.powf(e)) / (1.0 - escape.powf(e))
}

pub fn exit_probability(cfg: &ProcessConfig, x0: GluedPoint, escape: f64) -> Result<ExitStats> {
    let dim = cfg.dim()?;
    let cfg = ProcessConfig {
        boundary: Boundary::Glue,
        escape: Some(escape),
        horizon: None,
        ..cfg.clone()
    };
    let ens = simulate(&cfg, x0)?;
    let plus = ens.count(|r| r.outcome == Outcome::Escaped(Side::Plus));
    let minus = ens.count(|r| r.outcome == Outcome::Escaped(Side::Minus));
    let censored = ens.censored();
    let n_eff = plus + minus;
    if n_eff == 0 {
        return Err(Error::Refinement("every path was censored".into()));
    }
    let p = plus as f64 / n_eff as f64;
    let se = std_err(p, n_eff).max(f64::MIN_POSITIVE);
    let target = h_plus(dim, x0);
    let barrier_target = barrier_exit_probability(dim, x0, escape);
    Ok(ExitStats {
        d: dim.d(),
        x0: x0.x(),
        escape,
        n_paths: cfg.paths,
        n_exit_plus: plus,
        n_exit_minus: minus,
        n_censored: censored,
        estimate: p,
        std_err: se,
        target,
        barrier_target,
        truncation_bias: barrier_target - target,
        z: (p - target) / se,
        censor_flag: censored as f64 > 0.01 * cfg.paths as f64,
        junction_hits: ens.records.iter().map(|r| r.junction_hits as u64).sum(),
        plus_restarts: ens.records.iter().map(|r| r.plus_restarts as u64).sum(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub t: f64,
    pub mc: f64,
    pub std_err: f64,
    pub pde: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KilledReport {
    pub d: f64,
    pub y0: f64,
    pub n_paths: usize,
    pub hits: usize,
    pub escaped: usize,
    pub censored: usize,
    pub hit_fraction: f64,
    pub hit_std_err: f64,
    /// `1 - h_D(y₀) = y₀^{2-d}`.
    pub hit_target: f64,
    /// Hit probability before the escape radius.
    pub barrier_target: f64,
    pub hit_z: f64,
    pub survival: Vec<SurvivalRow>,
    /// Hit times, sorted.
    #[serde(skip)]
    pub hit_times: Vec<f64>,
}

/// The killed process from `y₀` until it hits 1 or reaches `escape`.
pub fn killed_run(cfg: &ProcessConfig, y0: f64, escape: f64) -> Result<(PathEnsemble, Vec<f64>)> {
    let cfg = ProcessConfig {
        boundary: Boundary::Kill,
        escape: Some(escape),
        horizon: None,
        ..cfg.clone()
    };
    let ens = simulate(&cfg, GluedPoint::new(Side::Plus, y0)?)?;
    let mut times: Vec<f64> = ens.records.iter().filter(|r| r.outcome == Outcome::Killed).map(|r| r.time).collect();
    times.sort_by(f64::total_cmp);
    Ok((ens, times))
}

/// Hit fraction against `y₀^{2-d}` and survival at `times` against
/// `∫ T_{t,D}(y₀, y) dμ(y)` from the heat module.
pub fn killed_survival(cfg: &ProcessConfig, y0: f64, escape: f64, times: &[f64], grid: &GridSpec) -> Result<KilledReport> {
    let dim = cfg.dim()?;
    let (ens, hit_times) = killed_run(cfg, y0, escape)?;
    let n = ens.records.len();
    let hits = hit_times.len();
    let censored = ens.censored();
    let hit_fraction = hits as f64 / n as f64;
    let hit_std_err = std_err(hit_fraction, n).max(f64::MIN_POSITIVE);
    let e = 2.0 - dim.d();
    let hit_target = y0.powf(e);
    let barrier_target = (y0.powf(e) - escape.powf(e)) / (1.0 - escape.powf(e));
    let model = HeatModel::new(dim, grid, FarBoundary::Absorbing, StepControl::default())?;
    let pde = model.dirichlet_survival(y0, times)?;
    let survival = times
        .iter()
        .zip(pde)
        .map(|(&t, pde)| {
            let dead = hit_times.partition_point(|&s| s <= t);
            let mc = 1.0 - dead as f64 / n as f64;
            let se = std_err(mc, n).max(f64::MIN_POSITIVE);
            SurvivalRow {
                t,
                mc,
                std_err: se,
                pde,
                z: (mc - pde) / se,
            }
        })
        .collect();
    Ok(KilledReport {
        d: dim.d(),
        y0,
        n_paths: n,
        hits,
        escaped: ens.count(|r| matches!(r.outcome, Outcome::Escaped(_))),
        censored,
        hit_fraction,
        hit_std_err,
        hit_target,
        barrier_target,
        hit_z: (hit_fraction - hit_target) / hit_std_err,
        survival,
        hit_times,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub d: f64,
    pub y0: f64,
    pub s_max: f64,
    pub hits: usize,
    /// `sup |F_mc - F_shape|` of CDFs normalized on `[0, s_max]`.
    pub ks: f64,
    pub first_bin: f64,
    pub first_bin_count: usize,
    pub insufficient: bool,
}

/// Normalized hitting-time CDF on `[0, s_max]` against the density shape
/// from the heat module. `hit_times` must be sorted.
pub fn hitting_histogram(dim: Dimension, y0: f64, hit_times: &[f64], s_max: f64, first_bin: f64) -> Result<HittingReport> {
    let opts = QuadOptions::rel(1e-10);
    let m = hit_times.partition_point(|&s| s <= s_max);
    let within = &hit_times[..m];
    let total = hitting_mass_until(dim, y0, s_max, &opts)?;
    let mut ks: f64 = 0.0;
    let mut mass = 0.0;
    let mut prev = 0.0;
    for (k, &s) in within.iter().enumerate() {
        mass += if k == 0 {
            hitting_mass_until(dim, y0, s, &opts)?
        } else {
            gauss_fixed(|v| hitting_density_comparand(dim, y0, v), prev, s, 8)
        };
        prev = s;
        let f = mass / total;
        ks = ks.max((f - k as f64 / m as f64).abs()).max((f - (k + 1) as f64 / m as f64).abs());
    }
    Ok(HittingReport {
        d: dim.d(),
        y0,
        s_max,
        hits: m,
        ks,
        first_bin,
        first_bin_count: hit_times.partition_point(|&s| s <= first_bin),
        insufficient: m < 1000,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationBin {
    pub side: Side,
    pub r_lo: f64,
    pub r_hi: f64,
    pub count: usize,
    pub mc: f64,
    pub pde: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationReport {
    pub d: f64,
    pub x0: f64,
    pub t: f64,
    pub n_paths: usize,
    pub bins: Vec<OccupationBin>,
    pub min_count: usize,
    /// Largest relative error over bins with at least `min_count` samples.
    pub max_rel_err: f64,
    pub opposite_mc: f64,
    pub opposite_pde: f64,
    pub opposite_z: f64,
    /// Fraction of paths with `|X_t - x₀| ≤ 5√(2t)`.
    pub concentration: f64,
}

/// Glued positions at time `t` against `T_t(x₀, ·)` from the heat module.
/// Bins are unions of dual cells holding about `bin_mass` of PDE mass each.
pub fn occupation_histogram(
    cfg: &ProcessConfig,
    x0: GluedPoint,
    t: f64,
    bin_mass: f64,
    grid: &GridSpec,
    min_count: usize,
) -> Result<OccupationReport> {
    let dim = cfg.dim()?;
    let run = ProcessConfig {
        boundary: Boundary::Glue,
        horizon: Some(t),
        escape: None,
        ..cfg.clone()
    };
    let ens = simulate(&run, x0)?;
    let model = HeatModel::new(dim, grid, FarBoundary::Absorbing, StepControl::default())?;
    let op = model.operator(Domain::Glued)?;
    let j = op.nearest(x0);
    let mut delta = vec![0.0; op.len()];
    delta[j] = 1.0 / op.mass[j];
    let u = evolve(&op, t, &delta, &model.ctl)?;
    let cell_mass: Vec<f64> = op.mass.iter().zip(&u).map(|(m, v)| m * v).collect();
    let ends: Vec<GluedPoint> = ens.records.iter().map(|r| r.end).collect();
    let n = ends.len();
    let mut bins = Vec::new();
    for side in [Side::Minus, Side::Plus] {
        // nodes of this side, outward from the junction
        let mut idx: Vec<usize> = (0..op.len()).filter(|&i| op.points[i].side == side && op.points[i].r > 1.0).collect();
        idx.sort_by(|&a, &b| op.points[a].r.total_cmp(&op.points[b].r));
        let r: Vec<f64> = idx.iter().map(|&i| op.points[i].r).collect();
        let inner = |k: usize| 0.5 * (r[k] + if k == 0 { 1.0 } else { r[k - 1] });
        let outer = |k: usize| if k + 1 < r.len() { 0.5 * (r[k] + r[k + 1]) } else { r[k] };
        let mut acc = 0.0;
        let mut start = 0;
        for k in 0..idx.len() {
            acc += cell_mass[idx[k]];
            if acc >= bin_mass || k + 1 == idx.len() {
                let (r_lo, r_hi) = (inner(start), outer(k));
                let count = ends.iter().filter(|p| p.side == side && p.r > r_lo && p.r <= r_hi).count();
                let mc = count as f64 / n as f64;
                bins.push(OccupationBin {
                    side,
                    r_lo,
                    r_hi,
                    count,
                    mc,
                    pde: acc,
                    rel_err: (mc - acc) / acc,
                });
                acc = 0.0;
                start = k + 1;
            }
        }
    }
    let max_rel_err = bins.iter().filter(|b| b.count >= min_count).map(|b| b.rel_err.abs()).fold(0.0, f64::max);
    let center = op.index_of(GluedPoint::plus(1.0)).map_or(0.0, |c| 0.5 * cell_mass[c]);
    let opposite_pde: f64 = bins.iter().filter(|b| b.side != x0.side).map(|b| b.pde).sum::<f64>() + center;
    let opposite = ens.count(|r| r.end.side != x0.side && r.end.r > 1.0) as f64 / n as f64;
    let se = std_err(opposite, n).max(f64::MIN_POSITIVE);
    let width = 5.0 * (2.0 * t).sqrt();
    Ok(OccupationReport {
        d: dim.d(),
        x0: x0.x(),
        t,
        n_paths: n,
        bins,
        min_count,
        max_rel_err,
        opposite_mc: opposite,
        opposite_pde,
        opposite_z: (opposite - opposite_pde) / se,
        concentration: ens.count(|r| (r.end.x() - x0.x()).abs() <= width) as f64 / n as f64,
    })
}
