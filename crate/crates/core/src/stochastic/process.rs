//! Euler–Maruyama paths of `dX = √2 dW + (d-1)/X dt`, the diffusion whose
//! transition semigroup is `e^{-tL}` for `L = -∂² - ((d-1)/x)∂`.
//!
//! Step length is `min(ε r², max((r-1)²/4, dt_min))`: scale-relative far out,
//! shrinking near the junction. Each step also checks whether the Brownian
//! bridge between its endpoints touched `r = 1`, with probability
//! `exp(-(r₀-1)(r₁-1)/dt)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{GluedPoint, Side};
use crate::specfun::Dimension;

/// What happens at `r = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Neumann: reflect.
    Reflect,
    /// Dirichlet: kill.
    Kill,
    /// Glued line: restart on a uniformly chosen side.
    Glue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessConfig {
    pub d: f64,
    pub boundary: Boundary,
    /// `ε` in the far-field step `ε r²`.
    pub dt_base: f64,
    pub dt_min: f64,
    pub paths: usize,
    pub seed: u64,
    /// Stop at this time.
    pub horizon: Option<f64>,
    /// Absorb at `r = escape`.
    pub escape: Option<f64>,
    pub max_steps: u64,
    pub bridge: bool,
}

impl Default for ProcessConfig {
    fn default() -> Self {
        ProcessConfig {
            d: 3.0,
            boundary: Boundary::Glue,
            dt_base: 1e-3,
            dt_min: 1e-6,
            paths: 100_000,
            seed: 1,
            horizon: None,
            escape: Some(1e3),
            max_steps: 50_000_000,
            bridge: true,
        }
    }
}

pub const RNG_ALGORITHM: &str = "ChaCha8, stream = path index";

impl ProcessConfig {
    pub fn dim(&self) -> Result<Dimension> {
        Dimension::new(self.d)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.dt_base > 0.0
            && self.dt_min > 0.0
            && self.paths > 0
            && self.horizon.is_none_or(|t| t >= 0.0)
            && self.escape.is_none_or(|r| r > 1.0)
            && (self.horizon.is_some() || self.escape.is_some());
        if !ok {
            return Err(Error::Config(format!("invalid process config {self:?}")));
        }
        Ok(())
    }

    /// Step length at radius `r`.
    pub fn step(&self, r: f64) -> f64 {
        let dist = r - 1.0;
        (self.dt_base * r * r).min((0.25 * dist * dist).max(self.dt_min))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    /// Reached the escape radius on this side.
    Escaped(Side),
    /// Killed at `r = 1`.
    Killed,
    /// Alive at the horizon.
    Horizon,
    /// Step budget exhausted.
    Censored,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub outcome: Outcome,
    /// Final time: exit, kill, horizon or censoring.
    pub time: f64,
    pub end: GluedPoint,
    pub junction_hits: u32,
    /// Excursions started on the plus side after a junction hit.
    pub plus_restarts: u32,
    pub min_r: f64,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub config: ProcessConfig,
    pub start: GluedPoint,
    pub records: Vec<PathRecord>,
}

impl PathEnsemble {
    pub fn count(&self, pred: impl Fn(&PathRecord) -> bool) -> usize {
        self.records.iter().filter(|r| pred(r)).count()
    }

    pub fn censored(&self) -> usize {
        self.count(|r| r.outcome == Outcome::Censored)
    }
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_path(cfg: &ProcessConfig, d: f64, start: GluedPoint, index: usize) -> PathRecord {
    let mut rng = path_rng(cfg.seed, index);
    let mut side = start.side;
    let mut r = start.r;
    let mut t = 0.0;
    let mut rec = PathRecord {
        outcome: Outcome::Censored,
        time: 0.0,
        end: start,
        junction_hits: 0,
        plus_restarts: 0,
        min_r: r,
        steps: 0,
    };
    let escape = cfg.escape.unwrap_or(f64::INFINITY);
    let horizon = cfg.horizon.unwrap_or(f64::INFINITY);
    let finish = |rec: &mut PathRecord, outcome, t, side, r: f64| {
        rec.outcome = outcome;
        rec.time = t;
        rec.end = GluedPoint { side, r };
    };
    if r >= escape {
        finish(&mut rec, Outcome::Escaped(side), t, side, r);
        return rec;
    }
    if cfg.boundary == Boundary::Kill && r <= 1.0 {
        finish(&mut rec, Outcome::Killed, t, side, 1.0);
        return rec;
    }
    while rec.steps < cfg.max_steps {
        if t >= horizon {
            finish(&mut rec, Outcome::Horizon, t, side, r);
            return rec;
        }
        let dt = cfg.step(r).min(horizon - t);
        let z: f64 = rng.sample(StandardNormal);
        let mut next = r + (d - 1.0) / r * dt + (2.0 * dt).sqrt() * z;
        rec.steps += 1;
        let crossed_at = if next <= 1.0 {
            Some(dt * (r - 1.0) / (r - next))
        } else if cfg.bridge && cfg.boundary != Boundary::Reflect {
            let p = (-(r - 1.0) * (next - 1.0) / dt).exp();
            (p > 0.0 && rng.random::<f64>() < p).then_some(0.5 * dt)
        } else {
            None
        };
        if let Some(s) = crossed_at {
            match cfg.boundary {
                Boundary::Kill => {
                    finish(&mut rec, Outcome::Killed, t + s, side, 1.0);
                    rec.min_r = 1.0;
                    return rec;
                }
                Boundary::Reflect => next = 1.0 + (1.0 - next),
                Boundary::Glue => {
                    next = 1.0 + (next - 1.0).abs();
                    rec.junction_hits += 1;
                    side = if rng.random::<bool>() { Side::Plus } else { Side::Minus };
                    if side == Side::Plus {
                        rec.plus_restarts += 1;
                    }
                }
            }
        }
        t += dt;
        r = next;
        rec.min_r = rec.min_r.min(r);
        if r >= escape {
            finish(&mut rec, Outcome::Escaped(side), t, side, r);
            return rec;
        }
    }
    finish(&mut rec, Outcome::Censored, t, side, r);
    rec
}

/// Simulates `cfg.paths` independent paths from `start`; path `i` uses its
/// own stream, so results do not depend on scheduling.
pub fn simulate(cfg: &ProcessConfig, start: GluedPoint) -> Result<PathEnsemble> {
    cfg.validate()?;
    let d = cfg.dim()?.d();
    if cfg.boundary != Boundary::Glue && start.side == Side::Minus && start.r > 1.0 {
        return Err(Error::domain("simulate", "half-line processes start on the plus side"));
    }
    let records = (0..cfg.paths).into_par_iter().map(|i| run_path(cfg, d, start, i)).collect();
    Ok(PathEnsemble {
        config: cfg.clone(),
        start,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(boundary: Boundary) -> ProcessConfig {
        ProcessConfig {
            boundary,
            paths: 200,
            horizon: Some(2.0),
            escape: None,
            dt_base: 1e-2,
            ..Default::default()
        }
    }

    #[test]
    fn ensembles_are_reproducible() {
        let cfg = small(Boundary::Glue);
        let a = simulate(&cfg, GluedPoint::plus(1.5)).unwrap();
        let b = simulate(&cfg, GluedPoint::plus(1.5)).unwrap();
        assert_eq!(a.records, b.records);
        let c = simulate(&ProcessConfig { seed: 2, ..cfg }, GluedPoint::plus(1.5)).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn reflected_paths_stay_in_the_half_line() {
        let e = simulate(&small(Boundary::Reflect), GluedPoint::plus(1.2)).unwrap();
        assert!(e.records.iter().all(|r| r.min_r >= 1.0 && r.end.side == Side::Plus));
        assert!(e.records.iter().all(|r| r.outcome == Outcome::Horizon));
    }

    #[test]
    fn step_shrinks_near_the_junction() {
        let cfg = ProcessConfig::default();
        for r in [1.0, 1.0 + 1e-5, 1.01, 1.3, 2.0, 50.0] {
            let dt = cfg.step(r);
            assert!(dt <= ((r - 1.0).powi(2) / 4.0).max(cfg.dt_min) * (1.0 + 1e-15));
            assert!(dt >= cfg.dt_min.min(cfg.dt_base * r * r));
        }
    }

    #[test]
    fn bad_configs_are_refused() {
        let cfg = ProcessConfig {
            horizon: None,
            escape: None,
            ..Default::default()
        };
        assert!(simulate(&cfg, GluedPoint::plus(2.0)).is_err());
        let cfg = ProcessConfig {
            boundary: Boundary::Kill,
            ..Default::default()
        };
        assert!(simulate(&cfg, GluedPoint::minus(2.0)).is_err());
    }
}
