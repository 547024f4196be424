//! Crank–Nicolson time stepping with step-doubling error control.

use serde::{Deserialize, Serialize};

use super::operator::DiscreteOperator;
use crate::error::{Error, Result};
use crate::linalg::TriFactor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    /// Relative local error per step in the `L²(μ)` norm.
    pub tol: f64,
    /// First trial step; tiny so that point masses are resolved before CN's
    /// undamped high modes matter.
    pub dt_initial: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            tol: 1e-6,
            dt_initial: 1e-8,
            max_steps: 100_000,
        }
    }
}

/// Accepted step lengths; each was taken as two CN half steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Schedule {
    pub steps: Vec<f64>,
}

/// A column-major `n × m` block of grid functions.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Block {
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let n = cols.first().map_or(0, Vec::len);
        Block {
            n,
            data: cols.iter().flat_map(|c| c.iter().copied()).collect(),
        }
    }

    pub fn ncols(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.data.len() / self.n
        }
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.n..(c + 1) * self.n]
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.data[c * self.n + i]
    }
}

struct Stepper<'a> {
    op: &'a DiscreteOperator,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(op: &'a DiscreteOperator) -> Self {
        Stepper {
            op,
            scratch: Vec::new(),
        }
    }

    /// One CN step `(M + hS/2) u⁺ = (M - hS/2) u` on every column.
    fn step(&mut self, u: &mut [f64], h: f64, fac: &TriFactor) {
        let n = self.op.len();
        let a = 0.5 * h;
        let s = &self.op.stiffness;
        let m = &self.op.mass;
        self.scratch.resize(n, 0.0);
        for col in u.chunks_exact_mut(n) {
            for i in 0..n {
                let mut su = s.diag[i] * col[i];
                if i > 0 {
                    su += s.off[i - 1] * col[i - 1];
                }
                if i + 1 < n {
                    su += s.off[i] * col[i + 1];
                }
                self.scratch[i] = m[i] * col[i] - a * su;
            }
            col.copy_from_slice(&self.scratch);
            fac.solve(col);
        }
    }

    fn factor(&self, h: f64) -> Result<TriFactor> {
        self.op.pencil_factor(1.0, 0.5 * h)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("evolve", "times must be finite, nonnegative and sorted"));
    }
    Ok(())
}

/// Evolves every column of `init` to each of `times`, choosing steps
/// adaptively. Returns the states at `times` and the schedule used.
pub fn evolve_block(op: &DiscreteOperator, init: &Block, times: &[f64], ctl: &StepControl) -> Result<(Vec<Block>, Schedule)> {
    check_times(times)?;
    let n = op.len();
    let mut u = init.data.clone();
    let mut full = vec![0.0; u.len()];
    let mut stepper = Stepper::new(op);
    let mut out = Vec::with_capacity(times.len());
    let mut schedule = Schedule::default();
    let mut t = 0.0;
    let mut dt = ctl.dt_initial;
    for &target in times {
        while t < target {
            let remaining = target - t;
            let last = dt >= remaining;
            let h = if last { remaining } else { dt };
            full.copy_from_slice(&u);
            stepper.step(&mut full, h, &stepper.factor(h)?);
            let half_fac = stepper.factor(0.5 * h)?;
            let mut half = u.clone();
            stepper.step(&mut half, 0.5 * h, &half_fac);
            stepper.step(&mut half, 0.5 * h, &half_fac);
            let mut err: f64 = 0.0;
            for (cf, ch) in full.chunks_exact(n).zip(half.chunks_exact(n)) {
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..n {
                    let e = cf[i] - ch[i];
                    num += op.mass[i] * e * e;
                    den += op.mass[i] * ch[i] * ch[i];
                }
                if den > 0.0 {
                    err = err.max((num / den).sqrt());
                }
            }
            let grow = if err == 0.0 {
                2.0
            } else {
                (0.9 * (ctl.tol / err).cbrt()).clamp(0.25, 2.0)
            };
            if err <= ctl.tol {
                u = half;
                t = if last { target } else { t + h };
                schedule.steps.push(h);
                // a step clipped to an output time says nothing about dt
                dt = if last { dt.max(h * grow) } else { h * grow };
            } else {
                dt = h * grow;
            }
            if schedule.steps.len() > ctl.max_steps || dt < 1e-300 {
                return Err(Error::StepFailure {
                    t,
                    step: dt,
                    detail: format!("step budget {} exhausted (error {err:e})", ctl.max_steps),
                });
            }
        }
        out.push(Block { n, data: u.clone() });
    }
    Ok((out, schedule))
}

/// Re-runs a recorded schedule on another operator; used to compare
/// operators whose exact discrete evolutions coincide.
pub fn replay_block(op: &DiscreteOperator, init: &Block, times: &[f64], schedule: &Schedule) -> Result<Vec<Block>> {
    check_times(times)?;
    let mut u = init.data.clone();
    let mut stepper = Stepper::new(op);
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut steps = schedule.steps.iter();
    for &target in times {
        while t < target {
            let h = *steps.next().ok_or_else(|| Error::StepFailure {
                t,
                step: 0.0,
                detail: "schedule ended before the final time".into(),
            })?;
            let fac = stepper.factor(0.5 * h)?;
            stepper.step(&mut u, 0.5 * h, &fac);
            stepper.step(&mut u, 0.5 * h, &fac);
            t = if (t + h - target).abs() <= 1e-12 * target { target } else { t + h };
        }
        out.push(Block { n: op.len(), data: u.clone() });
    }
    Ok(out)
}

/// `T_t f`.
pub fn evolve(op: &DiscreteOperator, t: f64, f: &[f64], ctl: &StepControl) -> Result<Vec<f64>> {
    if t == 0.0 {
        return Ok(f.to_vec());
    }
    let (mut out, _) = evolve_block(op, &Block::from_columns(&[f.to_vec()]), &[t], ctl)?;
    Ok(out.pop().unwrap().data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::operator::{Domain, FarBoundary};
    use crate::space::{GluedPoint, GridSpec};
    use crate::specfun::Dimension;

    fn op(domain: Domain, far: FarBoundary) -> DiscreteOperator {
        let grid = GridSpec { x_max: 40.0, ..GridSpec::default() }.build().unwrap();
        DiscreteOperator::new(Dimension::new(3.0).unwrap(), &grid, domain, far).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let o = op(Domain::Neumann, FarBoundary::Absorbing);
        let f = o.sample(|p| (-p.r).exp());
        assert_eq!(evolve(&o, 0.0, &f, &StepControl::default()).unwrap(), f);
    }

    #[test]
    fn neumann_mass_is_conserved() {
        let o = op(Domain::Neumann, FarBoundary::Reflecting);
        let j = o.index_of(GluedPoint::plus(2.0)).unwrap();
        let (out, _) = evolve_block(&o, &Block::from_columns(&[o.delta(j)]), &[0.1, 1.0, 10.0], &StepControl::default()).unwrap();
        for b in &out {
            assert!((o.integral(b.column(0)) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn semigroup_property() {
        let o = op(Domain::Dirichlet, FarBoundary::Absorbing);
        let ctl = StepControl { tol: 1e-9, ..Default::default() };
        let f = o.sample(|p| (-(p.r - 3.0).powi(2)).exp());
        let once = evolve(&o, 1.5, &f, &ctl).unwrap();
        let twice = evolve(&o, 1.0, &evolve(&o, 0.5, &f, &ctl).unwrap(), &ctl).unwrap();
        let diff: Vec<f64> = once.iter().zip(&twice).map(|(a, b)| a - b).collect();
        assert!(o.norm(&diff) <= 1e-6 * o.norm(&once));
    }

    #[test]
    fn dirichlet_survival_decreases() {
        let o = op(Domain::Dirichlet, FarBoundary::Absorbing);
        let ones = vec![1.0; o.len()];
        let (out, _) = evolve_block(&o, &Block::from_columns(&[ones]), &[0.1, 1.0, 10.0], &StepControl::default()).unwrap();
        let j = o.index_of(GluedPoint::plus(2.0)).unwrap();
        assert!(out[0].get(j, 0) > out[1].get(j, 0) && out[1].get(j, 0) > out[2].get(j, 0));
    }

    #[test]
    fn unsorted_times_are_rejected() {
        let o = op(Domain::Neumann, FarBoundary::Absorbing);
        let b = Block::from_columns(&[vec![0.0; o.len()]]);
        assert!(evolve_block(&o, &b, &[1.0, 0.5], &StepControl::default()).is_err());
    }
}
