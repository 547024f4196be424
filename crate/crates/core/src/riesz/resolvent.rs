//! `R = ∂_x L^{-1/2}` on a grid, with
//! `L^{-1/2} = 2/π ∫_0^∞ (L + k²)^{-1} dk` evaluated by one tridiagonal
//! solve per quadrature node.
//!
//! The k-axis is split as `[0, k₀] ∪ [k₀, K] ∪ [K, ∞)`. The middle part uses
//! Gauss–Legendre panels in `s = ln k`; below `k₀` the resolvent is frozen at
//! `k₀`, and above `K` (beyond the discrete spectrum) the Neumann series
//! `Σ (-L)^j k^{-2j-2}` is integrated exactly.

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::{DiscreteOperator, Domain, FarBoundary};
use crate::quad::gauss_legendre;
use crate::space::HalfGrid;
use crate::specfun::Dimension;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RieszTarget {
    Neumann,
    Dirichlet,
    Glued,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventOptions {
    /// Relative change in `L²(μ)` between refinements at which to stop.
    pub tol: f64,
    /// Initial panel width in `ln k`.
    pub panel_width: f64,
    pub nodes_per_panel: usize,
    pub max_refinements: usize,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        ResolventOptions {
            tol: 1e-6,
            panel_width: 1.0,
            nodes_per_panel: 8,
            max_refinements: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RieszImage {
    pub values: Vec<f64>,
    /// Panels in `ln k` at the accepted level.
    pub panels: usize,
    /// Relative `L²(μ)` change against the previous level.
    pub change: f64,
}

/// Five-point derivative weights on a nonuniform half-line grid, including
/// the zero boundary values dropped from the operator.
#[derive(Clone, Debug)]
struct Stencil {
    /// Per operator node: (first extended index, weights).
    rows: Vec<(usize, [f64; 5])>,
    offset: usize,
    ext_len: usize,
}

impl Stencil {
    fn new(op: &DiscreteOperator, grid: &HalfGrid) -> Self {
        let mut ext: Vec<f64> = Vec::with_capacity(op.len() + 2);
        let offset = if op.points[0].r > 1.0 { 1 } else { 0 };
        if offset == 1 {
            ext.push(1.0);
        }
        ext.extend(op.points.iter().map(|p| p.r));
        if op.far == FarBoundary::Absorbing {
            ext.push(grid.x_max());
        }
        let m = ext.len();
        let rows = (0..op.len())
            .map(|i| {
                let e = i + offset;
                let lo = e.saturating_sub(2).min(m - 5);
                let nodes: [f64; 5] = std::array::from_fn(|j| ext[lo + j]);
                (lo, lagrange_slope(&nodes, e - lo))
            })
            .collect();
        Stencil { rows, offset, ext_len: m }
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut ext = vec![0.0; self.ext_len];
        ext[self.offset..self.offset + u.len()].copy_from_slice(u);
        self.rows
            .iter()
            .map(|(lo, w)| w.iter().enumerate().map(|(j, wj)| wj * ext[lo + j]).sum())
            .collect()
    }
}

/// Weights of the derivative at `x[at]` of the interpolant through `x`.
fn lagrange_slope(x: &[f64; 5], at: usize) -> [f64; 5] {
    let xi = x[at];
    let mut w = [0.0; 5];
    for j in 0..5 {
        if j == at {
            w[j] = (0..5).filter(|&m| m != at).map(|m| 1.0 / (xi - x[m])).sum();
        } else {
            let mut p = 1.0 / (x[j] - xi);
            for m in (0..5).filter(|&m| m != at && m != j) {
                p *= (xi - x[m]) / (x[j] - x[m]);
            }
            w[j] = p;
        }
    }
    w
}

/// Gershgorin bound on the spectrum of `M^{-1/2} S M^{-1/2}`.
fn spectral_bound(op: &DiscreteOperator) -> f64 {
    let s = &op.stiffness;
    let m = &op.mass;
    (0..op.len())
        .map(|i| {
            let mut row = s.diag[i].abs() / m[i];
            if i > 0 {
                row += s.off[i - 1].abs() / (m[i] * m[i - 1]).sqrt();
            }
            if i + 1 < op.len() {
                row += s.off[i].abs() / (m[i] * m[i + 1]).sqrt();
            }
            row
        })
        .fold(0.0, f64::max)
}

struct HalfLine {
    op: DiscreteOperator,
    stencil: Stencil,
    k_low: f64,
    k_high: f64,
}

impl HalfLine {
    fn new(dim: Dimension, grid: &HalfGrid, domain: Domain, far: FarBoundary) -> Result<Self> {
        let op = DiscreteOperator::new(dim, grid, domain, far)?;
        let stencil = Stencil::new(&op, grid);
        Ok(HalfLine {
            k_low: 1e-3 / grid.x_max(),
            k_high: 10.0 * spectral_bound(&op).sqrt(),
            op,
            stencil,
        })
    }

    fn resolvent(&self, k: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut u = rhs.to_vec();
        self.op.pencil_factor(k * k, 1.0)?.solve(&mut u);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite resolvent at k = {k:e}")));
        }
        Ok(u)
    }

    /// The fixed parts: `[0, k₀]` and `[K, ∞)`.
    fn ends(&self, f: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let mut acc: Vec<f64> = self.resolvent(self.k_low, rhs)?.iter().map(|v| self.k_low * v).collect();
        let mut term = f.to_vec();
        let big = self.k_high;
        for j in 0..12 {
            let c = (if j % 2 == 0 { 1.0 } else { -1.0 }) / ((2 * j + 1) as f64 * big.powi(2 * j as i32 + 1));
            acc.iter_mut().zip(&term).for_each(|(a, t)| *a += c * t);
            term = self.op.apply(&term);
            let size = self.op.norm(&term) * c.abs() / (big * big);
            if size <= 1e-16 * self.op.norm(&acc) {
                break;
            }
        }
        Ok(acc)
    }

    fn middle(&self, rhs: &[f64], panels: usize, nodes: usize) -> Result<Vec<f64>> {
        let (s0, s1) = (self.k_low.ln(), self.k_high.ln());
        let h = (s1 - s0) / panels as f64;
        let rule = gauss_legendre(nodes);
        let mut acc = vec![0.0; rhs.len()];
        for p in 0..panels {
            let c = s0 + (p as f64 + 0.5) * h;
            for &(x, w) in rule {
                let k = (c + 0.5 * h * x).exp();
                let u = self.resolvent(k, rhs)?;
                let wk = 0.5 * h * w * k;
                acc.iter_mut().zip(&u).for_each(|(a, v)| *a += wk * v);
            }
        }
        Ok(acc)
    }

    fn apply(&self, f: &[f64], opts: &ResolventOptions) -> Result<RieszImage> {
        if f.len() != self.op.len() {
            return Err(Error::domain("apply_riesz", format!("expected {} values, got {}", self.op.len(), f.len())));
        }
        let rhs: Vec<f64> = f.iter().zip(&self.op.mass).map(|(a, m)| a * m).collect();
        let ends = self.ends(f, &rhs)?;
        let span = (self.k_high / self.k_low).ln();
        let mut panels = (span / opts.panel_width).ceil().max(1.0) as usize;
        let image = |mid: Vec<f64>| -> Vec<f64> {
            let v: Vec<f64> = mid.iter().zip(&ends).map(|(m, e)| FRAC_2_PI * (m + e)).collect();
            self.stencil.apply(&v)
        };
        let mut prev = image(self.middle(&rhs, panels, opts.nodes_per_panel)?);
        for _ in 0..opts.max_refinements {
            panels *= 2;
            let next = image(self.middle(&rhs, panels, opts.nodes_per_panel)?);
            let diff: Vec<f64> = next.iter().zip(&prev).map(|(a, b)| a - b).collect();
            let scale = self.op.norm(&next);
            let change = if scale > 0.0 { self.op.norm(&diff) / scale } else { 0.0 };
            if change <= opts.tol {
                return Ok(RieszImage {
                    values: next,
                    panels,
                    change,
                });
            }
            prev = next;
        }
        Err(Error::Refinement(format!("resolvent quadrature still changing after {panels} panels")))
    }
}

/// Riesz transforms `R_N`, `R_D` and `R̃` on one half-line grid; the glued
/// transform acts through the parity decomposition
/// `R̃f = (R_N f_e)_even + (R_D f_o)_odd`.
pub struct RieszSolver {
    pub dim: Dimension,
    neumann: HalfLine,
    dirichlet: HalfLine,
    glued: DiscreteOperator,
    pub opts: ResolventOptions,
}

impl RieszSolver {
    pub fn new(dim: Dimension, grid: &HalfGrid, far: FarBoundary, opts: ResolventOptions) -> Result<Self> {
        Ok(RieszSolver {
            dim,
            neumann: HalfLine::new(dim, grid, Domain::Neumann, far)?,
            dirichlet: HalfLine::new(dim, grid, Domain::Dirichlet, far)?,
            glued: DiscreteOperator::new(dim, grid, Domain::Glued, far)?,
            opts,
        })
    }

    /// The operator whose nodes carry grid functions for `target`.
    pub fn operator(&self, target: RieszTarget) -> &DiscreteOperator {
        match target {
            RieszTarget::Neumann => &self.neumann.op,
            RieszTarget::Dirichlet => &self.dirichlet.op,
            RieszTarget::Glued => &self.glued,
        }
    }

    pub fn apply(&self, target: RieszTarget, f: &[f64]) -> Result<RieszImage> {
        match target {
            RieszTarget::Neumann => self.neumann.apply(f, &self.opts),
            RieszTarget::Dirichlet => self.dirichlet.apply(f, &self.opts),
            RieszTarget::Glued => self.apply_glued(f),
        }
    }

    /// Resolvent `(L + k²)^{-1} f` for a half-line target.
    pub fn resolvent(&self, target: RieszTarget, k: f64, f: &[f64]) -> Result<Vec<f64>> {
        let half = match target {
            RieszTarget::Neumann => &self.neumann,
            RieszTarget::Dirichlet => &self.dirichlet,
            RieszTarget::Glued => return Err(Error::domain("resolvent", "only half-line targets")),
        };
        let rhs: Vec<f64> = f.iter().zip(&half.op.mass).map(|(a, m)| a * m).collect();
        half.resolvent(k, &rhs)
    }

    fn apply_glued(&self, f: &[f64]) -> Result<RieszImage> {
        let g = &self.glued;
        if f.len() != g.len() {
            return Err(Error::domain("apply_riesz", format!("expected {} values, got {}", g.len(), f.len())));
        }
        let c = g.len() / 2;
        let n = self.neumann.op.len();
        if g.len() != 2 * n - 1 || g.points[c].r != 1.0 {
            return Err(Error::AsymmetricGrid("glued and Neumann grids do not match".into()));
        }
        let even: Vec<f64> = (0..n).map(|i| 0.5 * (f[c + i] + f[c - i])).collect();
        let odd: Vec<f64> = (1..n).map(|i| 0.5 * (f[c + i] - f[c - i])).collect();
        let odd = &odd[..self.dirichlet.op.len()];
        let re = self.neumann.apply(&even, &self.opts)?;
        let ro = self.dirichlet.apply(odd, &self.opts)?;
        let mut out = vec![0.0; g.len()];
        out[c] = re.values[0];
        for i in 1..n {
            let o = ro.values.get(i - 1).copied().unwrap_or(0.0);
            out[c + i] = re.values[i] + o;
            out[c - i] = re.values[i] - o;
        }
        Ok(RieszImage {
            values: out,
            panels: re.panels.max(ro.panels),
            change: re.change.max(ro.change),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::GridSpec;

    fn solver() -> RieszSolver {
        let grid = GridSpec { x_max: 40.0, ..GridSpec::default() }.build().unwrap();
        RieszSolver::new(Dimension::new(3.0).unwrap(), &grid, FarBoundary::Absorbing, ResolventOptions::default()).unwrap()
    }

    #[test]
    fn slope_weights_are_exact_for_quartics() {
        let x = [1.0, 1.3, 1.35, 2.0, 2.8];
        for at in 0..5 {
            let w = lagrange_slope(&x, at);
            let got: f64 = w.iter().zip(&x).map(|(w, x)| w * x.powi(4)).sum();
            assert!((got - 4.0 * x[at].powi(3)).abs() < 1e-9);
        }
    }

    #[test]
    fn resolvent_inverts_the_shifted_operator() {
        let s = solver();
        for target in [RieszTarget::Neumann, RieszTarget::Dirichlet] {
            let op = s.operator(target);
            let f = op.sample(|p| (-(p.r - 3.0).powi(2)).exp() * p.r.sin());
            let k = 0.7;
            let lf: Vec<f64> = op.apply(&f).iter().zip(&f).map(|(a, b)| a + k * k * b).collect();
            let back = s.resolvent(target, k, &lf).unwrap();
            let diff: Vec<f64> = back.iter().zip(&f).map(|(a, b)| a - b).collect();
            assert!(op.norm(&diff) <= 1e-8 * op.norm(&f));
        }
    }

    #[test]
    fn glued_transform_respects_parity() {
        let s = solver();
        let g = s.operator(RieszTarget::Glued);
        let bump = |r: f64| (-(r - 2.5).powi(2) * 4.0).exp();
        let even = g.sample(|p| bump(p.r));
        let odd = g.sample(|p| if p.r == 1.0 { 0.0 } else { p.side.sign() * bump(p.r) });
        let c = g.len() / 2;
        let re = s.apply(RieszTarget::Glued, &even).unwrap().values;
        let ro = s.apply(RieszTarget::Glued, &odd).unwrap().values;
        let rn = s.apply(RieszTarget::Neumann, &s.operator(RieszTarget::Neumann).sample(|p| bump(p.r))).unwrap().values;
        for i in 1..=c {
            assert_eq!(re[c + i], re[c - i]);
            assert_eq!(ro[c + i], -ro[c - i]);
            assert!((re[c + i] - rn[i]).abs() <= 1e-12 * rn.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
}
