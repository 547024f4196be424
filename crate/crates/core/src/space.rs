//! The glued space `X̃ = (-∞,-1] ∪ [1,∞)` with `±1` identified, its metric
//! `ρ`, the measure `dμ = |x|^{d-1} dx`, balls, the harmonic functions
//! `h_±, h_D, ĥ`, and junction-symmetric stretched grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::Dimension;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

/// A point `x = ±r` of `X̃`, `r ≥ 1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GluedPoint {
    pub side: Side,
    pub r: f64,
}

impl PartialEq for GluedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && (self.side == other.side || self.r == 1.0)
    }
}

impl GluedPoint {
    pub const JUNCTION: GluedPoint = GluedPoint { side: Side::Plus, r: 1.0 };

    pub fn new(side: Side, r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::domain("GluedPoint", format!("|x| = {r} must be at least 1")));
        }
        Ok(GluedPoint { side, r })
    }

    pub fn plus(r: f64) -> Self {
        GluedPoint { side: Side::Plus, r }
    }

    pub fn minus(r: f64) -> Self {
        GluedPoint { side: Side::Minus, r }
    }

    /// From a signed coordinate with `|x| ≥ 1`.
    pub fn from_x(x: f64) -> Result<Self> {
        let side = if x < 0.0 { Side::Minus } else { Side::Plus };
        Self::new(side, x.abs())
    }

    pub fn x(self) -> f64 {
        self.side.sign() * self.r
    }

    pub fn mirror(self) -> Self {
        GluedPoint {
            side: self.side.flip(),
            r: self.r,
        }
    }
}

/// Glued distance: Euclidean on one side, `|x - y| - 2` across the junction.
pub fn rho(x: GluedPoint, y: GluedPoint) -> f64 {
    if x.side == y.side {
        (x.r - y.r).abs()
    } else {
        x.r + y.r - 2.0
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Ball {
    pub center: GluedPoint,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: GluedPoint, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::domain("Ball", format!("radius {radius} must be positive")));
        }
        Ok(Ball { center, radius })
    }

    /// The trace `[a, b]` (in `|x|`) of the ball on one half-line, if any.
    /// A radius beyond the distance to the junction spills onto the other
    /// side.
    pub fn trace(&self, side: Side) -> Option<(f64, f64)> {
        let (c, r) = (self.center.r, self.radius);
        if side == self.center.side || c == 1.0 {
            Some(((c - r).max(1.0), c + r))
        } else {
            let spill = r - (c - 1.0);
            (spill > 0.0).then(|| (1.0, 1.0 + spill))
        }
    }

    pub fn contains(&self, p: GluedPoint) -> bool {
        rho(self.center, p) <= self.radius
    }

    pub fn meets_junction(&self) -> bool {
        self.center.r - 1.0 < self.radius
    }
}

/// `∫_a^b r^{d-1} dr`.
pub fn shell_measure(d: f64, a: f64, b: f64) -> f64 {
    (b.powf(d) - a.powf(d)) / d
}

/// Exact `μ(B)`.
pub fn measure_ball(dim: Dimension, ball: &Ball) -> f64 {
    [Side::Minus, Side::Plus]
        .iter()
        .filter_map(|&s| ball.trace(s))
        .map(|(a, b)| shell_measure(dim.d(), a, b))
        .sum()
}

/// `∫_a^b r^p dr`.
fn power_integral(p: f64, a: f64, b: f64) -> f64 {
    if (p + 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
    }
}

/// `μ(B(x, r) ∩ X₊)` for the half-line ball around `x ≥ 1`.
pub fn half_ball_measure(dim: Dimension, x: f64, radius: f64) -> f64 {
    shell_measure(dim.d(), (x - radius).max(1.0), x + radius)
}

/// `μ_{h_D²}(B(x, r) ∩ X₊)`, density `(1 - r^{2-d})² r^{d-1}`.
pub fn half_ball_measure_hd2(dim: Dimension, x: f64, radius: f64) -> f64 {
    let d = dim.d();
    let (a, b) = ((x - radius).max(1.0), x + radius);
    power_integral(d - 1.0, a, b) - 2.0 * power_integral(1.0, a, b) + power_integral(3.0 - d, a, b)
}

/// `μ_{ĥ²}` of a glued ball truncated to `X̂ = [-3,-1] ∪ [1,∞)`.
pub fn hat_ball_measure_h2(dim: Dimension, ball: &Ball) -> f64 {
    let d = dim.d();
    let e = 2.0 - d;
    let alpha = 1.0 / (2.0 - 3f64.powf(e));
    let c = 3f64.powf(e);
    let mut total = 0.0;
    if let Some((a, b)) = ball.trace(Side::Plus) {
        // (1 - α r^e)² r^{d-1}
        total += power_integral(d - 1.0, a, b) - 2.0 * alpha * power_integral(1.0, a, b)
            + alpha * alpha * power_integral(3.0 - d, a, b);
    }
    if let Some((a, b)) = ball.trace(Side::Minus) {
        let b = b.min(3.0);
        if b > a {
            // α² (r^e - 3^e)² r^{d-1}
            total += alpha
                * alpha
                * (power_integral(3.0 - d, a, b) - 2.0 * c * power_integral(1.0, a, b)
                    + c * c * power_integral(d - 1.0, a, b));
        }
    }
    total
}

/// `h_D(r) = 1 - r^{2-d}` on `[1, ∞)`.
pub fn h_d(dim: Dimension, r: f64) -> f64 {
    1.0 - r.powf(2.0 - dim.d())
}

/// Odd extension `ĥ_D(x) = sign(x) h_D(|x|)`.
pub fn h_hat_d(dim: Dimension, p: GluedPoint) -> f64 {
    p.side.sign() * h_d(dim, p.r)
}

/// Probability of escaping through `+∞`: `(1 + ĥ_D)/2`.
pub fn h_plus(dim: Dimension, p: GluedPoint) -> f64 {
    match p.side {
        Side::Plus => 1.0 - 0.5 * p.r.powf(2.0 - dim.d()),
        Side::Minus => 0.5 * p.r.powf(2.0 - dim.d()),
    }
}

pub fn h_minus(dim: Dimension, p: GluedPoint) -> f64 {
    h_plus(dim, p.mirror())
}

/// Harmonic function on `X̂ = [-3,-1] ∪ [1,∞)` vanishing at `-3`, tending to
/// 1 at `+∞`, with matching flux through the junction.
pub fn h_hat(dim: Dimension, p: GluedPoint) -> Result<f64> {
    let e = 2.0 - dim.d();
    let alpha = 1.0 / (2.0 - 3f64.powf(e));
    match p.side {
        Side::Plus => Ok(1.0 - alpha * p.r.powf(e)),
        Side::Minus if p.r <= 3.0 => Ok(alpha * (p.r.powf(e) - 3f64.powf(e))),
        Side::Minus => Err(Error::domain("h_hat", format!("x = -{} lies outside [-3, ∞)", p.r))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Harmonic {
    HPlus,
    HMinus,
    HHatD,
    HD,
    HHat,
}

pub fn harmonic_eval(which: Harmonic, dim: Dimension, p: GluedPoint) -> Result<f64> {
    match which {
        Harmonic::HPlus => Ok(h_plus(dim, p)),
        Harmonic::HMinus => Ok(h_minus(dim, p)),
        Harmonic::HHatD => Ok(h_hat_d(dim, p)),
        Harmonic::HD => Ok(h_d(dim, p.r)),
        Harmonic::HHat => h_hat(dim, p),
    }
}

/// Half-line grid parameters. Spacing starts at `h_min` at `r = 1`, grows by
/// `stretch` up to `h_max`, stays there until `fine_until`, then grows by
/// `far_stretch` until `x_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub h_min: f64,
    pub stretch: f64,
    pub h_max: f64,
    pub fine_until: f64,
    pub far_stretch: f64,
    pub x_max: f64,
    /// Radii that must be grid nodes.
    pub breakpoints: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            h_min: 0.005,
            stretch: 1.02,
            h_max: 0.02,
            fine_until: 22.0,
            far_stretch: 1.04,
            x_max: 60.0,
            breakpoints: vec![2.0, 3.0],
        }
    }
}

impl GridSpec {
    /// All spacings halved (stretch ratios square-rooted).
    pub fn refined(&self) -> Self {
        GridSpec {
            h_min: self.h_min / 2.0,
            stretch: self.stretch.sqrt(),
            h_max: self.h_max / 2.0,
            far_stretch: self.far_stretch.sqrt(),
            ..self.clone()
        }
    }

    pub fn with_x_max(&self, x_max: f64) -> Self {
        GridSpec {
            x_max,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.h_min > 0.0
            && self.h_max >= self.h_min
            && self.stretch >= 1.0
            && self.stretch <= 1.02 + 1e-12
            && self.far_stretch >= 1.0
            && self.x_max > 1.0 + self.h_min
            && self.fine_until >= 1.0;
        if !ok {
            return Err(Error::Config(format!("invalid grid spec {self:?}")));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<HalfGrid> {
        self.validate()?;
        let mut r = vec![1.0];
        let mut h = self.h_min;
        let mut x = 1.0;
        while x < self.x_max {
            x += h;
            r.push(x);
            h = if x < self.fine_until {
                (h * self.stretch).min(self.h_max)
            } else {
                h * self.far_stretch
            };
        }
        let last = r.len() - 1;
        r[last] = self.x_max;
        // absorb a sliver final cell into its neighbour
        if last >= 3 && r[last] - r[last - 1] < 0.5 * (r[last - 1] - r[last - 2]) {
            r.remove(last - 1);
        }
        for &b in &self.breakpoints {
            if b <= 1.0 || b >= self.x_max {
                continue;
            }
            let i = r.partition_point(|&v| v < b);
            let j = if i > 0 && (b - r[i - 1]) < (r[i] - b) { i - 1 } else { i };
            if j > 0 && j < r.len() - 1 {
                r[j] = b;
            }
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grid nodes not increasing after snapping".into()));
        }
        Ok(HalfGrid { r })
    }
}

/// Nodes `1 = r_0 < r_1 < ... < r_N = x_max` on one half-line.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfGrid {
    pub r: Vec<f64>,
}

impl HalfGrid {
    pub fn from_nodes(r: Vec<f64>) -> Result<Self> {
        if r.len() < 3 || r[0] != 1.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("half-line nodes must start at 1 and increase".into()));
        }
        Ok(HalfGrid { r })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Index of the node nearest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let i = self.r.partition_point(|&v| v < r);
        if i == 0 {
            0
        } else if i == self.r.len() {
            i - 1
        } else if r - self.r[i - 1] <= self.r[i] - r {
            i - 1
        } else {
            i
        }
    }

    /// Dual-cell masses `∫ r^{d-1}` over `[c_{i-1/2}, c_{i+1/2}]`, the end
    /// cells being half cells.
    pub fn masses(&self, d: f64) -> Vec<f64> {
        let n = self.r.len();
        (0..n)
            .map(|i| {
                let a = if i == 0 { self.r[0] } else { 0.5 * (self.r[i - 1] + self.r[i]) };
                let b = if i == n - 1 { self.r[i] } else { 0.5 * (self.r[i] + self.r[i + 1]) };
                shell_measure(d, a, b)
            })
            .collect()
    }

    /// Edge conductances `1 / ∫_{r_i}^{r_{i+1}} r^{1-d} dr`; with these,
    /// `1` and `r^{2-d}` are exactly discrete-harmonic.
    pub fn conductances(&self, d: f64) -> Vec<f64> {
        self.r
            .windows(2)
            .map(|w| {
                if (d - 2.0).abs() < 1e-12 {
                    1.0 / (w[1] / w[0]).ln()
                } else {
                    (d - 2.0) / (w[0].powf(2.0 - d) - w[1].powf(2.0 - d))
                }
            })
            .collect()
    }
}

/// A junction-symmetric grid on `X̃`: node `j` of `n = 2N+1` sits at
/// `-r_{N-j}` for `j < N`, the junction for `j = N`, and `+r_{j-N}` beyond.
#[derive(Clone, Debug, PartialEq)]
pub struct GluedGrid {
    pub half: HalfGrid,
}

impl GluedGrid {
    pub fn new(half: HalfGrid) -> Self {
        GluedGrid { half }
    }

    pub fn len(&self) -> usize {
        2 * self.half.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center(&self) -> usize {
        self.half.len() - 1
    }

    pub fn point(&self, j: usize) -> GluedPoint {
        let c = self.center();
        if j >= c {
            GluedPoint::plus(self.half.r[j - c])
        } else {
            GluedPoint::minus(self.half.r[c - j])
        }
    }

    pub fn index(&self, side: Side, half_index: usize) -> usize {
        match side {
            Side::Plus => self.center() + half_index,
            Side::Minus => self.center() - half_index,
        }
    }

    pub fn points(&self) -> Vec<GluedPoint> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    /// Glued masses; the junction cell collects both half cells.
    pub fn masses(&self, d: f64) -> Vec<f64> {
        let m = self.half.masses(d);
        let c = self.center();
        (0..self.len())
            .map(|j| if j == c { 2.0 * m[0] } else { m[j.abs_diff(c)] })
            .collect()
    }

    pub fn sample(&self, f: impl Fn(GluedPoint) -> f64) -> Vec<f64> {
        (0..self.len()).map(|j| f(self.point(j))).collect()
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::AsymmetricGrid(format!(
                "function has {} values, grid has {} nodes",
                f.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// `f = f_e + f_o` with `f_e(x) = (f(x) + f(-x))/2`.
    pub fn parity_split(&self, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(f)?;
        let n = f.len();
        let even: Vec<f64> = (0..n).map(|j| 0.5 * (f[j] + f[n - 1 - j])).collect();
        let odd: Vec<f64> = (0..n).map(|j| 0.5 * (f[j] - f[n - 1 - j])).collect();
        Ok((even, odd))
    }

    /// Values on the plus side, junction included.
    pub fn restrict(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f)?;
        Ok(f[self.center()..].to_vec())
    }

    /// Even or odd extension of a half-line function.
    pub fn extend(&self, g: &[f64], parity: Parity) -> Result<Vec<f64>> {
        if g.len() != self.half.len() {
            return Err(Error::AsymmetricGrid(format!(
                "half-line function has {} values, grid has {}",
                g.len(),
                self.half.len()
            )));
        }
        let c = self.center();
        Ok((0..self.len())
            .map(|j| {
                if j >= c {
                    g[j - c]
                } else {
                    match parity {
                        Parity::Even => g[c - j],
                        Parity::Odd => -g[c - j],
                    }
                }
            })
            .collect())
    }

    /// `(node, side, value)` rows.
    pub fn to_csv(&self, f: &[f64]) -> Result<String> {
        self.check(f)?;
        let mut out = String::from("node,side,value\n");
        for (j, v) in f.iter().enumerate() {
            let p = self.point(j);
            let side = match p.side {
                Side::Plus => "plus",
                Side::Minus => "minus",
            };
            out.push_str(&format!("{},{},{:.17e}\n", p.r, side, v));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dim(d: f64) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn point() -> impl Strategy<Value = GluedPoint> {
        (any::<bool>(), 1.0f64..50.0).prop_map(|(s, r)| GluedPoint {
            side: if s { Side::Plus } else { Side::Minus },
            r,
        })
    }

    #[test]
    fn weighted_measures_match_quadrature() {
        use crate::quad::{integrate, QuadOptions};
        let q = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| integrate(f, a, b, &QuadOptions::rel(1e-13)).unwrap().value;
        for d in [2.5, 3.0, 4.0, 5.5] {
            let dm = dim(d);
            let (x, r) = (1.7, 2.2);
            let hd2 = q(&|s| h_d(dm, s).powi(2) * s.powf(d - 1.0), 1.0, x + r);
            assert!((half_ball_measure_hd2(dm, x, r) - hd2).abs() < 1e-10 * hd2);
            assert!((half_ball_measure(dm, 4.0, 1.0) - q(&|s| s.powf(d - 1.0), 3.0, 5.0)).abs() < 1e-9);
            let ball = Ball::new(GluedPoint::plus(1.5), 2.0).unwrap();
            let hat = q(&|s| h_hat(dm, GluedPoint::plus(s)).unwrap().powi(2) * s.powf(d - 1.0), 1.0, 3.5)
                + q(&|s| h_hat(dm, GluedPoint::minus(s)).unwrap().powi(2) * s.powf(d - 1.0), 1.0, 2.5);
            assert!((hat_ball_measure_h2(dm, &ball) - hat).abs() < 1e-10 * hat);
            // truncation at -3
            let wide = Ball::new(GluedPoint::plus(1.0), 5.0).unwrap();
            let hat = q(&|s| h_hat(dm, GluedPoint::plus(s)).unwrap().powi(2) * s.powf(d - 1.0), 1.0, 6.0)
                + q(&|s| h_hat(dm, GluedPoint::minus(s)).unwrap().powi(2) * s.powf(d - 1.0), 1.0, 3.0);
            assert!((hat_ball_measure_h2(dm, &wide) - hat).abs() < 1e-10 * hat);
        }
    }

    #[test]
    fn metric_examples() {
        assert_eq!(rho(GluedPoint::plus(2.0), GluedPoint::minus(3.0)), 3.0);
        assert_eq!(rho(GluedPoint::plus(1.0), GluedPoint::minus(1.0)), 0.0);
        assert_eq!(rho(GluedPoint::plus(2.0), GluedPoint::plus(5.0)), 3.0);
        assert_eq!(GluedPoint::plus(1.0), GluedPoint::minus(1.0));
        assert!(GluedPoint::new(Side::Plus, 0.5).is_err());
    }

    #[test]
    fn ball_measure_wraps_through_junction() {
        let b = Ball::new(GluedPoint::plus(1.5), 1.0).unwrap();
        assert_eq!(b.trace(Side::Plus), Some((1.0, 2.5)));
        assert_eq!(b.trace(Side::Minus), Some((1.0, 1.5)));
        assert!((measure_ball(dim(3.0), &b) - 17.0 / 3.0).abs() < 1e-13);
        let far = Ball::new(GluedPoint::minus(10.0), 2.0).unwrap();
        assert_eq!(far.trace(Side::Plus), None);
        assert!(!far.meets_junction());
    }

    #[test]
    fn harmonic_examples() {
        assert!((h_plus(dim(4.0), GluedPoint::plus(2.0)) - 0.875).abs() < 1e-15);
        assert!((h_plus(dim(3.0), GluedPoint::plus(2.0)) - 0.75).abs() < 1e-15);
        assert_eq!(h_plus(dim(3.0), GluedPoint::JUNCTION), 0.5);
        assert_eq!(h_d(dim(3.5), 1.0), 0.0);
        assert_eq!(h_hat(dim(3.0), GluedPoint::minus(3.0)).unwrap(), 0.0);
        assert!(h_hat(dim(3.0), GluedPoint::minus(3.5)).is_err());
    }

    #[test]
    fn h_hat_is_continuous_with_matching_flux() {
        let dm = dim(3.0);
        let e = 1e-6;
        let up = h_hat(dm, GluedPoint::plus(1.0)).unwrap();
        let down = h_hat(dm, GluedPoint::minus(1.0)).unwrap();
        assert!((up - down).abs() < 1e-15);
        let slope_plus = (h_hat(dm, GluedPoint::plus(1.0 + e)).unwrap() - up) / e;
        let slope_minus = (down - h_hat(dm, GluedPoint::minus(1.0 + e)).unwrap()) / e;
        assert!((slope_plus - slope_minus).abs() < 1e-5);
        // bounded above and below on [-2,-1] ∪ [1, ∞)
        let lo = h_hat(dm, GluedPoint::minus(2.0)).unwrap();
        assert!(lo > 0.09 && up < 1.0);
    }

    #[test]
    fn grid_is_valid_and_snapped() {
        let g = GridSpec::default().build().unwrap();
        assert_eq!(g.r[0], 1.0);
        assert_eq!(g.x_max(), 60.0);
        assert!(g.r.contains(&2.0) && g.r.contains(&3.0));
        assert!((g.r[1] - 1.0 - 0.005).abs() < 1e-15);
        let total: f64 = g.masses(3.0).iter().sum();
        assert!((total - shell_measure(3.0, 1.0, 60.0)).abs() < 1e-9 * total);
        assert!(GridSpec { stretch: 1.1, ..GridSpec::default() }.build().is_err());
    }

    #[test]
    fn discrete_harmonicity_of_r_power() {
        // conductance-weighted flux of r^{2-d} is constant along the chain
        let d = 3.7;
        let g = GridSpec::default().build().unwrap();
        let a = g.conductances(d);
        let f: Vec<f64> = g.r.iter().map(|r| r.powf(2.0 - d)).collect();
        let flux: Vec<f64> = (0..a.len()).map(|i| a[i] * (f[i + 1] - f[i])).collect();
        for q in &flux {
            assert!((q / flux[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn parity_split_of_h_plus() {
        let dm = dim(3.0);
        let grid = GluedGrid::new(GridSpec::default().build().unwrap());
        let f = grid.sample(|p| h_plus(dm, p));
        let (e, o) = grid.parity_split(&f).unwrap();
        for j in 0..grid.len() {
            assert!((e[j] - 0.5).abs() < 1e-15);
            assert!((o[j] - 0.5 * h_hat_d(dm, grid.point(j))).abs() < 1e-15);
        }
        let back = grid.extend(&grid.restrict(&o).unwrap(), Parity::Odd).unwrap();
        assert_eq!(back, o);
        assert!(grid.parity_split(&f[1..]).is_err());
    }

    proptest! {
        #[test]
        fn rho_is_a_metric(x in point(), y in point(), z in point()) {
            prop_assert!((rho(x, y) - rho(y, x)).abs() < 1e-12);
            prop_assert!(rho(x, z) <= rho(x, y) + rho(y, z) + 1e-12);
            prop_assert!(rho(x, x) == 0.0);
        }

        #[test]
        fn harmonic_family_algebra(d in 2.1f64..8.0, x in point()) {
            let dm = dim(d);
            let (p, m) = (h_plus(dm, x), h_minus(dm, x));
            prop_assert!((p + m - 1.0).abs() < 1e-14);
            prop_assert!((p - m - h_hat_d(dm, x)).abs() < 1e-14);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn small_ball_density(d in 2.1f64..6.0, x in point(), r in 1e-7f64..1e-5) {
            prop_assume!(x.r > 1.0 + 1e-4);
            let b = Ball::new(x, r).unwrap();
            let ratio = measure_ball(dim(d), &b) / (2.0 * r * x.r.powf(d - 1.0));
            prop_assert!((ratio - 1.0).abs() < 1e-4);
        }

        #[test]
        fn doubling(d in 2.1f64..6.0, x in point(), r in 1e-3f64..1e3) {
            let b1 = Ball::new(x, r).unwrap();
            let b2 = Ball::new(x, 2.0 * r).unwrap();
            prop_assert!(measure_ball(dim(d), &b2) <= 2f64.powf(d + 1.0) * measure_ball(dim(d), &b1));
        }
    }
}
