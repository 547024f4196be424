use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SymTridiag, TriFactor};
use crate::space::{GluedGrid, GluedPoint, HalfGrid, Side};
use crate::specfun::Dimension;

/// Which operator is discretized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    /// `L_N` on `[1, X_max]`, Neumann at 1.
    Neumann,
    /// `L_D` on `[1, X_max]`, Dirichlet at 1.
    Dirichlet,
    /// `L̃` on the glued line.
    Glued,
    /// `L̂` on `[-3,-1] ∪ [1, X_max]`, Dirichlet at -3.
    Hat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FarBoundary {
    #[default]
    Absorbing,
    Reflecting,
}

/// Finite-volume discretization of `f ↦ -(x^{d-1} f')' / x^{d-1}` as the
/// pencil `(S, M)`: `L = M^{-1} S` with `M` the dual-cell masses and `S`
/// the symmetric stiffness matrix. Dirichlet nodes are eliminated.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub dim: Dimension,
    pub domain: Domain,
    pub far: FarBoundary,
    pub points: Vec<GluedPoint>,
    pub mass: Vec<f64>,
    pub stiffness: SymTridiag,
}

struct Chain {
    points: Vec<GluedPoint>,
    mass: Vec<f64>,
    cond: Vec<f64>,
}

impl DiscreteOperator {
    pub fn new(dim: Dimension, grid: &HalfGrid, domain: Domain, far: FarBoundary) -> Result<Self> {
        let d = dim.d();
        let m = grid.masses(d);
        let a = grid.conductances(d);
        let n = grid.len();
        let last = n - 1;
        let chain = match domain {
            Domain::Neumann | Domain::Dirichlet => Chain {
                points: grid.r.iter().map(|&r| GluedPoint::plus(r)).collect(),
                mass: m.clone(),
                cond: a.clone(),
            },
            Domain::Glued | Domain::Hat => {
                let gg = GluedGrid::new(grid.clone());
                let c = gg.center();
                Chain {
                    points: gg.points(),
                    mass: gg.masses(d),
                    cond: (0..gg.len() - 1)
                        .map(|j| if j < c { a[c - 1 - j] } else { a[j - c] })
                        .collect(),
                }
            }
        };
        let len = chain.points.len();
        let (mut lo, mut hi) = (0, len - 1);
        let absorbing = far == FarBoundary::Absorbing;
        match domain {
            Domain::Neumann => {
                if absorbing {
                    hi = last - 1;
                }
            }
            Domain::Dirichlet => {
                lo = 1;
                if absorbing {
                    hi = last - 1;
                }
            }
            Domain::Glued => {
                if absorbing {
                    lo = 1;
                    hi = len - 2;
                }
            }
            Domain::Hat => {
                let k = grid.r.iter().position(|&r| r == 3.0).ok_or_else(|| {
                    Error::Config("the hat domain needs r = 3 as a grid node".into())
                })?;
                lo = last - k + 1;
                if absorbing {
                    hi = len - 2;
                }
            }
        }
        Ok(Self::from_chain(dim, domain, far, &chain, lo, hi))
    }

    /// Keeps chain nodes `lo..=hi`; neighbours outside are held at zero.
    fn from_chain(dim: Dimension, domain: Domain, far: FarBoundary, chain: &Chain, lo: usize, hi: usize) -> Self {
        let n = hi - lo + 1;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in lo..=hi {
            let k = i - lo;
            if i > 0 {
                diag[k] += chain.cond[i - 1];
            }
            if i + 1 < chain.points.len() {
                diag[k] += chain.cond[i];
                if i < hi {
                    off[k] = -chain.cond[i];
                }
            }
        }
        DiscreteOperator {
            dim,
            domain,
            far,
            points: chain.points[lo..=hi].to_vec(),
            mass: chain.mass[lo..=hi].to_vec(),
            stiffness: SymTridiag::new(diag, off),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Node index holding exactly `p`, if any.
    pub fn index_of(&self, p: GluedPoint) -> Option<usize> {
        let x = self.signed(p);
        let i = self.points.partition_point(|q| self.signed(*q) < x);
        (i < self.points.len() && self.points[i] == p).then_some(i)
    }

    /// Node index nearest to `p` (same side where possible).
    pub fn nearest(&self, p: GluedPoint) -> usize {
        let x = self.signed(p);
        let i = self.points.partition_point(|q| self.signed(*q) < x);
        if i == 0 {
            return 0;
        }
        if i == self.points.len() {
            return i - 1;
        }
        if x - self.signed(self.points[i - 1]) <= self.signed(self.points[i]) - x {
            i - 1
        } else {
            i
        }
    }

    /// Coordinate increasing along the chain: `u = x - 1` on the plus side,
    /// `x + 1` on the minus side.
    fn signed(&self, p: GluedPoint) -> f64 {
        match p.side {
            Side::Plus => p.r - 1.0,
            Side::Minus => 1.0 - p.r,
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        self.points.iter().map(|&p| self.signed(p)).collect()
    }

    /// `L f = M^{-1} S f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; f.len()];
        self.stiffness.matvec(f, &mut y);
        y.iter_mut().zip(&self.mass).for_each(|(v, m)| *v /= m);
        y
    }

    /// Factorization of `a M + b S`.
    pub fn pencil_factor(&self, a: f64, b: f64) -> Result<TriFactor> {
        self.stiffness.shifted(a, &self.mass, b).factor()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    pub fn integral(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mass).map(|(a, m)| a * m).sum()
    }

    /// `L¹(μ)` norm.
    pub fn l1(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.mass).map(|(a, m)| a.abs() * m).sum()
    }

    /// Discrete point mass `e_j / m_j`.
    pub fn delta(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        v[j] = 1.0 / self.mass[j];
        v
    }

    pub fn sample(&self, f: impl Fn(GluedPoint) -> f64) -> Vec<f64> {
        self.points.iter().map(|&p| f(p)).collect()
    }

    /// Whether `S + ε M` has no negative eigenvalue, i.e. the spectrum of
    /// `L` is at least `-ε`.
    pub fn spectrum_bounded_below(&self, eps: f64) -> bool {
        self.stiffness.shifted(eps, &self.mass, 1.0).negative_count() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{h_d, h_hat, h_plus, GridSpec};

    fn setup(domain: Domain, far: FarBoundary) -> DiscreteOperator {
        let dim = Dimension::new(3.0).unwrap();
        let grid = GridSpec { x_max: 12.0, ..GridSpec::default() }.build().unwrap();
        DiscreteOperator::new(dim, &grid, domain, far).unwrap()
    }

    #[test]
    fn harmonic_functions_are_discrete_harmonic() {
        let dim = Dimension::new(3.0).unwrap();
        // interior rows only: the far boundary row sees the eliminated node
        let check = |op: &DiscreteOperator, f: &dyn Fn(GluedPoint) -> f64| {
            let v = op.sample(f);
            let lv = op.apply(&v);
            for &x in &lv[..lv.len() - 1] {
                assert!(x.abs() < 1e-9, "{x}");
            }
        };
        check(&setup(Domain::Dirichlet, FarBoundary::Absorbing), &|p| h_d(dim, p.r));
        check(&setup(Domain::Neumann, FarBoundary::Absorbing), &|_| 1.0);
        let glued = setup(Domain::Glued, FarBoundary::Absorbing);
        let v = glued.sample(|p| h_plus(dim, p));
        let lv = glued.apply(&v);
        for &x in &lv[1..lv.len() - 1] {
            assert!(x.abs() < 1e-9);
        }
        check(&setup(Domain::Hat, FarBoundary::Absorbing), &|p| h_hat(dim, p).unwrap());
    }

    #[test]
    fn reflecting_stiffness_annihilates_constants() {
        for domain in [Domain::Neumann, Domain::Glued] {
            let op = setup(domain, FarBoundary::Reflecting);
            let ones = vec![1.0; op.len()];
            let mut s1 = vec![0.0; op.len()];
            op.stiffness.matvec(&ones, &mut s1);
            let scale = op.stiffness.diag.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(s1.iter().all(|v| v.abs() < 1e-12 * scale));
        }
    }

    #[test]
    fn spectra_are_nonnegative_and_lookup_works() {
        for domain in [Domain::Neumann, Domain::Dirichlet, Domain::Glued, Domain::Hat] {
            let op = setup(domain, FarBoundary::Absorbing);
            assert!(op.spectrum_bounded_below(1e-10));
            let p = op.points[op.len() / 2];
            assert_eq!(op.index_of(p), Some(op.len() / 2));
            assert_eq!(op.nearest(GluedPoint { r: p.r + 1e-9, ..p }), op.len() / 2);
        }
        let hat = setup(Domain::Hat, FarBoundary::Absorbing);
        assert!(hat.points[0].side == Side::Minus && hat.points[0].r < 3.0);
        assert!(hat.index_of(GluedPoint::minus(3.0)).is_none());
        let glued = setup(Domain::Glued, FarBoundary::Absorbing);
        assert!(glued.index_of(GluedPoint::minus(2.0)).is_some());
        assert_eq!(glued.index_of(GluedPoint::minus(1.0)), glued.index_of(GluedPoint::plus(1.0)));
    }
}
