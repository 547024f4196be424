//! Random atoms: noise on a ball, projected off the flavor's cancellation
//! functions in `L²(μ)` and scaled to `‖a‖₂ = μ(B)^{-1/2}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::{DiscreteOperator, Domain};
use crate::space::{h_d, h_hat_d, h_minus, h_plus, half_ball_measure, measure_ball, Ball, GluedPoint};
use crate::specfun::Dimension;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    /// `∫ a dμ = 0`.
    CoifmanWeiss,
    /// `∫ a h_D dμ = 0`.
    Dirichlet,
    /// `∫ a h₊ dμ = ∫ a h₋ dμ = 0`.
    TwoHarmonic,
}

impl Flavor {
    pub fn constraints(self, dim: Dimension) -> Vec<Box<dyn Fn(GluedPoint) -> f64>> {
        match self {
            Flavor::CoifmanWeiss => vec![Box::new(|_| 1.0)],
            Flavor::Dirichlet => vec![Box::new(move |p: GluedPoint| h_d(dim, p.r))],
            Flavor::TwoHarmonic => vec![
                Box::new(move |p| h_plus(dim, p)),
                Box::new(move |p| h_minus(dim, p)),
            ],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub flavor: Flavor,
    pub ball: Ball,
    /// Operator nodes inside the ball.
    pub support: Vec<usize>,
    /// Full grid function, zero off the support.
    pub values: Vec<f64>,
}

/// `μ(B)` on the operator's space: the glued line or the half-line.
pub fn ball_measure(op: &DiscreteOperator, ball: &Ball) -> f64 {
    match op.domain {
        Domain::Neumann | Domain::Dirichlet => half_ball_measure(op.dim, ball.center.r, ball.radius),
        Domain::Glued | Domain::Hat => measure_ball(op.dim, ball),
    }
}

pub fn ball_support(op: &DiscreteOperator, ball: &Ball) -> Vec<usize> {
    (0..op.len()).filter(|&i| ball.contains(op.points[i])).collect()
}

fn dot(op: &DiscreteOperator, support: &[usize], f: &[f64], g: &[f64]) -> f64 {
    support.iter().map(|&i| op.mass[i] * f[i] * g[i]).sum()
}

/// Removes from `f` its `L²(μ)` projection onto the span of `basis`, all
/// restricted to `support`. Gram–Schmidt is run twice for stability.
pub fn project_out(op: &DiscreteOperator, support: &[usize], f: &mut [f64], basis: &[Vec<f64>]) -> Result<()> {
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
    for b in basis {
        let mut v = b.clone();
        for _ in 0..2 {
            for q in &ortho {
                let c = dot(op, support, &v, q);
                support.iter().for_each(|&i| v[i] -= c * q[i]);
            }
        }
        let n = dot(op, support, &v, &v).sqrt();
        let scale = dot(op, support, b, b).sqrt();
        if !(n > 1e-10 * scale) {
            return Err(Error::DegenerateBall {
                nodes: support.len(),
                constraints: basis.len(),
            });
        }
        support.iter().for_each(|&i| v[i] /= n);
        ortho.push(v);
    }
    for _ in 0..2 {
        for q in &ortho {
            let c = dot(op, support, f, q);
            support.iter().for_each(|&i| f[i] -= c * q[i]);
        }
    }
    Ok(())
}

/// Builds an atom of `flavor` on `ball` from seeded standard normal noise.
pub fn make_atom(flavor: Flavor, op: &DiscreteOperator, ball: Ball, seed: u64) -> Result<Atom> {
    let support = ball_support(op, &ball);
    let cons = flavor.constraints(op.dim);
    if support.len() < cons.len() + 1 {
        return Err(Error::DegenerateBall {
            nodes: support.len(),
            constraints: cons.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; op.len()];
    for &i in &support {
        values[i] = StandardNormal.sample(&mut rng);
    }
    let basis: Vec<Vec<f64>> = cons
        .iter()
        .map(|c| {
            let mut v = vec![0.0; op.len()];
            support.iter().for_each(|&i| v[i] = c(op.points[i]));
            v
        })
        .collect();
    project_out(op, &support, &mut values, &basis)?;
    let norm = dot(op, &support, &values, &values).sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegenerateBall {
            nodes: support.len(),
            constraints: cons.len(),
        });
    }
    let scale = 1.0 / (norm * ball_measure(op, &ball).sqrt());
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(Atom {
        flavor,
        ball,
        support,
        values,
    })
}

/// A nonnegative bump of atom size on `ball`, violating every cancellation.
pub fn control_bump(op: &DiscreteOperator, ball: Ball) -> Result<Atom> {
    let support = ball_support(op, &ball);
    if support.is_empty() {
        return Err(Error::DegenerateBall { nodes: 0, constraints: 0 });
    }
    let mut values = vec![0.0; op.len()];
    support.iter().for_each(|&i| values[i] = 1.0);
    let norm = dot(op, &support, &values, &values).sqrt();
    let scale = 1.0 / (norm * ball_measure(op, &ball).sqrt());
    values.iter_mut().for_each(|v| *v *= scale);
    Ok(Atom {
        flavor: Flavor::CoifmanWeiss,
        ball,
        support,
        values,
    })
}

impl Atom {
    /// `|∫ a c dμ|` for each cancellation function of the flavor.
    pub fn residuals(&self, op: &DiscreteOperator) -> Vec<f64> {
        self.flavor
            .constraints(op.dim)
            .iter()
            .map(|c| self.support.iter().map(|&i| op.mass[i] * self.values[i] * c(op.points[i])).sum::<f64>().abs())
            .collect()
    }

    pub fn l1(&self, op: &DiscreteOperator) -> f64 {
        op.l1(&self.values)
    }

    pub fn l2(&self, op: &DiscreteOperator) -> f64 {
        op.norm(&self.values)
    }
}

/// `∫ f ĥ_D dμ` on a glued operator.
pub fn odd_moment(op: &DiscreteOperator, f: &[f64]) -> f64 {
    f.iter()
        .zip(&op.points)
        .zip(&op.mass)
        .map(|((v, &p), m)| m * v * h_hat_d(op.dim, p))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::FarBoundary;
    use crate::space::GridSpec;
    use proptest::prelude::*;

    fn glued() -> DiscreteOperator {
        glued_fine_until(GridSpec::default().fine_until)
    }

    fn glued_fine_until(fine_until: f64) -> DiscreteOperator {
        let grid = GridSpec { x_max: 40.0, fine_until, ..GridSpec::default() }.build().unwrap();
        DiscreteOperator::new(Dimension::new(3.0).unwrap(), &grid, Domain::Glued, FarBoundary::Absorbing).unwrap()
    }

    #[test]
    fn two_harmonic_atoms_cancel_every_harmonic() {
        let op = glued();
        let ball = Ball::new(GluedPoint::plus(1.5), 2.0).unwrap();
        let a = make_atom(Flavor::TwoHarmonic, &op, ball, 3).unwrap();
        let l1 = a.l1(&op);
        assert!(a.residuals(&op).iter().all(|r| *r <= 1e-10 * l1));
        assert!(op.integral(&a.values).abs() <= 1e-10 * l1);
        assert!(odd_moment(&op, &a.values).abs() <= 1e-10 * l1);
        let target = ball_measure(&op, &ball).powf(-0.5);
        assert!((a.l2(&op) - target).abs() <= 1e-10 * target);
    }

    #[test]
    fn projector_matches_even_odd_harmonics() {
        // span{h₊, h₋} = span{1, ĥ_D}
        let op = glued();
        let ball = Ball::new(GluedPoint::minus(2.0), 3.0).unwrap();
        let a = make_atom(Flavor::TwoHarmonic, &op, ball, 9).unwrap();
        let mut b = a.values.clone();
        let ones: Vec<f64> = (0..op.len()).map(|_| 1.0).collect();
        let odd: Vec<f64> = op.points.iter().map(|&p| h_hat_d(op.dim, p)).collect();
        project_out(&op, &a.support, &mut b, &[ones, odd]).unwrap();
        let diff = a.values.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-12 * a.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }

    #[test]
    fn tiny_balls_are_rejected() {
        let op = glued();
        let ball = Ball::new(GluedPoint::plus(30.0), 1e-4).unwrap();
        assert!(matches!(make_atom(Flavor::TwoHarmonic, &op, ball, 1), Err(Error::DegenerateBall { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn projection_is_idempotent(c in 1.0f64..30.0, r in 0.1f64..8.0, seed in 0u64..1000, minus in any::<bool>()) {
            let op = glued_fine_until(c + r + 1.0);
            let center = if minus { GluedPoint::minus(c) } else { GluedPoint::plus(c) };
            let ball = Ball::new(center, r).unwrap();
            let a = make_atom(Flavor::TwoHarmonic, &op, ball, seed).unwrap();
            let mut b = a.values.clone();
            let basis: Vec<Vec<f64>> = Flavor::TwoHarmonic
                .constraints(op.dim)
                .iter()
                .map(|f| op.points.iter().map(|&p| f(p)).collect())
                .collect();
            project_out(&op, &a.support, &mut b, &basis).unwrap();
            let scale = a.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(a.values.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12 * scale));
            prop_assert!(a.support.iter().all(|&i| ball.contains(op.points[i])));
            prop_assert!(a.values.iter().enumerate().all(|(i, v)| *v == 0.0 || a.support.contains(&i)));
        }
    }
}
