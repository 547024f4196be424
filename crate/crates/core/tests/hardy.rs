use glued_bessel::hardy::*;
use glued_bessel::heat::{DiscreteOperator, Domain, FarBoundary};
use glued_bessel::riesz::RieszSolver;
use glued_bessel::space::{Ball, GluedPoint, GridSpec, Side};
use glued_bessel::specfun::Dimension;
use proptest::prelude::*;

fn d3() -> Dimension {
    Dimension::new(3.0).unwrap()
}

fn solver_for(ball: &Ball, window: f64) -> RieszSolver {
    let base = GridSpec::default().with_x_max(4.0 * window).build().unwrap();
    let grid = atom_grid(&base, ball, 24, 1.02).unwrap();
    RieszSolver::new(d3(), &grid, FarBoundary::Absorbing, Default::default()).unwrap()
}

#[test]
fn small_sweep_is_finite_and_separated() {
    let cfg = SweepConfig {
        atoms: 12,
        window: 200.0,
        ..Default::default()
    };
    for t in [Transform::Neumann, Transform::Dirichlet, Transform::Glued] {
        let r = h1_to_l1_sweep(t, d3(), &cfg).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert!(r.max_l1.is_finite() && r.max_l1 < 2.0, "{t:?} {}", r.max_l1);
        assert!(r.control_median > 3.0 * r.max_l1, "{t:?}");
    }
}

#[test]
fn h_d_atom_tail_outside_five_balls_is_uniform_in_radius() {
    // the tail shape r ∫_{|x-y0|>5r} |x-y0|^{-2} dx does not depend on r
    let cfg = SweepConfig::default();
    let tails: Vec<f64> = [0.2, 1.0, 5.0]
        .iter()
        .map(|&r| {
            let ball = Ball::new(GluedPoint::plus(30.0), r).unwrap();
            let solver = solver_for(&ball, 200.0);
            let atom = make_atom(Flavor::Dirichlet, solver.operator(Transform::Dirichlet.target()), ball, 5).unwrap();
            atom_tail_l1(&solver, Transform::Dirichlet, &atom, 5.0, 200.0, &cfg).unwrap()
        })
        .collect();
    let hi = tails.iter().copied().fold(0.0, f64::max);
    let lo = tails.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi < 0.5 && hi / lo < 5.0, "{tails:?}");
}

#[test]
fn glued_atom_norms_do_not_drift_with_radius() {
    let cfg = SweepConfig::default();
    let norms: Vec<f64> = [0.05, 0.5, 5.0, 50.0]
        .iter()
        .map(|&r| {
            let ball = Ball::new(GluedPoint::plus(1.0), r).unwrap();
            let solver = solver_for(&ball, 1e3);
            let atom = make_atom(Flavor::TwoHarmonic, solver.operator(Transform::Glued.target()), ball, 21).unwrap();
            let (near, far) = atom_l1(&solver, Transform::Glued, &atom, 1e3, &cfg).unwrap();
            near + far
        })
        .collect();
    let hi = norms.iter().copied().fold(0.0, f64::max);
    let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 2.0, "{norms:?}");
}

#[test]
fn counterexample_grows_logarithmically() {
    let r = counterexample_growth(d3(), &[10.0, 1e2, 1e3, 1e4], &CounterexampleConfig::default()).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.fit.slope > 0.0 && r.fit.r2 >= 0.9);
    assert!((r.odd_moment - 23.0 / 3.0).abs() < 1e-12);
    let first = r.rows[0].contrast;
    assert!(r.rows.iter().all(|row| (row.contrast - first).abs() < 0.01 * first));
}

#[test]
fn reverse_holder_constant_is_stable() {
    let r = reverse_holder_check(d3(), 10_000, (1.0, 1e3), &[1, 2], 0.1);
    assert!(r.pass, "{r:?}");
    assert!(r.constant < 3.0);
    assert!(r.samples.iter().all(|s| s.max_far <= 1.2));
}

#[test]
fn maximal_norms_bound_atoms_and_sums() {
    let cfg = CompareConfig {
        atoms: 16,
        sums: 6,
        maximal: MaximalConfig {
            grid: GridSpec {
                x_max: 200.0,
                ..GridSpec::default()
            },
            ..Default::default()
        },
        windows: vec![5.0, 20.0, 60.0],
        ..Default::default()
    };
    let r = compare_norms(d3(), &cfg).unwrap();
    assert!(r.pass, "{:?} {:?} {}", r.windows, r.control_fit, r.sum_ratio);
    assert!(r.c_emp < 2.0);
}

#[test]
fn two_harmonic_away_from_the_junction_matches_one_and_power() {
    let grid = GridSpec { x_max: 40.0, ..GridSpec::default() }.build().unwrap();
    let op = DiscreteOperator::new(d3(), &grid, Domain::Glued, FarBoundary::Absorbing).unwrap();
    let ball = Ball::new(GluedPoint::minus(8.0), 3.0).unwrap();
    let a = make_atom(Flavor::TwoHarmonic, &op, ball, 4).unwrap();
    let mut b = a.values.clone();
    let ones = vec![1.0; op.len()];
    let power: Vec<f64> = op.points.iter().map(|p| 1.0 / p.r).collect();
    project_out(&op, &a.support, &mut b, &[ones, power]).unwrap();
    let scale = a.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(a.values.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-10 * scale));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn atoms_meet_size_and_cancellation(c in 1.0f64..30.0, r in 0.2f64..10.0, seed in 0u64..500, which in 0usize..3) {
        let grid = GridSpec { x_max: 60.0, fine_until: c + r + 1.0, ..GridSpec::default() }.build().unwrap();
        let (domain, flavor) = [
            (Domain::Neumann, Flavor::CoifmanWeiss),
            (Domain::Dirichlet, Flavor::Dirichlet),
            (Domain::Glued, Flavor::TwoHarmonic),
        ][which];
        let op = DiscreteOperator::new(d3(), &grid, domain, FarBoundary::Absorbing).unwrap();
        let side = if domain == Domain::Glued && seed % 2 == 1 { Side::Minus } else { Side::Plus };
        let ball = Ball::new(GluedPoint::new(side, c).unwrap(), r).unwrap();
        let a = make_atom(flavor, &op, ball, seed).unwrap();
        let l1 = a.l1(&op);
        prop_assert!(a.residuals(&op).iter().all(|x| *x <= 1e-10 * l1));
        prop_assert!(a.l2(&op) <= ball_measure(&op, &ball).powf(-0.5) * (1.0 + 1e-10));
        if flavor == Flavor::TwoHarmonic {
            prop_assert!(op.integral(&a.values).abs() <= 1e-10 * l1);
        }
    }
}
