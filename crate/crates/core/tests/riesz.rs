use glued_bessel::heat::FarBoundary;
use glued_bessel::riesz::*;
use glued_bessel::space::{GluedPoint, GridSpec};
use glued_bessel::Dimension;
use proptest::prelude::*;

fn d3() -> Dimension {
    Dimension::new(3.0).unwrap()
}

fn solver(x_max: f64) -> RieszSolver {
    let grid = GridSpec { x_max, ..GridSpec::default() }.build().unwrap();
    RieszSolver::new(d3(), &grid, FarBoundary::Absorbing, ResolventOptions::default()).unwrap()
}

#[test]
fn dirichlet_kernel_is_negative_behind_the_support() {
    let xs = [4.0, 7.0, 20.0, 100.0, 1000.0];
    let report = dirichlet_sign_check(d3(), &xs, &[2.0, 2.25, 2.5, 2.75, 3.0]).unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.c_fit > 0.1);
}

#[test]
fn operator_matches_kernel_integration() {
    let s = solver(600.0);
    let report = cross_check(&s, &[1.5, 3.0, 8.0], 0.1, &[1.2, 2.0, 2.5, 4.0, 6.0, 10.0, 20.0], 0.3, 0.02).unwrap();
    assert!(report.rows.len() > 30);
    assert!(report.pass, "max deviation {}", report.max_rel_dev);
}

#[test]
fn neumann_transform_is_bounded_on_l2() {
    // R_N* R_N = I, so the ratio is one up to discretisation
    let report = l2_ratios(&solver(60.0), 100, 11).unwrap();
    assert!(report.max_ratio < 1.02 && report.min_ratio > 0.98, "{report:?}");
}

#[test]
fn dirichlet_transform_grows_on_lp_beyond_d() {
    let report = lp_growth(d3(), 4.0, &[10.0, 100.0, 1000.0], &GridSpec::default()).unwrap();
    assert!(report.growing, "{report:?}");
    // M^{1 - d/p} from the mass near the boundary
    assert!(report.fit.slope > 0.1);
}

#[test]
fn branches_approach_the_diagonal_antisymmetrically() {
    for bc in [Bc::Neumann, Bc::Dirichlet] {
        let rows = branch_continuity(bc, d3(), 3.0, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].symmetric_sum.abs() < w[0].symmetric_sum.abs());
        }
        // locally a Hilbert transform: x^{1-d} / (π (y - x)) against μ
        let last = rows.last().unwrap();
        let hilbert = 3f64.powi(-2) / std::f64::consts::PI;
        assert!((last.delta * last.above - hilbert).abs() < 1e-3 * hilbert);
        assert!((last.delta * last.below + hilbert).abs() < 1e-3 * hilbert);
    }
}

#[test]
fn glued_kernel_combines_half_line_kernels() {
    let o = KernelOptions::default();
    let n = riesz_kernel(Bc::Neumann, d3(), 2.0, 3.5, &o).unwrap().value;
    let d = riesz_kernel(Bc::Dirichlet, d3(), 2.0, 3.5, &o).unwrap().value;
    let same = glued_riesz_kernel(d3(), GluedPoint::minus(2.0), GluedPoint::minus(3.5), &o).unwrap();
    let opposite = glued_riesz_kernel(d3(), GluedPoint::plus(2.0), GluedPoint::minus(3.5), &o).unwrap();
    assert!((same - 0.5 * (n + d)).abs() < 1e-15);
    assert!((opposite - 0.5 * (n - d)).abs() < 1e-15);
}

#[test]
fn derivative_bounds_hold_with_stable_constants() {
    let cfg = DerivativeConfig { nodes: 13, fd_cells: 20, ..Default::default() };
    let report = verify_derivative_bounds(d3(), &cfg).unwrap();
    assert!(report.fd_max_rel < 1e-5, "{report:?}");
    assert!(report.neumann.refined.ratio.is_finite() && report.dirichlet.refined.ratio.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn kernels_stay_finite(x in 1.0f64..1000.0, y in 1.0f64..1000.0, d in 2.2f64..6.0) {
        prop_assume!((x - y).abs() >= 1e-3);
        let dim = Dimension::new(d).unwrap();
        for bc in [Bc::Neumann, Bc::Dirichlet] {
            let v = riesz_kernel(bc, dim, x, y, &KernelOptions::default()).unwrap();
            prop_assert!(v.value.is_finite() && v.est_error.is_finite());
            let s = riesz_kernel_dy(bc, dim, x, y, &KernelOptions::default()).unwrap();
            prop_assert!(s.value.is_finite());
        }
    }
}
