use glued_bessel::space::{h_plus, GluedPoint, GridSpec, Side};
use glued_bessel::specfun::Dimension;
use glued_bessel::stochastic::*;
use proptest::prelude::*;

fn cfg(d: f64, paths: usize) -> ProcessConfig {
    ProcessConfig {
        d,
        paths,
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn exit_probability_matches_h_plus() {
    let e = exit_probability(&cfg(4.0, 20_000), GluedPoint::plus(2.0), 1e3).unwrap();
    assert!((e.target - 0.875).abs() < 1e-15);
    assert!(e.z.abs() < 4.0, "{e:?}");
    assert!(!e.censor_flag);
    // glue rule: each restart side is a fair coin
    let p = e.plus_restarts as f64 / e.junction_hits as f64;
    let se = (0.25 / e.junction_hits as f64).sqrt();
    assert!((p - 0.5).abs() < 4.0 * se);
}

#[test]
fn halving_the_step_stays_within_noise() {
    let x = GluedPoint::plus(2.0);
    let a = exit_probability(&ProcessConfig { dt_base: 2e-3, ..cfg(4.0, 20_000) }, x, 1e3).unwrap();
    let b = exit_probability(&ProcessConfig { dt_base: 1e-3, ..cfg(4.0, 20_000) }, x, 1e3).unwrap();
    // independent ensembles: the difference has standard error √2 s.e.
    assert!((a.estimate - b.estimate).abs() < 4.0 * std::f64::consts::SQRT_2 * a.std_err);
}

#[test]
fn killed_process_survival_and_hitting_times() {
    let grid = GridSpec { x_max: 60.0, ..GridSpec::default() };
    let k = killed_survival(&cfg(3.0, 20_000), 2.0, 1e3, &[0.1, 1.0, 10.0], &grid).unwrap();
    assert!(k.hit_z.abs() < 4.0, "{} vs {}", k.hit_fraction, k.hit_target);
    assert!(k.survival.iter().all(|r| r.z.abs() < 4.0), "{:?}", k.survival);
    let h = hitting_histogram(Dimension::new(3.0).unwrap(), 2.0, &k.hit_times, 100.0, 0.01).unwrap();
    assert!(!h.insufficient);
    assert!(h.ks < 0.03, "{h:?}");
    assert_eq!(h.first_bin_count, 0);
}

#[test]
fn occupation_matches_the_heat_kernel() {
    let grid = GridSpec { x_max: 60.0, ..GridSpec::default() };
    let o = occupation_histogram(&cfg(3.0, 20_000), GluedPoint::plus(2.0), 1.0, 0.1, &grid, 500).unwrap();
    assert!(o.max_rel_err < 0.1, "{:?}", o.bins);
    assert!(o.opposite_z.abs() < 4.0);
    let o = occupation_histogram(&cfg(3.0, 5_000), GluedPoint::minus(3.0), 1e-3, 0.2, &grid, 500).unwrap();
    assert!(o.concentration >= 0.99);
    assert!(o.bins.iter().filter(|b| b.side == Side::Plus).all(|b| b.count == 0));
}

proptest! {
    #[test]
    fn barrier_exit_probability_is_consistent(d in 2.3f64..6.0, r in 1.0f64..50.0, big in 1e2f64..1e6) {
        let dim = Dimension::new(d).unwrap();
        let p = barrier_exit_probability(dim, GluedPoint::plus(r), big);
        let q = barrier_exit_probability(dim, GluedPoint::minus(r), big);
        prop_assert!((p + q - 1.0).abs() < 1e-12);
        prop_assert!(p >= h_plus(dim, GluedPoint::plus(r)) - 1e-12);
        // truncation bias is O(R^{2-d})
        let bias = p - h_plus(dim, GluedPoint::plus(r));
        prop_assert!(bias <= big.powf(2.0 - d) + 1e-14);
    }
}
