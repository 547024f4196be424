use glued_bessel::specfun::golden::{check_golden, GOLDEN_CSV};

#[test]
fn every_reference_value_matches() {
    let report = check_golden(GOLDEN_CSV).unwrap();
    assert!(report.rows.len() >= 50);
    let orders: Vec<f64> = report.rows.iter().filter(|r| r.function == "I").map(|r| r.d / 2.0 - 1.0).collect();
    assert!(orders.iter().any(|&n| n == 0.5) && orders.iter().any(|&n| n == 3.0));
    for r in &report.rows {
        assert!(r.pass, "{} d={} at {}: expected {}, got {:e} (rel {:e})", r.function, r.d, r.argument, r.expected, r.computed, r.rel_error);
    }
}
