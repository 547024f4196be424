//! Acceptance criteria at full size. Prints one PASS/FAIL line per
//! criterion, followed by its findings.

use std::process::ExitCode;
use std::time::Instant;

use glued_bessel::suite::*;
use glued_bessel::Result;

/// Criteria that fail at the required size; see the README.
const KNOWN_GAPS: &[usize] = &[6];

struct Criterion {
    id: usize,
    name: &'static str,
    budget: f64,
    run: fn() -> Result<Vec<SuiteReport>>,
}

fn at(d: f64) -> Settings {
    Settings { d, ..Default::default() }
}

fn specfun() -> Result<Vec<SuiteReport>> {
    [3.0, 4.0, 5.0, 6.0, 8.0].iter().map(|&d| specfun_check(&at(d))).collect()
}

fn assembly() -> Result<Vec<SuiteReport>> {
    [2.5, 3.0, 4.0].iter().map(|&d| heat_assembly(&at(d))).collect()
}

fn sandwich() -> Result<Vec<SuiteReport>> {
    Ok(vec![heat_gauss(&at(3.0))?])
}

fn mixed() -> Result<Vec<SuiteReport>> {
    Ok(vec![heat_mixed(&at(3.0))?, heat_pi(&at(3.0))?])
}

fn riesz() -> Result<Vec<SuiteReport>> {
    Ok(vec![riesz_bounds(&at(3.0))?])
}

fn h1l1() -> Result<Vec<SuiteReport>> {
    Ok(vec![hardy_h1l1(&at(3.0))?])
}

fn counterexample() -> Result<Vec<SuiteReport>> {
    Ok(vec![hardy_counterexample(&at(3.0))?])
}

fn stochastic() -> Result<Vec<SuiteReport>> {
    Ok(vec![
        simulate_exit(&at(3.0))?,
        simulate_exit(&Settings { x0: vec![2.0, -2.0], ..at(4.0) })?,
        simulate_hit(&at(3.0))?,
        simulate_occupation(&at(3.0))?,
    ])
}

fn rh() -> Result<Vec<SuiteReport>> {
    Ok(vec![hardy_rh(&at(3.0))?])
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "special functions", budget: 10.0, run: specfun },
        Criterion { id: 2, name: "heat assembly", budget: 120.0, run: assembly },
        Criterion { id: 3, name: "heat sandwich and prefactor", budget: 600.0, run: sandwich },
        Criterion { id: 4, name: "psi and pi consistency", budget: 120.0, run: mixed },
        Criterion { id: 5, name: "riesz derivative bounds", budget: 300.0, run: riesz },
        Criterion { id: 6, name: "h1 to l1 atoms", budget: 900.0, run: h1l1 },
        Criterion { id: 7, name: "odd-step counterexample", budget: 120.0, run: counterexample },
        Criterion { id: 8, name: "stochastic validation", budget: 600.0, run: stochastic },
        Criterion { id: 9, name: "reverse hoelder", budget: 10.0, run: rh },
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let (pass, lines) = match &outcome {
            Ok(reports) => (
                reports.iter().all(|r| r.pass) && secs <= c.budget,
                reports.iter().flat_map(|r| r.summary.iter().map(move |l| format!("{}: {l}", r.suite))).collect::<Vec<_>>(),
            ),
            Err(e) => (false, vec![format!("error: {e}")]),
        };
        let known = KNOWN_GAPS.contains(&c.id);
        let note = if !pass && known { " (known gap)" } else { "" };
        println!(
            "criterion {} [{}]: {}{note} in {secs:.1}s (budget {}s)",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            c.budget
        );
        let mut seen = std::collections::HashSet::new();
        for l in lines.into_iter().filter(|l| seen.insert(l.clone())) {
            println!("    {l}");
        }
        if !pass && !known {
            unexpected += 1;
        }
    }
    if unexpected > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS }
}
