//! Reverse Hölder property of `h_D` on intervals of `X₊`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::space::h_d;
use crate::specfun::Dimension;

/// `sup_{[a,b]} h_D / (μ-average of h_D over [a,b])`, i.e.
/// `h_D(b) / (1 - (d/2)(b² - a²)/(b^d - a^d))`, stable as `b → a`.
pub fn rh_ratio(dim: Dimension, a: f64, b: f64) -> f64 {
    let d = dim.d();
    if b <= a {
        return 1.0;
    }
    let t = ((b - a) / a).ln_1p();
    // (b^d - a^d)/a^d and (b² - a²)/a²
    let pd = (d * t).exp_m1();
    let p2 = (2.0 * t).exp_m1();
    // 1 - (d/2) a^{2-d} p2/pd, with 1 - a^{2-d} split off to keep precision
    let e = a.powf(2.0 - d);
    let q = 0.5 * d * p2 / pd;
    let avg = h_d(dim, a) - e * (q - 1.0);
    h_d(dim, b) / avg
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhSample {
    pub seed: u64,
    pub max_ratio: f64,
    pub worst: (f64, f64),
    /// Maximum over intervals with `a ≥ 2`.
    pub max_far: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhReport {
    pub d: f64,
    pub intervals: usize,
    pub samples: Vec<RhSample>,
    /// Largest ratio over `[1, b]` on a log grid of `b`.
    pub junction_max: f64,
    pub constant: f64,
    pub spread: f64,
    pub pass: bool,
}

fn sample(dim: Dimension, n: usize, range: (f64, f64), seed: u64) -> RhSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l0, l1) = (range.0.ln(), range.1.ln());
    let mut out = RhSample {
        seed,
        max_ratio: 0.0,
        worst: (range.0, range.0),
        max_far: 0.0,
    };
    for _ in 0..n {
        let u = (l0 + (l1 - l0) * rng.random::<f64>()).exp();
        let v = (l0 + (l1 - l0) * rng.random::<f64>()).exp();
        let (a, b) = (u.min(v), u.max(v));
        let r = rh_ratio(dim, a, b);
        if r > out.max_ratio {
            out.max_ratio = r;
            out.worst = (a, b);
        }
        if a >= 2.0 {
            out.max_far = out.max_far.max(r);
        }
    }
    out
}

/// Random intervals `[a, b] ⊆ range` with log-uniform endpoints, one
/// sample per seed. Passes if the constant is finite, agrees across seeds
/// within `stability`, bounds the `[1, b]` family, and far ratios are `≤ 2`.
pub fn reverse_holder_check(dim: Dimension, n: usize, range: (f64, f64), seeds: &[u64], stability: f64) -> RhReport {
    let samples: Vec<RhSample> = seeds.iter().map(|&s| sample(dim, n, range, s)).collect();
    let junction_max = crate::fit::geomspace(1.0 + 1e-9, range.1, 400)
        .into_iter()
        .map(|b| rh_ratio(dim, 1.0, b))
        .fold(0.0, f64::max);
    let maxes: Vec<f64> = samples.iter().map(|s| s.max_ratio).collect();
    let hi = maxes.iter().copied().fold(f64::NAN, f64::max);
    let lo = maxes.iter().copied().fold(f64::NAN, f64::min);
    let spread = (hi - lo) / hi;
    let constant = hi.max(junction_max);
    let far_ok = samples.iter().all(|s| s.max_far <= 2.0);
    RhReport {
        d: dim.d(),
        intervals: n,
        pass: constant.is_finite() && spread <= stability && far_ok,
        samples,
        junction_max,
        constant,
        spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_fixed;

    #[test]
    fn ratio_matches_quadrature() {
        for d in [2.5, 3.0, 4.5] {
            let dim = Dimension::new(d).unwrap();
            for (a, b) in [(1.0, 1.5), (1.0, 40.0), (3.0, 3.2), (7.0, 900.0)] {
                let num = gauss_fixed(|x| h_d(dim, x) * x.powf(d - 1.0), a, b, 40);
                let den = gauss_fixed(|x| x.powf(d - 1.0), a, b, 40);
                let r = h_d(dim, b) / (num / den);
                assert!((rh_ratio(dim, a, b) - r).abs() < 1e-10 * r, "{d} {a} {b}");
            }
        }
    }

    #[test]
    fn degenerate_intervals_tend_to_one() {
        let dim = Dimension::new(3.0).unwrap();
        for a in [1.5, 10.0, 500.0] {
            assert!((rh_ratio(dim, a, a * (1.0 + 1e-13)) - 1.0).abs() < 1e-6);
        }
        // at the junction h_D vanishes linearly: the ratio tends to 2
        assert!((rh_ratio(dim, 1.0, 1.0 + 1e-9) - 2.0).abs() < 1e-6);
    }
}
