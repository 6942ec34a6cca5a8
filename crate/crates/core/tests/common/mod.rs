#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semivar::samples::Sample;
use semivar::ustat::{delta_naive, DeltaEstimate};

pub fn sample(values: Vec<f64>, label: &str) -> Sample {
    Sample::new(values, label, false).unwrap()
}

/// Random small instance: continuous exponential-like data or tied integers.
pub fn random_instance(rng: &mut ChaCha8Rng, min_n: usize, max_n: usize) -> (Sample, Sample) {
    let n1 = rng.random_range(min_n..=max_n);
    let n2 = rng.random_range(min_n..=max_n);
    let tied = rng.random_bool(0.5);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| {
                if tied {
                    rng.random_range(0..5) as f64
                } else {
                    -(1.0 - rng.random::<f64>()).ln() * 3.0
                }
            })
            .collect()
    };
    let x = draw(n1);
    let y = draw(n2);
    (sample(x, "x"), sample(y, "y"))
}

pub fn instances(seed: u64, count: usize, min_n: usize, max_n: usize) -> Vec<(Sample, Sample)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_instance(&mut rng, min_n, max_n))
        .collect()
}

/// Pseudo-values by deleting each pooled observation and re-running the
/// quadruple-loop estimator.
pub fn naive_pseudovalues(x: &Sample, y: &Sample) -> Vec<f64> {
    let full = delta_naive(x, y).unwrap().value;
    let n = (x.len() + y.len()) as f64;
    let mut nu = Vec::new();
    for i in 0..x.len() {
        let t = delta_naive(&x.without(i), y).unwrap().value;
        nu.push(n * full - (n - 1.0) * t);
    }
    for k in 0..y.len() {
        let t = delta_naive(x, &y.without(k)).unwrap().value;
        nu.push(n * full - (n - 1.0) * t);
    }
    nu
}

/// Error relative to the magnitude of the terms that make up the estimate,
/// since the estimate itself can be an exact cancellation.
pub fn rel_err(got: f64, want: f64, scale: f64) -> f64 {
    (got - want).abs() / want.abs().max(scale).max(f64::MIN_POSITIVE)
}

pub fn term_scale(d: &DeltaEstimate) -> f64 {
    d.sums.scale()
}

/// Departure measure for X ~ Exp(rate a), Y ~ Exp(rate b), from the
/// semivariance integrals directly: with beta(t) = 2 exp(-r t) / r^2,
/// int beta_X dF = 1/a^2, int beta_X dG = 2b / (a^2 (a+b)), and symmetric.
pub fn exponential_departure(a: f64, b: f64) -> f64 {
    1.0 / (a * a) + 2.0 * b / (a * a * (a + b)) - 2.0 * a / (b * b * (a + b)) - 1.0 / (b * b)
}
