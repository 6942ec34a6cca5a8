//! Jackknife empirical likelihood ratio test on the pseudo-values of the
//! departure estimator.
//!
//! Maximizing `prod n p_i` subject to `sum p_i = 1` and `sum p_i nu_i = 0`
//! gives `p_i = 1 / (n (1 + lambda nu_i))`, where the multiplier solves
//!
//! ```text
//! g(lambda) = (1/n) sum nu_i / (1 + lambda nu_i) = 0,
//! ```
//!
//! on `(-1/max nu, -1/min nu)`. `g` is strictly decreasing there and runs
//! from `+inf` to `-inf`, so the root is unique whenever zero lies strictly
//! between the smallest and largest pseudo-value. `-2 log R = 2 sum log(1 + lambda nu_i)`
//! is referred to a chi-square distribution with one degree of freedom.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::samples::Sample;
use crate::sum::{compensated_sum, NeumaierSum};
use crate::ustat::jackknife_pseudovalues;

const MAX_ITERATIONS: usize = 200;
const BOUNDARY_MARGIN: f64 = 1e-12;

/// Multiplier, weights, and `-2 log R` for one set of pseudo-values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JelFit {
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub statistic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JelStatus {
    /// The multiplier exists; the chi-square calibration applies.
    Interior,
    /// All pseudo-values share a sign: the constrained likelihood is zero
    /// and the test is reported as a boundary rejection.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JelSolution {
    pub delta: f64,
    pub lambda: f64,
    pub weights: Vec<f64>,
    /// `-2 log R`; `+inf` for a boundary outcome (serialized as `null`).
    pub statistic: f64,
    pub p_value: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub status: JelStatus,
}

fn g_and_slope(nu: &[f64], lambda: f64) -> (f64, f64, f64) {
    let mut g = NeumaierSum::new();
    let mut slope = NeumaierSum::new();
    let mut magnitude = 0.0;
    for &v in nu {
        let r = v / (1.0 + lambda * v);
        g.add(r);
        slope.add(-r * r);
        magnitude += r.abs();
    }
    let n = nu.len() as f64;
    (g.value() / n, slope.value() / n, magnitude / n)
}

fn std_dev(nu: &[f64]) -> f64 {
    let n = nu.len() as f64;
    let mean = compensated_sum(nu.iter().copied()) / n;
    (compensated_sum(nu.iter().map(|v| (v - mean).powi(2))) / n).sqrt()
}

/// Root of `g` on the feasible interval by Newton's method, falling back to
/// bisection whenever a step would leave the current sign-change bracket.
pub fn solve_lambda(nu: &[f64]) -> Result<f64> {
    let (min, max) = nu
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if nu.is_empty() || !(min < 0.0 && max > 0.0) {
        return Err(Error::HullViolation);
    }

    let lower = -1.0 / max;
    let upper = -1.0 / min;
    let mut a = lower + BOUNDARY_MARGIN * lower.abs();
    let mut b = upper - BOUNDARY_MARGIN * upper.abs();
    let (ga, _, _) = g_and_slope(nu, a);
    let (gb, _, _) = g_and_slope(nu, b);
    if !(ga > 0.0 && gb < 0.0) {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: ga.min(-gb),
        });
    }

    let tolerance = 1e-10 * std_dev(nu).max(1.0);
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let (g, slope, magnitude) = g_and_slope(nu, lambda);
        residual = g.abs();
        // at the rounding floor of g itself
        if g == 0.0 || residual <= 16.0 * f64::EPSILON * magnitude {
            return Ok(lambda);
        }
        if g > 0.0 {
            a = lambda;
        } else {
            b = lambda;
        }
        let newton = lambda - g / slope;
        let next = if newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - lambda).abs() <= 4.0 * f64::EPSILON * lambda.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        lambda = next;
    }
    let (g, _, _) = g_and_slope(nu, lambda);
    residual = residual.min(g.abs());
    if g.abs() <= tolerance {
        Ok(lambda)
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual,
        })
    }
}

/// Solves for the multiplier and evaluates `-2 log R` and the weights.
pub fn jel_statistic(nu: &[f64]) -> Result<JelFit> {
    let lambda = solve_lambda(nu)?;
    let n = nu.len() as f64;
    let statistic = 2.0 * compensated_sum(nu.iter().map(|&v| (lambda * v).ln_1p()));
    let weights = nu.iter().map(|&v| 1.0 / (n * (1.0 + lambda * v))).collect();
    Ok(JelFit {
        lambda,
        weights,
        // the likelihood ratio is at most one; only rounding can push it above
        statistic: statistic.max(0.0),
    })
}

/// Upper tail probability of the chi-square distribution with one degree of
/// freedom, `erfc(sqrt(s / 2))`.
pub fn chi2_1_sf(s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::NegativeStatistic(s));
    }
    if s.is_infinite() {
        return Ok(0.0);
    }
    Ok(erfc((0.5 * s).sqrt()))
}

/// Upper `alpha` point of chi-square(1), by bisection on [`chi2_1_sf`].
pub fn chi2_1_critical(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange(alpha));
    }
    let sf = |s: f64| chi2_1_sf(s).expect("non-negative argument");
    let (mut lo, mut hi) = (0.0, 1.0);
    while sf(hi) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Full test: pseudo-values, multiplier, statistic, p-value, and decision.
pub fn jel_test(x: &Sample, y: &Sample, alpha: f64) -> Result<JelSolution> {
    let critical_value = chi2_1_critical(alpha)?;
    let pv = jackknife_pseudovalues(x, y)?;
    if pv.degenerate {
        return Err(Error::DegenerateData);
    }
    match jel_statistic(&pv.nu) {
        Ok(fit) => {
            let p_value = chi2_1_sf(fit.statistic)?;
            let reject = fit.statistic > critical_value;
            Ok(JelSolution {
                delta: pv.full_delta,
                lambda: fit.lambda,
                weights: fit.weights,
                statistic: fit.statistic,
                p_value,
                critical_value,
                reject,
                alpha,
                status: JelStatus::Interior,
            })
        }
        Err(Error::HullViolation) => Ok(JelSolution {
            delta: pv.full_delta,
            lambda: f64::NAN,
            weights: Vec::new(),
            statistic: f64::INFINITY,
            p_value: 0.0,
            critical_value,
            reject: true,
            alpha,
            status: JelStatus::Boundary,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::validate_sample;

    fn s(v: &[f64]) -> Sample {
        validate_sample(v.to_vec(), false).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(solve_lambda(&[-1.0, 1.0]).unwrap(), 0.0);
        assert!((solve_lambda(&[-1.0, 2.0]).unwrap() - 0.25).abs() < 1e-14);
        assert!(matches!(
            solve_lambda(&[1.0, 2.0, 3.0]),
            Err(Error::HullViolation)
        ));
        assert!(matches!(
            solve_lambda(&[0.0, 0.0]),
            Err(Error::HullViolation)
        ));
        assert!(matches!(
            solve_lambda(&[0.0, 1.0]),
            Err(Error::HullViolation)
        ));
        assert!(matches!(solve_lambda(&[]), Err(Error::HullViolation)));
    }

    #[test]
    fn statistic_examples() {
        let fit = jel_statistic(&[-1.0, 1.0]).unwrap();
        assert_eq!(fit.statistic, 0.0);
        assert_eq!(fit.weights, vec![0.5, 0.5]);

        let fit = jel_statistic(&[-1.0, 2.0]).unwrap();
        let expected = 2.0 * (0.75f64.ln() + 1.5f64.ln());
        assert!((fit.statistic - expected).abs() < 1e-13);
        assert!((fit.statistic - 0.235566).abs() < 1e-6);
        assert!((fit.weights[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((fit.weights[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_mean_gives_zero_statistic() {
        let fit = jel_statistic(&[-3.0, 1.0, 2.0, -0.5, 0.5]).unwrap();
        assert!(fit.lambda.abs() < 1e-15);
        assert!(fit.statistic < 1e-25);
        let fit = jel_statistic(&[-3.0, 1.0, 2.0, -0.5, 0.6]).unwrap();
        assert!(fit.statistic > 0.0);
    }

    #[test]
    fn extreme_skew_stays_feasible() {
        let mut nu = vec![-1.0; 999];
        nu.push(5000.0);
        let fit = jel_statistic(&nu).unwrap();
        assert!(nu.iter().all(|&v| 1.0 + fit.lambda * v > 0.0));
        let total: f64 = fit.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_1_sf(0.0).unwrap(), 1.0);
        assert!((chi2_1_sf(3.841459).unwrap() - 0.05).abs() < 1e-4);
        assert!(chi2_1_sf(2296.14).unwrap() < 1e-300);
        assert!(matches!(chi2_1_sf(-1.0), Err(Error::NegativeStatistic(_))));
        assert_eq!(chi2_1_sf(f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn critical_values() {
        assert!((chi2_1_critical(0.05).unwrap() - 3.841458820694124).abs() < 1e-8);
        assert!((chi2_1_critical(0.01).unwrap() - 6.634896601021214).abs() < 1e-8);
        assert!(chi2_1_critical(0.0).is_err());
        assert!(chi2_1_critical(1.0).is_err());
    }

    #[test]
    fn identical_samples_do_not_reject() {
        let v: Vec<f64> = (1..=50).map(f64::from).collect();
        let sol = jel_test(&s(&v), &s(&v), 0.05).unwrap();
        assert_eq!(sol.status, JelStatus::Interior);
        assert!(sol.statistic < 1e-6, "{}", sol.statistic);
        assert!(!sol.reject);
    }

    #[test]
    fn degenerate_and_small_inputs() {
        let c = s(&[2.0, 2.0, 2.0]);
        assert!(matches!(jel_test(&c, &c, 0.05), Err(Error::DegenerateData)));
        assert!(matches!(
            jel_test(&c, &s(&[1.0, 2.0]), 0.05),
            Err(Error::InsufficientSample { .. })
        ));
        assert!(matches!(
            jel_test(&s(&[1.0, 2.0, 3.0]), &s(&[1.0, 2.0, 4.0]), 1.5),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn decision_rules_agree() {
        let x = s(&[0.2, 0.9, 1.4, 2.2, 3.1, 0.4, 0.8, 1.1]);
        let y = s(&[0.5, 1.7, 2.4, 6.3, 4.4, 0.1, 3.9, 2.8]);
        for alpha in [0.01, 0.05, 0.10] {
            let sol = jel_test(&x, &y, alpha).unwrap();
            assert_eq!(sol.reject, sol.p_value < alpha);
        }
    }
}
