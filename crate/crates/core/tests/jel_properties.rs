mod common;

use common::*;
use semivar::asymptotic_normal::{normal_quantile, normal_test};
use semivar::jel::{jel_statistic, jel_test, JelStatus};
use semivar::montecarlo::{run_simulation, DistributionSpec, Method, SimulationConfig};
use semivar::ustat::jackknife_pseudovalues;

fn check_feasible(nu: &[f64]) {
    let fit = jel_statistic(nu).unwrap();
    let max_abs = nu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(fit.weights.iter().all(|&p| p > 0.0));
    assert!(nu.iter().all(|&v| 1.0 + fit.lambda * v > 0.0));
    let total: f64 = fit.weights.iter().sum();
    assert!((total - 1.0).abs() <= 1e-10, "sum p = {total}");
    let moment: f64 = fit.weights.iter().zip(nu).map(|(p, v)| p * v).sum();
    assert!(
        moment.abs() <= 1e-8 * max_abs.max(1.0),
        "sum p nu = {moment}"
    );
    assert!(fit.statistic >= 0.0);
}

#[test]
fn feasibility_on_random_instances() {
    let mut solved = 0;
    for (x, y) in instances(21, 300, 3, 40) {
        let pv = jackknife_pseudovalues(&x, &y).unwrap();
        if pv.degenerate {
            continue;
        }
        let (min, max) = pv
            .nu
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if min < 0.0 && max > 0.0 {
            check_feasible(&pv.nu);
            solved += 1;
        }
    }
    assert!(solved > 250);
}

#[test]
fn statistic_invariant_to_scale_and_swap() {
    for (x, y) in instances(33, 100, 5, 30) {
        let Ok(base) = jel_test(&x, &y, 0.05) else {
            continue;
        };
        if base.status != JelStatus::Interior {
            continue;
        }
        let scaled = jel_test(&x.scaled(3.7), &y.scaled(3.7), 0.05).unwrap();
        assert!((scaled.statistic - base.statistic).abs() <= 1e-8 * base.statistic.max(1.0));
        let swapped = jel_test(&y, &x, 0.05).unwrap();
        assert!((swapped.statistic - base.statistic).abs() <= 1e-8 * base.statistic.max(1.0));
        assert!(
            (swapped.lambda + base.lambda).abs() <= 1e-8 * base.lambda.abs().max(1e-300) + 1e-300
        );
    }
}

#[test]
fn decision_rules_agree_on_alpha_grid() {
    for (x, y) in instances(44, 200, 3, 30) {
        for alpha in [0.01, 0.05, 0.10] {
            match jel_test(&x, &y, alpha) {
                Ok(sol) => {
                    assert_eq!(
                        sol.reject,
                        sol.p_value < alpha,
                        "stat {} p {}",
                        sol.statistic,
                        sol.p_value
                    );
                }
                Err(semivar::Error::DegenerateData) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn hull_violation_is_boundary_rejection() {
    // a single huge Y value dominates every pseudo-value's sign
    let x = sample(vec![1.0, 1.0, 1.0, 1.0], "x");
    let y = sample(vec![1.0, 1.0, 1.0, 50.0], "y");
    let pv = jackknife_pseudovalues(&x, &y).unwrap();
    let sol = jel_test(&x, &y, 0.05).unwrap();
    if pv.nu.iter().all(|&v| v <= 0.0) || pv.nu.iter().all(|&v| v >= 0.0) {
        assert_eq!(sol.status, JelStatus::Boundary);
        assert!(sol.reject);
        assert!(sol.statistic.is_infinite());
        assert_eq!(sol.p_value, 0.0);
    } else {
        assert_eq!(sol.status, JelStatus::Interior);
    }
}

#[test]
fn normal_z_scale_and_swap() {
    for (x, y) in instances(55, 60, 3, 30) {
        let Ok(base) = normal_test(&x, &y, 0.05) else {
            continue;
        };
        let scaled = normal_test(&x.scaled(3.7), &y.scaled(3.7), 0.05).unwrap();
        assert!((scaled.z - base.z).abs() <= 1e-8 * base.z.abs().max(1.0));
        assert!((scaled.s2 - 3.7f64.powi(4) * base.s2).abs() <= 1e-10 * scaled.s2);
        assert_eq!(scaled.reject, base.reject);
        let swapped = normal_test(&y, &x, 0.05).unwrap();
        assert!((swapped.z + base.z).abs() <= 1e-8 * base.z.abs().max(1.0));
        assert_eq!(swapped.reject, base.reject);
    }
}

#[test]
fn normal_quantile_symmetry() {
    for k in [1, 3, 7, 10, 20, 26] {
        let q = 2f64.powi(-k);
        let lo = normal_quantile(q).unwrap();
        let hi = normal_quantile(1.0 - q).unwrap();
        assert!((lo + hi).abs() <= 1e-10, "{q}: {lo} {hi}");
    }
    let mid = normal_quantile(0.3).unwrap() + normal_quantile(0.7).unwrap();
    assert!(mid.abs() <= 1e-10);
}

#[test]
fn normal_test_size_band() {
    let spec = DistributionSpec::Exponential { rate: 2.0 };
    let mut config = SimulationConfig::new(spec, spec);
    config.sizes = vec![200];
    config.replications = 2000;
    config.method = Method::Normal;
    config.seed = 404;
    let report = run_simulation(&config).unwrap();
    let rate = report.rows[0].rate;
    assert!((0.02..=0.09).contains(&rate), "normal test size {rate}");
}
