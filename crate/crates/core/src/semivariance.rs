//! Empirical upper semivariance and stop-loss moments.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::samples::Sample;
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemivarianceEstimate {
    pub target: f64,
    pub value: f64,
    pub power: f64,
}

/// Mean of `(x - t)^2` over observations strictly above `t`.
pub fn semivariance(s: &Sample, t: f64) -> SemivarianceEstimate {
    SemivarianceEstimate {
        target: t,
        value: excess_moment(s, t, |d| d * d),
        power: 2.0,
    }
}

/// Mean of `(x - t)^r` over observations strictly above `t`.
pub fn stop_loss_moment(s: &Sample, t: f64, r: f64) -> Result<SemivarianceEstimate> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::NonPositivePower(r));
    }
    let value = if r == 2.0 {
        excess_moment(s, t, |d| d * d)
    } else {
        excess_moment(s, t, |d| d.powf(r))
    };
    Ok(SemivarianceEstimate {
        target: t,
        value,
        power: r,
    })
}

fn excess_moment(s: &Sample, t: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut exceed: Vec<f64> = s
        .values()
        .iter()
        .filter(|&&v| v > t)
        .map(|&v| v - t)
        .collect();
    // smallest terms first
    exceed.sort_by(f64::total_cmp);
    let mut acc = NeumaierSum::new();
    for d in exceed {
        acc.add(f(d));
    }
    acc.value() / s.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::validate_sample;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> Sample {
        validate_sample(v.to_vec(), false).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn semivariance_examples() {
        let x = s(&[1.0, 2.0, 3.0]);
        assert!(close(semivariance(&x, 0.0).value, 14.0 / 3.0));
        assert_eq!(semivariance(&x, 3.0).value, 0.0);
        assert!(close(semivariance(&x, 1.0).value, 5.0 / 3.0));
    }

    #[test]
    fn stop_loss_examples() {
        let x = s(&[1.0, 2.0, 3.0]);
        assert!(close(stop_loss_moment(&x, 1.0, 1.0).unwrap().value, 1.0));
        assert_eq!(
            stop_loss_moment(&x, 1.0, 2.0).unwrap().value,
            semivariance(&x, 1.0).value
        );
        assert_eq!(stop_loss_moment(&s(&[5.0]), 10.0, 3.0).unwrap().value, 0.0);
        assert!(matches!(
            stop_loss_moment(&x, 1.0, 0.0),
            Err(Error::NonPositivePower(_))
        ));
        assert!(stop_loss_moment(&x, 1.0, -1.0).is_err());
    }

    #[test]
    fn ties_at_target_contribute_nothing() {
        let x = s(&[1.0, 1.0, 2.0]);
        assert!(close(
            stop_loss_moment(&x, 1.0, 0.5).unwrap().value,
            1.0 / 3.0
        ));
    }

    #[test]
    fn compensated_on_large_input() {
        let n = 1_000_000;
        let values: Vec<f64> = (0..n).map(|i| 1.0 + (i % 1000) as f64 * 1e-3).collect();
        // exact: each block of 1000 contributes sum_{k<1000} (1 + k/1000)^2
        let block: f64 = (0..1000).map(|k| (1.0 + k as f64 * 1e-3).powi(2)).sum();
        let expected = block * (n / 1000) as f64 / n as f64;
        let got = semivariance(&s(&values), 0.0).value;
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    proptest! {
        #[test]
        fn monotone_in_target(raw in prop::collection::vec(0.0f64..100.0, 1..40), a in 0.0f64..120.0, b in 0.0f64..120.0) {
            let x = s(&raw);
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(semivariance(&x, lo).value >= semivariance(&x, hi).value);
            prop_assert!(semivariance(&x, hi).value >= 0.0);
        }

        #[test]
        fn scales_with_power(raw in prop::collection::vec(0.0f64..100.0, 1..40), t in 0.0f64..100.0, c in 0.1f64..10.0, r in 0.5f64..4.0) {
            let x = s(&raw);
            let base = stop_loss_moment(&x, t, r).unwrap().value;
            let scaled = stop_loss_moment(&x.scaled(c), c * t, r).unwrap().value;
            prop_assert!((scaled - c.powf(r) * base).abs() <= 1e-10 * scaled.abs().max(1e-12));
        }

        #[test]
        fn below_minimum_is_raw_second_moment(raw in prop::collection::vec(1.0f64..100.0, 1..40), t in 0.0f64..1.0) {
            let x = s(&raw);
            let raw_moment = raw.iter().map(|v| (v - t).powi(2)).sum::<f64>() / raw.len() as f64;
            prop_assert!(close(semivariance(&x, t).value, raw_moment));
        }
    }
}
