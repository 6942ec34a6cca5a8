//! Normal-approximation test for the departure estimator.
//!
//! Under the null both samples share one distribution `F`, and
//! `sqrt(n) * delta` is asymptotically normal with variance
//! `4 / (p (1 - p)) * Var(psi(X))`, where
//!
//! ```text
//! psi(x) = x^2 F(x) - 2x * int_0^x y dF(y) - int_x^inf y^2 dF(y).
//! ```
//!
//! `F` is replaced by the pooled empirical distribution with strict
//! inequalities on both integrals and on `F(x)`. This plug-in is known to be
//! unreliable in small samples; the jackknife likelihood test is the default.

use serde::Serialize;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::samples::{PooledSample, Sample, SortedIndex};
use crate::sum::compensated_sum;
use crate::ustat::delta_fast;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalTestResult {
    pub delta: f64,
    pub s2: f64,
    pub z: f64,
    pub p_value: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub p_hat: f64,
    pub alpha: f64,
}

fn psi_from_index(idx: &SortedIndex, x: f64) -> f64 {
    let n = idx.len() as f64;
    let below = idx.count_below(x) as f64 / n;
    compensated_sum([
        x * x * below,
        -2.0 * x * idx.sum_below(x) / n,
        -idx.sum_sq_above(x) / n,
    ])
}

/// `psi` evaluated at `x` with `F` replaced by the pooled empirical CDF.
pub fn psi_plugin(pooled: &PooledSample, x: f64) -> f64 {
    let values: Vec<f64> = pooled.iter().collect();
    psi_from_index(&SortedIndex::new(&values), x)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse standard normal CDF.
pub fn normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::OutOfRange(q));
    }
    if q > 0.5 {
        return Ok(-normal_quantile(1.0 - q)?);
    }
    let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * q);
    // one Newton step against the erfc-based CDF
    let pdf = std_normal_pdf(z);
    if pdf > 0.0 {
        Ok(z - (std_normal_cdf(z) - q) / pdf)
    } else {
        Ok(z)
    }
}

pub fn normal_test(x: &Sample, y: &Sample, alpha: f64) -> Result<NormalTestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange(alpha));
    }
    let delta = delta_fast(x, y)?.value;
    let pooled: Vec<f64> = x.values().iter().chain(y.values()).copied().collect();
    let n = pooled.len() as f64;
    let idx = SortedIndex::new(&pooled);

    let psi: Vec<f64> = pooled.iter().map(|&z| psi_from_index(&idx, z)).collect();
    let mean = compensated_sum(psi.iter().copied()) / n;
    let variance = compensated_sum(psi.iter().map(|v| (v - mean).powi(2))) / (n - 1.0);

    let p_hat = x.len() as f64 / n;
    let s2 = 4.0 / (p_hat * (1.0 - p_hat)) * variance;
    if s2.is_nan() || s2 <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let z = n.sqrt() * delta / s2.sqrt();
    let p_value = erfc(z.abs() / std::f64::consts::SQRT_2);
    let critical_value = normal_quantile(1.0 - alpha / 2.0)?;
    Ok(NormalTestResult {
        delta,
        s2,
        z,
        p_value,
        critical_value,
        reject: z.abs() > critical_value,
        p_hat,
        alpha,
    })
}
