//! Inverse-CDF samplers and the replication harness for empirical size and
//! power of the tests.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotic_normal::{normal_quantile, normal_test};
use crate::error::{Error, Result};
use crate::jel::{jel_test, JelStatus};
use crate::samples::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Rate parameterization: mean `1 / rate`.
    Exponential {
        rate: f64,
    },
    /// Shape `alpha`, scale fixed at 1, support `[1, inf)`.
    Pareto {
        shape: f64,
    },
    Lognormal {
        mu: f64,
        sigma: f64,
    },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Self::Pareto { shape } => shape > 0.0 && shape.is_finite(),
            Self::Lognormal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(self.to_string()))
        }
    }

    /// Inverse CDF at `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        Ok(match *self {
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Pareto { shape } => (1.0 - u).powf(-1.0 / shape),
            Self::Lognormal { mu, sigma } => (mu + sigma * normal_quantile(u)?).exp(),
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Pareto { shape } => {
                if x <= 1.0 {
                    0.0
                } else {
                    1.0 - x.powf(-shape)
                }
            }
            Self::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
                }
            }
        }
    }

    fn family(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Pareto { .. } => "pareto",
            Self::Lognormal { .. } => "lognormal",
        }
    }

    fn params(&self) -> String {
        match *self {
            Self::Exponential { rate } => format!("{rate}"),
            Self::Pareto { shape } => format!("{shape}"),
            Self::Lognormal { mu, sigma } => format!("{mu},{sigma}"),
        }
    }

    /// Builds a distribution from a family name and comma-separated parameters.
    pub fn from_parts(family: &str, params: &str) -> Result<Self> {
        let values: Vec<f64> = params
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameters(format!("'{params}': {e}")))?;
        let spec = match (
            family.trim().to_ascii_lowercase().as_str(),
            values.as_slice(),
        ) {
            ("exponential" | "exp", [rate]) => Self::Exponential { rate: *rate },
            ("pareto", [shape]) => Self::Pareto { shape: *shape },
            ("lognormal" | "lnorm", [mu, sigma]) => Self::Lognormal {
                mu: *mu,
                sigma: *sigma,
            },
            (f, v) => {
                return Err(Error::InvalidParameters(format!(
                    "family '{f}' with {} parameter(s)",
                    v.len()
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family(), self.params())
    }
}

/// Draws `n` observations by inverse-CDF transform of open-interval uniforms.
pub fn sample_from<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    spec.validate()?;
    let values = (0..n)
        .map(|_| spec.quantile(rng.sample(Open01)))
        .collect::<Result<Vec<f64>>>()?;
    Sample::new(values, spec.to_string(), false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Jel,
    Normal,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jel" => Ok(Self::Jel),
            "normal" => Ok(Self::Normal),
            other => Err(Error::Config {
                key: "method".into(),
                message: format!("expected 'jel' or 'normal', got '{other}'"),
            }),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Jel => "jel",
            Self::Normal => "normal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub dist_x: DistributionSpec,
    pub dist_y: DistributionSpec,
    /// Per-sample sizes; each replication draws `n` from X and `n` from Y.
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub method: Method,
}

impl SimulationConfig {
    pub fn new(dist_x: DistributionSpec, dist_y: DistributionSpec) -> Self {
        Self {
            dist_x,
            dist_y,
            sizes: vec![20, 40, 60, 80, 100],
            replications: 10_000,
            alpha: 0.05,
            seed: 1,
            method: Method::Jel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dist_x.validate()?;
        self.dist_y.validate()?;
        let cfg_err = |key: &str, message: String| Error::Config {
            key: key.into(),
            message,
        };
        if self.replications == 0 {
            return Err(cfg_err("reps", "must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(cfg_err("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if self.sizes.is_empty() {
            return Err(cfg_err("sizes", "no sample sizes given".into()));
        }
        let min_size = match self.method {
            Method::Jel => 3,
            Method::Normal => 2,
        };
        if let Some(&n) = self.sizes.iter().find(|&&n| n < min_size) {
            return Err(cfg_err(
                "sizes",
                format!(
                    "size {n} is below the minimum {min_size} for method {}",
                    self.method
                ),
            ));
        }
        Ok(())
    }

    /// Parses the flat `key = value` format. Blank lines and `#` comments
    /// are ignored; keys not given fall back to [`SimulationConfig::new`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = std::collections::BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                key: line.to_string(),
                message: format!("line {}: expected key = value", lineno + 1),
            })?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }

        let take = |fields: &mut std::collections::BTreeMap<String, String>, key: &str| {
            fields.remove(key).ok_or_else(|| Error::Config {
                key: key.into(),
                message: "missing".into(),
            })
        };
        let with_key = |key: &'static str| {
            move |e: Error| Error::Config {
                key: key.into(),
                message: e.to_string(),
            }
        };

        let fx = take(&mut fields, "family.x")?;
        let px = take(&mut fields, "params.x")?;
        let fy = take(&mut fields, "family.y")?;
        let py = take(&mut fields, "params.y")?;
        let dist_x = DistributionSpec::from_parts(&fx, &px).map_err(with_key("params.x"))?;
        let dist_y = DistributionSpec::from_parts(&fy, &py).map_err(with_key("params.y"))?;
        let mut config = Self::new(dist_x, dist_y);

        let parse_err = |key: &str, value: &str, e: &dyn fmt::Display| Error::Config {
            key: key.into(),
            message: format!("cannot parse '{value}': {e}"),
        };
        if let Some(v) = fields.remove("sizes") {
            config.sizes = v
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err("sizes", &v, &e))?;
        }
        if let Some(v) = fields.remove("reps") {
            config.replications = v.parse().map_err(|e| parse_err("reps", &v, &e))?;
        }
        if let Some(v) = fields.remove("alpha") {
            config.alpha = v.parse().map_err(|e| parse_err("alpha", &v, &e))?;
        }
        if let Some(v) = fields.remove("seed") {
            config.seed = v.parse().map_err(|e| parse_err("seed", &v, &e))?;
        }
        if let Some(v) = fields.remove("method") {
            config.method = v.parse()?;
        }
        if let Some(key) = fields.keys().next() {
            return Err(Error::Config {
                key: key.clone(),
                message: "unknown key".into(),
            });
        }
        config.validate()?;
        Ok(config)
    }

    /// The resolved configuration in the same `key = value` format.
    pub fn to_text(&self) -> String {
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        format!(
            "family.x = {}\nparams.x = {}\nfamily.y = {}\nparams.y = {}\nsizes = {}\nreps = {}\nalpha = {}\nseed = {}\nmethod = {}\n",
            self.dist_x.family(),
            self.dist_x.params(),
            self.dist_y.family(),
            self.dist_y.params(),
            sizes.join(","),
            self.replications,
            self.alpha,
            self.seed,
            self.method,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Reject,
    Accept,
    /// Zero outside the pseudo-value range; counted as a rejection.
    Boundary,
    /// Constant data or zero variance estimate; counted as no rejection.
    Degenerate,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for replication `rep` at size `n`.
pub fn replication_stream(seed: u64, n: usize, rep: usize) -> ChaCha8Rng {
    let h = splitmix64(splitmix64(splitmix64(seed) ^ n as u64) ^ rep as u64);
    ChaCha8Rng::seed_from_u64(h)
}

fn replicate(config: &SimulationConfig, n: usize, rep: usize) -> Result<Outcome> {
    let mut rng = replication_stream(config.seed, n, rep);
    let x = sample_from(&config.dist_x, n, &mut rng)?;
    let y = sample_from(&config.dist_y, n, &mut rng)?;
    match config.method {
        Method::Jel => match jel_test(&x, &y, config.alpha) {
            Ok(sol) if sol.status == JelStatus::Boundary => Ok(Outcome::Boundary),
            Ok(sol) if sol.reject => Ok(Outcome::Reject),
            Ok(_) => Ok(Outcome::Accept),
            Err(Error::DegenerateData) => Ok(Outcome::Degenerate),
            Err(e) => Err(e),
        },
        Method::Normal => match normal_test(&x, &y, config.alpha) {
            Ok(r) if r.reject => Ok(Outcome::Reject),
            Ok(_) => Ok(Outcome::Accept),
            Err(Error::DegenerateVariance) => Ok(Outcome::Degenerate),
            Err(e) => Err(e),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeResult {
    pub n: usize,
    pub rejections: usize,
    pub rate: f64,
    pub stderr: f64,
    pub hull_violations: usize,
    pub degenerate: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub rows: Vec<SizeResult>,
}

impl SimulationReport {
    /// CSV with the resolved config as leading `#` comment lines. Wall-clock
    /// seconds are written only when `timing` is set (otherwise `NA`), so
    /// reruns with the same seed are byte-identical.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::new();
        for line in self.config.to_text().lines() {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("n,rate,stderr,hull_violations,seconds\n");
        for row in &self.rows {
            let seconds = if timing {
                format!("{:.3}", row.seconds)
            } else {
                "NA".into()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.n, row.rate, row.stderr, row.hull_violations, seconds
            );
        }
        out
    }

    /// Aligned text table: one row per sample size.
    pub fn to_table(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "X ~ {}, Y ~ {}, method {}, alpha {}, {} replications, seed {}",
            c.dist_x, c.dist_y, c.method, c.alpha, c.replications, c.seed
        );
        let _ = writeln!(
            out,
            "{:>6}  {:>8}  {:>8}  {:>6}  {:>10}  {:>8}",
            "n", "rate", "stderr", "hull", "degenerate", "seconds"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6}  {:>8.3}  {:>8.4}  {:>6}  {:>10}  {:>8.2}",
                r.n, r.rate, r.stderr, r.hull_violations, r.degenerate, r.seconds
            );
        }
        out
    }
}

/// Runs every size in the grid. Replications fan out across the rayon pool;
/// each draws from its own stream, so results do not depend on scheduling.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        let start = Instant::now();
        let outcomes = (0..config.replications)
            .into_par_iter()
            .map(|rep| replicate(config, n, rep))
            .collect::<Result<Vec<Outcome>>>()?;
        let seconds = start.elapsed().as_secs_f64();

        let count = |o: Outcome| outcomes.iter().filter(|&&x| x == o).count();
        let hull_violations = count(Outcome::Boundary);
        let rejections = count(Outcome::Reject) + hull_violations;
        let reps = config.replications as f64;
        let rate = rejections as f64 / reps;
        rows.push(SizeResult {
            n,
            rejections,
            rate,
            stderr: (rate * (1.0 - rate) / reps).sqrt(),
            hull_violations,
            degenerate: count(Outcome::Degenerate),
            seconds,
        });
    }
    Ok(SimulationReport {
        config: config.clone(),
        rows,
    })
}

/// Empirical size: both samples from the same distribution.
pub fn run_type1(config: &SimulationConfig) -> Result<SimulationReport> {
    if config.dist_x != config.dist_y {
        return Err(Error::Config {
            key: "family.y".into(),
            message: "type-I error runs need identical X and Y distributions".into(),
        });
    }
    run_simulation(config)
}

/// Empirical power against the configured alternative.
pub fn run_power(config: &SimulationConfig) -> Result<SimulationReport> {
    run_simulation(config)
}
