//! Command-line front end: argument parsing, the four commands, and their
//! text and JSON renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotic_normal::{normal_test, NormalTestResult};
use crate::error::{Error, Result};
use crate::jel::{jel_test, JelSolution, JelStatus};
use crate::montecarlo::{run_simulation, SimulationConfig, SimulationReport};
use crate::samples::{read_sample, Sample};
use crate::semivariance::{stop_loss_moment, SemivarianceEstimate};
use crate::sum::compensated_sum;
use crate::ustat::delta_fast;

pub const EXIT_FAIL_TO_REJECT: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "semivar",
    version,
    about = "Two-sample tests for equality of upper semivariance"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Jel,
    Normal,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test H0: equal upper semivariance of the populations behind two files
    Test {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = TestMethod::Jel)]
        method: TestMethod,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Accept negative observations
        #[arg(long)]
        allow_negative: bool,
    },
    /// Descriptive statistics of one file
    Describe {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Stop-loss moment above a target (power 2 is the upper semivariance)
    Semivar {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        target: f64,
        #[arg(long, default_value_t = 2.0)]
        power: f64,
    },
    /// Monte Carlo size/power study from a key=value config file
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// CSV destination; the text table goes next to it with a .txt extension
        #[arg(long, default_value = "simulation.csv")]
        out: PathBuf,
        /// Record wall-clock seconds in the CSV (breaks byte-for-byte reproducibility)
        #[arg(long)]
        timing: bool,
    },
}

/// Formats with six significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

fn fmt_p(p: f64) -> String {
    if p == 0.0 {
        "< 2.2e-308".into()
    } else {
        fmt_sig(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub x: String,
    pub y: String,
    pub n1: usize,
    pub n2: usize,
    pub delta: f64,
    pub alpha: f64,
    pub method: TestMethod,
    pub jel: Option<JelSolution>,
    pub normal: Option<NormalTestResult>,
    pub reject: bool,
    pub verdict: String,
    pub warnings: Vec<String>,
}

impl TestReport {
    pub fn exit_code(&self) -> i32 {
        if self.reject {
            EXIT_REJECT
        } else {
            EXIT_FAIL_TO_REJECT
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "x: {} (n1 = {})", self.x, self.n1);
        let _ = writeln!(out, "y: {} (n2 = {})", self.y, self.n2);
        let _ = writeln!(out, "delta_hat          {}", fmt_sig(self.delta));
        if let Some(j) = &self.jel {
            let _ = writeln!(out, "jackknife empirical likelihood");
            match j.status {
                JelStatus::Interior => {
                    let _ = writeln!(out, "  lambda           {}", fmt_sig(j.lambda));
                    let _ = writeln!(out, "  -2 log R         {}", fmt_sig(j.statistic));
                }
                JelStatus::Boundary => {
                    let _ = writeln!(out, "  lambda           undefined");
                    let _ = writeln!(out, "  -2 log R         inf (boundary)");
                }
            }
            let _ = writeln!(out, "  p-value          {}", fmt_p(j.p_value));
            let _ = writeln!(out, "  critical value   {}", fmt_sig(j.critical_value));
        }
        if let Some(nt) = &self.normal {
            let _ = writeln!(out, "normal approximation");
            let _ = writeln!(out, "  S^2              {}", fmt_sig(nt.s2));
            let _ = writeln!(out, "  z                {}", fmt_sig(nt.z));
            let _ = writeln!(out, "  p-value          {}", fmt_p(nt.p_value));
            let _ = writeln!(out, "  critical value   {}", fmt_sig(nt.critical_value));
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let _ = writeln!(out, "verdict: {} at alpha = {}", self.verdict, self.alpha);
        out
    }
}

const NORMAL_CAVEAT: &str =
    "the normal test relies on a plug-in null variance that is unreliable in small samples";

pub fn cmd_test(
    x_path: &Path,
    y_path: &Path,
    alpha: f64,
    method: TestMethod,
    allow_negative: bool,
) -> Result<TestReport> {
    let x = read_sample(x_path, "x", allow_negative)?;
    let y = read_sample(y_path, "y", allow_negative)?;
    let mut report = run_test(&x, &y, alpha, method)?;
    report.x = x_path.display().to_string();
    report.y = y_path.display().to_string();
    if allow_negative && x.values().iter().chain(y.values()).any(|&v| v < 0.0) {
        report.warnings.insert(
            0,
            "negative observations present; the test assumes non-negative variables".into(),
        );
    }
    Ok(report)
}

/// Runs the selected test(s) on in-memory samples. With `both`, the JEL
/// result decides the verdict and the normal result is reported alongside.
pub fn run_test(x: &Sample, y: &Sample, alpha: f64, method: TestMethod) -> Result<TestReport> {
    let mut warnings = Vec::new();
    let jel = match method {
        TestMethod::Jel | TestMethod::Both => Some(jel_test(x, y, alpha)?),
        TestMethod::Normal => None,
    };
    let normal = match method {
        TestMethod::Normal => Some(normal_test(x, y, alpha)?),
        TestMethod::Both => match normal_test(x, y, alpha) {
            Ok(r) => Some(r),
            Err(Error::DegenerateVariance) => {
                warnings.push("normal test skipped: estimated null variance is zero".into());
                None
            }
            Err(e) => return Err(e),
        },
        TestMethod::Jel => None,
    };
    if normal.is_some() {
        warnings.push(NORMAL_CAVEAT.into());
    }

    let (reject, verdict) = match (&jel, &normal) {
        (Some(j), _) if j.status == JelStatus::Boundary => {
            warnings.push(
                "zero lies outside the range of the jackknife pseudo-values; chi-square calibration does not apply".into(),
            );
            (true, "reject (boundary)".to_string())
        }
        (Some(j), _) => (j.reject, verdict_text(j.reject)),
        (None, Some(nt)) => (nt.reject, verdict_text(nt.reject)),
        (None, None) => unreachable!("at least one method runs"),
    };
    let delta = match (&jel, &normal) {
        (Some(j), _) => j.delta,
        (None, Some(nt)) => nt.delta,
        (None, None) => delta_fast(x, y)?.value,
    };
    Ok(TestReport {
        x: x.label().to_string(),
        y: y.label().to_string(),
        n1: x.len(),
        n2: y.len(),
        delta,
        alpha,
        method,
        jel,
        normal,
        reject,
        verdict,
        warnings,
    })
}

fn verdict_text(reject: bool) -> String {
    if reject { "reject" } else { "fail to reject" }.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    /// Denominator `n - 1`.
    pub sd: f64,
    pub range: f64,
    /// `m3 / m2^(3/2)` with denominator `n`.
    pub skewness: f64,
    /// `m4 / m2^2` with denominator `n`; not excess.
    pub kurtosis: f64,
}

impl DescriptiveStats {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let nf = n as f64;
        let mean = compensated_sum(values.iter().copied()) / nf;
        let central = |k: i32| compensated_sum(values.iter().map(|v| (v - mean).powi(k))) / nf;
        let (m2, m3, m4) = (central(2), central(3), central(4));
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let sd = if n > 1 {
            (m2 * nf / (nf - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            n,
            mean,
            sd,
            range: max - min,
            skewness: m3 / m2.powf(1.5),
            kurtosis: m4 / (m2 * m2),
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "n          {}\nMean       {}\nSD         {}\nRange      {}\nSkewness   {}\nKurtosis   {}\n",
            self.n,
            fmt_sig(self.mean),
            fmt_sig(self.sd),
            fmt_sig(self.range),
            fmt_sig(self.skewness),
            fmt_sig(self.kurtosis),
        )
    }

    pub fn to_json(&self) -> String {
        let body = serde_json::json!({
            "stats": self,
            "conventions": {
                "sd_denominator": "n-1",
                "moment_denominator": "n",
                "kurtosis": "non-excess (m4/m2^2)",
            },
        });
        serde_json::to_string_pretty(&body).expect("serializable")
    }
}

pub fn cmd_describe(path: &Path) -> Result<DescriptiveStats> {
    let s = read_sample(path, "input", true)?;
    Ok(DescriptiveStats::from_values(s.values()))
}

pub fn cmd_semivar(path: &Path, target: f64, power: f64) -> Result<SemivarianceEstimate> {
    let s = read_sample(path, "input", false)?;
    stop_loss_moment(&s, target, power)
}

pub fn cmd_simulate(
    config_path: &Path,
    seed: Option<u64>,
    reps: Option<usize>,
) -> Result<SimulationReport> {
    let text = std::fs::read_to_string(config_path).map_err(|source| Error::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let mut config = SimulationConfig::parse(&text)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(reps) = reps {
        config.replications = reps;
    }
    run_simulation(&config)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Executes a parsed command, printing to stdout, and returns the exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Test {
            x,
            y,
            alpha,
            method,
            format,
            allow_negative,
        } => {
            let report = cmd_test(&x, &y, alpha, method, allow_negative)?;
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                ),
            }
            Ok(report.exit_code())
        }
        Command::Describe { input, format } => {
            let stats = cmd_describe(&input)?;
            match format {
                Format::Text => print!("{}", stats.to_text()),
                Format::Json => println!("{}", stats.to_json()),
            }
            Ok(EXIT_FAIL_TO_REJECT)
        }
        Command::Semivar {
            input,
            target,
            power,
        } => {
            let est = cmd_semivar(&input, target, power)?;
            println!(
                "stop-loss moment (power {}) above target {}: {}",
                est.power,
                est.target,
                fmt_sig(est.value)
            );
            Ok(EXIT_FAIL_TO_REJECT)
        }
        Command::Simulate {
            config,
            seed,
            reps,
            out,
            timing,
        } => {
            let report = cmd_simulate(&config, seed, reps)?;
            let table = report.to_table();
            write_file(&out, &report.to_csv(timing))?;
            write_file(&out.with_extension("txt"), &table)?;
            print!("{table}");
            Ok(EXIT_FAIL_TO_REJECT)
        }
    }
}

/// Parses `args`, runs the command, and maps errors to exit code 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.235566012), "0.235566");
        assert_eq!(fmt_sig(2296.1412), "2296.14");
        assert_eq!(fmt_sig(-2.5), "-2.50000");
        assert_eq!(fmt_sig(1.5e-7), "1.50000e-7");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_p(0.0), "< 2.2e-308");
    }

    #[test]
    fn describe_examples() {
        let d = DescriptiveStats::from_values(&[1.0, 2.0, 3.0]);
        assert_eq!(d.n, 3);
        assert_eq!(d.mean, 2.0);
        assert_eq!(d.range, 2.0);
        assert_eq!(d.skewness, 0.0);
        assert!((d.sd - 1.0).abs() < 1e-15);

        let d = DescriptiveStats::from_values(&[0.0, 0.0, 0.0, 1.0]);
        let m4 = 0.75 * 0.25f64.powi(4) + 0.25 * 0.75f64.powi(4);
        assert!((d.kurtosis - m4 / 0.1875f64.powi(2)).abs() < 1e-12);
        assert!((d.kurtosis - 2.333333).abs() < 1e-6);
    }

    #[test]
    fn describe_scale_invariant_shape() {
        let v = [1.0, 4.0, 2.5, 9.0, 0.3, 7.7];
        let a = DescriptiveStats::from_values(&v);
        let scaled: Vec<f64> = v.iter().map(|x| x * 1234.5).collect();
        let b = DescriptiveStats::from_values(&scaled);
        assert!((a.skewness - b.skewness).abs() < 1e-9);
        assert!((a.kurtosis - b.kurtosis).abs() < 1e-9);
    }

    #[test]
    fn clap_surface_parses() {
        let cli = Cli::try_parse_from([
            "semivar", "test", "--x", "a.csv", "--y", "b.csv", "--method", "both", "--format",
            "json",
        ])
        .unwrap();
        assert!(matches!(
            cli.command,
            Command::Test { method: TestMethod::Both, format: Format::Json, alpha, .. } if alpha == 0.05
        ));
        let cli =
            Cli::try_parse_from(["semivar", "semivar", "--input", "a", "--target", "-1"]).unwrap();
        assert!(
            matches!(cli.command, Command::Semivar { power, target, .. } if power == 2.0 && target == -1.0)
        );
    }
}
