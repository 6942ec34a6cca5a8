//! Validated observation batches, pooling, and the sorted prefix-sum index
//! used to evaluate strict-indicator sums in logarithmic time.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// A validated batch of finite observations from one population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    values: Vec<f64>,
    label: String,
}

impl Sample {
    /// Validates `raw` and labels it. Negative values are rejected unless
    /// `allow_negative` is set; non-finite values are always rejected.
    pub fn new(raw: Vec<f64>, label: impl Into<String>, allow_negative: bool) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, &v) in raw.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue(i));
            }
            if v < 0.0 && !allow_negative {
                return Err(Error::NegativeValue(i));
            }
        }
        Ok(Self {
            values: raw,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns a copy with every observation multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            label: self.label.clone(),
        }
    }

    /// Returns a copy with observation `index` removed. Panics if this was
    /// the only observation.
    pub fn without(&self, index: usize) -> Self {
        assert!(self.len() > 1, "cannot remove the only observation");
        let mut values = self.values.clone();
        values.remove(index);
        Self {
            values,
            label: self.label.clone(),
        }
    }

    pub(crate) fn require_len(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            return Err(Error::InsufficientSample {
                label: self.label.clone(),
                needed,
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// `validate_sample` in function form, labelled "sample".
pub fn validate_sample(raw: Vec<f64>, allow_negative: bool) -> Result<Sample> {
    Sample::new(raw, "sample", allow_negative)
}

/// Which side of an empirical CDF jump to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// `#{v < t} / n`
    Left,
    /// `#{v <= t} / n`
    Right,
}

pub fn empirical_cdf(s: &Sample, t: f64, strictness: Strictness) -> f64 {
    let count = match strictness {
        Strictness::Left => s.values.iter().filter(|&&v| v < t).count(),
        Strictness::Right => s.values.iter().filter(|&&v| v <= t).count(),
    };
    count as f64 / s.len() as f64
}

/// Position of an observation in the pooled sample `Z = (X_1..X_n1, Y_1..Y_n2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Origin {
    X(usize),
    Y(usize),
}

/// The two samples viewed as one pooled sequence, X first.
#[derive(Debug, Clone)]
pub struct PooledSample {
    x: Sample,
    y: Sample,
}

impl PooledSample {
    pub fn new(x: Sample, y: Sample) -> Self {
        Self { x, y }
    }

    pub fn x(&self) -> &Sample {
        &self.x
    }

    pub fn y(&self) -> &Sample {
        &self.y
    }

    pub fn n1(&self) -> usize {
        self.x.len()
    }

    pub fn n2(&self) -> usize {
        self.y.len()
    }

    pub fn n(&self) -> usize {
        self.n1() + self.n2()
    }

    /// Maps a zero-based pooled index to its source sample and position.
    pub fn origin(&self, i: usize) -> Origin {
        assert!(i < self.n(), "pooled index {i} out of range");
        if i < self.n1() {
            Origin::X(i)
        } else {
            Origin::Y(i - self.n1())
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match self.origin(i) {
            Origin::X(j) => self.x.values[j],
            Origin::Y(j) => self.y.values[j],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.x.values.iter().chain(self.y.values.iter()).copied()
    }

    /// True when every pooled observation has the same value.
    pub fn is_constant(&self) -> bool {
        let first = self.x.values[0];
        self.iter().all(|v| v == first)
    }
}

/// Sorted copy of a sample with compensated prefix and suffix sums of
/// values, squared values, and counts. Queries take a threshold and return
/// strict-inequality aggregates, so ties never leak across the threshold.
#[derive(Debug, Clone)]
pub struct SortedIndex {
    sorted: Vec<f64>,
    // prefix[i] aggregates sorted[..i]; suffix[i] aggregates sorted[i..].
    prefix_sum: Vec<f64>,
    prefix_sq: Vec<f64>,
    suffix_sum: Vec<f64>,
    suffix_sq: Vec<f64>,
}

impl SortedIndex {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();

        let mut prefix_sum = Vec::with_capacity(n + 1);
        let mut prefix_sq = Vec::with_capacity(n + 1);
        let (mut s, mut q) = (NeumaierSum::new(), NeumaierSum::new());
        prefix_sum.push(0.0);
        prefix_sq.push(0.0);
        for &v in &sorted {
            s.add(v);
            q.add(v * v);
            prefix_sum.push(s.value());
            prefix_sq.push(q.value());
        }

        let mut suffix_sum = vec![0.0; n + 1];
        let mut suffix_sq = vec![0.0; n + 1];
        let (mut s, mut q) = (NeumaierSum::new(), NeumaierSum::new());
        for i in (0..n).rev() {
            s.add(sorted[i]);
            q.add(sorted[i] * sorted[i]);
            suffix_sum[i] = s.value();
            suffix_sq[i] = q.value();
        }

        Self {
            sorted,
            prefix_sum,
            prefix_sq,
            suffix_sum,
            suffix_sq,
        }
    }

    pub fn from_sample(s: &Sample) -> Self {
        Self::new(s.values())
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.suffix_sum[0]
    }

    pub fn total_sq(&self) -> f64 {
        self.suffix_sq[0]
    }

    /// Number of values strictly below `t`.
    #[inline]
    pub fn count_below(&self, t: f64) -> usize {
        self.sorted.partition_point(|&v| v < t)
    }

    /// Index of the first value strictly above `t`.
    #[inline]
    fn first_above(&self, t: f64) -> usize {
        self.sorted.partition_point(|&v| v <= t)
    }

    #[inline]
    pub fn count_above(&self, t: f64) -> usize {
        self.len() - self.first_above(t)
    }

    /// Number of values equal to `t`.
    pub fn multiplicity(&self, t: f64) -> usize {
        self.first_above(t) - self.count_below(t)
    }

    #[inline]
    pub fn sum_below(&self, t: f64) -> f64 {
        self.prefix_sum[self.count_below(t)]
    }

    #[inline]
    pub fn sum_above(&self, t: f64) -> f64 {
        self.suffix_sum[self.first_above(t)]
    }

    #[inline]
    pub fn sum_sq_below(&self, t: f64) -> f64 {
        self.prefix_sq[self.count_below(t)]
    }

    #[inline]
    pub fn sum_sq_above(&self, t: f64) -> f64 {
        self.suffix_sq[self.first_above(t)]
    }

    /// Start offsets of each run of equal values, plus a final `len()`.
    pub fn tie_groups(&self) -> Vec<usize> {
        let mut bounds = Vec::new();
        for (i, &v) in self.sorted.iter().enumerate() {
            if i == 0 || v != self.sorted[i - 1] {
                bounds.push(i);
            }
        }
        bounds.push(self.len());
        bounds
    }
}

/// Parses the one-value-per-line format: blank lines and lines starting
/// with `#` are skipped, and the first content line may be a header if it
/// does not parse as a number.
pub fn parse_values(text: &str, source: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut seen_content = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if !seen_content => {}
            Err(e) => {
                return Err(Error::Parse {
                    path: source.to_string(),
                    line: lineno + 1,
                    message: format!("cannot parse '{line}' as a number: {e}"),
                })
            }
        }
        seen_content = true;
    }
    Ok(values)
}

/// Reads and validates a sample file.
pub fn read_sample(path: &Path, label: &str, allow_negative: bool) -> Result<Sample> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let values = parse_values(&text, &path.display().to_string())?;
    Sample::new(values, label, allow_negative).map_err(|e| match e {
        Error::EmptyInput => Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "no numeric values found".into(),
        },
        other => other,
    })
}
