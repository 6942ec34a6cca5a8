//! The two-sample U-statistic estimator of the semivariance departure
//! measure, its brute-force reference, and jackknife pseudo-values.
//!
//! The estimator averages the twelve-term kernel over every pair of X
//! observations and every pair of Y observations. The printed kernel links
//! `(X1, Y1)` and `(X2, Y2)`; averaging it over both Y orderings makes the
//! statistic invariant to the order of observations, and the average
//! collapses to six aggregate sums:
//!
//! ```text
//! s_yy = sum_{k != l} Y_k Y_l [Y_k > Y_l]      s_xx = sum_{i != j} X_i X_j [X_i > X_j]
//! s_b  = sum_{i,k} X_i Y_k [Y_k > X_i]         s_c  = sum_{i,k} X_i Y_k [X_i > Y_k]
//! s_d  = sum_{i,k} X_i^2 [X_i > Y_k]           s_e  = sum_{i,k} Y_k^2 [Y_k > X_i]
//!
//! delta = 2 s_yy / (n2 (n2-1)) - 2 s_xx / (n1 (n1-1)) + 2 (s_b - s_c + s_d - s_e) / (n1 n2)
//! ```
//!
//! Every indicator is strict, so tied values contribute nothing to any term.
//! Each sum is evaluated with binary searches into a [`SortedIndex`] of the
//! opposite (or same) sample, and the contribution of a single observation
//! to every sum is available in `O(log n)`, which is what makes the
//! leave-one-out pass linearithmic.

use serde::Serialize;

use crate::error::Result;
use crate::samples::{Origin, PooledSample, Sample, SortedIndex};
use crate::sum::{compensated_sum, NeumaierSum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl KernelArgs {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Self { x1, x2, y1, y2 }
    }
}

#[inline]
fn ind(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

/// The kernel `h(X1, X2, Y1, Y2)` term by term, strict indicators throughout.
pub fn kernel_h(a: KernelArgs) -> f64 {
    let KernelArgs { x1, x2, y1, y2 } = a;
    y1 * y2 * ind(y1 > y2) + y1 * y2 * ind(y2 > y1)
        - x1 * x2 * ind(x1 > x2)
        - x1 * x2 * ind(x2 > x1)
        + x1 * y1 * ind(y1 > x1)
        + x2 * y2 * ind(y2 > x2)
        - x1 * y1 * ind(x1 > y1)
        - x2 * y2 * ind(x2 > y2)
        + x1 * x1 * ind(x1 > y1)
        + x2 * x2 * ind(x2 > y2)
        - y1 * y1 * ind(y1 > x1)
        - y2 * y2 * ind(y2 > x2)
}

/// Kernel averaged over the two ways of pairing the Y arguments with the X arguments.
pub fn kernel_symmetrized(x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    0.5 * (kernel_h(KernelArgs::new(x1, x2, y1, y2)) + kernel_h(KernelArgs::new(x1, x2, y2, y1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecomposedSums {
    pub s_yy: f64,
    pub s_xx: f64,
    pub s_b: f64,
    pub s_c: f64,
    pub s_d: f64,
    pub s_e: f64,
    pub n1: usize,
    pub n2: usize,
}

impl DecomposedSums {
    /// Cross-sample sum `s_b - s_c + s_d - s_e`.
    pub fn cross(&self) -> f64 {
        compensated_sum([self.s_b, -self.s_c, self.s_d, -self.s_e])
    }

    /// The six scaled terms whose sum is the estimate.
    pub fn terms(&self) -> [f64; 6] {
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        let a = 2.0 / (n2 * (n2 - 1.0));
        let b = 2.0 / (n1 * (n1 - 1.0));
        let c = 2.0 / (n1 * n2);
        [
            a * self.s_yy,
            -b * self.s_xx,
            c * self.s_b,
            -c * self.s_c,
            c * self.s_d,
            -c * self.s_e,
        ]
    }

    pub fn delta(&self) -> f64 {
        compensated_sum(self.terms())
    }

    /// Largest absolute term; the natural magnitude against which rounding
    /// in the estimate should be judged.
    pub fn scale(&self) -> f64 {
        self.terms().iter().fold(0.0f64, |m, t| m.max(t.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub value: f64,
    pub sums: DecomposedSums,
    /// Every pooled observation has the same value.
    pub degenerate: bool,
}

impl DeltaEstimate {
    fn from_sums(sums: DecomposedSums, degenerate: bool) -> Self {
        let value = if degenerate { 0.0 } else { sums.delta() };
        Self {
            value,
            sums,
            degenerate,
        }
    }
}

fn is_constant(x: &Sample, y: &Sample) -> bool {
    let first = x.values()[0];
    x.values().iter().chain(y.values()).all(|&v| v == first)
}

/// Quadruple-loop evaluation of the symmetrized U-statistic. `O(n1^2 n2^2)`.
pub fn delta_naive(x: &Sample, y: &Sample) -> Result<DeltaEstimate> {
    x.require_len(2)?;
    y.require_len(2)?;
    let (xs, ys) = (x.values(), y.values());
    let (n1, n2) = (xs.len(), ys.len());

    let mut total = NeumaierSum::new();
    for i in 0..n1 {
        for j in i + 1..n1 {
            for k in 0..n2 {
                for l in k + 1..n2 {
                    total.add(kernel_symmetrized(xs[i], xs[j], ys[k], ys[l]));
                }
            }
        }
    }
    let pairs = (n1 * (n1 - 1) / 2) as f64 * (n2 * (n2 - 1) / 2) as f64;

    // Sums by direct pairwise enumeration, reported alongside.
    let pair_sum = |v: &[f64]| {
        let mut acc = NeumaierSum::new();
        for (a, &va) in v.iter().enumerate() {
            for (b, &vb) in v.iter().enumerate() {
                if a != b && va > vb {
                    acc.add(va * vb);
                }
            }
        }
        acc.value()
    };
    let (mut sb, mut sc, mut sd, mut se) = (
        NeumaierSum::new(),
        NeumaierSum::new(),
        NeumaierSum::new(),
        NeumaierSum::new(),
    );
    for &xi in xs {
        for &yk in ys {
            if yk > xi {
                sb.add(xi * yk);
                se.add(yk * yk);
            }
            if xi > yk {
                sc.add(xi * yk);
                sd.add(xi * xi);
            }
        }
    }
    let sums = DecomposedSums {
        s_yy: pair_sum(ys),
        s_xx: pair_sum(xs),
        s_b: sb.value(),
        s_c: sc.value(),
        s_d: sd.value(),
        s_e: se.value(),
        n1,
        n2,
    };
    Ok(DeltaEstimate {
        value: total.value() / pairs,
        sums,
        degenerate: is_constant(x, y),
    })
}

/// Contribution of one X observation `v` to `(s_b, s_c, s_d, s_e)`.
#[inline]
fn cross_terms_of_x(v: f64, y_idx: &SortedIndex) -> [f64; 4] {
    [
        v * y_idx.sum_above(v),
        v * y_idx.sum_below(v),
        v * v * y_idx.count_below(v) as f64,
        y_idx.sum_sq_above(v),
    ]
}

/// Contribution of one Y observation `w` to `(s_b, s_c, s_d, s_e)`.
#[inline]
fn cross_terms_of_y(w: f64, x_idx: &SortedIndex) -> [f64; 4] {
    [
        w * x_idx.sum_below(w),
        w * x_idx.sum_above(w),
        x_idx.sum_sq_above(w),
        w * w * x_idx.count_below(w) as f64,
    ]
}

/// `v` times the sum of same-sample values that differ from `v`; the total
/// weight of `v` in `s_xx` (or `s_yy`), counting both orderings.
#[inline]
fn within_term(v: f64, own_idx: &SortedIndex) -> f64 {
    v * (own_idx.sum_below(v) + own_idx.sum_above(v))
}

fn sums_from_index(x_idx: &SortedIndex, y_idx: &SortedIndex) -> DecomposedSums {
    let within = |idx: &SortedIndex| {
        let mut acc = NeumaierSum::new();
        for &v in idx.sorted() {
            acc.add(v * idx.sum_below(v));
        }
        acc.value()
    };
    let mut cross = [NeumaierSum::new(); 4];
    for &v in x_idx.sorted() {
        for (acc, t) in cross.iter_mut().zip(cross_terms_of_x(v, y_idx)) {
            acc.add(t);
        }
    }
    DecomposedSums {
        s_yy: within(y_idx),
        s_xx: within(x_idx),
        s_b: cross[0].value(),
        s_c: cross[1].value(),
        s_d: cross[2].value(),
        s_e: cross[3].value(),
        n1: x_idx.len(),
        n2: y_idx.len(),
    }
}

/// Sort-and-prefix-sum evaluation of the estimator, `O(n log n)`.
pub fn delta_fast(x: &Sample, y: &Sample) -> Result<DeltaEstimate> {
    x.require_len(2)?;
    y.require_len(2)?;
    let x_idx = SortedIndex::from_sample(x);
    let y_idx = SortedIndex::from_sample(y);
    Ok(DeltaEstimate::from_sums(
        sums_from_index(&x_idx, &y_idx),
        is_constant(x, y),
    ))
}

/// Jackknife pseudo-values in pooled order (all X deletions, then all Y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoValues {
    pub nu: Vec<f64>,
    pub full_delta: f64,
    pub n1: usize,
    pub degenerate: bool,
}

impl PseudoValues {
    pub fn n(&self) -> usize {
        self.nu.len()
    }

    /// Which observation was deleted to produce `nu[i]`.
    pub fn origin(&self, i: usize) -> Origin {
        if i < self.n1 {
            Origin::X(i)
        } else {
            Origin::Y(i - self.n1)
        }
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.nu.iter().copied()) / self.n() as f64
    }

    /// Leave-one-out estimate `T_{1,i}` recovered from `nu[i]`.
    pub fn leave_one_out(&self, i: usize) -> f64 {
        let n = self.n() as f64;
        (n * self.full_delta - self.nu[i]) / (n - 1.0)
    }
}

/// Pseudo-values `nu_i = n * delta - (n - 1) * delta_{-i}` for every pooled
/// observation, computed by removing each observation's contribution from
/// the decomposed sums rather than re-evaluating the statistic.
pub fn jackknife_pseudovalues(x: &Sample, y: &Sample) -> Result<PseudoValues> {
    x.require_len(3)?;
    y.require_len(3)?;
    let x_idx = SortedIndex::from_sample(x);
    let y_idx = SortedIndex::from_sample(y);
    let sums = sums_from_index(&x_idx, &y_idx);
    let degenerate = is_constant(x, y);
    let delta = DeltaEstimate::from_sums(sums, degenerate).value;

    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let n = n1 + n2;
    let cross = sums.cross();

    // delta - delta_{-i} is formed in closed form for each deletion so the
    // pseudo-value never subtracts two nearly equal O(n * delta) numbers.
    let mut nu = Vec::with_capacity(x.len() + y.len());
    for &v in x.values() {
        let own = within_term(v, &x_idx);
        let [b, c, d, e] = cross_terms_of_x(v, &y_idx);
        let k = compensated_sum([b, -c, d, -e]);
        let within_drop = 2.0 * (n1 * own - 2.0 * sums.s_xx) / (n1 * (n1 - 1.0) * (n1 - 2.0));
        let cross_drop = 2.0 * (n1 * k - cross) / (n1 * (n1 - 1.0) * n2);
        nu.push(delta + (n - 1.0) * (cross_drop - within_drop));
    }
    for &w in y.values() {
        let own = within_term(w, &y_idx);
        let [b, c, d, e] = cross_terms_of_y(w, &x_idx);
        let k = compensated_sum([b, -c, d, -e]);
        let within_drop = 2.0 * (n2 * own - 2.0 * sums.s_yy) / (n2 * (n2 - 1.0) * (n2 - 2.0));
        let cross_drop = 2.0 * (n2 * k - cross) / (n1 * n2 * (n2 - 1.0));
        nu.push(delta + (n - 1.0) * (within_drop + cross_drop));
    }
    if degenerate {
        nu.iter_mut().for_each(|v| *v = 0.0);
    }

    Ok(PseudoValues {
        nu,
        full_delta: delta,
        n1: x.len(),
        degenerate,
    })
}

/// Convenience: pseudo-values for an already pooled sample.
pub fn pooled_pseudovalues(pooled: &PooledSample) -> Result<PseudoValues> {
    jackknife_pseudovalues(pooled.x(), pooled.y())
}
