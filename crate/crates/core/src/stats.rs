//! Mann-Whitney U tests and five-number summaries.
//!
//! Small samples (n₁ + n₂ ≤ 16) use the exact permutation distribution of the
//! rank sum, computed by dynamic programming over doubled midranks so ties are
//! handled exactly. Larger samples use the normal approximation with tie and
//! continuity corrections.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::normal_cdf;

/// Largest combined sample size tested exactly.
pub const EXACT_MAX_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    High,
    Moderate,
    NotSignificant,
}

impl Significance {
    pub fn as_str(self) -> &'static str {
        match self {
            Significance::High => "high",
            Significance::Moderate => "moderate",
            Significance::NotSignificant => "not_significant",
        }
    }
}

/// p-value cut-offs for the two significance tags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub high: f64,
    pub moderate: f64,
}

impl Thresholds {
    /// Simulation study: p < 0.001 and p < 0.01.
    pub const SIMULATION: Thresholds = Thresholds { high: 0.001, moderate: 0.01 };
    /// Human-subject experiments: p < 0.01 and p < 0.05.
    pub const EXPERIMENT: Thresholds = Thresholds { high: 0.01, moderate: 0.05 };

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.high && self.high <= self.moderate && self.moderate <= 1.0) {
            return Err(Error::invalid("thresholds", "need 0 < high <= moderate <= 1"));
        }
        Ok(())
    }

    pub fn classify(&self, p: f64) -> Significance {
        if p < self.high {
            Significance::High
        } else if p < self.moderate {
            Significance::Moderate
        } else {
            Significance::NotSignificant
        }
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::SIMULATION
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTestResult {
    /// U statistic of the first sample.
    pub u: f64,
    pub p: f64,
    pub method: Method,
    pub significance: Significance,
}

/// Midranks (1-based) of `values`, plus the tie-group sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

fn check_sample(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sample value"));
    }
    Ok(())
}

/// Two-sided Mann-Whitney U test of `a` against `b`.
pub fn mann_whitney(a: &[f64], b: &[f64], thresholds: Thresholds) -> Result<UTestResult> {
    let method = if a.len() + b.len() <= EXACT_MAX_N { Method::Exact } else { Method::NormalApprox };
    mann_whitney_with_method(a, b, thresholds, method)
}

/// [`mann_whitney`] with the p-value method forced. The exact method is
/// quadratic in the rank-sum range, so keep it to small samples.
pub fn mann_whitney_with_method(a: &[f64], b: &[f64], thresholds: Thresholds, method: Method) -> Result<UTestResult> {
    check_sample(a)?;
    check_sample(b)?;
    thresholds.validate()?;
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;

    let p = match method {
        Method::Exact => exact_p(&ranks, n1),
        Method::NormalApprox => normal_p(u, n1, n2, &ties),
    };
    Ok(UTestResult { u, p, method, significance: thresholds.classify(p) })
}

/// Exact two-sided p from the permutation distribution of the first group's rank sum.
fn exact_p(ranks: &[f64], n1: usize) -> f64 {
    // Doubled midranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..n1].iter().sum();
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: number of k-subsets with doubled rank sum s
    let mut counts = vec![vec![0u64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            for s in (r..=max_sum).rev() {
                counts[k][s] += counts[k - 1][s - r];
            }
        }
    }
    let dist = &counts[n1];
    let total: u64 = dist.iter().sum();
    let lower: u64 = dist[..=observed].iter().sum();
    let upper: u64 = dist[observed..].iter().sum();
    (2.0 * lower.min(upper) as f64 / total as f64).min(1.0)
}

fn normal_p(u: f64, n1: usize, n2: usize, ties: &[usize]) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term);
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((u - n1f * n2f / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    (2.0 * normal_cdf(-z)).min(1.0)
}

/// Five-number summary for box plots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub n: usize,
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(samples: &[f64]) -> Result<BoxSummary> {
    check_sample(samples)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(BoxSummary {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        n: sorted.len(),
    })
}

pub fn mean(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        None
    } else {
        Some(samples.iter().sum::<f64>() / samples.len() as f64)
    }
}
