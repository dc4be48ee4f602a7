//! Statistics of sampled cycle types and of exact laws: cycle-count CLTs,
//! limit-shape and fluctuation paths, total variation to the Poisson
//! prefix, tilted-Poisson marginals and longest cycles.
//!
//! Per-sample work runs on rayon; every reduction is a pairwise sum over
//! values kept in sample order, so results do not depend on scheduling.

mod paths;
mod univariate;

pub use paths::{
    bridge_covariance, exceedance_probability, fluctuation_path, index_fluctuation_path,
    index_shape_path, shape_path, uniform_grid, CovarianceEntry, CovarianceEstimate, PathGrid,
    PathKind, ProcessPath, DEFAULT_GRID_POINTS, MIN_BRIDGE_PATHS,
};
pub use univariate::{
    chi_square_gof, chi_square_homogeneity, correlation, covariance_with_stderr,
    ks_standard_normal, mean, standard_normal_cdf, variance, ChiSquareResult, MIN_EXPECTED,
};

use crate::error::{Error, Result};
use crate::exact_counts::cycle_count_law;
use crate::numeric::{compensated_sum, pairwise_sum};
use crate::sampler::CycleStructure;
use crate::saddle::solve_saddle;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use std::collections::BTreeMap;

/// Below this mean the normal approximation of a cycle count is poor.
pub const MIN_CLT_MEAN: f64 = 10.0;

/// Cycle lengths in nonincreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LongestCycles(pub Vec<usize>);

impl LongestCycles {
    pub fn from_structure(s: &CycleStructure) -> Self {
        let mut v = Vec::with_capacity(s.total_cycles());
        for &(j, c) in s.parts().iter().rev() {
            v.extend(std::iter::repeat(j).take(c));
        }
        LongestCycles(v)
    }

    /// `l_i` (1-based), `None` past the number of cycles.
    pub fn get(&self, i: usize) -> Option<usize> {
        i.checked_sub(1).and_then(|i| self.0.get(i).copied())
    }

    pub fn top(&self, k: usize) -> Vec<Option<usize>> {
        (1..=k).map(|i| self.get(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    /// `C_j`, indexed by `j` up to the longest cycle.
    pub counts: Vec<usize>,
    /// `K_m = sum_{j<=m} C_j`.
    pub cumulative_cycles: Vec<usize>,
    /// `S_m = sum_{j<=m} j C_j`.
    pub cumulative_indices: Vec<usize>,
    pub longest: LongestCycles,
}

impl Summary {
    pub fn k(&self, m: usize) -> usize {
        self.cumulative_cycles[m.min(self.cumulative_cycles.len() - 1)]
    }

    pub fn s(&self, m: usize) -> usize {
        self.cumulative_indices[m.min(self.cumulative_indices.len() - 1)]
    }
}

pub fn summarize(s: &CycleStructure) -> Summary {
    let len = s.longest();
    let mut counts = vec![0usize; len + 1];
    for &(j, c) in s.parts() {
        counts[j] = c;
    }
    let mut k = vec![0usize; len + 1];
    let mut idx = vec![0usize; len + 1];
    for j in 1..=len {
        k[j] = k[j - 1] + counts[j];
        idx[j] = idx[j - 1] + j * counts[j];
    }
    Summary {
        counts,
        cumulative_cycles: k,
        cumulative_indices: idx,
        longest: LongestCycles::from_structure(s),
    }
}

fn check_samples(samples: &[CycleStructure], n: usize, alpha: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    match samples.iter().find(|s| s.n() != n || s.longest() > alpha) {
        Some(bad) => Err(Error::InvalidArgument(format!(
            "sample {} is not a cycle type of size {n} with cycles at most {alpha}",
            bad.to_record()
        ))),
        None => Ok(()),
    }
}

/// Standardized statistic `(X - center) / scale` over a batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub label: String,
    pub samples: usize,
    pub center: f64,
    pub scale: f64,
    /// Mean and unbiased variance of the raw statistic.
    pub mean: f64,
    pub variance: f64,
    #[serde(skip)]
    pub standardized: Vec<f64>,
    pub standardized_mean: f64,
    pub standardized_variance: f64,
    pub ks: f64,
    pub warnings: Vec<String>,
}

impl MomentReport {
    fn build(label: String, raw: Vec<f64>, center: f64, scale: f64, warnings: Vec<String>) -> Self {
        let standardized: Vec<f64> = raw.iter().map(|v| (v - center) / scale).collect();
        MomentReport {
            label,
            samples: raw.len(),
            center,
            scale,
            mean: mean(&raw),
            variance: variance(&raw),
            standardized_mean: mean(&standardized),
            standardized_variance: variance(&standardized),
            ks: ks_standard_normal(&standardized),
            standardized,
            warnings,
        }
    }
}

/// `(C_m - mu_m) / sqrt(mu_m)` with `mu_m = x^m / m` at the saddle point.
pub fn clt_statistic(samples: &[CycleStructure], n: usize, alpha: usize, m: usize) -> Result<MomentReport> {
    check_samples(samples, n, alpha)?;
    if m == 0 || m > alpha.min(n) {
        return Err(Error::InvalidArgument(format!("cycle length {m} outside 1..={}", alpha.min(n))));
    }
    let mu = solve_saddle(n, alpha)?.mu(m);
    let mut warnings = Vec::new();
    if mu < MIN_CLT_MEAN {
        warnings.push(format!(
            "mu_{m} = {mu:.4} < {MIN_CLT_MEAN}: C_{m} is close to Poisson, not normal"
        ));
    }
    let raw: Vec<f64> = samples.par_iter().map(|s| s.count(m) as f64).collect();
    Ok(MomentReport::build(format!("C_{m}"), raw, mu, mu.sqrt(), warnings))
}

/// Sample correlation of `C_{m1}` and `C_{m2}` (equal to that of the
/// standardized counts).
pub fn cycle_count_correlation(samples: &[CycleStructure], m1: usize, m2: usize) -> f64 {
    let a: Vec<f64> = samples.iter().map(|s| s.count(m1) as f64).collect();
    let b: Vec<f64> = samples.iter().map(|s| s.count(m2) as f64).collect();
    correlation(&a, &b)
}

/// Sample mean of `C_m` and its standard error.
pub fn cycle_count_mean(samples: &[CycleStructure], m: usize) -> (f64, f64) {
    let xs: Vec<f64> = samples.iter().map(|s| s.count(m) as f64).collect();
    (mean(&xs), (variance(&xs) / xs.len() as f64).sqrt())
}

/// `K_alpha` centered by `sum_{j<=alpha} x^j/j` and scaled by
/// `sqrt(n / (alpha ln^2(n/alpha)))`.
pub fn total_cycle_clt(samples: &[CycleStructure], n: usize, alpha: usize) -> Result<MomentReport> {
    check_samples(samples, n, alpha)?;
    if alpha >= n {
        return Err(Error::InvalidArgument("total cycle scaling needs alpha < n".into()));
    }
    let sp = solve_saddle(n, alpha)?;
    let center = sp.centering_cycles(alpha);
    let l = (n as f64 / alpha as f64).ln();
    let scale = (n as f64 / (alpha as f64 * l * l)).sqrt();
    let raw: Vec<f64> = samples.par_iter().map(|s| s.total_cycles() as f64).collect();
    Ok(MomentReport::build(format!("K_{alpha}"), raw, center, scale, Vec::new()))
}

/// Plug-in total variation between the empirical law of `(C_1, ..., C_b)`
/// and independent `Poisson(1/j)`.
pub fn tv_empirical(samples: &[CycleStructure], b: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    if b == 0 {
        return Ok(0.0);
    }
    let mut hist: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for s in samples {
        *hist.entry((1..=b).map(|j| s.count(j)).collect()).or_default() += 1;
    }
    let total = samples.len() as f64;
    let h = compensated_sum((1..=b).map(|j| 1.0 / j as f64));
    // TV = sum of positive parts, which only occur on the observed support
    let excess: Vec<f64> = hist
        .iter()
        .map(|(a, &c)| {
            let ln_q = -h + a
                .iter()
                .enumerate()
                .map(|(i, &k)| -(k as f64) * ((i + 1) as f64).ln() - ln_gamma(k as f64 + 1.0))
                .sum::<f64>();
            (c as f64 / total - ln_q.exp()).max(0.0)
        })
        .collect();
    Ok(pairwise_sum(&excess).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltRow {
    pub j: usize,
    /// `P[C_m = j]`.
    pub exact: f64,
    /// `e^{-mu_m} mu_m^j / j!`.
    pub predicted: f64,
    pub ratio: f64,
}

/// Exact law of `C_m` next to the Poisson law with the tilted mean `mu_m`.
pub fn tilted_poisson_check(n: usize, alpha: usize, m: usize) -> Result<Vec<TiltRow>> {
    let law = cycle_count_law(n, alpha, m)?;
    let mu = solve_saddle(n, alpha)?.mu(m);
    Ok(law
        .into_iter()
        .enumerate()
        .map(|(j, exact)| {
            let predicted = (-mu + j as f64 * mu.ln() - ln_gamma(j as f64 + 1.0)).exp();
            TiltRow {
                j,
                exact,
                predicted,
                ratio: exact / predicted,
            }
        })
        .collect())
}

/// Empirical behaviour of the `k` longest cycles. A sample with fewer than
/// `i` cycles has no `l_i`: it counts as `l_i < alpha` and is left out of
/// the mean of `l_i / alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongestCycleReport {
    pub alpha: usize,
    pub k: usize,
    pub samples: usize,
    /// `P[l_i = alpha]`, `i = 1..=k`.
    pub p_at_alpha: Vec<f64>,
    /// Mean of `l_i / alpha` over samples that have an `i`-th cycle.
    pub mean_ratio: Vec<Option<f64>>,
    /// Samples without an `i`-th cycle.
    pub missing: Vec<usize>,
    /// `P[l_1 = ... = l_k = alpha]`.
    pub p_all_at_alpha: f64,
}

pub fn longest_cycle_report(samples: &[CycleStructure], k: usize, alpha: usize) -> Result<LongestCycleReport> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    if k == 0 || alpha == 0 {
        return Err(Error::InvalidArgument("k and alpha must be at least 1".into()));
    }
    let tops: Vec<Vec<Option<usize>>> = samples
        .par_iter()
        .map(|s| LongestCycles::from_structure(s).top(k))
        .collect();
    let total = samples.len() as f64;
    let mut p_at_alpha = Vec::with_capacity(k);
    let mut mean_ratio = Vec::with_capacity(k);
    let mut missing = Vec::with_capacity(k);
    for i in 0..k {
        let present: Vec<f64> = tops.iter().filter_map(|t| t[i]).map(|l| l as f64 / alpha as f64).collect();
        missing.push(samples.len() - present.len());
        p_at_alpha.push(tops.iter().filter(|t| t[i] == Some(alpha)).count() as f64 / total);
        mean_ratio.push((!present.is_empty()).then(|| mean(&present)));
    }
    let all = tops.iter().filter(|t| t.iter().all(|&l| l == Some(alpha))).count() as f64 / total;
    Ok(LongestCycleReport {
        alpha,
        k,
        samples: samples.len(),
        p_at_alpha,
        mean_ratio,
        missing,
        p_all_at_alpha: all,
    })
}
