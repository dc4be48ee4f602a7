//! Goodness-of-fit utilities: KS against the standard normal and
//! chi-square tests on categorical counts.

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Exact one-sample Kolmogorov-Smirnov distance between the empirical
/// distribution of `values` and the standard normal.
pub fn ks_standard_normal(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // ties: the empirical cdf jumps over the whole run at once
        let mut k = i;
        while k + 1 < sorted.len() && sorted[k + 1] == sorted[i] {
            k += 1;
        }
        let f = standard_normal_cdf(sorted[i]);
        d = d.max(f - i as f64 / n).max((k + 1) as f64 / n - f);
        i = k + 1;
    }
    d.clamp(0.0, 1.0)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&sq) / (values.len() - 1) as f64
}

/// Unbiased sample covariance with the standard error of the estimate.
pub fn covariance_with_stderr(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return (0.0, f64::INFINITY);
    }
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let cov = pairwise_sum(&prods) / (n - 1) as f64;
    let mp = mean(&prods);
    let dev: Vec<f64> = prods.iter().map(|p| (p - mp) * (p - mp)).collect();
    let var_p = pairwise_sum(&dev) / (n - 1) as f64;
    (cov, (var_p / n as f64).sqrt())
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (c, _) = covariance_with_stderr(xs, ys);
    c / (variance(xs) * variance(ys)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of cells after pooling sparse ones.
    pub cells: usize,
}

/// Minimum expected count per cell; sparser cells are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson goodness-of-fit of `observed` counts against cell probabilities.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != probs.len() {
        return Err(Error::InvalidArgument("observed and probabilities differ in length".into()));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n;
        if e < MIN_EXPECTED {
            pool_o += o as f64;
            pool_e += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pool_e > 0.0 || pool_o > 0.0 {
        cells.push((pool_o, pool_e));
    }
    let stat = pairwise_sum(
        &cells
            .iter()
            .map(|&(o, e)| if e > 0.0 { (o - e) * (o - e) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
            .collect::<Vec<_>>(),
    );
    finish(stat, cells.len().saturating_sub(1), cells.len())
}

/// Chi-square test of homogeneity between two count vectors over the same cells.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquareResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("count vectors differ in length".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let total = na + nb;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        let row = x + y;
        if row * na.min(nb) / total < MIN_EXPECTED {
            pool.0 += x;
            pool.1 += y;
        } else {
            cells.push((x, y));
        }
    }
    if pool.0 + pool.1 > 0.0 {
        cells.push(pool);
    }
    let stat = pairwise_sum(
        &cells
            .iter()
            .map(|&(x, y)| {
                let row = x + y;
                let (ea, eb) = (row * na / total, row * nb / total);
                (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
            })
            .collect::<Vec<_>>(),
    );
    finish(stat, cells.len().saturating_sub(1), cells.len())
}

fn finish(statistic: f64, dof: usize, cells: usize) -> Result<ChiSquareResult> {
    if dof == 0 {
        return Ok(ChiSquareResult {
            statistic,
            dof,
            p_value: 1.0,
            cells,
        });
    }
    let law = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: law.sf(statistic),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_quantiles_is_small() {
        // midpoint quantiles of N(0,1): KS is exactly 1/(2N) up to the cdf accuracy
        let n = 1000;
        let law = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| law.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
        let d = ks_standard_normal(&xs);
        assert!((d - 0.5 / n as f64).abs() < 1e-9, "{d}");
        assert!(ks_standard_normal(&vec![0.0; 10]) >= 0.5);
        let d = standard_normal_cdf(1.96) - 0.9750021048517795; assert!(d.abs() < 1e-11, "{d:e}");
    }

    #[test]
    fn chi_square_exact_fit() {
        let r = chi_square_gof(&[250, 250, 500], &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let bad = chi_square_gof(&[400, 100, 500], &[0.25, 0.25, 0.5]).unwrap();
        assert!(bad.p_value < 1e-10);
        // 2x2 homogeneity: statistic 8 with one degree of freedom
        let h = chi_square_homogeneity(&[60, 40], &[40, 60]).unwrap();
        assert!((h.statistic - 8.0).abs() < 1e-12);
        assert!((h.p_value - 0.004677734981047).abs() < 1e-9);
    }

    #[test]
    fn covariance_matches_direct() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let ys = [2.0, 1.0, 5.0, 9.0];
        let (c, se) = covariance_with_stderr(&xs, &ys);
        assert!((c - 27.5 / 3.0).abs() < 1e-12);
        assert!(se.is_finite() && se > 0.0);
        assert!((variance(&xs) - 7.0).abs() < 1e-12);
    }
}
