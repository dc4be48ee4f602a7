use super::egf::log_coefficients;
use super::{harmonic_range, WeightRow};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, ln_factorials};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default maximum number of lattice points held by a [`PrefixLaw`].
pub const DEFAULT_LATTICE_CAP: usize = 5_000_000;

/// Exact law of the short cycle counts `(C_1..C_b)` under the uniform
/// measure on permutations of `n` with cycles at most `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixLaw {
    pub n: usize,
    pub alpha: usize,
    pub b: usize,
    /// Keyed by `(a_1..a_b)`; every key has `sum_j j a_j <= n`.
    pub probabilities: BTreeMap<Vec<u32>, f64>,
    /// Log-weight `-sum_j (a_j ln j + ln a_j!)` of each key, i.e. the
    /// unnormalized product-Poisson(1/j) mass up to `exp(-H_b)`.
    #[serde(skip)]
    log_weights: BTreeMap<Vec<u32>, f64>,
}

impl PrefixLaw {
    pub fn get(&self, a: &[u32]) -> f64 {
        self.probabilities.get(a).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probabilities.values().copied())
    }

    /// `E[C_j]` under the law, `1 <= j <= b`.
    pub fn marginal_mean(&self, j: usize) -> f64 {
        assert!(j >= 1 && j <= self.b);
        compensated_sum(self.probabilities.iter().map(|(a, p)| a[j - 1] as f64 * p))
    }

    /// Law of `C_j` alone.
    pub fn marginal(&self, j: usize) -> Vec<f64> {
        assert!(j >= 1 && j <= self.b);
        let mut out = vec![0.0; self.n / j + 1];
        for (a, p) in &self.probabilities {
            out[a[j - 1] as usize] += p;
        }
        out
    }

    /// Total variation distance to independent `Poisson(1/j)`, `j <= b`,
    /// as `sum (Q - P)_+` over the lattice plus the Poisson mass outside it.
    pub fn tv_to_poisson(&self) -> f64 {
        let h = harmonic_range(0, self.b);
        let mut inside_q = Vec::with_capacity(self.log_weights.len());
        let mut excess = Vec::with_capacity(self.log_weights.len());
        for (a, lw) in &self.log_weights {
            let q = (lw - h).exp();
            let p = self.get(a);
            inside_q.push(q);
            excess.push((q - p).max(0.0));
        }
        let outside = (1.0 - compensated_sum(inside_q)).max(0.0);
        (compensated_sum(excess) + outside).clamp(0.0, 1.0)
    }
}

/// Number of `a in N^b` with `sum_j j a_j <= n` (saturating).
pub fn lattice_size(n: usize, b: usize) -> u128 {
    // partitions of r into parts <= b, summed over r <= n
    let mut p = vec![0u128; n + 1];
    p[0] = 1;
    for j in 1..=b.min(n) {
        for r in j..=n {
            p[r] = p[r].saturating_add(p[r - j]);
        }
    }
    p.iter().fold(0u128, |a, &v| a.saturating_add(v))
}

fn normalize_args(n: usize, alpha: usize, b: usize) -> Result<usize> {
    if alpha == 0 {
        return Err(Error::InvalidArgument("alpha must be at least 1".into()));
    }
    let alpha = alpha.min(n.max(1));
    if b > alpha {
        return Err(Error::InvalidArgument(format!(
            "prefix length b = {b} exceeds alpha = {alpha}"
        )));
    }
    Ok(alpha)
}

pub fn exact_prefix_law(n: usize, alpha: usize, b: usize) -> Result<PrefixLaw> {
    exact_prefix_law_capped(n, alpha, b, DEFAULT_LATTICE_CAP)
}

/// `P[(C_1..C_b) = a] = prod_j 1/(j^{a_j} a_j!) * h_{n-r} / Z_{n,alpha}`
/// with `r = sum_j j a_j` and `h_m = [z^m] exp(sum_{b<j<=alpha} z^j/j)`.
pub fn exact_prefix_law_capped(n: usize, alpha: usize, b: usize, cap: usize) -> Result<PrefixLaw> {
    let alpha = normalize_args(n, alpha, b)?;
    let required = lattice_size(n, b);
    if required > cap as u128 {
        return Err(Error::LatticeTooLarge { required, cap });
    }
    let z = log_coefficients(&WeightRow::unit(alpha), n).coeffs[n].ln();
    let h = log_coefficients(&WeightRow::indicator(b + 1, alpha), n).coeffs;
    let lf = ln_factorials(n);
    let ln_j: Vec<f64> = (0..=b).map(|j| (j.max(1) as f64).ln()).collect();

    let mut log_weights = BTreeMap::new();
    let mut key = vec![0u32; b];
    enumerate(1, b, n, 0.0, &mut key, &lf, &ln_j, &mut log_weights);

    let probabilities = log_weights
        .iter()
        .map(|(a, lw)| {
            let r: usize = a.iter().enumerate().map(|(i, &c)| (i + 1) * c as usize).sum();
            (a.clone(), (lw + h[n - r].ln() - z).exp())
        })
        .collect();
    Ok(PrefixLaw {
        n,
        alpha,
        b,
        probabilities,
        log_weights,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    j: usize,
    b: usize,
    budget: usize,
    lw: f64,
    key: &mut Vec<u32>,
    lf: &[f64],
    ln_j: &[f64],
    out: &mut BTreeMap<Vec<u32>, f64>,
) {
    if j > b {
        out.insert(key.clone(), lw);
        return;
    }
    for c in 0..=budget / j {
        key[j - 1] = c as u32;
        let w = lw - c as f64 * ln_j[j] - lf[c];
        enumerate(j + 1, b, budget - c * j, w, key, lf, ln_j, out);
    }
    key[j - 1] = 0;
}

/// Exact total variation distance between the law of `(C_1..C_b)` and
/// independent `Poisson(1/j)`.
///
/// Both measures give the lattice point `a` mass proportional to
/// `prod_j 1/(j^{a_j} a_j!)`, so the distance aggregates over `r = sum j a_j`:
/// `sum_r g_r (h_{n-r}/Z_{n,alpha} - exp(-H_b))_+` with
/// `g_r = [z^r] exp(sum_{j<=b} z^j/j)`.
pub fn tv_exact(n: usize, alpha: usize, b: usize) -> Result<f64> {
    let alpha = normalize_args(n, alpha, b)?;
    if b == 0 {
        return Ok(0.0);
    }
    let z = log_coefficients(&WeightRow::unit(alpha), n).coeffs[n].ln();
    let h = log_coefficients(&WeightRow::indicator(b + 1, alpha), n).coeffs;
    let g = log_coefficients(&WeightRow::unit(b), n).coeffs;
    let neg_h = -harmonic_range(0, b);
    let terms = (0..=n).map(|r| {
        let p = (g[r].ln() + h[n - r].ln() - z).exp();
        let q = (g[r].ln() + neg_h).exp();
        (p - q).max(0.0)
    });
    Ok(compensated_sum(terms).clamp(0.0, 1.0))
}

/// Exact law of `C_m`: `P[C_m = k] = h_{n-mk} / (m^k k! Z_{n,alpha})` where
/// `h` are the coefficients with length `m` removed from the weights.
pub fn cycle_count_law(n: usize, alpha: usize, m: usize) -> Result<Vec<f64>> {
    if alpha == 0 {
        return Err(Error::InvalidArgument("alpha must be at least 1".into()));
    }
    let alpha = alpha.min(n.max(1));
    if m == 0 || m > alpha {
        return Err(Error::InvalidArgument(format!(
            "cycle length m = {m} outside 1..={alpha}"
        )));
    }
    let z = log_coefficients(&WeightRow::unit(alpha), n).coeffs[n].ln();
    let without_m = WeightRow::from_fn(alpha, |j| if j == m { 0.0 } else { 1.0 })?;
    let h = log_coefficients(&without_m, n).coeffs;
    let lf = ln_factorials(n / m);
    let ln_m = (m as f64).ln();
    Ok((0..=n / m)
        .map(|k| (h[n - m * k].ln() - k as f64 * ln_m - lf[k] - z).exp())
        .collect())
}
