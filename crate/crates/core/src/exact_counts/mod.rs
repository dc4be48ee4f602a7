//! Exact enumeration of permutations whose cycles are at most `alpha` long,
//! and exact finite-`n` laws of their cycle counts.
//!
//! Everything here is coefficient extraction from `exp(sum_j q_j z^j / j)`:
//! the number of such permutations is `n! [z^n] exp(sum_{j<=alpha} z^j/j)`.

mod egf;
mod logreal;
mod prefix;
mod table;
mod weights;

pub use egf::{log_coefficients, EgfCoefficients};
pub use logreal::LogReal;
pub use prefix::{
    cycle_count_law, exact_prefix_law, exact_prefix_law_capped, lattice_size, tv_exact, PrefixLaw,
    DEFAULT_LATTICE_CAP,
};
pub use table::{
    BigCount, Count, CountMode, CountTable, CACHE_FORMAT_VERSION, DEFAULT_EXACT_THRESHOLD,
};
pub use weights::WeightRow;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// `|S_{n,alpha}|`, the number of permutations of `n` elements with no cycle
/// longer than `alpha`.
pub fn count_constrained(n: usize, alpha: usize, mode: CountMode) -> Result<Count> {
    if alpha == 0 {
        return Err(Error::InvalidArgument("alpha must be at least 1".into()));
    }
    CountTable::build(alpha.min(n.max(1)), n, mode)?.count(n)
}

/// `Z_{n,alpha} = |S_{n,alpha}| / n!`. Exactly one when `alpha >= n`.
pub fn z_norm(n: usize, alpha: usize) -> Result<LogReal> {
    if alpha == 0 {
        return Err(Error::InvalidArgument("alpha must be at least 1".into()));
    }
    if alpha >= n {
        return Ok(LogReal::ONE);
    }
    CountTable::auto(alpha, n)?.z_norm(n)
}

/// `[z^n] exp(sum_j q_j z^j / j)`.
pub fn coeff_weighted(n: usize, weights: &WeightRow) -> LogReal {
    log_coefficients(weights, n).coeffs[n]
}

/// `sum_{j=b1+1}^{b2} 1/j`.
pub fn harmonic_range(b1: usize, b2: usize) -> f64 {
    compensated_sum((b1 + 1..=b2).map(|j| 1.0 / j as f64))
}

/// `P[T = k]` for `T = sum_{j=b1+1}^{b2} j Z_j` with independent
/// `Z_j ~ Poisson(1/j)`.
pub fn poisson_sum_pmf(k: usize, b1: usize, b2: usize) -> Result<f64> {
    Ok(poisson_sum_pmf_table(k, b1, b2)?[k])
}

/// `P[T = k]` for `k = 0..=k_max`.
pub fn poisson_sum_pmf_table(k_max: usize, b1: usize, b2: usize) -> Result<Vec<f64>> {
    if b1 >= b2 {
        return Err(Error::InvalidArgument(format!(
            "need b1 < b2, got b1 = {b1}, b2 = {b2}"
        )));
    }
    let h = harmonic_range(b1, b2);
    let c = log_coefficients(&WeightRow::indicator(b1 + 1, b2), k_max).coeffs;
    Ok(c.iter().map(|v| (v.ln() - h).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn small_counts() {
        let c = |n, a| count_constrained(n, a, CountMode::Exact).unwrap();
        assert_eq!(c(5, 2).as_exact().unwrap().0, BigUint::from(26u32));
        assert_eq!(c(4, 4).as_exact().unwrap().0, BigUint::from(24u32));
        assert_eq!(c(6, 1).as_exact().unwrap().0, BigUint::from(1u32));
        assert_eq!(c(0, 3).as_exact().unwrap().0, BigUint::from(1u32));
        assert!(count_constrained(3, 0, CountMode::Exact).is_err());
    }

    #[test]
    fn logspace_count_matches_exact() {
        let e = count_constrained(30, 4, CountMode::Exact).unwrap();
        let l = count_constrained(30, 4, CountMode::Logspace).unwrap();
        assert!((e.ln() - l.ln()).abs() < 1e-10 * e.ln());
        match l {
            Count::Approx { rel_error_bound, .. } => assert!(rel_error_bound < 1e-10),
            _ => panic!("expected log-space count"),
        }
    }

    #[test]
    fn z_norm_examples() {
        assert_eq!(z_norm(5, 5).unwrap(), LogReal::ONE);
        assert!((z_norm(5, 2).unwrap().to_f64() - 26.0 / 120.0).abs() < 1e-15);
        assert!((z_norm(6, 1).unwrap().to_f64() - 1.0 / 720.0).abs() < 1e-17);
    }

    #[test]
    fn coeff_weighted_examples() {
        assert!((coeff_weighted(3, &WeightRow::unit(3)).to_f64() - 1.0).abs() < 1e-15);
        assert!((coeff_weighted(4, &WeightRow::unit(2)).to_f64() - 10.0 / 24.0).abs() < 1e-15);
        let s: f64 = 0.7;
        let w = WeightRow::new(vec![s.exp()]).unwrap();
        assert!((coeff_weighted(2, &w).to_f64() - (2.0 * s).exp() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn poisson_sum_examples() {
        let h3: f64 = 1.0 + 0.5 + 1.0 / 3.0;
        assert!((poisson_sum_pmf(0, 0, 3).unwrap() - (-h3).exp()).abs() < 1e-15);
        assert!((poisson_sum_pmf(1, 0, 3).unwrap() - (-h3).exp()).abs() < 1e-15);
        assert_eq!(poisson_sum_pmf(1, 1, 3).unwrap(), 0.0);
        assert!(poisson_sum_pmf(1, 3, 3).is_err());
    }

    #[test]
    fn poisson_sum_pmf_direct_convolution() {
        // convolve Poisson(1) on 1Z, Poisson(1/2) on 2Z, Poisson(1/3) on 3Z
        let pois = |mean: f64, k: usize| {
            (-mean).exp() * mean.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>()
        };
        let kmax = 12;
        let mut direct = vec![0.0; kmax + 1];
        for a in 0..=kmax {
            for b in 0..=kmax / 2 {
                for c in 0..=kmax / 3 {
                    let t = a + 2 * b + 3 * c;
                    if t <= kmax {
                        direct[t] += pois(1.0, a) * pois(0.5, b) * pois(1.0 / 3.0, c);
                    }
                }
            }
        }
        let table = poisson_sum_pmf_table(kmax, 0, 3).unwrap();
        for k in 0..=kmax {
            assert!((table[k] - direct[k]).abs() < 1e-15, "k = {k}");
        }
    }

    #[test]
    fn poisson_sum_pmf_normalizes() {
        let t = poisson_sum_pmf_table(400, 2, 9).unwrap();
        let total: f64 = t.iter().sum();
        assert!((1.0 - total).abs() < 1e-10);
    }
}
