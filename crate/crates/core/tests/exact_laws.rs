mod common;

use approx::assert_relative_eq;
use bounded_cycles::exact_counts::{cycle_count_law, exact_prefix_law, CountMode, CountTable};
use std::collections::BTreeMap;

/// Permutations with cycles at most `alpha` long, per cycle type.
fn constrained_census(n: usize, alpha: usize) -> (BTreeMap<Vec<usize>, u64>, u64) {
    let census: BTreeMap<_, _> = common::cycle_type_census(n)
        .into_iter()
        .filter(|(t, _)| common::longest(t) <= alpha)
        .collect();
    let total = census.values().sum();
    (census, total)
}

#[test]
fn prefix_law_matches_enumeration() {
    for (n, alpha, b) in [(6, 3, 2), (7, 4, 3), (7, 7, 2), (8, 3, 1), (8, 5, 3)] {
        let (census, total) = constrained_census(n, alpha);
        let mut brute: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (t, c) in &census {
            let key: Vec<u32> = (1..=b).map(|j| t.get(j).copied().unwrap_or(0) as u32).collect();
            *brute.entry(key).or_default() += *c as f64 / total as f64;
        }
        let law = exact_prefix_law(n, alpha, b).unwrap();
        assert_relative_eq!(law.total(), 1.0, epsilon = 1e-12);
        for (a, p) in &brute {
            assert_relative_eq!(law.get(a), *p, epsilon = 1e-13);
        }
        assert_eq!(law.probabilities.values().filter(|&&p| p > 0.0).count(), brute.len());
    }
}

#[test]
fn single_length_law_matches_enumeration() {
    for (n, alpha, m) in [(8, 3, 2), (8, 3, 3), (8, 8, 1), (7, 5, 4)] {
        let (census, total) = constrained_census(n, alpha);
        let law = cycle_count_law(n, alpha, m).unwrap();
        let mut brute = vec![0.0; n / m + 1];
        for (t, c) in &census {
            brute[t.get(m).copied().unwrap_or(0)] += *c as f64 / total as f64;
        }
        for (k, p) in brute.iter().enumerate() {
            assert_relative_eq!(law.get(k).copied().unwrap_or(0.0), *p, epsilon = 1e-13);
        }
    }
}

#[test]
fn moments_match_enumeration() {
    let (n, alpha) = (8, 4);
    let (census, total) = constrained_census(n, alpha);
    let table = CountTable::build(alpha, n, CountMode::Exact).unwrap();
    for a in 1..=alpha {
        let mean: f64 = census.iter().map(|(t, c)| (t.get(a).copied().unwrap_or(0) * *c as usize) as f64).sum::<f64>() / total as f64;
        assert_relative_eq!(table.mean_cycle_count(n, a).unwrap(), mean, epsilon = 1e-13);
        for b in 1..=alpha {
            let fm: f64 = census
                .iter()
                .map(|(t, c)| {
                    let ca = t.get(a).copied().unwrap_or(0) as f64;
                    let cb = t.get(b).copied().unwrap_or(0) as f64;
                    let v = if a == b { ca * (ca - 1.0) } else { ca * cb };
                    v * *c as f64
                })
                .sum::<f64>()
                / total as f64;
            assert_relative_eq!(table.factorial_moment2(n, a, b).unwrap(), fm, epsilon = 1e-13);
        }
    }
}

#[test]
fn table_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for mode in [CountMode::Exact, CountMode::Logspace] {
        let built = CountTable::load_or_build(dir.path(), 9, 300, mode).unwrap();
        let path = dir.path().join(CountTable::cache_file_name(9, 300, mode));
        assert!(path.exists());
        let loaded = CountTable::load_or_build(dir.path(), 9, 300, mode).unwrap();
        assert_eq!(built.log_z(), loaded.log_z());
        assert_eq!(built.exact_counts(), loaded.exact_counts());
    }
    let exact = CountTable::build(9, 300, CountMode::Exact).unwrap();
    let approx = CountTable::build(9, 300, CountMode::Logspace).unwrap();
    for m in [1, 50, 299, 300] {
        assert_relative_eq!(exact.log_z()[m], approx.log_z()[m], max_relative = 1e-11, epsilon = 1e-11);
    }
}
