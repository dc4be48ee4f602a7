use bounded_cycles::exact_counts::CountTable;
use bounded_cycles::sampler::{sample_batch, Method, SamplerConfig};
use bounded_cycles::statistics::{cycle_count_mean, summarize, PathGrid, PathKind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_structures_satisfy_invariants(
        n in 2usize..600,
        alpha_frac in 0.02f64..1.0,
        seed in any::<u64>(),
        rejection in any::<bool>(),
    ) {
        let alpha = ((n as f64 * alpha_frac) as usize).max(1);
        let method = if rejection && n < 200 { Method::Rejection } else { Method::Recursive };
        let batch = sample_batch(&SamplerConfig::new(n, alpha, method, seed, 8)).unwrap();
        for s in &batch {
            let sum = summarize(s);
            prop_assert!(sum.cumulative_cycles.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(sum.s(alpha), n);
            prop_assert_eq!(sum.k(alpha), s.total_cycles());
            prop_assert!(sum.longest.get(1).unwrap() <= alpha);
            prop_assert!(sum.k(alpha) * alpha >= n);
        }
        if alpha < n {
            let grid = PathGrid::uniform(n, alpha, 11).unwrap();
            for s in &batch {
                let p = grid.path(s, PathKind::IndexFluctuation).unwrap();
                prop_assert_eq!(*p.values.last().unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn sample_means_match_exact_moments() {
    for (n, alpha, method) in [
        (200usize, 15usize, Method::Recursive),
        (200, 15, Method::Rejection),
        (1500, 38, Method::Recursive),
        (3000, 3000, Method::Recursive),
    ] {
        let table = CountTable::auto(alpha, n).unwrap();
        let batch = sample_batch(&SamplerConfig::new(n, alpha, method, 77, 20_000)).unwrap();
        for m in [1, alpha / 2, alpha] {
            let (mean, se) = cycle_count_mean(&batch, m);
            let exact = table.mean_cycle_count(n, m).unwrap();
            assert!(
                (mean - exact).abs() <= 4.0 * se.max(1e-3),
                "n={n} alpha={alpha} {method:?} m={m}: {mean} vs {exact} (se {se})"
            );
        }
    }
}
