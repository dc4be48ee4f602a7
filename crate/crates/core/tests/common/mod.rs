#![allow(dead_code)]

use std::collections::BTreeMap;

/// Cycle type of a permutation given as an image array, as dense counts
/// `c[j]` for `j = 1..=n`.
pub fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut counts = vec![0usize; n + 1];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        counts[len] += 1;
    }
    counts
}

/// Visits every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Number of permutations of `n` elements per cycle type, keyed by the
/// dense count vector truncated at the longest cycle.
pub fn cycle_type_census(n: usize) -> BTreeMap<Vec<usize>, u64> {
    let mut census = BTreeMap::new();
    for_each_permutation(n, |p| {
        let mut t = cycle_type(p);
        while t.len() > 1 && *t.last().unwrap() == 0 {
            t.pop();
        }
        *census.entry(t).or_insert(0u64) += 1;
    });
    census
}

pub fn longest(t: &[usize]) -> usize {
    t.iter().rposition(|&c| c > 0).unwrap_or(0)
}
