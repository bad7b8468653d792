//! Index-sorting helpers and permutation checks.

use std::cmp::Ordering;

/// Stable ascending argsort: equal keys keep their original relative order.
pub fn argsort_by<T>(values: &[T], mut cmp: impl FnMut(&T, &T) -> Ordering) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // sort_by is stable
    idx.sort_by(|&a, &b| cmp(&values[a], &values[b]));
    idx
}

pub fn argsort<T: Ord>(values: &[T]) -> Vec<usize> {
    argsort_by(values, Ord::cmp)
}

/// Stable ascending argsort of reals under IEEE total order.
pub fn argsort_f64(values: &[f64]) -> Vec<usize> {
    argsort_by(values, f64::total_cmp)
}

/// Stable descending argsort of reals: largest first, ties by ascending index.
pub fn argsort_f64_desc(values: &[f64]) -> Vec<usize> {
    argsort_by(values, |a, b| b.total_cmp(a))
}

/// True when `p` contains every index in `0..p.len()` exactly once.
pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &i in p {
        match seen.get_mut(i) {
            Some(s) if !*s => *s = true,
            _ => return false,
        }
    }
    true
}

/// Inverse permutation: `inv[p[z]] = z`. `p` must be a permutation.
pub fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (z, &src) in p.iter().enumerate() {
        inv[src] = z;
    }
    inv
}
