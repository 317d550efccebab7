//! Permutation enumeration and sampling.
//!
//! Exhaustive sweeps index permutations by their Lehmer code so that a sweep
//! over `0..factorial(n)` can be split across threads deterministically.

use rand::seq::SliceRandom;
use rand::Rng;

/// `n!` as a `u64`, or `None` if it does not fit (n > 20).
pub fn factorial(n: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for i in 2..=n as u64 {
        acc = acc.checked_mul(i)?;
    }
    Some(acc)
}

/// Decodes `index` (in `0..n!`) into a permutation of `1..=n`.
///
/// Index 0 is the identity; indexes enumerate permutations in lexicographic
/// order of their one-line notation.
pub fn nth_permutation(n: usize, index: u64) -> Vec<u32> {
    let mut digits = vec![0u64; n];
    let mut rem = index;
    for i in (0..n).rev() {
        let base = (n - i) as u64;
        digits[i] = rem % base;
        rem /= base;
    }
    let mut pool: Vec<u32> = (1..=n as u32).collect();
    digits
        .iter()
        .map(|&d| pool.remove(d as usize))
        .collect()
}

/// Uniform random permutation of `1..=n`.
pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut values: Vec<u32> = (1..=n as u32).collect();
    values.shuffle(rng);
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), Some(1));
        assert_eq!(factorial(5), Some(120));
        assert_eq!(factorial(20), Some(2_432_902_008_176_640_000));
        assert_eq!(factorial(21), None);
    }

    #[test]
    fn lehmer_decode_is_a_bijection() {
        for n in 0..=5 {
            let count = factorial(n).unwrap();
            let all: BTreeSet<Vec<u32>> =
                (0..count).map(|i| nth_permutation(n, i)).collect();
            assert_eq!(all.len() as u64, count);
            for p in &all {
                let mut sorted = p.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, (1..=n as u32).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn lexicographic_order() {
        assert_eq!(nth_permutation(3, 0), vec![1, 2, 3]);
        assert_eq!(nth_permutation(3, 1), vec![1, 3, 2]);
        assert_eq!(nth_permutation(3, 5), vec![3, 2, 1]);
    }
}
