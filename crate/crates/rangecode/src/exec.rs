//! Deterministic fan-out over index ranges.
//!
//! Verification sweeps and enumerations in this crate are all shaped as "map
//! an index in `0..count` to a result, then combine". With the `parallel`
//! feature (on by default) the work is spread over rayon; without it the
//! sequential path in [`seq`] is used. Both paths return identical results:
//! counterexample search returns the *smallest* failing index, sums are over
//! `u64`, and set collection is into ordered sets.

use std::collections::BTreeSet;

/// Sequential implementations; always compiled so benchmarks can compare
/// against the parallel path.
pub mod seq {
    use super::*;

    pub fn find_violation<F>(count: u64, ok: F) -> Option<u64>
    where
        F: Fn(u64) -> bool,
    {
        (0..count).find(|&i| !ok(i))
    }

    pub fn sum<F>(count: u64, f: F) -> u64
    where
        F: Fn(u64) -> u64,
    {
        (0..count).map(f).sum()
    }

    pub fn collect_set<T, F>(count: u64, f: F) -> BTreeSet<T>
    where
        T: Ord,
        F: Fn(u64) -> T,
    {
        (0..count).map(f).collect()
    }
}

/// Rayon-backed implementations.
#[cfg(feature = "parallel")]
pub mod par {
    use super::*;
    use rayon::prelude::*;

    pub fn find_violation<F>(count: u64, ok: F) -> Option<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        (0..count).into_par_iter().find_first(|&i| !ok(i))
    }

    pub fn sum<F>(count: u64, f: F) -> u64
    where
        F: Fn(u64) -> u64 + Sync + Send,
    {
        (0..count).into_par_iter().map(f).sum()
    }

    pub fn collect_set<T, F>(count: u64, f: F) -> BTreeSet<T>
    where
        T: Ord + Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(f).collect()
    }
}

/// Smallest index in `0..count` where `ok` fails, if any.
pub fn find_violation<F>(count: u64, ok: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        par::find_violation(count, ok)
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq::find_violation(count, ok)
    }
}

/// Sum of `f(i)` over `0..count`.
pub fn sum<F>(count: u64, f: F) -> u64
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        par::sum(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq::sum(count, f)
    }
}

/// Collects `f(i)` over `0..count` into an ordered set.
pub fn collect_set<T, F>(count: u64, f: F) -> BTreeSet<T>
where
    T: Ord + Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        par::collect_set(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        seq::collect_set(count, f)
    }
}
