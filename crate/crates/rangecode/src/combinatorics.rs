//! Exhaustive-enumeration checks for the counting arguments behind the
//! encodings: Baxter permutations and their recovery from min-max answers,
//! the set of realizable delta tuples, restricted lattice walks and the
//! cycle lemma, ordered partitions, and the entropy bound arithmetic.
//!
//! Enumerations take explicit budgets (a cap on the number of enumerated
//! items) and fail with a budget error instead of silently truncating.

use std::collections::BTreeSet;

use crate::array::{InputArray, QueryRange};
use crate::error::{Error, Result};
use crate::exec;
use crate::perm;
use crate::topk::encode_topk;

/// True iff the permutation avoids the two vincular patterns whose middle
/// pair is adjacent: no `i < j` and `l > j + 1` with
/// `p[j+1] < p[i] < p[l] < p[j]` or `p[j] < p[l] < p[i] < p[j+1]`.
pub fn is_baxter(p: &[u32]) -> bool {
    let n = p.len();
    if n < 4 {
        return true;
    }
    for j in 1..n - 2 {
        let (pj, pj1) = (p[j], p[j + 1]);
        for i in 0..j {
            let pi = p[i];
            for &pl in &p[j + 2..] {
                if (pj1 < pi && pi < pl && pl < pj) || (pj < pl && pl < pi && pi < pj1) {
                    return false;
                }
            }
        }
    }
    true
}

/// Number of Baxter permutations of `1..=n`, by exhaustive filtering.
pub fn count_baxter(n: usize, budget: u64) -> Result<u64> {
    let count = enumeration_size(n, budget)?;
    Ok(exec::sum(count, |idx| {
        u64::from(is_baxter(&perm::nth_permutation(n, idx)))
    }))
}

fn enumeration_size(n: usize, budget: u64) -> Result<u64> {
    let count = perm::factorial(n)
        .ok_or_else(|| Error::Budget(format!("{n}! overflows the enumeration counter")))?;
    if count > budget {
        return Err(Error::Budget(format!(
            "enumerating {n}! = {count} permutations exceeds the budget {budget}"
        )));
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Unknown,
    Less,
    Greater,
}

impl Cmp {
    fn flip(self) -> Self {
        match self {
            Cmp::Unknown => Cmp::Unknown,
            Cmp::Less => Cmp::Greater,
            Cmp::Greater => Cmp::Less,
        }
    }
}

/// Recovers a Baxter permutation from a range min-max oracle
/// (`range -> (argmax, argmin)`).
///
/// Working up by range length, each range `[lo, hi]` needs only the
/// comparison of its endpoints: extreme positions at the endpoints settle
/// it directly; otherwise scanning between the interior argmin and argmax
/// either finds a three-element chain or an adjacent sign flip, and a flip
/// forces the endpoint order because the four positions involved would
/// otherwise form a forbidden pattern.
///
/// For non-Baxter inputs the result may be wrong or an error, never a
/// panic.
pub fn recover_from_minmax<F>(oracle: F, n: usize) -> Result<Vec<u32>>
where
    F: Fn(QueryRange) -> (usize, usize),
{
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![1]);
    }
    let mut cmp = vec![Cmp::Unknown; (n + 1) * (n + 1)];
    let idx = |a: usize, b: usize| a * (n + 1) + b;

    for len in 2..=n {
        for lo in 1..=n - len + 1 {
            let hi = lo + len - 1;
            let (argmax, argmin) = oracle(QueryRange::new(lo, hi)?);
            if argmax < lo || argmax > hi || argmin < lo || argmin > hi || argmax == argmin {
                return Err(Error::Recovery(format!(
                    "oracle returned extremes ({argmax}, {argmin}) outside [{lo}, {hi}]"
                )));
            }
            let rel = if argmin == lo || argmax == hi {
                Cmp::Less
            } else if argmin == hi || argmax == lo {
                Cmp::Greater
            } else {
                resolve_interior(&cmp, idx, lo, hi, argmin, argmax)?
            };
            cmp[idx(lo, hi)] = rel;
            cmp[idx(hi, lo)] = rel.flip();
        }
    }

    let values: Vec<u32> = (1..=n)
        .map(|a| {
            let below = (1..=n)
                .filter(|&c| c != a && cmp[idx(c, a)] == Cmp::Less)
                .count();
            below as u32 + 1
        })
        .collect();
    InputArray::from_permutation(values.clone())
        .map_err(|_| Error::Recovery("comparisons do not define a permutation".into()))?;
    Ok(values)
}

fn resolve_interior(
    cmp: &[Cmp],
    idx: impl Fn(usize, usize) -> usize,
    lo: usize,
    hi: usize,
    argmin: usize,
    argmax: usize,
) -> Result<Cmp> {
    let min_first = argmin < argmax;
    let (from, to) = if min_first {
        (argmin, argmax)
    } else {
        (argmax, argmin)
    };
    // f[i] = whether position i sits above both endpoints (1) or below (0).
    let mut above = Vec::with_capacity(to - from + 1);
    for i in from..=to {
        let lo_i = cmp[idx(lo, i)];
        let i_hi = cmp[idx(i, hi)];
        match (lo_i, i_hi) {
            (Cmp::Less, Cmp::Less) => return Ok(Cmp::Less),
            (Cmp::Greater, Cmp::Greater) => return Ok(Cmp::Greater),
            (Cmp::Less, Cmp::Greater) => above.push(true),
            (Cmp::Greater, Cmp::Less) => above.push(false),
            _ => {
                return Err(Error::Recovery(format!(
                    "comparison of {i} against the endpoints of [{lo}, {hi}] unknown"
                )))
            }
        }
    }
    for w in above.windows(2) {
        if min_first && !w[0] && w[1] {
            // Low-to-high flip: the four positions would form a forbidden
            // pattern unless the left endpoint is smaller.
            return Ok(Cmp::Less);
        }
        if !min_first && w[0] && !w[1] {
            return Ok(Cmp::Greater);
        }
    }
    Err(Error::Recovery(format!(
        "no chain and no adjacent flip inside [{lo}, {hi}]"
    )))
}

/// All delta tuples realizable by arrays of length `n` at parameter `k`.
pub fn enumerate_valid_tuples(n: usize, k: usize, budget: u64) -> Result<BTreeSet<Vec<u32>>> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let count = enumeration_size(n, budget)?;
    Ok(exec::collect_set(count, |idx| {
        let a = InputArray::from_permutation(perm::nth_permutation(n, idx))
            .expect("decoded permutations are valid");
        let e = encode_topk(&a, k).expect("k validated");
        e.deltas()
            .expect("fresh encodings parse")
            .into_iter()
            .map(|d| d as u32)
            .collect()
    }))
}

/// Every realizable `(n-1)`-tuple extends by any
/// `delta_n in 0..=ceil(M/k)`, `M = sum(k - delta_i)`, to a realizable
/// `n`-tuple.
pub fn check_tuple_extension(n: usize, k: usize, budget: u64) -> Result<bool> {
    let current = enumerate_valid_tuples(n, k, budget)?;
    let extended = enumerate_valid_tuples(n + 1, k, budget)?;
    for tuple in &current {
        let m: i64 = tuple.iter().map(|&d| k as i64 - i64::from(d)).sum();
        debug_assert!(m >= 0);
        let max_delta = (m as u64).div_ceil(k as u64);
        for delta_n in 0..=max_delta {
            let mut longer = tuple.clone();
            longer.push(delta_n as u32);
            if !extended.contains(&longer) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A family of lattice walks: steps drawn from a fixed set of integer
/// heights, a fixed number of steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSpec {
    steps: Vec<i64>,
    length: usize,
}

impl WalkSpec {
    pub fn new(steps: impl IntoIterator<Item = i64>, length: usize) -> Result<Self> {
        let mut steps: Vec<i64> = steps.into_iter().collect();
        steps.sort_unstable();
        steps.dedup();
        if steps.is_empty() {
            return Err(Error::Argument("step set must be non-empty".into()));
        }
        Ok(WalkSpec { steps, length })
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps
    }

    pub fn length(&self) -> usize {
        self.length
    }
}

/// Height-indexed walk counts after all steps; returns the table and the
/// height of its first cell.
fn walk_dp(spec: &WalkSpec, nonneg_only: bool) -> (Vec<u128>, i64) {
    let len = spec.length as i64;
    let lo = if nonneg_only {
        0
    } else {
        spec.steps.first().copied().unwrap().min(0) * len
    };
    let hi = spec.steps.last().copied().unwrap().max(0) * len;
    let size = (hi - lo + 1) as usize;
    let off = |h: i64| (h - lo) as usize;
    let mut dp = vec![0u128; size];
    dp[off(0)] = 1;
    for _ in 0..spec.length {
        let mut next = vec![0u128; size];
        for (cell, &ways) in dp.iter().enumerate() {
            if ways == 0 {
                continue;
            }
            let h = cell as i64 + lo;
            for &s in &spec.steps {
                let h2 = h + s;
                if h2 < lo || h2 > hi || (nonneg_only && h2 < 0) {
                    continue;
                }
                next[off(h2)] += ways;
            }
        }
        dp = next;
    }
    (dp, lo)
}

/// Walks that never drop below height zero, any end height.
pub fn count_nonneg_walks(spec: &WalkSpec) -> u128 {
    walk_dp(spec, true).0.iter().sum()
}

/// Walks with no height restriction that end at height zero.
pub fn count_returning_walks(spec: &WalkSpec) -> u128 {
    let (dp, lo) = walk_dp(spec, false);
    dp[(-lo) as usize]
}

/// Exact form of the cycle-lemma bound:
/// `nonneg * length >= returning`.
pub fn cycle_lemma_inequality(spec: &WalkSpec) -> bool {
    if spec.length == 0 {
        return true;
    }
    count_nonneg_walks(spec) * spec.length as u128 >= count_returning_walks(spec)
}

/// Direct check of the rotation argument: every returning walk has at
/// least one cyclic rotation that stays nonnegative. Enumerates all
/// `|steps|^length` walks; errors if that exceeds `budget`.
pub fn rotation_argument_holds(spec: &WalkSpec, budget: u64) -> Result<bool> {
    let total = (spec.steps.len() as u128)
        .checked_pow(spec.length as u32)
        .ok_or_else(|| Error::Budget("walk enumeration overflows".into()))?;
    if total > u128::from(budget) {
        return Err(Error::Budget(format!(
            "enumerating {total} walks exceeds the budget {budget}"
        )));
    }
    if spec.length == 0 {
        return Ok(true);
    }
    let mut choice = vec![0usize; spec.length];
    loop {
        let walk: Vec<i64> = choice.iter().map(|&c| spec.steps[c]).collect();
        if walk.iter().sum::<i64>() == 0 && !some_rotation_nonneg(&walk) {
            return Ok(false);
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == spec.length {
                return Ok(true);
            }
            choice[pos] += 1;
            if choice[pos] < spec.steps.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn some_rotation_nonneg(walk: &[i64]) -> bool {
    let n = walk.len();
    'rot: for start in 0..n {
        let mut h = 0i64;
        for i in 0..n {
            h += walk[(start + i) % n];
            if h < 0 {
                continue 'rot;
            }
        }
        return true;
    }
    false
}

/// Ordered partitions of `total` into `parts` parts, each in
/// `[0, max_part]`; exact dynamic-programming count.
pub fn count_ordered_partitions(total: u64, parts: u64, max_part: u64) -> u128 {
    let mut dp = vec![0u128; total as usize + 1];
    dp[0] = 1;
    for _ in 0..parts {
        let mut next = vec![0u128; total as usize + 1];
        for (s, &ways) in dp.iter().enumerate() {
            if ways == 0 {
                continue;
            }
            for part in 0..=max_part.min(total - s as u64) {
                next[s + part as usize] += ways;
            }
        }
        dp = next;
    }
    dp[total as usize]
}

/// Closed-form lower bound `C(N - 2g' + g - 1, g - g' - 1)` with
/// `g' = floor(N / max_part)`; zero on degenerate arguments.
pub fn partition_lower_bound(total: u64, parts: u64, max_part: u64) -> u128 {
    if max_part == 0 {
        return 0;
    }
    let g1 = (total / max_part) as i128;
    let n = total as i128;
    let g = parts as i128;
    binomial(n - 2 * g1 + g - 1, g - g1 - 1)
}

/// Binomial coefficient with out-of-range arguments mapped to zero.
pub fn binomial(a: i128, b: i128) -> u128 {
    if b < 0 || a < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b) as u128;
    let a = a as u128;
    let mut result: u128 = 1;
    for i in 1..=b {
        result = result
            .checked_mul(a - b + i)
            .expect("binomial overflow")
            / i;
    }
    result
}

/// Binary entropy; `H(0) = H(1) = 0`.
pub fn entropy(x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "entropy domain is [0, 1], got {x}");
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `log2 C(n, m)` by summing logarithms.
pub fn log2_binomial(n: u64, m: u64) -> f64 {
    assert!(m <= n, "log2_binomial needs m <= n");
    let m = m.min(n - m);
    (1..=m)
        .map(|i| (((n - m + i) as f64) / i as f64).log2())
        .sum()
}

/// Lower-bound bit count `(k+1) n' H(1/(k+1))` with
/// `n' = n (1 - k/D) + k/D + k - 2 - D`.
pub fn lb_topk_bits(n: usize, k: usize, delta: usize) -> f64 {
    assert!(delta >= 1, "the slack parameter must be at least 1");
    let (nf, kf, df) = (n as f64, k as f64, delta as f64);
    let n_prime = nf * (1.0 - kf / df) + kf / df + kf - 2.0 - df;
    (kf + 1.0) * n_prime * entropy(1.0 / (kf + 1.0))
}

/// Upper-bound bit count `(k+1) n H(1/(k+1))`.
pub fn ub_topk_bits(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    (kf + 1.0) * nf * entropy(1.0 / (kf + 1.0))
}
