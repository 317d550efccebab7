//! Budgeted verification suites.
//!
//! Each suite re-runs a module's exhaustive and randomized properties
//! against the brute-force oracles. `budget` caps the size of every
//! exhaustive enumeration (a sweep over permutations of `1..=n` runs only
//! when `n! <= budget`) and the number of randomized trials; a zero budget
//! runs nothing and passes vacuously. Failures carry a minimal reproducing
//! input. Sweeps fan out through [`crate::exec`] and are deterministic for
//! a fixed seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::{naive_min_max, naive_top_k, InputArray, QueryRange};
use crate::combinatorics::{
    self, count_nonneg_walks, cycle_lemma_inequality, entropy, is_baxter,
    recover_from_minmax, rotation_argument_holds, WalkSpec,
};
use crate::error::Error;
use crate::exec;
use crate::minmax::{self, SweepMode};
use crate::perm;
use crate::topk;
use crate::topkds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    MinMax,
    TopkEnc,
    TopkDs,
    Combinatorics,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::MinMax,
        Suite::TopkEnc,
        Suite::TopkDs,
        Suite::Combinatorics,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::MinMax => "minmax",
            Suite::TopkEnc => "topk-enc",
            Suite::TopkDs => "topk-ds",
            Suite::Combinatorics => "combinatorics",
        }
    }

    pub fn parse(name: &str) -> crate::Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown suite {name:?}; expected one of minmax, topk-enc, topk-ds, combinatorics"
                ))
            })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub cases: u64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_suite(suite: Suite, budget: u64, seed: u64) -> SuiteReport {
    match suite {
        Suite::MinMax => minmax_suite(budget, seed),
        Suite::TopkEnc => topk_enc_suite(budget, seed),
        Suite::TopkDs => topk_ds_suite(budget, seed),
        Suite::Combinatorics => combinatorics_suite(budget, seed),
    }
}

/// Largest prefix of `1..=cap` whose factorials fit the budget.
fn exhaustive_ns(budget: u64, cap: usize) -> Vec<usize> {
    (1..=cap)
        .filter(|&n| perm::factorial(n).is_some_and(|c| c <= budget))
        .collect()
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn perm_at(n: usize, idx: u64) -> InputArray {
    InputArray::from_permutation(perm::nth_permutation(n, idx)).expect("valid permutation")
}

fn minmax_perm_ok(a: &InputArray) -> bool {
    let n = a.len();
    let e = minmax::encode_minmax(a);
    if e.total_bits() > 3 * n {
        return false;
    }
    let Ok(trace) = minmax::decode_minmax(&e) else {
        return false;
    };
    if trace.t_min != minmax::encode_single(a, SweepMode::Min)
        || trace.t_max != minmax::encode_single(a, SweepMode::Max)
    {
        return false;
    }
    let Ok(index) = minmax::build_index(&e) else {
        return false;
    };
    for i in 1..=n {
        for j in i..=n {
            let r = QueryRange::new(i, j).expect("i <= j");
            if index.r_min_max(r).ok() != naive_min_max(a, r).ok() {
                return false;
            }
        }
    }
    true
}

fn minmax_suite(budget: u64, seed: u64) -> SuiteReport {
    let mut cases = 0u64;
    let mut failures = Vec::new();
    for n in exhaustive_ns(budget, 8) {
        let count = perm::factorial(n).expect("small n");
        cases += count;
        if let Some(idx) = exec::find_violation(count, |i| minmax_perm_ok(&perm_at(n, i))) {
            failures.push(format!(
                "exhaustive n={n}: permutation {:?} fails",
                perm::nth_permutation(n, idx)
            ));
        }
    }
    let trials = budget.min(10_000);
    cases += trials;
    if let Some(t) = exec::find_violation(trials, |t| {
        let mut rng = trial_rng(seed, t);
        let n = rng.random_range(1..=256usize);
        let a = InputArray::from_permutation(perm::random_permutation(n, &mut rng))
            .expect("valid permutation");
        let e = minmax::encode_minmax(&a);
        if e.total_bits() > 3 * n {
            return false;
        }
        let Ok(trace) = minmax::decode_minmax(&e) else {
            return false;
        };
        if trace.t_min != minmax::encode_single(&a, SweepMode::Min)
            || trace.t_max != minmax::encode_single(&a, SweepMode::Max)
        {
            return false;
        }
        let Ok(index) = minmax::build_index(&e) else {
            return false;
        };
        (0..16).all(|_| {
            let i = rng.random_range(1..=n);
            let j = rng.random_range(i..=n);
            let r = QueryRange::new(i, j).expect("i <= j");
            index.r_min_max(r).ok() == naive_min_max(&a, r).ok()
        })
    }) {
        failures.push(format!("randomized trial {t} (seed {seed}) fails"));
    }
    SuiteReport {
        suite: Suite::MinMax.name(),
        cases,
        failures,
    }
}

fn topk_perm_ok(a: &InputArray, k: usize) -> bool {
    let n = a.len();
    let Ok(e) = topk::encode_topk(a, k) else {
        return false;
    };
    for j in 1..=n {
        match (topk::replay(&e, j), topk::build_sk(a, k, j)) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => return false,
        }
    }
    for i in 1..=n {
        for j in i..=n {
            let r = QueryRange::new(i, j).expect("i <= j");
            if topk::query_topk(&e, r).ok() != naive_top_k(a, r, k).ok() {
                return false;
            }
        }
    }
    true
}

fn unsorted_reduction_ok(a: &InputArray, k: usize) -> bool {
    let n = a.len();
    let mut raw: Vec<i64> = a.values().iter().map(|&v| v as i64).collect();
    raw.extend((1..=k).map(|i| (n + i) as i64));
    let padded = InputArray::normalize(&raw);
    let oracle = |r: QueryRange| {
        let mut ans = naive_top_k(&padded, r, k).expect("valid range").into_vec();
        ans.sort_unstable();
        ans
    };
    for i in 1..=n {
        for j in i..=n {
            let r = QueryRange::new(i, j).expect("i <= j");
            match (
                topk::sorted_from_unsorted(oracle, n, k, r),
                naive_top_k(a, r, k),
            ) {
                (Ok(x), Ok(y)) if x == y => {}
                _ => return false,
            }
        }
    }
    true
}

/// All top-k answers over all ranges, flattened with separators.
fn answer_signature(a: &InputArray, k: usize) -> Vec<usize> {
    let n = a.len();
    let mut sig = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            let r = QueryRange::new(i, j).expect("i <= j");
            sig.extend(naive_top_k(a, r, k).expect("valid").iter());
            sig.push(0); // separator; positions are 1-based
        }
    }
    sig
}

fn faithfulness_ok(n: usize, k: usize) -> bool {
    let count = perm::factorial(n).expect("small n");
    let pairs = exec::collect_set(count, |idx| {
        let a = perm_at(n, idx);
        let e = topk::encode_topk(&a, k).expect("valid k");
        (e.bits().to_bit_string(), answer_signature(&a, k))
    });
    let mut by_enc: BTreeMap<&String, &Vec<usize>> = BTreeMap::new();
    let mut by_ans: BTreeMap<&Vec<usize>, &String> = BTreeMap::new();
    for (enc, ans) in &pairs {
        if *by_enc.entry(enc).or_insert(ans) != ans {
            return false; // same encoding, different answers
        }
        if *by_ans.entry(ans).or_insert(enc) != enc {
            return false; // same answers, different encodings
        }
    }
    true
}

fn topk_enc_suite(budget: u64, seed: u64) -> SuiteReport {
    let mut cases = 0u64;
    let mut failures = Vec::new();
    for n in exhaustive_ns(budget, 7) {
        let count = perm::factorial(n).expect("small n");
        for k in 1..=3usize {
            cases += count;
            if let Some(idx) =
                exec::find_violation(count, |i| topk_perm_ok(&perm_at(n, i), k))
            {
                failures.push(format!(
                    "exhaustive n={n} k={k}: permutation {:?} fails",
                    perm::nth_permutation(n, idx)
                ));
            }
            cases += 1;
            if !faithfulness_ok(n, k) {
                failures.push(format!("faithfulness partition broken at n={n} k={k}"));
            }
        }
        cases += count;
        if let Some(idx) =
            exec::find_violation(count, |i| unsorted_reduction_ok(&perm_at(n, i), 2))
        {
            failures.push(format!(
                "unsorted reduction n={n} k=2: permutation {:?} fails",
                perm::nth_permutation(n, idx)
            ));
        }
    }
    let trials = budget.min(10_000);
    cases += trials;
    if let Some(t) = exec::find_violation(trials, |t| {
        let mut rng = trial_rng(seed, t);
        let n = 1024usize;
        let k = [1usize, 4, 8][rng.random_range(0..3usize)];
        let a = InputArray::from_permutation(perm::random_permutation(n, &mut rng))
            .expect("valid permutation");
        let e = topk::encode_topk(&a, k).expect("valid k");
        (0..4).all(|_| {
            let i = rng.random_range(1..=n);
            let j = rng.random_range(i..=n);
            let r = QueryRange::new(i, j).expect("i <= j");
            topk::query_topk(&e, r).ok() == naive_top_k(&a, r, k).ok()
        })
    }) {
        failures.push(format!("randomized trial {t} (seed {seed}) fails"));
    }
    SuiteReport {
        suite: Suite::TopkEnc.name(),
        cases,
        failures,
    }
}

fn topk_ds_perm_ok(a: &InputArray, k: usize, b: usize) -> bool {
    let Ok(ds) = topkds::build(a, k, Some(b)) else {
        return false;
    };
    let n = a.len();
    for i in 1..=n {
        for j in i..=n {
            let r = QueryRange::new(i, j).expect("i <= j");
            if ds.query(r).ok() != naive_top_k(a, r, k).ok() {
                return false;
            }
        }
    }
    true
}

fn topk_ds_suite(budget: u64, seed: u64) -> SuiteReport {
    let mut cases = 0u64;
    let mut failures = Vec::new();
    for n in exhaustive_ns(budget, 7) {
        for k in 1..=2usize {
            for b in [2usize, 3, 4] {
                if b > n {
                    continue;
                }
                let count = perm::factorial(n).expect("small n");
                cases += count;
                if let Some(idx) = exec::find_violation(count, |i| {
                    topk_ds_perm_ok(&perm_at(n, i), k, b)
                }) {
                    failures.push(format!(
                        "exhaustive n={n} k={k} B={b}: permutation {:?} fails",
                        perm::nth_permutation(n, idx)
                    ));
                }
            }
        }
    }
    // Decomposition audit on random instances.
    let audits = budget.min(200);
    cases += audits;
    if let Some(t) = exec::find_violation(audits, |t| {
        let mut rng = trial_rng(seed, t);
        let n = rng.random_range(16..=512usize);
        let k = rng.random_range(1..=3usize);
        let b = [16usize, 32, 64][rng.random_range(0..3usize)].min(n);
        let a = InputArray::from_permutation(perm::random_permutation(n, &mut rng))
            .expect("valid permutation");
        topkds::decompose(&a, k, b)
            .and_then(|d| d.validate(&a, k))
            .is_ok()
    }) {
        failures.push(format!("decomposition audit trial {t} (seed {seed}) fails"));
    }
    let trials = budget.min(2_000);
    cases += trials;
    if let Some(t) = exec::find_violation(trials, |t| {
        let mut rng = trial_rng(seed, !t);
        let n = 2048usize;
        let k = [1usize, 4][rng.random_range(0..2usize)];
        let a = InputArray::from_permutation(perm::random_permutation(n, &mut rng))
            .expect("valid permutation");
        let Ok(ds) = topkds::build(&a, k, Some(32)) else {
            return false;
        };
        (0..4).all(|_| {
            let i = rng.random_range(1..=n);
            let j = rng.random_range(i..=n);
            let r = QueryRange::new(i, j).expect("i <= j");
            ds.query(r).ok() == naive_top_k(&a, r, k).ok()
        })
    }) {
        failures.push(format!("randomized query trial {t} (seed {seed}) fails"));
    }
    SuiteReport {
        suite: Suite::TopkDs.name(),
        cases,
        failures,
    }
}

const BAXTER_GOLDENS: [u64; 8] = [1, 2, 6, 22, 92, 422, 2074, 10754];

fn combinatorics_suite(budget: u64, seed: u64) -> SuiteReport {
    let mut cases = 0u64;
    let mut failures = Vec::new();

    for n in exhaustive_ns(budget, 8) {
        cases += perm::factorial(n).expect("small n");
        match combinatorics::count_baxter(n, budget) {
            Ok(count) if count == BAXTER_GOLDENS[n - 1] => {}
            other => failures.push(format!(
                "count_baxter({n}) = {other:?}, expected {}",
                BAXTER_GOLDENS[n - 1]
            )),
        }
    }

    for n in exhaustive_ns(budget, 7) {
        let count = perm::factorial(n).expect("small n");
        cases += count;
        if let Some(idx) = exec::find_violation(count, |i| {
            let p = perm::nth_permutation(n, i);
            if !is_baxter(&p) {
                return true;
            }
            let a = InputArray::from_permutation(p.clone()).expect("valid");
            let oracle = |r: QueryRange| naive_min_max(&a, r).expect("valid range");
            recover_from_minmax(oracle, n).is_ok_and(|got| got == p)
        }) {
            failures.push(format!(
                "recovery failed for permutation {:?}",
                perm::nth_permutation(n, idx)
            ));
        }

        for k in 1..=2usize {
            cases += 1;
            match combinatorics::enumerate_valid_tuples(n, k, budget) {
                Ok(tuples) => {
                    for delta in 1..n {
                        let spec = WalkSpec::new(
                            (k as i64 - delta as i64)..=k as i64,
                            n - 1 - delta,
                        )
                        .expect("non-empty steps");
                        if (tuples.len() as u128) < count_nonneg_walks(&spec) {
                            failures.push(format!(
                                "tuple count below walk bound at n={n} k={k} delta={delta}"
                            ));
                        }
                    }
                }
                Err(e) => failures.push(format!("tuple enumeration n={n} k={k}: {e}")),
            }
        }
    }

    if budget > 0 {
        // Cycle-lemma inequality over every step set inside [-3, 3].
        cases += 1;
        for mask in 1u32..128 {
            let steps: Vec<i64> =
                (-3..=3).filter(|s| mask >> (s + 3) & 1 == 1).collect();
            for length in 0..=10usize {
                let spec = WalkSpec::new(steps.clone(), length).expect("non-empty");
                if !cycle_lemma_inequality(&spec) {
                    failures.push(format!(
                        "cycle inequality fails for steps {steps:?} length {length}"
                    ));
                }
            }
        }
        // Direct rotation checks where the enumeration fits the budget.
        cases += 1;
        for max_step in 1..=2i64 {
            for length in 0..=8usize {
                let spec = WalkSpec::new(-max_step..=max_step, length).expect("non-empty");
                match rotation_argument_holds(&spec, budget) {
                    Ok(true) | Err(Error::Budget(_)) => {}
                    other => failures.push(format!(
                        "rotation argument at steps [-{max_step}, {max_step}] length {length}: {other:?}"
                    )),
                }
            }
        }
        // Ordered partitions against the closed-form bound.
        cases += 1;
        let mut rng = trial_rng(seed, 77);
        for _ in 0..200 {
            let total = rng.random_range(0..=40u64);
            let parts = rng.random_range(1..=12u64);
            let max_part = rng.random_range(1..=8u64);
            let exact = combinatorics::count_ordered_partitions(total, parts, max_part);
            let bound = combinatorics::partition_lower_bound(total, parts, max_part);
            if exact < bound {
                failures.push(format!(
                    "partition bound fails at N={total} g={parts} B={max_part}"
                ));
            }
        }
        // Entropy coefficients.
        cases += 1;
        let coeffs = [(3usize, 2.755f64), (4, 3.245), (5, 3.610)];
        for (kp1, expect) in coeffs {
            let got = kp1 as f64 * entropy(1.0 / kp1 as f64);
            if (got - expect).abs() > 1e-3 {
                failures.push(format!(
                    "coefficient ({kp1})H(1/{kp1}) = {got}, expected about {expect}"
                ));
            }
        }
        // Tuple extension lemma.
        for n in exhaustive_ns(budget / 2, 5) {
            cases += 1;
            for k in 1..=2usize {
                match combinatorics::check_tuple_extension(n, k, budget) {
                    Ok(true) => {}
                    other => failures.push(format!(
                        "tuple extension at n={n} k={k}: {other:?}"
                    )),
                }
            }
        }
    }

    SuiteReport {
        suite: Suite::Combinatorics.name(),
        cases,
        failures,
    }
}
