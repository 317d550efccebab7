//! Acceptance suite: every headline guarantee of the crate, each as one
//! test that prints a `criterion N (...): PASS` line on success (visible
//! with `cargo test --test acceptance -- --nocapture`).
//!
//! All tolerances are exact except the entropy coefficients (1e-3).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use rangecode::combinatorics::{
    check_tuple_extension, count_baxter, count_nonneg_walks, count_ordered_partitions,
    cycle_lemma_inequality, entropy, enumerate_valid_tuples, is_baxter,
    partition_lower_bound, recover_from_minmax, WalkSpec,
};
use rangecode::exec;
use rangecode::minmax::{build_index, decode_minmax, encode_minmax, encode_single, SweepMode};
use rangecode::perm::{factorial, nth_permutation, random_permutation};
use rangecode::topk::{
    encode_topk, query_select, query_topk, replay, sorted_from_unsorted,
};
use rangecode::topkds;
use rangecode::{naive_min_max, naive_top_k, InputArray, QueryRange};

fn pass(number: usize, label: &str) {
    println!("criterion {number} ({label}): PASS");
}

fn sample9() -> InputArray {
    InputArray::normalize(&[46, 31, 93, 16, 45, 77, 25, 57, 26])
}

fn perm_at(n: usize, idx: u64) -> InputArray {
    InputArray::from_permutation(nth_permutation(n, idx)).expect("valid permutation")
}

fn all_ranges(n: usize) -> impl Iterator<Item = QueryRange> {
    (1..=n).flat_map(move |i| (i..=n).map(move |j| QueryRange::new(i, j).expect("i <= j")))
}

/// Criterion 1: byte-exact golden encoding of the nine-element sample at
/// k = 2, and exact replay of all nine counter rows.
#[test]
fn criterion_1_sample_encoding_byte_exact() {
    let a = sample9();
    let e = encode_topk(&a, 2).expect("k = 2");
    assert_eq!(e.bits().to_bit_string(), "1100110010001100101");

    let rows: [&[usize]; 9] = [
        &[0],
        &[0, 0],
        &[1, 1, 0],
        &[1, 1, 0, 0],
        &[1, 2, 0, 1, 0],
        &[2, 2, 0, 2, 1, 0],
        &[2, 2, 0, 2, 1, 0, 0],
        &[2, 2, 0, 2, 2, 0, 1, 0],
        &[2, 2, 0, 2, 2, 0, 2, 0, 0],
    ];
    for j in 1..=9 {
        assert_eq!(replay(&e, j).expect("valid prefix").counters(), rows[j - 1]);
    }
    pass(1, "sample encoding and counter rows byte-exact");
}

/// Criterion 2: `|T| + |U| <= 3n` exactly and decode round-trips against
/// the single-stack sweeps, for 10^4 random permutations with
/// n in 1..=1024 and exhaustively for all permutations with n <= 8.
#[test]
fn criterion_2_minmax_size_and_round_trip() {
    let check = |a: &InputArray| -> bool {
        let e = encode_minmax(a);
        if e.total_bits() > 3 * a.len() {
            return false;
        }
        let Ok(trace) = decode_minmax(&e) else {
            return false;
        };
        trace.t_min == encode_single(a, SweepMode::Min)
            && trace.t_max == encode_single(a, SweepMode::Max)
    };

    for n in 1..=8usize {
        let count = factorial(n).expect("small n");
        let bad = exec::find_violation(count, |idx| check(&perm_at(n, idx)));
        assert_eq!(bad, None, "exhaustive failure at n={n}");
    }

    let bad = exec::find_violation(10_000, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE ^ trial);
        let n = rng.random_range(1..=1024usize);
        check(&InputArray::from_permutation(random_permutation(n, &mut rng)).expect("valid"))
    });
    assert_eq!(bad, None, "randomized failure");
    pass(2, "min-max fits 3n and round-trips, exhaustive n<=8 plus 10^4 random");
}

/// Criterion 3: all four query paths equal their oracles, exhaustively for
/// n <= 7 (k <= 2, block lengths 2..4 for the block structure) and on
/// 10^4 random ranges at n = 2^14 for k in {1, 4, 8}.
#[test]
fn criterion_3_query_correctness() {
    // Exhaustive sweeps.
    for n in 1..=7usize {
        let count = factorial(n).expect("small n");
        let bad = exec::find_violation(count, |idx| {
            let a = perm_at(n, idx);
            let Ok(index) = build_index(&encode_minmax(&a)) else {
                return false;
            };
            for r in all_ranges(n) {
                if index.r_min_max(r).ok() != naive_min_max(&a, r).ok() {
                    return false;
                }
            }
            for k in 1..=2usize {
                let e = encode_topk(&a, k).expect("k >= 1");
                for r in all_ranges(n) {
                    let expect = naive_top_k(&a, r, k).expect("valid range");
                    if query_topk(&e, r).ok().as_ref() != Some(&expect) {
                        return false;
                    }
                    for k1 in 1..=k.min(r.len()) {
                        if query_select(&e, r, k1).ok() != Some(expect[k1 - 1]) {
                            return false;
                        }
                    }
                }
                for b in 2..=4.min(n) {
                    let Ok(ds) = topkds::build(&a, k, Some(b)) else {
                        return false;
                    };
                    for r in all_ranges(n) {
                        if ds.query(r).ok() != naive_top_k(&a, r, k).ok() {
                            return false;
                        }
                    }
                }
            }
            true
        });
        assert_eq!(bad, None, "exhaustive failure at n={n}");
    }

    // Randomized sweep at n = 2^14.
    let n = 1 << 14;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE);
    let a = InputArray::from_permutation(random_permutation(n, &mut rng)).expect("valid");
    let ranges: Vec<QueryRange> = (0..10_000)
        .map(|_| {
            let i = rng.random_range(1..=n);
            let j = rng.random_range(i..=n);
            QueryRange::new(i, j).expect("i <= j")
        })
        .collect();

    let index = build_index(&encode_minmax(&a)).expect("index");
    let bad = exec::find_violation(ranges.len() as u64, |t| {
        let r = ranges[t as usize];
        index.r_min_max(r).ok() == naive_min_max(&a, r).ok()
    });
    assert_eq!(bad, None, "min-max randomized failure");

    for k in [1usize, 4, 8] {
        let e = encode_topk(&a, k).expect("k >= 1");
        let ds = topkds::build(&a, k, Some(64)).expect("build");
        let bad = exec::find_violation(ranges.len() as u64, |t| {
            let r = ranges[t as usize];
            let expect = naive_top_k(&a, r, k).expect("valid range");
            if query_topk(&e, r).ok().as_ref() != Some(&expect) {
                return false;
            }
            let k1 = (t as usize % k.min(r.len())) + 1;
            if query_select(&e, r, k1).ok() != Some(expect[k1 - 1]) {
                return false;
            }
            ds.query(r).ok().as_ref() == Some(&expect)
        });
        assert_eq!(bad, None, "randomized failure at k={k}");
    }
    pass(3, "queries equal oracles, exhaustive n<=7 plus 10^4 ranges at n=2^14");
}

/// Criterion 4: two arrays share an encoding exactly when they share every
/// top-k answer, for all permutation pairs with n <= 7, k in {1, 2, 3}.
#[test]
fn criterion_4_encoding_faithfulness() {
    for n in 1..=7usize {
        let count = factorial(n).expect("small n");
        for k in 1..=3usize {
            let pairs = exec::collect_set(count, |idx| {
                let a = perm_at(n, idx);
                let e = encode_topk(&a, k).expect("k >= 1");
                let mut answers = Vec::new();
                for r in all_ranges(n) {
                    answers.extend(naive_top_k(&a, r, k).expect("valid").iter());
                    answers.push(0);
                }
                (e.bits().to_bit_string(), answers)
            });
            let mut by_enc: BTreeMap<&String, &Vec<usize>> = BTreeMap::new();
            let mut by_ans: BTreeMap<&Vec<usize>, &String> = BTreeMap::new();
            for (enc, ans) in &pairs {
                assert_eq!(
                    *by_enc.entry(enc).or_insert(ans),
                    ans,
                    "same encoding, different answers at n={n} k={k}"
                );
                assert_eq!(
                    *by_ans.entry(ans).or_insert(enc),
                    enc,
                    "same answers, different encodings at n={n} k={k}"
                );
            }
        }
    }
    pass(4, "encoding equality is answer-table equality for n<=7, k<=3");
}

/// Criterion 5: the counting chain at small sizes — realizable tuples
/// dominate restricted nonnegative walks for every feasible slack, the
/// cycle-lemma inequality holds exactly on the full step-set grid inside
/// [-3, 3] up to length 10, and ordered-partition counts dominate the
/// closed-form bound on an N <= 40 sweep. Tuple extension holds as well.
#[test]
fn criterion_5_lower_bound_chain() {
    for n in 2..=7usize {
        for k in 1..=2usize {
            let tuples = enumerate_valid_tuples(n, k, factorial(7).unwrap()).expect("budget");
            for delta in 1..n {
                let spec = WalkSpec::new((k as i64 - delta as i64)..=k as i64, n - 1 - delta)
                    .expect("non-empty steps");
                let walks = count_nonneg_walks(&spec);
                assert!(
                    tuples.len() as u128 >= walks,
                    "n={n} k={k} delta={delta}: {} tuples < {walks} walks",
                    tuples.len()
                );
            }
        }
    }
    for n in 1..=5usize {
        for k in 1..=2usize {
            assert!(
                check_tuple_extension(n, k, factorial(6).unwrap()).expect("budget"),
                "extension fails at n={n} k={k}"
            );
        }
    }

    for mask in 1u32..128 {
        let steps: Vec<i64> = (-3..=3).filter(|s| mask >> (s + 3) & 1 == 1).collect();
        for length in 0..=10usize {
            let spec = WalkSpec::new(steps.clone(), length).expect("non-empty");
            assert!(
                cycle_lemma_inequality(&spec),
                "steps {steps:?} length {length}"
            );
        }
    }

    for total in 0..=40u64 {
        for parts in 1..=12u64 {
            for max_part in 1..=8u64 {
                let exact = count_ordered_partitions(total, parts, max_part);
                let bound = partition_lower_bound(total, parts, max_part);
                assert!(
                    exact >= bound,
                    "N={total} g={parts} B={max_part}: {exact} < {bound}"
                );
            }
        }
    }
    pass(5, "tuples >= walks, cycle inequality on the [-3,3] grid, partitions >= bound");
}

/// Criterion 6: Baxter counts for n = 1..=8 match the brute-force-derived
/// goldens (22 at n = 4, forced by the two non-Baxter permutations), and
/// recovery from min-max answers returns every Baxter permutation of
/// n <= 7 exactly.
#[test]
fn criterion_6_baxter_suite() {
    assert!(!is_baxter(&[2, 4, 1, 3]));
    assert!(!is_baxter(&[3, 1, 4, 2]));
    let goldens = [1u64, 2, 6, 22, 92, 422, 2074, 10754];
    for (n, &expect) in goldens.iter().enumerate() {
        let n = n + 1;
        assert_eq!(
            count_baxter(n, factorial(8).unwrap()).expect("within budget"),
            expect,
            "n={n}"
        );
    }

    for n in 1..=7usize {
        let count = factorial(n).expect("small n");
        let bad = exec::find_violation(count, |idx| {
            let p = nth_permutation(n, idx);
            if !is_baxter(&p) {
                return true;
            }
            let a = InputArray::from_permutation(p.clone()).expect("valid");
            let oracle = |r: QueryRange| naive_min_max(&a, r).expect("valid range");
            recover_from_minmax(oracle, n).is_ok_and(|got| got == p)
        });
        assert_eq!(bad, None, "recovery failure at n={n}");
    }
    pass(6, "Baxter counts match goldens; recovery exact for n<=7");
}

/// Criterion 7: the bound coefficients for k = 2, 3, 4 evaluate to 2.755,
/// 3.245, 3.610 within 1e-3 before rounding.
#[test]
fn criterion_7_entropy_coefficients() {
    let cases = [(3u32, 2.755f64), (4, 3.245), (5, 3.610)];
    for (kp1, expect) in cases {
        let got = f64::from(kp1) * entropy(1.0 / f64::from(kp1));
        assert!(
            (got - expect).abs() <= 1e-3,
            "({kp1})H(1/{kp1}) = {got}, expected {expect} +- 1e-3"
        );
    }
    pass(7, "entropy coefficients 2.755 / 3.245 / 3.610 within 1e-3");
}

/// Criterion 8: the sorted-from-unsorted reduction equals the oracle,
/// exhaustively for n <= 7 at k = 2 and on 10^3 random cases at n = 256,
/// k = 4.
#[test]
fn criterion_8_unsorted_reduction() {
    fn check(a: &InputArray, k: usize, ranges: impl Iterator<Item = QueryRange>) -> bool {
        let n = a.len();
        let mut raw: Vec<i64> = a.values().iter().map(|&v| i64::from(v)).collect();
        raw.extend((1..=k).map(|i| (n + i) as i64));
        let padded = InputArray::normalize(&raw);
        let oracle = |r: QueryRange| {
            let mut ans = naive_top_k(&padded, r, k).expect("valid range").into_vec();
            ans.sort_unstable(); // answers arrive ordered by position, not value
            ans
        };
        let mut ranges = ranges;
        ranges.all(|r| {
            sorted_from_unsorted(oracle, n, k, r).ok() == naive_top_k(a, r, k).ok()
        })
    }

    for n in 1..=7usize {
        let count = factorial(n).expect("small n");
        let bad = exec::find_violation(count, |idx| {
            check(&perm_at(n, idx), 2, all_ranges(n))
        });
        assert_eq!(bad, None, "exhaustive failure at n={n}");
    }

    let bad = exec::find_violation(1_000, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xBADC0FFEE ^ trial);
        let a = InputArray::from_permutation(random_permutation(256, &mut rng)).expect("valid");
        let i = rng.random_range(1..=256usize);
        let j = rng.random_range(i..=256usize);
        check(&a, 4, std::iter::once(QueryRange::new(i, j).expect("i <= j")))
    });
    assert_eq!(bad, None, "randomized failure");
    pass(8, "unsorted-to-sorted reduction exact, exhaustive n<=7 plus 10^3 random");
}

/// Criterion 9: the decomposition audit (block-count bound with the fixed
/// constant, change-weight bound, window confinement) passes on 200 random
/// instances with n <= 512, k <= 3, block lengths in {16, 32, 64}.
#[test]
fn criterion_9_decomposition_validator() {
    let bad = exec::find_violation(200, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xD15C ^ trial);
        let n = rng.random_range(64..=512usize);
        let k = rng.random_range(1..=3usize);
        let b = [16usize, 32, 64][rng.random_range(0..3usize)];
        let a = InputArray::from_permutation(random_permutation(n, &mut rng)).expect("valid");
        topkds::decompose(&a, k, b)
            .and_then(|d| d.validate(&a, k))
            .is_ok()
    });
    assert_eq!(bad, None, "decomposition audit failure");
    pass(9, "good-decomposition audit passes on 200 random instances");
}
