//! Combined encoding of range minimum and range maximum queries.
//!
//! A left-to-right sweep maintains a min-stack and a max-stack. Each arriving
//! element pops `delta >= 1` entries from exactly one of the two stacks
//! (values are distinct), so the pops of both sweeps can share one unary
//! stream: every interior step appends `0^(delta-1) 1` to `T` and a single
//! direction bit to `U` (0 = min-stack popped, 1 = max-stack popped). A final
//! flush appends one unary group per stack to `T`, min-stack first. This
//! keeps one `T` bit per pop, so `|T| = 2n` exactly, `|U| = n - 1`, and the
//! pair always fits in `3n - 1 <= 3n` bits.
//!
//! The per-stack pop traces (`1` per push, `0` per pop, emitted in forward
//! scan order) are recoverable bit-for-bit via [`decode_minmax`], and every
//! range min/max answer is recoverable from them: replaying the pop counts
//! rebuilds each sweep's Cartesian tree, which [`MinMaxIndex`] turns into
//! constant-time argmin/argmax lookups. The index is a plain-word
//! acceleration structure; only the encoding itself is counted against the
//! `3n` budget (see [`MinMaxEncoding::total_bits`]).

use std::io::{Read, Write};

use crate::array::{InputArray, QueryRange};
use crate::bitvec::{read_u64, BitVecBuilder, BitVector};
use crate::error::{Error, Result};
use crate::rmq::ArgMinTable;

const MAGIC: &[u8; 4] = b"RCMM";
const VERSION: u8 = 1;

/// Which extreme a single-stack sweep encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Min,
    Max,
}

/// Pop traces of the two single-stack sweeps: `1` per push, `0` per pop,
/// in forward scan order. Each trace has exactly `2n` bits and `n` ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackTrace {
    pub t_min: BitVector,
    pub t_max: BitVector,
}

/// The single-stack sweep for one mode; the reference that
/// [`decode_minmax`] round-trips against.
pub fn encode_single(a: &InputArray, mode: SweepMode) -> BitVector {
    let mut bits = BitVecBuilder::new();
    let mut stack: Vec<u32> = Vec::new();
    for &v in a.values() {
        while let Some(&top) = stack.last() {
            let pop = match mode {
                SweepMode::Min => top >= v,
                SweepMode::Max => top <= v,
            };
            if !pop {
                break;
            }
            stack.pop();
            bits.push(false);
        }
        stack.push(v);
        bits.push(true);
    }
    bits.push_run(false, stack.len());
    bits.finish()
}

/// The combined `(T, U)` encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinMaxEncoding {
    n: usize,
    t: BitVector,
    u: BitVector,
}

impl MinMaxEncoding {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> &BitVector {
        &self.t
    }

    pub fn u(&self) -> &BitVector {
        &self.u
    }

    /// `|T| + |U|`; at most `3n` for every input.
    pub fn total_bits(&self) -> usize {
        self.t.len() + self.u.len()
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            if !self.t.is_empty() || !self.u.is_empty() {
                return Err(Error::Format(
                    "empty-array encoding must have empty T and U".into(),
                ));
            }
            return Ok(());
        }
        if self.t.len() != 2 * self.n
            || self.u.len() != self.n - 1
            || self.t.count_ones() != self.n + 1
        {
            return Err(Error::Format(format!(
                "inconsistent sizes: n={}, |T|={}, ones(T)={}, |U|={}",
                self.n,
                self.t.len(),
                self.t.count_ones(),
                self.u.len()
            )));
        }
        Ok(())
    }

    /// Header, then `T` and `U` as bit vector payloads.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        self.t.write_to(w)?;
        self.u.write_to(w)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad min-max magic {magic:?}")));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != VERSION {
            return Err(Error::Format(format!(
                "unsupported min-max version {}",
                version[0]
            )));
        }
        let n = read_u64(r)? as usize;
        let t = BitVector::read_from(r)?;
        let u = BitVector::read_from(r)?;
        let enc = MinMaxEncoding { n, t, u };
        enc.validate()?;
        Ok(enc)
    }
}

/// Dual-stack sweep producing the combined encoding.
pub fn encode_minmax(a: &InputArray) -> MinMaxEncoding {
    let n = a.len();
    let mut t = BitVecBuilder::new();
    let mut u = BitVecBuilder::new();
    let mut min_stack: Vec<u32> = Vec::new();
    let mut max_stack: Vec<u32> = Vec::new();
    let mut total_pops = 0usize;

    for (step, &v) in a.values().iter().enumerate() {
        let min_pops = pop_while(&mut min_stack, |top| top >= v);
        let max_pops = pop_while(&mut max_stack, |top| top <= v);
        if step == 0 {
            debug_assert!(min_pops == 0 && max_pops == 0);
        } else {
            // Distinct values guarantee exactly one stack pops per step.
            assert!(
                (min_pops >= 1) ^ (max_pops >= 1),
                "exactly one stack must pop at step {}",
                step + 1
            );
            let delta = min_pops.max(max_pops);
            t.push_run(false, delta - 1);
            t.push(true);
            u.push(max_pops >= 1);
        }
        total_pops += min_pops + max_pops;
        min_stack.push(v);
        max_stack.push(v);
    }

    if n > 0 {
        // Flush: both stacks are nonempty; min-stack group first.
        t.push_run(false, min_stack.len() - 1);
        t.push(true);
        t.push_run(false, max_stack.len() - 1);
        t.push(true);
        total_pops += min_stack.len() + max_stack.len();
    }

    let enc = MinMaxEncoding {
        n,
        t: t.finish(),
        u: u.finish(),
    };
    // Accounting identities: every element is pushed and popped once per
    // stack, and T holds one bit per pop.
    assert_eq!(total_pops, 2 * n);
    enc.validate().expect("encoder produced inconsistent sizes");
    enc
}

fn pop_while(stack: &mut Vec<u32>, pred: impl Fn(u32) -> bool) -> usize {
    let mut pops = 0;
    while let Some(&top) = stack.last() {
        if !pred(top) {
            break;
        }
        stack.pop();
        pops += 1;
    }
    pops
}

/// Rebuilds both single-stack traces from the combined encoding.
pub fn decode_minmax(e: &MinMaxEncoding) -> Result<StackTrace> {
    e.validate()?;
    let n = e.n;
    let mut t_min = BitVecBuilder::new();
    let mut t_max = BitVecBuilder::new();
    if n == 0 {
        return Ok(StackTrace {
            t_min: t_min.finish(),
            t_max: t_max.finish(),
        });
    }

    let mut groups = UnaryGroups::new(&e.t);
    t_min.push(true);
    t_max.push(true);
    for step in 0..n - 1 {
        let delta = groups.next_group()?;
        if e.u.access(step + 1)? {
            t_max.push_run(false, delta);
            t_max.push(true);
            t_min.push(true);
        } else {
            t_min.push_run(false, delta);
            t_min.push(true);
            t_max.push(true);
        }
    }
    let r_min = groups.next_group()?;
    let r_max = groups.next_group()?;
    groups.expect_end()?;
    t_min.push_run(false, r_min);
    t_max.push_run(false, r_max);

    let trace = StackTrace {
        t_min: t_min.finish(),
        t_max: t_max.finish(),
    };
    if trace.t_min.len() != 2 * n || trace.t_max.len() != 2 * n {
        return Err(Error::Format(format!(
            "decoded traces have lengths {} and {}, expected {}",
            trace.t_min.len(),
            trace.t_max.len(),
            2 * n
        )));
    }
    Ok(trace)
}

/// Sequential reader of `0^(g)1` groups; yields `g + 1`.
struct UnaryGroups<'a> {
    bits: &'a BitVector,
    pos: usize,
}

impl<'a> UnaryGroups<'a> {
    fn new(bits: &'a BitVector) -> Self {
        UnaryGroups { bits, pos: 0 }
    }

    fn next_group(&mut self) -> Result<usize> {
        let mut zeros = 0usize;
        while self.pos < self.bits.len() {
            self.pos += 1;
            if self.bits.access(self.pos).expect("in range") {
                return Ok(zeros + 1);
            }
            zeros += 1;
        }
        Err(Error::Format("unterminated unary group".into()))
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos != self.bits.len() {
            return Err(Error::Format(format!(
                "{} trailing bits after the final group",
                self.bits.len() - self.pos
            )));
        }
        Ok(())
    }
}

/// Pop counts of a single-stack trace: one count per interior step, plus
/// the flush depth.
fn pop_counts(trace: &BitVector, n: usize) -> Result<(Vec<usize>, usize)> {
    if trace.len() != 2 * n || trace.count_ones() != n {
        return Err(Error::Format(format!(
            "trace must have 2n bits and n ones (n={n}, got len {} ones {})",
            trace.len(),
            trace.count_ones()
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), 0));
    }
    if !trace.access(1)? {
        return Err(Error::Format("trace must start with a push bit".into()));
    }
    let mut deltas = Vec::with_capacity(n - 1);
    let mut pos = 1usize;
    for _ in 0..n - 1 {
        let mut zeros = 0usize;
        while pos < trace.len() && !trace.access(pos + 1)? {
            zeros += 1;
            pos += 1;
        }
        if pos == trace.len() {
            return Err(Error::Format("trace group missing its push bit".into()));
        }
        pos += 1; // the 1 bit
        deltas.push(zeros);
    }
    let flush = trace.len() - pos;
    // Remaining bits are the flush pops and must all be zero.
    for p in pos + 1..=trace.len() {
        if trace.access(p)? {
            return Err(Error::Format("push bit inside the flush run".into()));
        }
    }
    if deltas.iter().sum::<usize>() + flush != n {
        return Err(Error::Format("pop conservation violated".into()));
    }
    Ok((deltas, flush))
}

/// Query index built from a decoded pair of traces.
///
/// Replaying a trace's pop counts rebuilds the sweep's Cartesian tree
/// without knowing the values; preorder numbers of that tree are then an
/// argmin-equivalent (resp. argmax-equivalent) key array, served by sparse
/// tables.
#[derive(Debug, Clone)]
pub struct MinMaxIndex {
    n: usize,
    min_table: ArgMinTable,
    max_table: ArgMinTable,
}

pub fn build_index(e: &MinMaxEncoding) -> Result<MinMaxIndex> {
    let trace = decode_minmax(e)?;
    let min_keys = preorder_keys(&trace.t_min, e.n)?;
    let max_keys = preorder_keys(&trace.t_max, e.n)?;
    Ok(MinMaxIndex {
        n: e.n,
        min_table: ArgMinTable::new(min_keys),
        max_table: ArgMinTable::new(max_keys),
    })
}

/// Preorder numbers of the Cartesian tree encoded by a pop trace. The key
/// array has the same argmin as the original array on every range (for the
/// min sweep; the max sweep yields an argmax-equivalent array).
fn preorder_keys(trace: &BitVector, n: usize) -> Result<Vec<u64>> {
    let (deltas, flush) = pop_counts(trace, n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    const NONE: usize = usize::MAX;
    let mut left = vec![NONE; n + 1];
    let mut right = vec![NONE; n + 1];
    let mut stack: Vec<usize> = vec![1];
    for i in 2..=n {
        let d = deltas[i - 2];
        if d > stack.len() {
            return Err(Error::Format(format!(
                "pop count {d} exceeds stack depth at element {i}"
            )));
        }
        let mut last = NONE;
        for _ in 0..d {
            last = stack.pop().expect("depth checked");
        }
        left[i] = last;
        if let Some(&top) = stack.last() {
            right[top] = i;
        }
        stack.push(i);
    }
    debug_assert_eq!(stack.len(), flush);

    let mut keys = vec![0u64; n];
    let mut counter = 0u64;
    let mut dfs = vec![stack[0]];
    while let Some(node) = dfs.pop() {
        keys[node - 1] = counter;
        counter += 1;
        if right[node] != NONE {
            dfs.push(right[node]);
        }
        if left[node] != NONE {
            dfs.push(left[node]);
        }
    }
    if counter != n as u64 {
        return Err(Error::Format(
            "trace does not describe a connected tree".into(),
        ));
    }
    Ok(keys)
}

impl MinMaxIndex {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `(argmax, argmin)` of the originating array on `[i, j]`.
    pub fn r_min_max(&self, r: QueryRange) -> Result<(usize, usize)> {
        r.check(self.n)?;
        let argmax = self.max_table.argmin(r.i - 1, r.j - 1) + 1;
        let argmin = self.min_table.argmin(r.i - 1, r.j - 1) + 1;
        Ok((argmax, argmin))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::naive_min_max;
    use crate::perm;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// 11-element worked example used throughout the crate's tests.
    fn trace11() -> InputArray {
        InputArray::normalize(&[11, 1, 7, 10, 9, 3, 4, 2, 8, 5, 6])
    }

    #[test]
    fn single_sweep_singleton() {
        let a = InputArray::normalize(&[42]);
        for mode in [SweepMode::Min, SweepMode::Max] {
            let t = encode_single(&a, mode);
            assert_eq!(t.to_bit_string(), "10");
        }
    }

    #[test]
    fn single_sweep_worked_example() {
        // Derived by running the sweep by hand on (11,1,7,10,9,3,4,2,8,5,6).
        let a = trace11();
        let t_min = encode_single(&a, SweepMode::Min);
        assert_eq!(t_min.to_bit_string(), "1011101001100110110000");
        assert_eq!(t_min.len(), 22);
        assert_eq!(t_min.count_ones(), 11);
        let t_max = encode_single(&a, SweepMode::Max);
        assert_eq!(t_max.to_bit_string(), "1101011101100110100000");
    }

    #[test]
    fn single_sweep_increasing_pops_only_at_flush() {
        let a = InputArray::normalize(&[1, 2, 3, 4, 5, 6]);
        let t = encode_single(&a, SweepMode::Min);
        assert_eq!(t.to_bit_string(), "111111000000");
    }

    #[test]
    fn combined_direction_bits() {
        let up = encode_minmax(&InputArray::normalize(&[1, 2]));
        assert_eq!(up.u().to_bit_string(), "1");
        let down = encode_minmax(&InputArray::normalize(&[2, 1]));
        assert_eq!(down.u().to_bit_string(), "0");
    }

    #[test]
    fn combined_worked_example() {
        let e = encode_minmax(&trace11());
        assert_eq!(e.t().to_bit_string(), "1111011010111000100001");
        assert_eq!(e.u().to_bit_string(), "0110010101");
        assert_eq!(e.total_bits(), 32);
        assert!(e.total_bits() <= 3 * 11);
    }

    #[test]
    fn empty_and_singleton() {
        let e = encode_minmax(&InputArray::normalize(&[]));
        assert_eq!(e.total_bits(), 0);
        let trace = decode_minmax(&e).unwrap();
        assert!(trace.t_min.is_empty());

        let e = encode_minmax(&InputArray::normalize(&[5]));
        assert_eq!(e.t().to_bit_string(), "11");
        assert!(e.u().is_empty());
        assert!(e.total_bits() <= 3);
        let trace = decode_minmax(&e).unwrap();
        assert_eq!(trace.t_min.to_bit_string(), "10");
        assert_eq!(trace.t_max.to_bit_string(), "10");
    }

    #[test]
    fn round_trip_exhaustive_small() {
        for n in 1..=7 {
            let count = perm::factorial(n).unwrap();
            for idx in 0..count {
                let a = InputArray::from_permutation(perm::nth_permutation(n, idx))
                    .unwrap();
                let e = encode_minmax(&a);
                assert!(e.total_bits() <= 3 * n);
                let trace = decode_minmax(&e).unwrap();
                assert_eq!(trace.t_min, encode_single(&a, SweepMode::Min));
                assert_eq!(trace.t_max, encode_single(&a, SweepMode::Max));
            }
        }
    }

    #[test]
    fn index_answers_match_oracle_exhaustively() {
        for n in 1..=8 {
            let count = perm::factorial(n).unwrap();
            // Sample every 7th permutation to keep this quick; the
            // acceptance suite runs the full sweep.
            for idx in (0..count).step_by(7) {
                let a = InputArray::from_permutation(perm::nth_permutation(n, idx))
                    .unwrap();
                let idx_struct = build_index(&encode_minmax(&a)).unwrap();
                for i in 1..=n {
                    for j in i..=n {
                        let r = QueryRange::new(i, j).unwrap();
                        assert_eq!(
                            idx_struct.r_min_max(r).unwrap(),
                            naive_min_max(&a, r).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn index_worked_example_queries() {
        let idx = build_index(&encode_minmax(&trace11())).unwrap();
        assert_eq!(idx.r_min_max(QueryRange::new(1, 11).unwrap()).unwrap(), (1, 2));
        assert_eq!(idx.r_min_max(QueryRange::new(6, 9).unwrap()).unwrap(), (9, 8));
        assert_eq!(idx.r_min_max(QueryRange::new(4, 4).unwrap()).unwrap(), (4, 4));
        assert!(idx.r_min_max(QueryRange::new(3, 12).unwrap()).is_err());
    }

    #[test]
    fn index_random_medium() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = InputArray::from_permutation(perm::random_permutation(512, &mut rng))
            .unwrap();
        let idx = build_index(&encode_minmax(&a)).unwrap();
        for _ in 0..2000 {
            let i = rand::Rng::random_range(&mut rng, 1..=512usize);
            let j = rand::Rng::random_range(&mut rng, i..=512usize);
            let r = QueryRange::new(i, j).unwrap();
            assert_eq!(idx.r_min_max(r).unwrap(), naive_min_max(&a, r).unwrap());
        }
    }

    #[test]
    fn malformed_encodings_are_rejected() {
        // U too short for the declared n.
        let e = encode_minmax(&trace11());
        let bad = MinMaxEncoding {
            n: 12,
            t: e.t().clone(),
            u: e.u().clone(),
        };
        assert!(matches!(decode_minmax(&bad), Err(Error::Format(_))));

        // Wrong bit budget for the declared n.
        let bad_trace = BitVector::from_bit_str("1000").unwrap();
        assert!(pop_counts(&bad_trace, 2).is_err());
        // Starts with a pop.
        let bad_trace = BitVector::from_bit_str("0110").unwrap();
        assert!(pop_counts(&bad_trace, 2).is_err());
        // Parses, but pops more than the stack holds.
        let bad_trace = BitVector::from_bit_str("1001").unwrap();
        assert!(pop_counts(&bad_trace, 2).is_ok());
        assert!(matches!(
            preorder_keys(&bad_trace, 2),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn serialization_round_trip() {
        let e = encode_minmax(&trace11());
        let mut buf = Vec::new();
        e.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"RCMM");
        let back = MinMaxEncoding::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, e);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_random(seed in any::<u64>(), n in 1usize..64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = InputArray::from_permutation(
                perm::random_permutation(n, &mut rng),
            ).unwrap();
            let e = encode_minmax(&a);
            prop_assert!(e.total_bits() <= 3 * n);
            let trace = decode_minmax(&e).unwrap();
            prop_assert_eq!(trace.t_min, encode_single(&a, SweepMode::Min));
            prop_assert_eq!(trace.t_max, encode_single(&a, SweepMode::Max));
        }
    }
}
