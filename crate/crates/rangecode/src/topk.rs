//! Space-optimal encoding of range top-k queries.
//!
//! Scanning the array left to right, each prefix `1..=j` carries a counter
//! structure: position `l` counts how many later elements of the prefix
//! dominate it (are larger), capped at `k`. Positions with counter below `k`
//! are *active*: they are the only candidates any top-k query ending at `j`
//! can ever return, and their relative value order is recoverable from the
//! counters alone ([`active_order`]). Appending element `j + 1` increments
//! the counters of the `delta_j` smallest active elements; the whole
//! structure sequence, and therefore every top-k answer, is reproducible
//! from the numbers `delta_1 .. delta_(n-1)` alone.
//!
//! The encoding stores those numbers in unary: `1 0^d1 1 0^d2 1 ...` with a
//! leading group for the first element. It has exactly `n` one bits and at
//! most `kn` zero bits. Queries replay the prefix structure and read the
//! answer off the active order; this module is the reference encoding, not
//! the fast query structure (see [`crate::topkds`] for that).

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::array::{InputArray, QueryRange, TopKResult};
use crate::bitvec::{read_u64, BitVecBuilder, BitVector};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RCTK";
const VERSION: u8 = 1;

/// Capped dominance counters for a prefix `1..=j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkStructure {
    j: usize,
    k: usize,
    counters: Vec<usize>,
}

impl SkStructure {
    pub fn j(&self) -> usize {
        self.j
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Counter per position, each in `[0, k]`.
    pub fn counters(&self) -> &[usize] {
        &self.counters
    }

    /// A position is active while its counter is below `k`.
    pub fn is_active(&self, pos: usize) -> bool {
        self.counters[pos - 1] < self.k
    }
}

/// Direct quadratic construction from the dominance definition.
pub fn build_sk(a: &InputArray, k: usize, j: usize) -> Result<SkStructure> {
    check_k(k)?;
    if j == 0 || j > a.len() {
        return Err(Error::Range { i: j, j, n: a.len() });
    }
    let counters = (1..=j)
        .map(|l| {
            let dominators = (l + 1..=j).filter(|&m| a.value(m) > a.value(l)).count();
            dominators.min(k)
        })
        .collect();
    Ok(SkStructure { j, k, counters })
}

/// Recovers the active positions sorted by decreasing value, scanning the
/// counters right to left: an active counter says how many active positions
/// to its right hold larger values.
pub fn active_order(s: &SkStructure) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = Vec::new();
    for l in (1..=s.j).rev() {
        let c = s.counters[l - 1];
        if c >= s.k {
            continue;
        }
        if c > order.len() {
            return Err(Error::Corruption(format!(
                "counter {c} at position {l} exceeds the {} active entries after it",
                order.len()
            )));
        }
        order.insert(c, l);
    }
    Ok(order)
}

/// Incremental replay state: counters plus the active positions by
/// decreasing value, so a step touches only the list's tail.
#[derive(Debug, Clone)]
struct ActiveState {
    k: usize,
    counters: Vec<usize>,
    active: Vec<usize>,
}

impl ActiveState {
    fn new(k: usize) -> Self {
        ActiveState {
            k,
            counters: Vec::new(),
            active: Vec::new(),
        }
    }

    /// Appends the next position, given that exactly `delta` active
    /// entries (the smallest ones) sit below its value. The new position
    /// lands above the survivors of those `delta` and below the rest.
    fn apply_step(&mut self, delta: usize) -> Result<()> {
        if delta > self.active.len() {
            return Err(Error::Format(format!(
                "group of {delta} increments but only {} active entries",
                self.active.len()
            )));
        }
        let new_pos = self.counters.len() + 1;
        self.counters.push(0);
        let tail = self.active.split_off(self.active.len() - delta);
        self.active.push(new_pos);
        for &p in &tail {
            self.counters[p - 1] += 1;
            if self.counters[p - 1] < self.k {
                self.active.push(p);
            }
        }
        Ok(())
    }

    fn into_structure(self) -> SkStructure {
        SkStructure {
            j: self.counters.len(),
            k: self.k,
            counters: self.counters,
        }
    }

    /// How many active entries hold values below the next element's.
    fn delta_for(&self, a: &InputArray, next_pos: usize) -> usize {
        let v = a.value(next_pos);
        // Active is sorted by decreasing value: larger-valued prefix first.
        self.active.len() - self.active.partition_point(|&q| a.value(q) > v)
    }
}

/// The unary-coded delta sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKEncoding {
    n: usize,
    k: usize,
    bits: BitVector,
}

impl TopKEncoding {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    /// The delta sequence, parsed and validated from the bits.
    pub fn deltas(&self) -> Result<Vec<usize>> {
        if self.n == 0 {
            if !self.bits.is_empty() {
                return Err(Error::Format("bits present for an empty array".into()));
            }
            return Ok(Vec::new());
        }
        let mut iter = self.bits.iter();
        if iter.next() != Some(true) {
            return Err(Error::Format("missing leading group bit".into()));
        }
        let mut deltas = Vec::with_capacity(self.n - 1);
        let mut zeros = 0usize;
        for bit in iter {
            if bit {
                deltas.push(zeros);
                zeros = 0;
            } else {
                zeros += 1;
            }
        }
        if zeros != 0 {
            return Err(Error::Format("unterminated final group".into()));
        }
        if deltas.len() != self.n - 1 {
            return Err(Error::Format(format!(
                "expected {} delta groups, found {}",
                self.n - 1,
                deltas.len()
            )));
        }
        Ok(deltas)
    }

    /// Header, then the delta bits as a bit vector payload.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.k as u64).to_le_bytes())?;
        self.bits.write_to(w)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad top-k magic {magic:?}")));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != VERSION {
            return Err(Error::Format(format!(
                "unsupported top-k version {}",
                version[0]
            )));
        }
        let n = read_u64(r)? as usize;
        let k = read_u64(r)? as usize;
        check_k(k)?;
        let bits = BitVector::read_from(r)?;
        let enc = TopKEncoding { n, k, bits };
        if enc.bits.count_ones() != enc.n {
            return Err(Error::Format(format!(
                "encoding must carry one group per element: n={} ones={}",
                enc.n,
                enc.bits.count_ones()
            )));
        }
        enc.deltas()?;
        Ok(enc)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    Ok(())
}

/// For every element `j` (1-based), the active positions its arrival
/// increments. Drives block decomposition and increment classification.
pub(crate) fn increment_lists(a: &InputArray, k: usize) -> Vec<Vec<usize>> {
    let mut state = ActiveState::new(k);
    let mut lists = Vec::with_capacity(a.len());
    for p in 1..=a.len() {
        let delta = state.delta_for(a, p);
        lists.push(state.active[state.active.len() - delta..].to_vec());
        state.apply_step(delta).expect("delta bounded by active count");
    }
    lists
}

/// Encodes the array by simulating the counter updates prefix by prefix.
pub fn encode_topk(a: &InputArray, k: usize) -> Result<TopKEncoding> {
    check_k(k)?;
    let n = a.len();
    let mut bits = BitVecBuilder::new();
    let mut state = ActiveState::new(k);
    if n >= 1 {
        bits.push(true);
        state.apply_step(0).expect("first element");
    }
    for p in 2..=n {
        let delta = state.delta_for(a, p);
        bits.push_run(false, delta);
        bits.push(true);
        state.apply_step(delta).expect("delta bounded by active count");
    }
    let bits = bits.finish();
    debug_assert_eq!(bits.count_ones(), n);
    debug_assert!(bits.count_zeros() <= k * n);
    Ok(TopKEncoding { n, k, bits })
}

fn replay_state(e: &TopKEncoding, j: usize) -> Result<ActiveState> {
    if j == 0 || j > e.n {
        return Err(Error::Range { i: j, j, n: e.n });
    }
    let deltas = e.deltas()?;
    let mut state = ActiveState::new(e.k);
    state.apply_step(0)?;
    for &d in &deltas[..j - 1] {
        state.apply_step(d)?;
    }
    Ok(state)
}

/// Rebuilds the counter structure of prefix `1..=j` from the encoding.
pub fn replay(e: &TopKEncoding, j: usize) -> Result<SkStructure> {
    Ok(replay_state(e, j)?.into_structure())
}

/// Top-k query answered from the encoding alone: replay to the prefix
/// ending at `j`, then read the active order, keeping positions inside the
/// range.
pub fn query_topk(e: &TopKEncoding, r: QueryRange) -> Result<TopKResult> {
    r.check(e.n)?;
    let state = replay_state(e, r.j)?;
    let m = e.k.min(r.len());
    let answer: Vec<usize> = state
        .active
        .iter()
        .copied()
        .filter(|&p| p >= r.i)
        .take(m)
        .collect();
    if answer.len() != m {
        return Err(Error::Corruption(format!(
            "only {} active candidates in [{}, {}], expected {m}",
            answer.len(),
            r.i,
            r.j
        )));
    }
    Ok(TopKResult::new(answer))
}

/// Range selection via the top-k answer.
pub fn query_select(e: &TopKEncoding, r: QueryRange, k1: usize) -> Result<usize> {
    r.check(e.n)?;
    if k1 == 0 || k1 > e.k.min(r.len()) {
        return Err(Error::Argument(format!(
            "selection rank {k1} outside [1, min(k={}, len={})]",
            e.k,
            r.len()
        )));
    }
    Ok(query_topk(e, r)?[k1 - 1])
}

/// Rebuilds the counter structure of prefix `1..=j` using only top-k query
/// answers: position `l` returned as the `k1`-th answer of `[l, j]` has
/// counter `k1 - 1`; positions never returned are inactive.
pub fn reconstruct_sk_from_queries<F>(oracle: F, k: usize, j: usize) -> Result<SkStructure>
where
    F: Fn(QueryRange) -> TopKResult,
{
    check_k(k)?;
    let mut counters = vec![k; j];
    for l in 1..=j {
        let ans = oracle(QueryRange::new(l, j)?);
        if let Some(rank) = ans.iter().position(|&p| p == l) {
            counters[l - 1] = rank;
        }
    }
    Ok(SkStructure { j, k, counters })
}

/// Sorted top-k answers recovered from an *unsorted* top-k oracle over the
/// array padded with `k` maximal sentinels.
///
/// Walking the query right end from `j` to `n + k`, every change of the
/// answer set evicts the current minimum; the evicted members of the
/// original answer set leave in increasing value order, so collecting
/// evictions and reversing yields the sorted answer.
pub fn sorted_from_unsorted<F>(
    oracle: F,
    n: usize,
    k: usize,
    r: QueryRange,
) -> Result<TopKResult>
where
    F: Fn(QueryRange) -> Vec<usize>,
{
    check_k(k)?;
    r.check(n)?;
    let kappa0: BTreeSet<usize> = oracle(r).into_iter().collect();
    let mut prev = kappa0.clone();
    let mut removals: Vec<usize> = Vec::new();
    for j2 in r.j + 1..=n + k {
        let cur: BTreeSet<usize> =
            oracle(QueryRange::new(r.i, j2)?).into_iter().collect();
        if cur == prev {
            continue;
        }
        let removed: Vec<usize> = prev.difference(&cur).copied().collect();
        match removed[..] {
            [] => {}
            [x] => removals.push(x),
            _ => {
                return Err(Error::Corruption(format!(
                    "{} indices left the answer set at once at right end {j2}",
                    removed.len()
                )))
            }
        }
        prev = cur;
    }
    if prev.iter().any(|&p| p <= n) {
        return Err(Error::Corruption(
            "final answer set still contains non-sentinel positions".into(),
        ));
    }
    let answer: Vec<usize> = removals
        .into_iter()
        .rev()
        .filter(|x| kappa0.contains(x))
        .collect();
    let m = k.min(r.len());
    if answer.len() != m {
        return Err(Error::Corruption(format!(
            "recovered {} positions, expected {m}",
            answer.len()
        )));
    }
    Ok(TopKResult::new(answer))
}
