//! Query-efficient range top-k structure over the delta encoding.
//!
//! The flat encoding of [`crate::topk`] answers queries only by replaying a
//! whole prefix. This module decomposes the array into blocks
//! ([`decompose`]) so that replays stay local:
//!
//! - the increment groups are split into `E_INT` (increments landing in the
//!   element's own even block) and `E_WIN` (the rest, confined to the
//!   block's window for non-singleton blocks), each a unary bit vector with
//!   one group per element;
//! - a per-block `diff` record (at most `k` insertion ranks) patches the
//!   window even-block's state from "end of that even block" to "just
//!   before this block starts";
//! - a macro array keeps the `k` largest elements of every block with a
//!   range-maximum table and, per kept element, the positions of the first
//!   `k` larger elements to its left.
//!
//! A query splits into a block suffix (left part), whole blocks (middle),
//! and a block prefix (right part). Left and right parts are resolved by
//! replaying `E_INT` inside one even block; the middle comes from the macro
//! array; merging uses left pointers (left vs middle) and window replays of
//! `E_WIN` (everything vs right). The structure never stores the array:
//! queries read only the components above.
//!
//! Serialized layout (`RCDS`, all integers 8-byte little-endian): header
//! `magic, version byte, n, k, B`, block count `h`, then per block
//! `start, end, window+1` (0 meaning no window); the block-start, `E_INT`
//! and `E_WIN` bit vectors in the bit-vector format; per block a diff list
//! (count, then that many values); then the macro entry count and per entry
//! `position, value, pointer count, pointers...`.

pub mod decompose;

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::array::{InputArray, QueryRange, TopKResult};
use crate::bitvec::{read_u64, BitVecBuilder, BitVector};
use crate::combinatorics::entropy;
use crate::error::{Error, Result};
use crate::rmq::ArgMinTable;
use crate::topk::increment_lists;

pub use decompose::{decompose, Block, GoodDecomposition, AUDIT_CONSTANT};
use decompose::{even_block_end, even_block_of, even_block_start};

const MAGIC: &[u8; 4] = b"RCDS";
const VERSION: u8 = 1;

/// One kept element of the macro array.
#[derive(Debug, Clone, PartialEq, Eq)]
struct MacroEntry {
    pos: usize,
    value: u32,
    /// Positions of the first `k` larger elements to the left in the
    /// array, nearest first.
    left_larger: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TopKStructure {
    n: usize,
    k: usize,
    block_len: usize,
    blocks: Vec<Block>,
    /// Marks block start positions.
    block_index: BitVector,
    e_int: BitVector,
    e_win: BitVector,
    /// Per block: insertion ranks into the window's active order.
    diffs: Vec<Vec<u32>>,
    macro_entries: Vec<MacroEntry>,
    /// Entry range per block, plus a sentinel.
    macro_offsets: Vec<usize>,
    macro_rmq: ArgMinTable,
}

/// Default block length: `k^3 * ceil(lg n) * ceil(sqrt(lg n))`, clamped to
/// `[max(k^2, 2), n]`.
pub fn default_block_len(n: usize, k: usize) -> usize {
    if n == 0 {
        return 1;
    }
    let lg = (usize::BITS - (n - 1).leading_zeros()) as usize; // ceil(lg n), 0 for n=1
    let root = (lg as f64).sqrt().ceil() as usize;
    let formula = k.saturating_mul(k).saturating_mul(k).saturating_mul(lg).saturating_mul(root);
    formula.max(k * k).max(2).min(n).max(1)
}

/// Mutable prefix state of one even block: counters by offset and the
/// active positions in ascending value order.
#[derive(Debug, Clone)]
struct EvenReplay {
    start: usize,
    counters: Vec<usize>,
    order: Vec<usize>,
}

/// A reconstructed suffix of the counter structure of some prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkSuffix {
    /// 1-based position of the first counter.
    pub start: usize,
    pub counters: Vec<usize>,
}

/// State of a window even block just before a block starts: counters over
/// the whole even block plus the active positions in ascending value order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowFragment {
    pub start: usize,
    pub counters: Vec<usize>,
    pub actives: Vec<usize>,
}

/// Builds the structure; `block_len = None` uses [`default_block_len`].
pub fn build(a: &InputArray, k: usize, block_len: Option<usize>) -> Result<TopKStructure> {
    let n = a.len();
    let b = block_len.unwrap_or_else(|| default_block_len(n, k));
    let decomposition = decompose(a, k, b)?;
    let incs = increment_lists(a, k);

    // Block-start marks.
    let mut starts = BitVecBuilder::new();
    {
        let mut next_block = 0usize;
        for p in 1..=n {
            let is_start =
                next_block < decomposition.blocks.len() && decomposition.blocks[next_block].start == p;
            if is_start {
                next_block += 1;
            }
            starts.push(is_start);
        }
    }

    // Increment classification. An increment by element p is internal when
    // it lands in p's own even block, a window increment otherwise; for
    // non-singleton blocks the window constraint pins every window
    // increment inside the declared window.
    let block_of_pos = |p: usize| -> usize {
        decomposition
            .blocks
            .partition_point(|blk| blk.end < p)
    };
    let mut e_int = BitVecBuilder::new();
    let mut e_win = BitVecBuilder::new();
    for p in 1..=n {
        let t = even_block_of(p, b);
        let blk = &decomposition.blocks[block_of_pos(p)];
        let mut alpha = 0usize;
        let mut beta = 0usize;
        for &q in &incs[p - 1] {
            let w = even_block_of(q, b);
            if w == t {
                alpha += 1;
            } else {
                beta += 1;
                if !blk.is_singleton() {
                    assert_eq!(
                        Some(w),
                        blk.window,
                        "window increment outside the declared window"
                    );
                }
            }
        }
        e_int.push_run(false, alpha);
        e_int.push(true);
        e_win.push_run(false, beta);
        e_win.push(true);
    }

    // Window diffs: for each block with a window, how the elements between
    // the window's end and the block's start insert into the window's
    // active order. Only the k highest insertion ranks matter.
    let mut diffs: Vec<Vec<u32>> = Vec::with_capacity(decomposition.blocks.len());
    for blk in &decomposition.blocks {
        let Some(w) = blk.window else {
            diffs.push(Vec::new());
            continue;
        };
        let w_end = even_block_end(w, b, n);
        let mut active_values: Vec<u32> = (even_block_start(w, b)..=w_end)
            .filter(|&q| {
                let dominators = (q + 1..=w_end)
                    .filter(|&m| a.value(m) > a.value(q))
                    .count();
                dominators < k
            })
            .map(|q| a.value(q))
            .collect();
        active_values.sort_unstable();
        let mut ranks: Vec<u32> = Vec::new();
        for x in w_end + 1..blk.start {
            let y = active_values.partition_point(|&v| v < a.value(x));
            if y > 0 {
                ranks.push(y as u32);
            }
        }
        ranks.sort_unstable_by(|x, y| y.cmp(x));
        ranks.truncate(k);
        diffs.push(ranks);
    }

    // Macro array: top-k positions per block, by decreasing value.
    let mut macro_entries: Vec<MacroEntry> = Vec::new();
    let mut macro_offsets: Vec<usize> = Vec::with_capacity(decomposition.blocks.len() + 1);
    for blk in &decomposition.blocks {
        macro_offsets.push(macro_entries.len());
        let mut best: Vec<usize> = (blk.start..=blk.end).collect();
        best.sort_by_key(|&p| std::cmp::Reverse(a.value(p)));
        best.truncate(k);
        macro_entries.extend(best.into_iter().map(|pos| MacroEntry {
            pos,
            value: a.value(pos),
            left_larger: Vec::new(),
        }));
    }
    macro_offsets.push(macro_entries.len());

    // Left pointers, filled by inserting positions in decreasing value
    // order: everything already inserted is larger.
    let mut entry_of_pos = vec![usize::MAX; n + 1];
    for (idx, e) in macro_entries.iter().enumerate() {
        entry_of_pos[e.pos] = idx;
    }
    let mut by_value_desc: Vec<usize> = (1..=n).collect();
    by_value_desc.sort_by_key(|&p| std::cmp::Reverse(a.value(p)));
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for p in by_value_desc {
        if entry_of_pos[p] != usize::MAX {
            macro_entries[entry_of_pos[p]].left_larger =
                seen.range(..p).rev().take(k).copied().collect();
        }
        seen.insert(p);
    }

    let macro_rmq = ArgMinTable::new_max(macro_entries.iter().map(|e| u64::from(e.value)));

    Ok(TopKStructure {
        n,
        k,
        block_len: b,
        blocks: decomposition.blocks,
        block_index: starts.finish(),
        e_int: e_int.finish(),
        e_win: e_win.finish(),
        diffs,
        macro_entries,
        macro_offsets,
        macro_rmq,
    })
}

impl TopKStructure {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_index(&self) -> &BitVector {
        &self.block_index
    }

    pub fn e_int(&self) -> &BitVector {
        &self.e_int
    }

    pub fn e_win(&self) -> &BitVector {
        &self.e_win
    }

    /// 0-based ordinal of the block containing position `p`.
    fn block_of(&self, p: usize) -> usize {
        self.block_index.rank(true, p).expect("p <= n") - 1
    }

    fn unary_group(bits: &BitVector, p: usize) -> Result<usize> {
        let hi = bits.select(true, p)?;
        let lo = if p == 1 { 0 } else { bits.select(true, p - 1)? };
        Ok(hi - lo - 1)
    }

    /// Replays the even block containing `upto` from its start, reading
    /// internal increment counts from `E_INT`.
    fn replay_even_block(&self, upto: usize) -> Result<EvenReplay> {
        let t = even_block_of(upto, self.block_len);
        let start = even_block_start(t, self.block_len);
        let mut counters: Vec<usize> = Vec::with_capacity(upto - start + 1);
        let mut order: Vec<usize> = Vec::new();
        for p in start..=upto {
            let x = Self::unary_group(&self.e_int, p)?;
            if x > order.len() {
                return Err(Error::Corruption(format!(
                    "element {p} claims {x} internal increments, only {} active",
                    order.len()
                )));
            }
            counters.push(0);
            let mut next = Vec::with_capacity(order.len() + 1);
            for (idx, &q) in order.iter().enumerate() {
                if idx < x {
                    counters[q - start] += 1;
                    if counters[q - start] < self.k {
                        next.push(q);
                    }
                    if idx + 1 == x {
                        next.push(p);
                    }
                } else {
                    next.push(q);
                }
            }
            if x == 0 {
                next.insert(0, p);
            }
            order = next;
        }
        Ok(EvenReplay {
            start,
            counters,
            order,
        })
    }

    /// Rebuilds the last `len` counters of the prefix structure ending at
    /// `pos`. The suffix must stay inside `pos`'s even block.
    pub fn reconstruct_sk_suffix(&self, pos: usize, len: usize) -> Result<SkSuffix> {
        if pos == 0 || pos > self.n {
            return Err(Error::Range {
                i: pos,
                j: pos,
                n: self.n,
            });
        }
        let start = even_block_start(even_block_of(pos, self.block_len), self.block_len);
        if len == 0 || pos + 1 - len < start {
            return Err(Error::Argument(format!(
                "suffix of length {len} at {pos} leaves the even block starting at {start}"
            )));
        }
        let rep = self.replay_even_block(pos)?;
        let lo = pos + 1 - len - rep.start;
        Ok(SkSuffix {
            start: pos + 1 - len,
            counters: rep.counters[lo..=pos - rep.start].to_vec(),
        })
    }

    /// Active positions of `a[x1..=x2]` by decreasing value; the first
    /// `min(k, x2-x1+1)` entries are the range's top elements in order.
    /// The range must lie inside a single block.
    pub fn in_block_topk(&self, x1: usize, x2: usize) -> Result<Vec<usize>> {
        if x1 == 0 || x1 > x2 || x2 > self.n {
            return Err(Error::Range {
                i: x1,
                j: x2,
                n: self.n,
            });
        }
        if self.block_of(x1) != self.block_of(x2) {
            return Err(Error::Argument(format!(
                "range [{x1}, {x2}] spans more than one block"
            )));
        }
        let rep = self.replay_even_block(x2)?;
        Ok(rep
            .order
            .iter()
            .rev()
            .copied()
            .filter(|&p| p >= x1)
            .collect())
    }

    /// State of block `block_idx`'s window even block just before the
    /// block starts: the window's end-of-even-block state patched by the
    /// recorded diff.
    pub fn window_fragment(&self, block_idx: usize) -> Result<WindowFragment> {
        let blk = self
            .blocks
            .get(block_idx)
            .ok_or_else(|| Error::Argument(format!("no block {block_idx}")))?;
        let Some(w) = blk.window else {
            return Err(Error::Argument(format!(
                "block {block_idx} has no window"
            )));
        };
        let w_end = even_block_end(w, self.block_len, self.n);
        let rep = self.replay_even_block(w_end)?;
        let mut counters = rep.counters;
        let mut actives = Vec::with_capacity(rep.order.len());
        for (rank, &q) in rep.order.iter().enumerate() {
            let extra = self.diffs[block_idx]
                .iter()
                .filter(|&&y| y as usize > rank)
                .count();
            counters[q - rep.start] = (counters[q - rep.start] + extra).min(self.k);
            if counters[q - rep.start] < self.k {
                actives.push(q);
            }
        }
        Ok(WindowFragment {
            start: rep.start,
            counters,
            actives,
        })
    }

    /// Top elements of the macro array over blocks `b_lo..=b_hi`, as macro
    /// entry indexes by decreasing value, at most `k` of them.
    fn macro_topk(&self, b_lo: usize, b_hi: usize) -> Vec<usize> {
        let lo = self.macro_offsets[b_lo];
        let hi = self.macro_offsets[b_hi + 1];
        if lo == hi {
            return Vec::new();
        }
        let mut heap: std::collections::BinaryHeap<(u32, usize, usize, usize)> =
            std::collections::BinaryHeap::new();
        let seed = self.macro_rmq.argmin(lo, hi - 1);
        heap.push((self.macro_entries[seed].value, seed, lo, hi - 1));
        let mut out = Vec::with_capacity(self.k);
        while out.len() < self.k {
            let Some((_, idx, a, b)) = heap.pop() else {
                break;
            };
            out.push(idx);
            if idx > a {
                let m = self.macro_rmq.argmin(a, idx - 1);
                heap.push((self.macro_entries[m].value, m, a, idx - 1));
            }
            if idx < b {
                let m = self.macro_rmq.argmin(idx + 1, b);
                heap.push((self.macro_entries[m].value, m, idx + 1, b));
            }
        }
        out
    }

    /// Merges the left part's order with the middle part's macro answer.
    /// Each middle element's rank in the union is its middle rank plus the
    /// number of its left pointers landing inside the left part; left
    /// elements fill the remaining slots in order.
    fn merge_left_middle(
        &self,
        l1: &[usize],
        l2_entries: &[usize],
        left_lo: usize,
        left_hi: usize,
    ) -> Result<Vec<usize>> {
        let mut slots: Vec<Option<usize>> = vec![None; self.k];
        for (p0, &eidx) in l2_entries.iter().enumerate() {
            let entry = &self.macro_entries[eidx];
            let in_left = entry
                .left_larger
                .iter()
                .filter(|&&q| left_lo <= q && q <= left_hi)
                .count();
            let rank = p0 + 1 + in_left;
            if rank <= self.k {
                debug_assert!(slots[rank - 1].is_none());
                slots[rank - 1] = Some(entry.pos);
            }
        }
        let mut out = Vec::with_capacity(self.k);
        let mut l1_it = l1.iter();
        for slot in &slots {
            match slot {
                Some(pos) => out.push(*pos),
                None => match l1_it.next() {
                    Some(&q) => out.push(q),
                    None => break,
                },
            }
        }
        if slots[out.len()..].iter().any(|s| s.is_some()) {
            return Err(Error::Corruption(
                "left/middle merge left a hole below a placed element".into(),
            ));
        }
        Ok(out)
    }

    /// Merges the combined left+middle list with a right part `[right_lo, j]`
    /// (a proper prefix of block `right_block`). For every surviving
    /// left+middle position the number of larger right-part answers is
    /// inferred from the even-block replay (same even block), the window
    /// replay of `E_WIN` (window even block), or the window constraint
    /// itself (anywhere else: such a position dominates the whole right
    /// part). Positions found to have `k` dominators inside the query are
    /// dropped.
    fn merge_right(&self, l_prime: &[usize], right_block: usize, j: usize) -> Result<Vec<usize>> {
        let blk = &self.blocks[right_block];
        let right_lo = blk.start;
        let eb_start = even_block_start(blk.even_block, self.block_len);
        let rep = self.replay_even_block(j)?;

        let l3: Vec<usize> = rep
            .order
            .iter()
            .rev()
            .copied()
            .filter(|&p| p >= right_lo)
            .take(self.k)
            .collect();
        let l3_set: BTreeSet<usize> = l3.iter().copied().collect();

        // Window replay, only needed when some candidate sits in the window.
        let w_range = blk.window.map(|w| {
            (
                even_block_start(w, self.block_len),
                even_block_end(w, self.block_len, self.n),
            )
        });
        let marked_w: Vec<usize> = match w_range {
            Some((lo, hi)) => l_prime
                .iter()
                .copied()
                .filter(|&p| lo <= p && p <= hi)
                .collect(),
            None => Vec::new(),
        };
        let mut w_hits: std::collections::HashMap<usize, Option<Vec<usize>>> =
            std::collections::HashMap::new();
        if !marked_w.is_empty() {
            let frag = self.window_fragment(right_block)?;
            let mut counters = frag.counters;
            let mut actives = frag.actives;
            for &x in &marked_w {
                if !actives.contains(&x) {
                    return Err(Error::Corruption(format!(
                        "candidate {x} missing from its window fragment"
                    )));
                }
                w_hits.insert(x, Some(Vec::new()));
            }
            for j2 in right_lo..=j {
                let beta = Self::unary_group(&self.e_win, j2)?;
                if beta > actives.len() {
                    return Err(Error::Corruption(format!(
                        "element {j2} claims {beta} window increments, only {} active",
                        actives.len()
                    )));
                }
                let mut next = Vec::with_capacity(actives.len());
                for (idx, &q) in actives.iter().enumerate() {
                    if idx < beta {
                        counters[q - frag.start] += 1;
                        let dead = counters[q - frag.start] >= self.k;
                        if let Some(hits) = w_hits.get_mut(&q) {
                            if dead {
                                *hits = None;
                            } else if let Some(list) = hits {
                                list.push(j2);
                            }
                        }
                        if !dead {
                            next.push(q);
                        }
                    } else {
                        next.push(q);
                    }
                }
                actives = next;
            }
        }

        // Count, for each surviving candidate, the l3 answers above it.
        let mut merged = Vec::new();
        let mut l3_idx = 0usize;
        let mut last_count = 0usize;
        for &x in l_prime {
            let count: Option<usize> = if x >= eb_start {
                // Same even block as the right part.
                rep.order.iter().position(|&q| q == x).map(|idx| {
                    let raw = rep.order[idx + 1..]
                        .iter()
                        .filter(|&&q| q >= right_lo)
                        .count();
                    raw.min(l3.len())
                })
            } else if w_range.is_some_and(|(lo, hi)| lo <= x && x <= hi) {
                w_hits
                    .get(&x)
                    .expect("marked candidates were registered")
                    .as_ref()
                    .map(|hits| hits.iter().filter(|j2| l3_set.contains(j2)).count())
            } else {
                // Outside both even blocks: never incremented by the right
                // part, hence larger than all of it.
                Some(0)
            };
            if let Some(c) = count {
                debug_assert!(c >= last_count, "merge counts must be monotone");
                last_count = c;
                while l3_idx < c.min(l3.len()) {
                    merged.push(l3[l3_idx]);
                    l3_idx += 1;
                }
                merged.push(x);
            }
        }
        while l3_idx < l3.len() {
            merged.push(l3[l3_idx]);
            l3_idx += 1;
        }
        Ok(merged)
    }

    /// Range top-k query; equals the brute-force oracle on every range.
    pub fn query(&self, r: QueryRange) -> Result<TopKResult> {
        r.check(self.n)?;
        let m = self.k.min(r.len());
        let bi = self.block_of(r.i);
        let bj = self.block_of(r.j);
        if bi == bj {
            let order = self.in_block_topk(r.i, r.j)?;
            return self.finish_answer(order, m);
        }

        // A part is "partial" only when it does not cover its whole block;
        // whole blocks, singletons included, belong to the middle.
        let left_partial = r.i > self.blocks[bi].start;
        let right_partial = r.j < self.blocks[bj].end;
        let mid_lo = if left_partial { bi + 1 } else { bi };
        let mid_hi = if right_partial { bj - 1 } else { bj };

        let (left_lo, left_hi) = if left_partial {
            (r.i, self.blocks[bi].end)
        } else {
            (1, 0)
        };
        let l1: Vec<usize> = if left_partial {
            self.in_block_topk(left_lo, left_hi)?
                .into_iter()
                .take(self.k)
                .collect()
        } else {
            Vec::new()
        };
        let l2 = if mid_lo <= mid_hi {
            self.macro_topk(mid_lo, mid_hi)
        } else {
            Vec::new()
        };
        let l_prime = self.merge_left_middle(&l1, &l2, left_lo, left_hi)?;

        if !right_partial {
            return self.finish_answer(l_prime, m);
        }
        let merged = self.merge_right(&l_prime, bj, r.j)?;
        self.finish_answer(merged, m)
    }

    fn finish_answer(&self, candidates: Vec<usize>, m: usize) -> Result<TopKResult> {
        if candidates.len() < m {
            return Err(Error::Corruption(format!(
                "{} candidates for a top-{m} answer",
                candidates.len()
            )));
        }
        Ok(TopKResult::new(candidates.into_iter().take(m).collect()))
    }

    /// Measured component sizes next to the bound's leading terms.
    pub fn space_report(&self) -> SpaceReport {
        let n = self.n;
        let k = self.k;
        let b = self.block_len;
        let lg_n = usize::BITS as usize - n.leading_zeros() as usize;
        let lg_b1 = usize::BITS as usize - b.leading_zeros() as usize;
        let diff_entries: usize = self.diffs.iter().map(Vec::len).sum();
        let pointer_count: usize = self.macro_entries.iter().map(|e| e.left_larger.len()).sum();
        let ratio = (k * k) as f64 / b as f64;
        SpaceReport {
            n,
            k,
            block_len: b,
            num_blocks: self.blocks.len(),
            e_int_bits: self.e_int.len(),
            e_win_bits: self.e_win.len(),
            encoding_zeros: self.e_int.count_zeros() + self.e_win.count_zeros(),
            block_index_bits: self.block_index.len(),
            diff_bits: diff_entries * lg_b1,
            macro_bits: self.macro_entries.len() * 2 * lg_n + pointer_count * lg_n,
            leading_term_bits: (k + 2) as f64 * n as f64 * entropy(2.0 / (k + 2) as f64),
            block_index_term_bits: if ratio <= 1.0 {
                n as f64 * entropy(ratio)
            } else {
                f64::NAN
            },
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        for v in [self.n, self.k, self.block_len, self.blocks.len()] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        for blk in &self.blocks {
            w.write_all(&(blk.start as u64).to_le_bytes())?;
            w.write_all(&(blk.end as u64).to_le_bytes())?;
            let wtag = blk.window.map_or(0, |v| v as u64 + 1);
            w.write_all(&wtag.to_le_bytes())?;
        }
        self.block_index.write_to(w)?;
        self.e_int.write_to(w)?;
        self.e_win.write_to(w)?;
        for diff in &self.diffs {
            w.write_all(&(diff.len() as u64).to_le_bytes())?;
            for &y in diff {
                w.write_all(&u64::from(y).to_le_bytes())?;
            }
        }
        w.write_all(&(self.macro_entries.len() as u64).to_le_bytes())?;
        for e in &self.macro_entries {
            w.write_all(&(e.pos as u64).to_le_bytes())?;
            w.write_all(&u64::from(e.value).to_le_bytes())?;
            w.write_all(&(e.left_larger.len() as u64).to_le_bytes())?;
            for &q in &e.left_larger {
                w.write_all(&(q as u64).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad structure magic {magic:?}")));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != VERSION {
            return Err(Error::Format(format!(
                "unsupported structure version {}",
                version[0]
            )));
        }
        let n = read_u64(r)? as usize;
        let k = read_u64(r)? as usize;
        let block_len = read_u64(r)? as usize;
        if k == 0 || (n > 0 && (block_len == 0 || block_len > n)) {
            return Err(Error::Format("invalid structure parameters".into()));
        }
        let h = read_u64(r)? as usize;
        let mut blocks = Vec::with_capacity(h);
        for _ in 0..h {
            let start = read_u64(r)? as usize;
            let end = read_u64(r)? as usize;
            let wtag = read_u64(r)?;
            if start == 0 || end < start || end > n {
                return Err(Error::Format("invalid block bounds".into()));
            }
            blocks.push(Block {
                start,
                end,
                even_block: even_block_of(start, block_len),
                window: if wtag == 0 {
                    None
                } else {
                    Some((wtag - 1) as usize)
                },
            });
        }
        let decomposition = GoodDecomposition {
            n,
            k,
            block_len,
            blocks,
        };
        decomposition.check_shape()?;
        let block_index = BitVector::read_from(r)?;
        let e_int = BitVector::read_from(r)?;
        let e_win = BitVector::read_from(r)?;
        if block_index.len() != n
            || block_index.count_ones() != h
            || e_int.len() < n
            || e_int.count_ones() != n
            || e_win.count_ones() != n
        {
            return Err(Error::Format(
                "index bit vectors inconsistent with the header".into(),
            ));
        }
        let mut diffs = Vec::with_capacity(h);
        for _ in 0..h {
            let len = read_u64(r)? as usize;
            if len > k {
                return Err(Error::Format("diff longer than k".into()));
            }
            let mut diff = Vec::with_capacity(len);
            for _ in 0..len {
                let y = read_u64(r)?;
                if y == 0 || y > block_len as u64 {
                    return Err(Error::Format("diff rank out of range".into()));
                }
                diff.push(y as u32);
            }
            diffs.push(diff);
        }
        let entry_count = read_u64(r)? as usize;
        let mut macro_entries = Vec::with_capacity(entry_count);
        for _ in 0..entry_count {
            let pos = read_u64(r)? as usize;
            let value = read_u64(r)?;
            if pos == 0 || pos > n || value == 0 || value > n as u64 {
                return Err(Error::Format("macro entry out of range".into()));
            }
            let cnt = read_u64(r)? as usize;
            if cnt > k {
                return Err(Error::Format("too many left pointers".into()));
            }
            let mut left_larger = Vec::with_capacity(cnt);
            for _ in 0..cnt {
                let q = read_u64(r)? as usize;
                if q == 0 || q >= pos {
                    return Err(Error::Format("left pointer not left of its entry".into()));
                }
                left_larger.push(q);
            }
            macro_entries.push(MacroEntry {
                pos,
                value: value as u32,
                left_larger,
            });
        }
        // Rebuild per-block entry offsets; entries are grouped by block in
        // block order.
        let mut macro_offsets = Vec::with_capacity(h + 1);
        let mut idx = 0usize;
        for blk in &decomposition.blocks {
            macro_offsets.push(idx);
            while idx < macro_entries.len()
                && blk.start <= macro_entries[idx].pos
                && macro_entries[idx].pos <= blk.end
            {
                idx += 1;
            }
        }
        macro_offsets.push(idx);
        if idx != macro_entries.len() {
            return Err(Error::Format("macro entries not grouped by block".into()));
        }
        let macro_rmq =
            ArgMinTable::new_max(macro_entries.iter().map(|e| u64::from(e.value)));
        Ok(TopKStructure {
            n,
            k,
            block_len,
            blocks: decomposition.blocks,
            block_index,
            e_int,
            e_win,
            diffs,
            macro_entries,
            macro_offsets,
            macro_rmq,
        })
    }
}

/// Component bit counts with the bound's leading terms.
#[derive(Debug, Clone)]
pub struct SpaceReport {
    pub n: usize,
    pub k: usize,
    pub block_len: usize,
    pub num_blocks: usize,
    pub e_int_bits: usize,
    pub e_win_bits: usize,
    /// Zeros across both increment vectors; at most `k * n`.
    pub encoding_zeros: usize,
    pub block_index_bits: usize,
    pub diff_bits: usize,
    pub macro_bits: usize,
    /// `(k+2) n H(2/(k+2))`.
    pub leading_term_bits: f64,
    /// `n H(k^2/B)`, NaN when `k^2 > B`.
    pub block_index_term_bits: f64,
}

impl SpaceReport {
    pub fn total_measured_bits(&self) -> usize {
        self.e_int_bits + self.e_win_bits + self.block_index_bits + self.diff_bits + self.macro_bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::naive_top_k;
    use crate::perm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample9() -> InputArray {
        InputArray::normalize(&[46, 31, 93, 16, 45, 77, 25, 57, 26])
    }

    fn check_all_ranges(a: &InputArray, ds: &TopKStructure, k: usize) {
        let n = a.len();
        for i in 1..=n {
            for j in i..=n {
                let r = QueryRange::new(i, j).unwrap();
                assert_eq!(
                    ds.query(r).unwrap(),
                    naive_top_k(a, r, k).unwrap(),
                    "n={n} k={k} B={} range=[{i},{j}] a={:?}",
                    ds.block_len(),
                    a.values()
                );
            }
        }
    }

    #[test]
    fn sample_all_ranges() {
        let a = sample9();
        let ds = build(&a, 2, Some(4)).unwrap();
        check_all_ranges(&a, &ds, 2);
    }

    #[test]
    fn singleton_array() {
        let a = InputArray::normalize(&[7]);
        let ds = build(&a, 3, None).unwrap();
        assert_eq!(ds.blocks().len(), 1);
        let r = QueryRange::new(1, 1).unwrap();
        assert_eq!(ds.query(r).unwrap().indices(), &[1]);
    }

    #[test]
    fn empty_array() {
        let a = InputArray::normalize(&[]);
        let ds = build(&a, 2, None).unwrap();
        assert_eq!(ds.blocks().len(), 0);
        assert!(ds.query(QueryRange::new(1, 1).unwrap()).is_err());
    }

    #[test]
    fn exhaustive_small() {
        for n in 1..=6 {
            for idx in 0..perm::factorial(n).unwrap() {
                let a = InputArray::from_permutation(perm::nth_permutation(n, idx))
                    .unwrap();
                for k in 1..=2 {
                    for b in 2..=4.min(n) {
                        let ds = build(&a, k, Some(b)).unwrap();
                        check_all_ranges(&a, &ds, k);
                    }
                }
            }
        }
    }

    #[test]
    fn exhaustive_k3_tiny() {
        for n in 1..=5 {
            for idx in 0..perm::factorial(n).unwrap() {
                let a = InputArray::from_permutation(perm::nth_permutation(n, idx))
                    .unwrap();
                for b in 1..=n {
                    let ds = build(&a, 3, Some(b)).unwrap();
                    check_all_ranges(&a, &ds, 3);
                }
            }
        }
    }

    #[test]
    fn random_medium() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(50..=300usize);
            let k = rng.random_range(1..=4usize);
            let b = [8, 16, 24][rng.random_range(0..3usize)].min(n);
            let a = InputArray::from_permutation(perm::random_permutation(n, &mut rng))
                .unwrap();
            let ds = build(&a, k, Some(b)).unwrap();
            for _ in 0..200 {
                let i = rng.random_range(1..=n);
                let j = rng.random_range(i..=n);
                let r = QueryRange::new(i, j).unwrap();
                assert_eq!(
                    ds.query(r).unwrap(),
                    naive_top_k(&a, r, k).unwrap(),
                    "n={n} k={k} B={b} range=[{i},{j}]"
                );
            }
        }
    }

    #[test]
    fn suffix_reconstruction_matches_direct_build() {
        use crate::topk::build_sk;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = InputArray::from_permutation(perm::random_permutation(64, &mut rng))
            .unwrap();
        let ds = build(&a, 2, Some(8)).unwrap();
        for pos in 1..=64usize {
            let eb_start = even_block_start(even_block_of(pos, 8), 8);
            for len in 1..=(pos - eb_start + 1) {
                let suffix = ds.reconstruct_sk_suffix(pos, len).unwrap();
                let full = build_sk(&a, 2, pos).unwrap();
                assert_eq!(
                    suffix.counters,
                    full.counters()[pos - len..pos],
                    "pos={pos} len={len}"
                );
            }
        }
        assert!(ds.reconstruct_sk_suffix(10, 0).is_err());
        // Suffix may not reach across the even-block boundary.
        assert!(ds.reconstruct_sk_suffix(10, 4).is_err());
    }

    #[test]
    fn sample_suffix_single_even_block() {
        let a = sample9();
        let ds = build(&a, 2, Some(9)).unwrap();
        let suffix = ds.reconstruct_sk_suffix(9, 9).unwrap();
        assert_eq!(suffix.counters, vec![2, 2, 0, 2, 2, 0, 2, 0, 0]);
        let one = ds.reconstruct_sk_suffix(9, 1).unwrap();
        assert_eq!(one.counters, vec![0]);
    }

    #[test]
    fn in_block_order_matches_oracle_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = InputArray::from_permutation(perm::random_permutation(128, &mut rng))
            .unwrap();
        let k = 2;
        let ds = build(&a, k, Some(16)).unwrap();
        for blk in ds.blocks().to_vec() {
            for x1 in blk.start..=blk.end {
                for x2 in x1..=blk.end {
                    let order = ds.in_block_topk(x1, x2).unwrap();
                    let r = QueryRange::new(x1, x2).unwrap();
                    // Full sort of the subarray, filtered to the locally
                    // active candidates, is exactly the returned order.
                    let full = naive_top_k(&a, r, x2 - x1 + 1).unwrap();
                    let expect: Vec<usize> = full
                        .iter()
                        .copied()
                        .filter(|&p| order.contains(&p))
                        .collect();
                    assert_eq!(order, expect);
                    // And its prefix is the true top-k.
                    let m = k.min(x2 - x1 + 1);
                    assert_eq!(
                        &order[..m],
                        naive_top_k(&a, r, k).unwrap().indices()
                    );
                }
            }
        }
        assert!(ds.in_block_topk(1, 128).is_err());
    }

    /// Direct construction of a window fragment from the array.
    fn direct_fragment(
        a: &InputArray,
        k: usize,
        b: usize,
        w: usize,
        before: usize,
    ) -> (Vec<usize>, Vec<usize>) {
        let lo = even_block_start(w, b);
        let hi = even_block_end(w, b, a.len());
        let counters: Vec<usize> = (lo..=hi)
            .map(|q| {
                (q + 1..before)
                    .filter(|&m| a.value(m) > a.value(q))
                    .count()
                    .min(k)
            })
            .collect();
        let mut actives: Vec<usize> = (lo..=hi)
            .filter(|&q| counters[q - lo] < k)
            .collect();
        actives.sort_by_key(|&q| a.value(q));
        (counters, actives)
    }

    #[test]
    fn window_fragments_match_direct_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..30 {
            let n = rng.random_range(64..=400usize);
            let k = rng.random_range(1..=3usize);
            let b = [8, 16][rng.random_range(0..2usize)];
            let a = InputArray::from_permutation(perm::random_permutation(n, &mut rng))
                .unwrap();
            let ds = build(&a, k, Some(b)).unwrap();
            let mut checked = 0;
            for (idx, blk) in ds.blocks().to_vec().iter().enumerate() {
                let Some(w) = blk.window else { continue };
                let frag = ds.window_fragment(idx).unwrap();
                let (counters, actives) =
                    direct_fragment(&a, k, b, w, blk.start);
                assert_eq!(frag.counters, counters, "block {idx}");
                assert_eq!(frag.actives, actives, "block {idx}");
                checked += 1;
            }
            let _ = checked;
        }
    }

    #[test]
    fn window_fragment_requires_a_window() {
        let a = sample9();
        let ds = build(&a, 2, Some(9)).unwrap();
        // Single even block: no window anywhere.
        for idx in 0..ds.blocks().len() {
            assert!(ds.window_fragment(idx).is_err());
        }
    }

    #[test]
    fn increment_vector_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let n = rng.random_range(1..=200usize);
            let k = rng.random_range(1..=4usize);
            let b = rng.random_range(1..=n);
            let a = InputArray::from_permutation(perm::random_permutation(n, &mut rng))
                .unwrap();
            let ds = build(&a, k, Some(b)).unwrap();
            let e = crate::topk::encode_topk(&a, k).unwrap();
            assert_eq!(ds.e_int().count_ones(), n);
            assert_eq!(ds.e_win().count_ones(), n);
            assert_eq!(
                ds.e_int().count_zeros() + ds.e_win().count_zeros(),
                e.bits().count_zeros()
            );
            assert!(ds.e_int().count_zeros() + ds.e_win().count_zeros() <= k * n);
            // Per-element conservation of the split.
            let deltas = e.deltas().unwrap();
            for p in 1..=n {
                let alpha = TopKStructure::unary_group(ds.e_int(), p).unwrap();
                let beta = TopKStructure::unary_group(ds.e_win(), p).unwrap();
                let expect = if p == 1 { 0 } else { deltas[p - 2] };
                assert_eq!(alpha + beta, expect);
            }
        }
    }

    #[test]
    fn serialization_round_trip_preserves_answers() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let a = InputArray::from_permutation(perm::random_permutation(100, &mut rng))
            .unwrap();
        let ds = build(&a, 3, Some(12)).unwrap();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"RCDS");
        let back = TopKStructure::read_from(&mut buf.as_slice()).unwrap();
        for _ in 0..300 {
            let i = rng.random_range(1..=100usize);
            let j = rng.random_range(i..=100usize);
            let r = QueryRange::new(i, j).unwrap();
            assert_eq!(back.query(r).unwrap(), ds.query(r).unwrap());
        }
        // Truncated input fails cleanly.
        assert!(TopKStructure::read_from(&mut buf[..40].as_ref()).is_err());
    }

    #[test]
    fn space_report_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let a = InputArray::from_permutation(perm::random_permutation(256, &mut rng))
            .unwrap();
        let ds = build(&a, 4, Some(32)).unwrap();
        let report = ds.space_report();
        assert_eq!(report.e_int_bits + report.e_win_bits - 2 * 256, report.encoding_zeros);
        assert!(report.encoding_zeros <= 4 * 256);
        assert!(report.leading_term_bits > 0.0);
        assert!(report.total_measured_bits() > 0);
    }

    #[test]
    fn default_block_len_bounds() {
        assert_eq!(default_block_len(0, 3), 1);
        assert_eq!(default_block_len(1, 3), 1);
        for n in [2usize, 10, 1000, 1 << 14] {
            for k in 1..=8 {
                let b = default_block_len(n, k);
                assert!(b >= 1 && b <= n);
            }
        }
    }
}
