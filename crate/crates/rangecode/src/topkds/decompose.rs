//! Good block decompositions.
//!
//! The array is cut into *even blocks* of a fixed length `B`, and on top of
//! those into variable *blocks*, each contained in one even block. A
//! decomposition is *good* when
//!
//! - D1: the number of blocks is within an audited constant of
//!   `k^2 n / B + k n / B + n / B + 1`;
//! - D2: the counter changes caused by a non-singleton block's elements sum
//!   to at most `B`;
//! - D3: the changes a non-singleton block causes outside its own even block
//!   all land in one earlier even block, its *window*.
//!
//! Construction: positions whose change weight exceeds `B` become
//! singletons; the rest are merged greedily into weight-`<= B` runs, cut at
//! even-block boundaries, and then refined left to right — whenever the
//! accumulated outside changes stop fitting in a single even block, the
//! block is split there and the offending position becomes a singleton.

use crate::array::InputArray;
use crate::error::{Error, Result};
use crate::topk::increment_lists;

/// Audit constant for the D1 block-count bound.
pub const AUDIT_CONSTANT: usize = 16;

/// One block of the decomposition; `start..=end` are 1-based positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    /// 0-based ordinal of the containing even block.
    pub even_block: usize,
    /// 0-based ordinal of the window even block, strictly earlier.
    pub window: Option<usize>,
}

impl Block {
    pub fn is_singleton(&self) -> bool {
        self.start == self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodDecomposition {
    pub n: usize,
    pub k: usize,
    pub block_len: usize,
    pub blocks: Vec<Block>,
}

/// 0-based even-block ordinal of a 1-based position.
pub(crate) fn even_block_of(pos: usize, block_len: usize) -> usize {
    (pos - 1) / block_len
}

pub(crate) fn even_block_start(t: usize, block_len: usize) -> usize {
    t * block_len + 1
}

pub(crate) fn even_block_end(t: usize, block_len: usize, n: usize) -> usize {
    ((t + 1) * block_len).min(n)
}

/// Builds a good decomposition for parameters `k` and `block_len`.
pub fn decompose(a: &InputArray, k: usize, block_len: usize) -> Result<GoodDecomposition> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let n = a.len();
    if n == 0 {
        return Ok(GoodDecomposition {
            n,
            k,
            block_len: block_len.max(1),
            blocks: Vec::new(),
        });
    }
    if block_len == 0 || block_len > n {
        return Err(Error::Argument(format!(
            "block length {block_len} outside [1, {n}]"
        )));
    }
    let incs = increment_lists(a, k);
    decompose_from_changes(n, k, block_len, &incs)
}

fn decompose_from_changes(
    n: usize,
    k: usize,
    block_len: usize,
    incs: &[Vec<usize>],
) -> Result<GoodDecomposition> {
    let b = block_len;
    // Weight of a position: its increments plus the appended entry itself.
    let weight = |p: usize| incs[p - 1].len() + 1;

    // Pass 1: fat singletons, greedy weight-bounded merging, cuts at
    // even-block boundaries.
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    let mut run: Option<(usize, usize)> = None; // (start, accumulated weight)
    for p in 1..=n {
        let w = weight(p);
        if w > b {
            if let Some((s, _)) = run.take() {
                candidates.push((s, p - 1));
            }
            candidates.push((p, p));
            continue;
        }
        match run {
            None => run = Some((p, w)),
            Some((s, acc)) => {
                if acc + w > b || even_block_of(s, b) != even_block_of(p, b) {
                    candidates.push((s, p - 1));
                    run = Some((p, w));
                } else {
                    run = Some((s, acc + w));
                }
            }
        }
    }
    if let Some((s, _)) = run {
        candidates.push((s, n));
    }

    // Pass 2: window refinement.
    let mut blocks: Vec<Block> = Vec::new();
    for (s, e) in candidates {
        let t = even_block_of(s, b);
        let mut close = |lo: usize, hi: usize, outside: &mut Vec<usize>| {
            if lo > hi {
                return;
            }
            blocks.push(Block {
                start: lo,
                end: hi,
                even_block: t,
                window: outside.first().copied(),
            });
            outside.clear();
        };
        let mut g = s;
        let mut outside: Vec<usize> = Vec::new(); // distinct even blocks, sorted
        for p in s..=e {
            let mut touched = outside.clone();
            for &q in &incs[p - 1] {
                let w = even_block_of(q, b);
                if w != t {
                    if let Err(at) = touched.binary_search(&w) {
                        touched.insert(at, w);
                    }
                }
            }
            if touched.len() <= 1 {
                outside = touched;
                continue;
            }
            // Split: close the block before p, make p itself a singleton.
            close(g, p - 1, &mut outside);
            let mut own: Vec<usize> = Vec::new();
            close(p, p, &mut own);
            g = p + 1;
        }
        close(g, e, &mut outside);
    }

    let d = GoodDecomposition {
        n,
        k,
        block_len: b,
        blocks,
    };
    debug_assert!(d.check_shape().is_ok());
    Ok(d)
}

impl GoodDecomposition {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Structural invariants that do not need the array: a contiguous
    /// partition, each block inside one even block, windows earlier.
    pub(crate) fn check_shape(&self) -> Result<()> {
        let mut next = 1usize;
        for (i, blk) in self.blocks.iter().enumerate() {
            if blk.start != next || blk.end < blk.start {
                return Err(Error::Corruption(format!(
                    "block {i} spans [{}, {}], expected start {next}",
                    blk.start, blk.end
                )));
            }
            if even_block_of(blk.start, self.block_len) != blk.even_block
                || even_block_of(blk.end, self.block_len) != blk.even_block
            {
                return Err(Error::Corruption(format!(
                    "block {i} crosses an even-block boundary"
                )));
            }
            if let Some(w) = blk.window {
                if w >= blk.even_block {
                    return Err(Error::Corruption(format!(
                        "block {i} has window {w} not earlier than its even block {}",
                        blk.even_block
                    )));
                }
            }
            next = blk.end + 1;
        }
        if next != self.n + 1 {
            return Err(Error::Corruption(format!(
                "blocks cover up to {}, array has {}",
                next - 1,
                self.n
            )));
        }
        Ok(())
    }

    /// Full D1-D3 audit against the array, recomputing the change sets
    /// directly from the dominance definition (independently of the
    /// builder's incremental simulation).
    pub fn validate(&self, a: &InputArray, k: usize) -> Result<()> {
        if a.len() != self.n || k != self.k {
            return Err(Error::Argument(
                "validation against a different array or k".into(),
            ));
        }
        self.check_shape()?;
        if self.n == 0 {
            return Ok(());
        }
        let changes = definition_change_lists(a, k);
        let b = self.block_len;

        // D1, in integer arithmetic: h * B <= C * (k^2 n + k n + n + B).
        let h = self.blocks.len();
        let budget = AUDIT_CONSTANT * (k * k * self.n + k * self.n + self.n + b);
        if h * b > budget {
            return Err(Error::Corruption(format!(
                "D1 violated: {h} blocks exceeds audited bound {budget}/B"
            )));
        }

        for (i, blk) in self.blocks.iter().enumerate() {
            if blk.is_singleton() {
                continue;
            }
            // D2: total changes (increments plus the element itself).
            let total: usize = (blk.start..=blk.end)
                .map(|p| changes[p - 1].len() + 1)
                .sum();
            if total > b {
                return Err(Error::Corruption(format!(
                    "D2 violated: block {i} has change weight {total} > {b}"
                )));
            }
            // D3: outside changes confined to the declared window.
            for p in blk.start..=blk.end {
                for &q in &changes[p - 1] {
                    let w = even_block_of(q, b);
                    if w != blk.even_block && Some(w) != blk.window {
                        return Err(Error::Corruption(format!(
                            "D3 violated: block {i} touches even block {w} \
                             outside its window {:?}",
                            blk.window
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Change lists computed straight from the definition: appending element
/// `p` increments every still-active earlier position it dominates.
/// Quadratic; used as the audit oracle.
fn definition_change_lists(a: &InputArray, k: usize) -> Vec<Vec<usize>> {
    let n = a.len();
    let mut counters = vec![0usize; n];
    let mut lists = Vec::with_capacity(n);
    for p in 1..=n {
        let mut changed = Vec::new();
        for q in 1..p {
            if a.value(q) < a.value(p) && counters[q - 1] < k {
                counters[q - 1] += 1;
                changed.push(q);
            }
        }
        lists.push(changed);
    }
    lists
}
