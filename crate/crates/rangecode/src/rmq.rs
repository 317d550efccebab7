//! Sparse-table range arg-min over an array of keys.
//!
//! `O(n log n)` words of precomputation, `O(1)` per query. Ties break
//! toward the leftmost position; the crate only feeds it distinct keys.

#[derive(Debug, Clone)]
pub(crate) struct ArgMinTable {
    keys: Vec<u64>,
    /// levels[t][p] = position of the minimum key in [p, p + 2^(t+1)).
    levels: Vec<Vec<u32>>,
}

impl ArgMinTable {
    pub fn new(keys: Vec<u64>) -> Self {
        let n = keys.len();
        let mut levels: Vec<Vec<u32>> = Vec::new();
        let mut width = 1usize;
        while width * 2 <= n {
            let prev: Option<&Vec<u32>> = levels.last();
            let mut level = Vec::with_capacity(n - width * 2 + 1);
            for p in 0..=(n - width * 2) {
                let (a, b) = match prev {
                    Some(prev) => (prev[p] as usize, prev[p + width] as usize),
                    None => (p, p + width),
                };
                level.push(if keys[a] <= keys[b] { a as u32 } else { b as u32 });
            }
            levels.push(level);
            width *= 2;
        }
        ArgMinTable { keys, levels }
    }

    /// For building arg-max tables: keys are flipped so smaller-is-larger.
    pub fn new_max(values: impl IntoIterator<Item = u64>) -> Self {
        Self::new(values.into_iter().map(|v| u64::MAX - v).collect())
    }

    /// Position of the minimum key in the 0-based inclusive range [lo, hi].
    pub fn argmin(&self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi && hi < self.keys.len());
        let span = hi - lo + 1;
        if span == 1 {
            return lo;
        }
        let t = span.ilog2() as usize; // 2^t <= span < 2^(t+1), t >= 1 here
        let level = &self.levels[t - 1];
        let a = level[lo] as usize;
        let b = level[hi + 1 - (1 << t)] as usize;
        if self.keys[a] <= self.keys[b] {
            a
        } else {
            b
        }
    }
}
