//! Input arrays, query ranges, and the brute-force reference oracles.
//!
//! Raw integer arrays are normalized to a permutation of `1..=n` at
//! ingestion (ties broken in favour of the leftmost element), so every
//! downstream module can assume distinct values. Indices are 1-based at
//! every public boundary.

use crate::error::{Error, Result};

/// An array of values normalized to a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputArray {
    values: Vec<u32>,
}

impl InputArray {
    /// Ranks `raw` into a permutation of `1..=n`, breaking ties in favour
    /// of the leftmost element. The strict order induced by
    /// `(value, index)` is preserved exactly.
    pub fn normalize(raw: &[i64]) -> Self {
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by_key(|&p| (raw[p], p));
        let mut values = vec![0u32; raw.len()];
        for (rank, &p) in order.iter().enumerate() {
            values[p] = rank as u32 + 1;
        }
        InputArray { values }
    }

    /// Wraps a vector that is already a permutation of `1..=n`.
    pub fn from_permutation(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n];
        for &v in &values {
            if v == 0 || v as usize > n || seen[v as usize - 1] {
                return Err(Error::Argument(format!(
                    "values are not a permutation of 1..={n}"
                )));
            }
            seen[v as usize - 1] = true;
        }
        Ok(InputArray { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Value at 1-based position `pos`.
    pub fn value(&self, pos: usize) -> u32 {
        self.values[pos - 1]
    }
}

/// A 1-based inclusive query range `[i, j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRange {
    pub i: usize,
    pub j: usize,
}

impl QueryRange {
    /// Requires `1 <= i <= j`; the upper bound against `n` is checked at
    /// the point of use, where the array length is known.
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == 0 || i > j {
            return Err(Error::Argument(format!(
                "query range [{i}, {j}] must satisfy 1 <= i <= j"
            )));
        }
        Ok(QueryRange { i, j })
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.i == 0 || self.i > self.j || self.j > n {
            return Err(Error::Range {
                i: self.i,
                j: self.j,
                n,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.j - self.i + 1
    }

    pub fn is_empty(&self) -> bool {
        false // by invariant i <= j
    }
}

/// Positions of the top elements of a range, largest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKResult {
    indices: Vec<usize>,
}

impl TopKResult {
    pub fn new(indices: Vec<usize>) -> Self {
        TopKResult { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.indices
    }
}

impl std::ops::Deref for TopKResult {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.indices
    }
}

/// Reference oracle: positions of the `min(k, j-i+1)` largest values in
/// `a[i..=j]`, by decreasing value, computed by full scan and sort.
pub fn naive_top_k(a: &InputArray, r: QueryRange, k: usize) -> Result<TopKResult> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    r.check(a.len())?;
    let mut by_value: Vec<usize> = (r.i..=r.j).collect();
    by_value.sort_by_key(|&p| std::cmp::Reverse(a.value(p)));
    by_value.truncate(k.min(r.len()));
    Ok(TopKResult::new(by_value))
}

/// Reference oracle: `(argmax, argmin)` of `a[i..=j]`.
pub fn naive_min_max(a: &InputArray, r: QueryRange) -> Result<(usize, usize)> {
    r.check(a.len())?;
    let mut argmax = r.i;
    let mut argmin = r.i;
    for p in r.i + 1..=r.j {
        if a.value(p) > a.value(argmax) {
            argmax = p;
        }
        if a.value(p) < a.value(argmin) {
            argmin = p;
        }
    }
    Ok((argmax, argmin))
}

/// Reference oracle: position of the `k1`-th largest value in `a[i..=j]`.
pub fn naive_select(a: &InputArray, r: QueryRange, k1: usize) -> Result<usize> {
    r.check(a.len())?;
    if k1 == 0 || k1 > r.len() {
        return Err(Error::Argument(format!(
            "selection rank {k1} out of range for a range of length {}",
            r.len()
        )));
    }
    let top = naive_top_k(a, r, k1)?;
    Ok(top[k1 - 1])
}

/// Parses the shared array file format: one signed decimal integer per
/// line, blank lines ignored.
pub fn parse_array_text(text: &str) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value = trimmed.parse::<i64>().map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("{trimmed:?}: {e}"),
        })?;
        out.push(value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample9() -> InputArray {
        InputArray::normalize(&[46, 31, 93, 16, 45, 77, 25, 57, 26])
    }

    #[test]
    fn normalize_ranks_by_value_then_index() {
        // Sorted: 16 25 26 31 45 46 57 77 93, so 46 ranks 6th, 31 ranks
        // 4th, and so on.
        assert_eq!(sample9().values(), &[6, 4, 9, 1, 5, 8, 2, 7, 3]);
    }

    #[test]
    fn normalize_breaks_ties_leftmost_first() {
        let a = InputArray::normalize(&[5, 5, 5]);
        assert_eq!(a.values(), &[1, 2, 3]);
    }

    #[test]
    fn normalize_empty() {
        let a = InputArray::normalize(&[]);
        assert!(a.is_empty());
    }

    #[test]
    fn normalize_is_idempotent() {
        let raw = [3, -7, 12, 0, 5, -7, 3];
        let once = InputArray::normalize(&raw);
        let again = InputArray::normalize(
            &once.values().iter().map(|&v| v as i64).collect::<Vec<_>>(),
        );
        assert_eq!(once, again);
    }

    #[test]
    fn top_k_oracle_on_sample() {
        let a = sample9();
        let top = naive_top_k(&a, QueryRange::new(1, 9).unwrap(), 2).unwrap();
        assert_eq!(top.indices(), &[3, 6]);
        let top = naive_top_k(&a, QueryRange::new(4, 9).unwrap(), 2).unwrap();
        assert_eq!(top.indices(), &[6, 8]);
        let single = naive_top_k(&a, QueryRange::new(5, 5).unwrap(), 4).unwrap();
        assert_eq!(single.indices(), &[5]);
    }

    #[test]
    fn min_max_oracle() {
        let a = InputArray::normalize(&[11, 1, 7, 10, 9, 3, 4, 2, 8, 5, 6]);
        assert_eq!(
            naive_min_max(&a, QueryRange::new(1, 11).unwrap()).unwrap(),
            (1, 2)
        );
        assert_eq!(
            naive_min_max(&a, QueryRange::new(3, 5).unwrap()).unwrap(),
            (4, 3)
        );
        assert_eq!(
            naive_min_max(&a, QueryRange::new(7, 7).unwrap()).unwrap(),
            (7, 7)
        );
    }

    #[test]
    fn select_oracle() {
        let a = sample9();
        assert_eq!(naive_select(&a, QueryRange::new(4, 9).unwrap(), 2).unwrap(), 8);
        assert_eq!(naive_select(&a, QueryRange::new(1, 9).unwrap(), 1).unwrap(), 3);
        assert_eq!(naive_select(&a, QueryRange::new(6, 6).unwrap(), 1).unwrap(), 6);
        assert!(naive_select(&a, QueryRange::new(4, 5).unwrap(), 3).is_err());
    }

    #[test]
    fn select_equals_last_of_top_k() {
        let a = sample9();
        for i in 1..=9 {
            for j in i..=9 {
                let r = QueryRange::new(i, j).unwrap();
                for k1 in 1..=(j - i + 1) {
                    let top = naive_top_k(&a, r, k1).unwrap();
                    assert_eq!(naive_select(&a, r, k1).unwrap(), top[k1 - 1]);
                }
            }
        }
    }

    #[test]
    fn range_validation() {
        let a = sample9();
        assert!(QueryRange::new(0, 3).is_err());
        assert!(QueryRange::new(5, 3).is_err());
        let r = QueryRange::new(4, 12).unwrap();
        assert!(matches!(
            naive_min_max(&a, r),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn parse_text_format() {
        let parsed = parse_array_text("46\n31\n\n  93\n-4\n").unwrap();
        assert_eq!(parsed, vec![46, 31, 93, -4]);
        let err = parse_array_text("12\nxy\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
