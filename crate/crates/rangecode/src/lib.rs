//! Space-efficient encodings and query structures for range min-max and
//! range top-k queries over integer arrays.
//!
//! - [`array`]: input normalization, query ranges, and the brute-force
//!   oracles everything else is tested against.
//! - [`bitvec`]: packed rank/select bit vectors, the storage substrate.
//! - [`minmax`]: the combined `3n`-bit encoding answering both range
//!   minimum and range maximum queries, with a query index.
//! - [`topk`]: the unary delta-sequence encoding of all range top-k
//!   answers, with replay-based queries and the unsorted-to-sorted
//!   reduction.
//! - [`topkds`]: the block-decomposed structure answering top-k queries
//!   with local replays instead of full-prefix replays.
//! - [`combinatorics`]: exhaustive verification of the counting arguments
//!   (Baxter permutations, restricted walks, ordered partitions, entropy
//!   bounds).
//! - [`verify`]: budgeted property suites behind the CLI.
//!
//! The `parallel` feature (default) runs enumeration sweeps and randomized
//! verification on rayon; disabling it falls back to the sequential paths
//! in [`exec::seq`] with identical results.

pub mod array;
pub mod bitvec;
pub mod combinatorics;
pub mod error;
pub mod exec;
pub mod minmax;
pub mod perm;
pub(crate) mod rmq;
pub mod topk;
pub mod topkds;
pub mod verify;

pub use array::{
    naive_min_max, naive_select, naive_top_k, parse_array_text, InputArray, QueryRange,
    TopKResult,
};
pub use error::{Error, Result};
