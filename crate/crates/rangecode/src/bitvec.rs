//! Packed rank/select bit vectors.
//!
//! Bits are packed into `u64` words, least-significant-bit first within each
//! word; that order is part of the serialization contract. Rank is served by
//! a two-level directory (superblocks of cumulative counts, blocks of
//! within-superblock counts) and select by sampled hints that narrow a
//! binary search over the directory. The directory is an acceleration
//! index over the raw payload; [`BitVector::payload_bits`] and
//! [`BitVector::directory_bits`] report the two separately so the payload
//! can be compared against entropy bounds on its own.
//!
//! All public positions are 1-based; `rank` takes a prefix length in
//! `0..=len`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

const BLOCK_BITS: usize = 512;
const SUPER_BITS: usize = 65536;
const BLOCKS_PER_SUPER: usize = SUPER_BITS / BLOCK_BITS;
const SELECT_SAMPLE: usize = 4096;

const MAGIC: &[u8; 4] = b"RCBV";
const VERSION: u8 = 1;

/// An immutable bit vector with rank/select support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    len: usize,
    ones: usize,
    words: Vec<u64>,
    /// Ones before each superblock; one extra entry for the end.
    super_ranks: Vec<u64>,
    /// Ones from the superblock start to each block start; one extra entry.
    block_ranks: Vec<u16>,
    /// Block index containing every `SELECT_SAMPLE`-th one bit.
    hints1: Vec<u32>,
    /// Block index containing every `SELECT_SAMPLE`-th zero bit.
    hints0: Vec<u32>,
}

/// Append-only builder for [`BitVector`].
#[derive(Debug, Default, Clone)]
pub struct BitVecBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitVecBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        let word = self.len / 64;
        if word == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[word] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Appends `count` copies of `bit`.
    pub fn push_run(&mut self, bit: bool, count: usize) {
        for _ in 0..count {
            self.push(bit);
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> BitVector {
        BitVector::from_words(self.words, self.len)
    }
}

impl BitVector {
    fn from_words(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(64));
        debug_assert!(tail_is_zero(&words, len));
        let num_blocks = len.div_ceil(BLOCK_BITS);
        let mut super_ranks = Vec::with_capacity(num_blocks / BLOCKS_PER_SUPER + 2);
        let mut block_ranks = Vec::with_capacity(num_blocks + 1);
        let mut hints1 = Vec::new();
        let mut hints0 = Vec::new();

        let mut total: u64 = 0;
        let mut since_super: u64 = 0;
        for b in 0..=num_blocks {
            if b % BLOCKS_PER_SUPER == 0 {
                super_ranks.push(total);
                since_super = 0;
            }
            block_ranks.push(since_super as u16);
            if b == num_blocks {
                break;
            }
            let bit_lo = b * BLOCK_BITS;
            let bit_hi = ((b + 1) * BLOCK_BITS).min(len);
            let in_block = count_ones_in(&words, bit_lo, bit_hi);
            let zeros_before = bit_lo as u64 - total;
            let zeros_in_block = (bit_hi - bit_lo) as u64 - in_block;
            // A sample boundary crossed inside this block records the block.
            if crosses_sample(total, in_block) {
                hints1.push(b as u32);
            }
            if crosses_sample(zeros_before, zeros_in_block) {
                hints0.push(b as u32);
            }
            total += in_block;
            since_super += in_block;
        }

        BitVector {
            len,
            ones: total as usize,
            words,
            super_ranks,
            block_ranks,
            hints1,
            hints0,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = BitVecBuilder::new();
        for &bit in bits {
            b.push(bit);
        }
        b.finish()
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let mut b = BitVecBuilder::new();
        for c in s.chars() {
            match c {
                '0' => b.push(false),
                '1' => b.push(true),
                _ => {
                    return Err(Error::Format(format!(
                        "invalid bit character {c:?}"
                    )))
                }
            }
        }
        Ok(b.finish())
    }

    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    /// Raw stored bits.
    pub fn payload_bits(&self) -> usize {
        self.len
    }

    /// Bits spent on the rank directory and select hints.
    pub fn directory_bits(&self) -> usize {
        self.super_ranks.len() * 64
            + self.block_ranks.len() * 16
            + (self.hints1.len() + self.hints0.len()) * 32
    }

    fn get(&self, idx: usize) -> bool {
        (self.words[idx / 64] >> (idx % 64)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Bit at 1-based position `pos`.
    pub fn access(&self, pos: usize) -> Result<bool> {
        if pos == 0 || pos > self.len {
            return Err(Error::Range {
                i: pos,
                j: pos,
                n: self.len,
            });
        }
        Ok(self.get(pos - 1))
    }

    /// Number of `bit` values among the first `prefix` bits; `prefix` may
    /// be 0 (returns 0) up to `len`.
    pub fn rank(&self, bit: bool, prefix: usize) -> Result<usize> {
        if prefix > self.len {
            return Err(Error::Range {
                i: prefix,
                j: prefix,
                n: self.len,
            });
        }
        let ones = self.rank1_unchecked(prefix);
        Ok(if bit { ones } else { prefix - ones })
    }

    fn rank1_unchecked(&self, prefix: usize) -> usize {
        let block = prefix / BLOCK_BITS;
        let mut rank = self.super_ranks[prefix / SUPER_BITS]
            + u64::from(self.block_ranks[block]);
        rank += count_ones_in(&self.words, block * BLOCK_BITS, prefix);
        rank as usize
    }

    /// 1-based position of the `q`-th occurrence of `bit` (`q >= 1`).
    pub fn select(&self, bit: bool, q: usize) -> Result<usize> {
        let available = if bit { self.ones } else { self.count_zeros() };
        if q == 0 || q > available {
            return Err(Error::NotFound(format!(
                "select for occurrence {q} of {}, only {available} present",
                u8::from(bit)
            )));
        }
        let num_blocks = self.len.div_ceil(BLOCK_BITS);
        let hints = if bit { &self.hints1 } else { &self.hints0 };
        let h = (q - 1) / SELECT_SAMPLE;
        let mut lo = if h == 0 { 0 } else { hints[h - 1] as usize };
        let mut hi = hints
            .get(h)
            .map_or(num_blocks - 1, |&b| b as usize);
        // Smallest block whose prefix count reaches q.
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.count_before_block(bit, mid + 1) >= q as u64 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mut remaining = (q as u64 - self.count_before_block(bit, lo)) as usize;
        let bit_lo = lo * BLOCK_BITS;
        let bit_hi = ((lo + 1) * BLOCK_BITS).min(self.len);
        for w in bit_lo / 64..bit_hi.div_ceil(64) {
            let mut word = if bit { self.words[w] } else { !self.words[w] };
            if w == bit_hi.div_ceil(64) - 1 && bit_hi % 64 != 0 {
                word &= (1u64 << (bit_hi % 64)) - 1;
            }
            let cnt = word.count_ones() as usize;
            if cnt >= remaining {
                return Ok(w * 64 + select_in_word(word, remaining) + 1);
            }
            remaining -= cnt;
        }
        unreachable!("directory counts disagree with payload");
    }

    fn count_before_block(&self, bit: bool, block: usize) -> u64 {
        let bits_before = (block * BLOCK_BITS).min(self.len) as u64;
        let ones = self.super_ranks[block / BLOCKS_PER_SUPER]
            + u64::from(self.block_ranks[block]);
        if bit {
            ones
        } else {
            bits_before - ones
        }
    }

    /// Serializes as magic, version byte, length and popcount as 8-byte
    /// little-endian integers, then `ceil(len/8)` payload bytes LSB-first.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION])?;
        w.write_all(&(self.len as u64).to_le_bytes())?;
        w.write_all(&(self.ones as u64).to_le_bytes())?;
        let num_bytes = self.len.div_ceil(8);
        let mut bytes = Vec::with_capacity(num_bytes);
        for word in &self.words {
            bytes.extend_from_slice(&word.to_le_bytes());
        }
        bytes.truncate(num_bytes);
        w.write_all(&bytes)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad bit vector magic {magic:?}"
            )));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != VERSION {
            return Err(Error::Format(format!(
                "unsupported bit vector version {}",
                version[0]
            )));
        }
        let len = read_u64(r)? as usize;
        let ones = read_u64(r)? as usize;
        let num_bytes = len.div_ceil(8);
        let mut bytes = vec![0u8; num_bytes];
        r.read_exact(&mut bytes)?;
        let mut words = vec![0u64; len.div_ceil(64)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i / 8] |= u64::from(b) << ((i % 8) * 8);
        }
        if !tail_is_zero(&words, len) {
            return Err(Error::Format(
                "nonzero padding bits past the declared length".into(),
            ));
        }
        let v = BitVector::from_words(words, len);
        if v.ones != ones {
            return Err(Error::Format(format!(
                "declared popcount {ones} but payload has {}",
                v.ones
            )));
        }
        Ok(v)
    }
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn tail_is_zero(words: &[u64], len: usize) -> bool {
    if len % 64 == 0 {
        return true;
    }
    match words.last() {
        Some(&last) => last >> (len % 64) == 0,
        None => true,
    }
}

fn crosses_sample(before: u64, added: u64) -> bool {
    // True when some multiple of SELECT_SAMPLE falls in (before, before+added].
    (before + added) / SELECT_SAMPLE as u64 > before / SELECT_SAMPLE as u64
}

fn count_ones_in(words: &[u64], lo: usize, hi: usize) -> u64 {
    if lo >= hi {
        return 0;
    }
    let mut total = 0u64;
    let lo_word = lo / 64;
    let hi_word = (hi - 1) / 64;
    for w in lo_word..=hi_word {
        let mut word = words[w];
        if w == lo_word && lo % 64 != 0 {
            word &= !((1u64 << (lo % 64)) - 1);
        }
        if w == hi_word && hi % 64 != 0 {
            word &= (1u64 << (hi % 64)) - 1;
        }
        total += u64::from(word.count_ones());
    }
    total
}

/// 0-based position of the `r`-th (1-based) set bit of `word`.
fn select_in_word(mut word: u64, r: usize) -> usize {
    debug_assert!(r >= 1 && (word.count_ones() as usize) >= r);
    for _ in 1..r {
        word &= word - 1;
    }
    word.trailing_zeros() as usize
}
