//! Bit-packed binary hypervectors and the Multiply-Add-Permute algebra.
//!
//! Bit `i` of a hypervector lives in word `i / 64` at bit position `i % 64`
//! (little-endian within the word). Bits past `dim - 1` in the last word are
//! always zero. This layout is also the on-disk layout of model files.

use std::fmt;

use rand::RngCore;

use crate::error::{HdcError, Result};
use crate::rng::RandomSource;

pub const WORD_BITS: usize = 64;

/// Default dimensionality used by the language pipeline.
pub const DEFAULT_DIM: usize = 10_000;

pub(crate) fn words_for(dim: usize) -> usize {
    dim.div_ceil(WORD_BITS)
}

fn tail_mask(dim: usize) -> u64 {
    match dim % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Fixed-dimension binary hypervector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    dim: usize,
    words: Vec<u64>,
}

impl Hypervector {
    /// The all-zero vector, identity element of [`bind`].
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            words: vec![0; words_for(dim)],
        })
    }

    /// Every bit independently 1 with probability 1/2.
    pub fn random(dim: usize, rng: &mut RandomSource) -> Result<Self> {
        check_dim(dim)?;
        let mut words: Vec<u64> = (0..words_for(dim)).map(|_| rng.next_u64()).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(dim);
        }
        Ok(Self { dim, words })
    }

    /// Builds a vector from packed words, rejecting non-canonical padding.
    pub fn from_words(dim: usize, words: Vec<u64>) -> Result<Self> {
        check_dim(dim)?;
        if words.len() != words_for(dim) {
            return Err(HdcError::InvalidArgument(format!(
                "{} words cannot hold a {dim}-bit vector",
                words.len()
            )));
        }
        if words[words.len() - 1] & !tail_mask(dim) != 0 {
            return Err(HdcError::Format(
                "padding bits beyond the dimension are set".into(),
            ));
        }
        Ok(Self { dim, words })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut hv = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            hv.set(i, b);
        }
        Ok(hv)
    }

    /// Parses a string of `0`/`1` characters; index 0 is the leftmost character.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(HdcError::InvalidArgument(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.dim)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.dim,
            "bit {i} out of range for dimension {}",
            self.dim
        );
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.dim,
            "bit {i} out of range for dimension {}",
            self.dim
        );
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.dim,
            "bit {i} out of range for dimension {}",
            self.dim
        );
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(self.dim);
        }
        Self {
            dim: self.dim,
            words,
        }
    }

    /// Componentwise XOR.
    pub fn bind(&self, other: &Self) -> Result<Self> {
        check_same(self, other)?;
        Ok(Self {
            dim: self.dim,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// In-place XOR, for hot loops that reuse a buffer.
    pub fn bind_assign(&mut self, other: &Self) -> Result<()> {
        check_same(self, other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Circular rotation to the right: bit `i` moves to `(i + shifts) mod D`.
    pub fn permute(&self, shifts: usize) -> Self {
        let s = shifts % self.dim;
        if s == 0 {
            return self.clone();
        }
        let mut out = shift_up(&self.words, s);
        let wrapped = shift_down(&self.words, self.dim - s);
        for (o, w) in out.iter_mut().zip(&wrapped) {
            *o |= w;
        }
        if let Some(last) = out.last_mut() {
            *last &= tail_mask(self.dim);
        }
        Self {
            dim: self.dim,
            words: out,
        }
    }

    /// Circular rotation to the left; undoes [`Hypervector::permute`].
    pub fn inverse_permute(&self, shifts: usize) -> Self {
        let s = shifts % self.dim;
        self.permute(self.dim - s)
    }

    /// Number of components at which the two vectors differ.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        check_same(self, other)?;
        Ok(xor_popcount(&self.words, &other.words) as usize)
    }

    pub fn normalized_hamming(&self, other: &Self) -> Result<f64> {
        Ok(self.hamming(other)? as f64 / self.dim as f64)
    }
}

impl fmt::Debug for Hypervector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim <= 128 {
            write!(f, "Hypervector({})", self.to_bit_string())
        } else {
            write!(
                f,
                "Hypervector(dim={}, ones={})",
                self.dim,
                self.count_ones()
            )
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(HdcError::InvalidArgument(
            "dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

pub(crate) fn check_same(a: &Hypervector, b: &Hypervector) -> Result<()> {
    if a.dim != b.dim {
        return Err(HdcError::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    Ok(())
}

// Multi-word shift toward higher bit indices. Bits pushed past the end of the
// buffer are dropped; the caller masks the tail.
fn shift_up(words: &[u64], s: usize) -> Vec<u64> {
    let n = words.len();
    let (ws, bs) = (s / WORD_BITS, s % WORD_BITS);
    let mut out = vec![0u64; n];
    for (j, o) in out.iter_mut().enumerate().skip(ws) {
        let src = j - ws;
        *o = words[src] << bs;
        if bs > 0 && src > 0 {
            *o |= words[src - 1] >> (WORD_BITS - bs);
        }
    }
    out
}

fn shift_down(words: &[u64], s: usize) -> Vec<u64> {
    let n = words.len();
    let (ws, bs) = (s / WORD_BITS, s % WORD_BITS);
    let mut out = vec![0u64; n];
    for (j, o) in out.iter_mut().enumerate().take(n.saturating_sub(ws)) {
        let src = j + ws;
        *o = words[src] >> bs;
        if bs > 0 && src + 1 < n {
            *o |= words[src + 1] << (WORD_BITS - bs);
        }
    }
    out
}

fn xor_popcount(a: &[u64], b: &[u64]) -> u32 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: the popcnt feature was just detected on this CPU.
            return unsafe { xor_popcount_hw(a, b) };
        }
    }
    xor_popcount_portable(a, b)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "popcnt")]
unsafe fn xor_popcount_hw(a: &[u64], b: &[u64]) -> u32 {
    xor_popcount_portable(a, b)
}

#[inline(always)]
fn xor_popcount_portable(a: &[u64], b: &[u64]) -> u32 {
    // Four independent partial sums keep the popcount units busy.
    let mut acc = [0u32; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += (x[0] ^ y[0]).count_ones();
        acc[1] += (x[1] ^ y[1]).count_ones();
        acc[2] += (x[2] ^ y[2]).count_ones();
        acc[3] += (x[3] ^ y[3]).count_ones();
    }
    let tail: u32 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| (x ^ y).count_ones())
        .sum();
    acc.iter().sum::<u32>() + tail
}

/// Bit-at-a-time Hamming distance. Reference point for the popcount kernel;
/// not used by the pipeline.
pub fn hamming_per_bit(a: &Hypervector, b: &Hypervector) -> Result<usize> {
    check_same(a, b)?;
    let mut d = 0;
    for i in 0..a.dim {
        if a.get(i) != b.get(i) {
            d += 1;
        }
    }
    Ok(d)
}

pub fn random_hv(dim: usize, rng: &mut RandomSource) -> Result<Hypervector> {
    Hypervector::random(dim, rng)
}

pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector> {
    a.bind(b)
}

pub fn permute(a: &Hypervector, shifts: usize) -> Hypervector {
    a.permute(shifts)
}

pub fn inverse_permute(a: &Hypervector, shifts: usize) -> Hypervector {
    a.inverse_permute(shifts)
}

pub fn hamming(a: &Hypervector, b: &Hypervector) -> Result<usize> {
    a.hamming(b)
}

/// How components whose count is exactly half the items are resolved.
pub enum TieBreak<'a> {
    /// One fair bit per tied component, drawn in increasing index order.
    Random(&'a mut RandomSource),
    /// Ties resolve to 1. Fully deterministic, used for regression tests.
    One,
}

/// Per-component counters for bundling.
///
/// Counts are kept bit-sliced: `planes[p]` holds bit `p` of every counter,
/// so adding a vector is a word-parallel ripple-carry add.
#[derive(Clone, Debug)]
pub struct Accumulator {
    dim: usize,
    planes: Vec<Vec<u64>>,
    items_added: u64,
}

/// Upper bound on `items_added`; keeps every counter inside an `i32`.
pub const MAX_ITEMS: u64 = i32::MAX as u64;

impl Accumulator {
    pub fn new(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            planes: Vec::new(),
            items_added: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items_added(&self) -> u64 {
        self.items_added
    }

    pub fn reset(&mut self) {
        self.planes.clear();
        self.items_added = 0;
    }

    pub fn add(&mut self, hv: &Hypervector) -> Result<()> {
        self.add_weighted(hv, 1)
    }

    /// Adds `weight` copies of `hv`; `items_added` grows by `weight`.
    pub fn add_weighted(&mut self, hv: &Hypervector, weight: u32) -> Result<()> {
        if hv.dim != self.dim {
            return Err(HdcError::DimensionMismatch {
                expected: self.dim,
                got: hv.dim,
            });
        }
        self.add_words_weighted(&hv.words, weight)
    }

    /// Adds a raw packed word slice (canonical padding assumed).
    pub(crate) fn add_words(&mut self, words: &[u64]) -> Result<()> {
        if words.len() != words_for(self.dim) {
            return Err(HdcError::InvalidArgument(format!(
                "{} words do not match dimension {}",
                words.len(),
                self.dim
            )));
        }
        self.add_words_weighted(words, 1)
    }

    fn add_words_weighted(&mut self, words: &[u64], weight: u32) -> Result<()> {
        let total = self.items_added + weight as u64;
        if total > MAX_ITEMS {
            return Err(HdcError::InvalidArgument(format!(
                "accumulator would exceed {MAX_ITEMS} items"
            )));
        }
        let needed = (u64::BITS - total.leading_zeros()) as usize;
        let nwords = words_for(self.dim);
        while self.planes.len() < needed {
            self.planes.push(vec![0; nwords]);
        }
        let mut weight = weight;
        let mut start = 0;
        while weight != 0 {
            if weight & 1 == 1 {
                self.ripple_add(words, start);
            }
            weight >>= 1;
            start += 1;
        }
        self.items_added = total;
        Ok(())
    }

    fn ripple_add(&mut self, words: &[u64], start_plane: usize) {
        for (w, &bits) in words.iter().enumerate() {
            let mut carry = bits;
            let mut p = start_plane;
            while carry != 0 {
                let plane = &mut self.planes[p][w];
                let sum = *plane ^ carry;
                carry &= *plane;
                *plane = sum;
                p += 1;
            }
        }
    }

    pub fn count(&self, i: usize) -> i32 {
        assert!(i < self.dim);
        let (w, b) = (i / WORD_BITS, i % WORD_BITS);
        self.planes
            .iter()
            .enumerate()
            .map(|(p, plane)| (((plane[w] >> b) & 1) as i32) << p)
            .sum()
    }

    pub fn counts(&self) -> Vec<i32> {
        (0..self.dim).map(|i| self.count(i)).collect()
    }

    /// Majority vote: 1 where the count exceeds `k/2`, 0 below, and ties
    /// (possible only for even `k`) resolved by `ties`.
    pub fn threshold(&self, ties: TieBreak<'_>) -> Result<Hypervector> {
        if self.items_added == 0 {
            return Err(HdcError::EmptyAccumulator);
        }
        let k = self.items_added;
        let half = k / 2;
        let even = k.is_multiple_of(2);
        let nwords = words_for(self.dim);
        let mut out = vec![0u64; nwords];
        let mut tie_words = vec![0u64; nwords];
        for w in 0..nwords {
            let mut gt = 0u64;
            let mut eq = u64::MAX;
            for p in (0..self.planes.len()).rev() {
                let x = self.planes[p][w];
                if (half >> p) & 1 == 1 {
                    eq &= x;
                } else {
                    gt |= eq & x;
                    eq &= !x;
                }
            }
            out[w] = gt;
            if even {
                tie_words[w] = eq;
            }
        }
        if let Some(last) = tie_words.last_mut() {
            *last &= tail_mask(self.dim);
        }
        match ties {
            TieBreak::One => {
                for (o, t) in out.iter_mut().zip(&tie_words) {
                    *o |= t;
                }
            }
            TieBreak::Random(rng) => {
                for (w, &t) in tie_words.iter().enumerate() {
                    let mut t = t;
                    while t != 0 {
                        let b = t.trailing_zeros();
                        if rng.next_bit() {
                            out[w] |= 1u64 << b;
                        }
                        t &= t - 1;
                    }
                }
            }
        }
        Ok(Hypervector {
            dim: self.dim,
            words: out,
        })
    }
}

/// Componentwise majority of `vectors`: accumulate all, then threshold.
pub fn bundle(vectors: &[Hypervector], ties: TieBreak<'_>) -> Result<Hypervector> {
    let first = vectors.first().ok_or_else(|| {
        HdcError::InvalidArgument("cannot bundle an empty list of vectors".into())
    })?;
    let mut acc = Accumulator::new(first.dim)?;
    for v in vectors {
        acc.add(v)?;
    }
    acc.threshold(ties)
}
