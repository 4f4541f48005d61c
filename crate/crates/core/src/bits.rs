//! Bit-packed binary vectors and the instance types built from them.
//!
//! Vectors are stored 64 dimensions per machine word with padding bits kept
//! at zero, so inner products reduce to word-wise AND + popcount. These
//! pairwise kernels dominate oracle runtime, which is why the packing is
//! explicit rather than a `Vec<bool>`.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// A binary vector of fixed length with zeroed padding bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    words: Vec<u64>,
    len: usize,
}

impl BinaryVector {
    pub fn zeros(len: usize) -> Self {
        BinaryVector { words: vec![0; len.div_ceil(WORD_BITS)], len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = BinaryVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a row of `0`/`1` characters.
    pub fn from_01_str(s: &str) -> Result<Self> {
        let mut v = BinaryVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(Error::validation(format!(
                        "invalid character {other:?} in row (only 0/1 allowed)"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, val: bool) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if val {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn popcount(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product of two binary vectors of equal length.
    pub fn dot(&self, other: &BinaryVector) -> u64 {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    /// Bit-wise flip of all significant bits; padding stays zero.
    pub fn complement(&self) -> BinaryVector {
        let mut out = BinaryVector { words: self.words.iter().map(|w| !w).collect(), len: self.len };
        out.clear_padding();
        out
    }

    /// Kronecker product: bit `i * other.len + j` is `self[i] & other[j]`.
    pub fn kron(&self, other: &BinaryVector) -> BinaryVector {
        let mut out = BinaryVector::zeros(self.len * other.len);
        for i in 0..self.len {
            if !self.get(i) {
                continue;
            }
            for j in 0..other.len {
                if other.get(j) {
                    out.set(i * other.len + j, true);
                }
            }
        }
        out
    }

    /// Concatenation `self ∘ other`.
    pub fn concat(&self, other: &BinaryVector) -> BinaryVector {
        let mut out = BinaryVector::zeros(self.len + other.len);
        for i in 0..self.len {
            if self.get(i) {
                out.set(i, true);
            }
        }
        for j in 0..other.len {
            if other.get(j) {
                out.set(self.len + j, true);
            }
        }
        out
    }

    /// The support as a word-sized mask; only valid for `len <= 64`.
    pub fn low_word(&self) -> u64 {
        assert!(self.len <= WORD_BITS);
        if self.len == 0 {
            0
        } else {
            self.words[0]
        }
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter_bits() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A set of `n >= 1` binary vectors of common dimension `l >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryVectorSet {
    rows: Vec<BinaryVector>,
    dim: usize,
}

impl BinaryVectorSet {
    pub fn new(rows: Vec<BinaryVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::validation("instance must contain at least one vector"));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::validation("vector dimension must be at least 1"));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::validation(format!(
                "row {bad} has length {} but the set dimension is {dim}",
                rows[bad].len()
            )));
        }
        Ok(BinaryVectorSet { rows, dim })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &BinaryVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BinaryVector] {
        &self.rows
    }

    /// Copy of the set with row `idx` replaced.
    pub fn with_row(&self, idx: usize, row: BinaryVector) -> Result<Self> {
        if idx >= self.rows.len() {
            return Err(Error::validation(format!("row index {idx} out of range")));
        }
        if row.len() != self.dim {
            return Err(Error::validation("replacement row has wrong dimension"));
        }
        let mut rows = self.rows.clone();
        rows[idx] = row;
        Ok(BinaryVectorSet { rows, dim: self.dim })
    }

    /// Sub-set holding the given rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        BinaryVectorSet::new(rows)
    }

    pub fn contains_zero_row(&self) -> bool {
        self.rows.iter().any(|r| r.is_zero())
    }

    pub fn zero_row_index(&self) -> Option<usize> {
        self.rows.iter().position(|r| r.is_zero())
    }
}

/// Two vector sets of equal dimension; pairs take one element from each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BichromaticInstance {
    a: BinaryVectorSet,
    b: BinaryVectorSet,
}

impl BichromaticInstance {
    pub fn new(a: BinaryVectorSet, b: BinaryVectorSet) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::validation(format!(
                "side dimensions differ: {} vs {}",
                a.dim(),
                b.dim()
            )));
        }
        Ok(BichromaticInstance { a, b })
    }

    pub fn a(&self) -> &BinaryVectorSet {
        &self.a
    }

    pub fn b(&self) -> &BinaryVectorSet {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BinaryVector {
        BinaryVector::from_01_str(s).unwrap()
    }

    #[test]
    fn complement_flips_all_bits() {
        assert_eq!(bv("101").complement(), bv("010"));
    }

    #[test]
    fn complement_is_involution() {
        let v = bv("1001101");
        assert_eq!(v.complement().complement(), v);
    }

    #[test]
    fn dot_against_complement_identity() {
        // <v, comp(w)> = popcount(v) - <v, w>
        let v = bv("110101");
        let w = bv("011100");
        assert_eq!(v.dot(&w.complement()), v.popcount() - v.dot(&w));
    }

    #[test]
    fn padding_bits_stay_zero_after_complement() {
        let v = BinaryVector::zeros(70);
        let c = v.complement();
        assert_eq!(c.popcount(), 70);
        assert_eq!(c.complement(), v);
    }

    #[test]
    fn kron_matches_bitwise_products() {
        let v = bv("110");
        let w = bv("101");
        let k = v.kron(&w);
        assert_eq!(k.len(), 9);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k.get(i * 3 + j), v.get(i) && w.get(j));
            }
        }
    }

    #[test]
    fn set_rejects_empty_and_ragged() {
        assert!(BinaryVectorSet::new(vec![]).is_err());
        assert!(BinaryVectorSet::new(vec![bv("101"), bv("0101")]).is_err());
    }

    #[test]
    fn bichromatic_rejects_dimension_mismatch() {
        let a = BinaryVectorSet::new(vec![bv("10")]).unwrap();
        let b = BinaryVectorSet::new(vec![bv("100")]).unwrap();
        assert!(BichromaticInstance::new(a, b).is_err());
    }
}
