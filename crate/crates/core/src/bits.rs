//! Packed bit strings over GF(2).
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Serialized as bytes,
//! this is LSB-first packing: bit `i` is bit `i % 8` of byte `i / 8`. Unused
//! high bits of the final word are always zero.

use std::fmt;

use rand::RngCore;

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = Self::zeros(0);
        for b in bits {
            out.push(b);
        }
        out
    }

    /// Uniform bits, one `next_u64` per 64-bit word in index order.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..words_for(len)).map(|_| rng.next_u64()).collect();
        mask_tail(&mut words, len);
        Self { len, words }
    }

    /// Builds a bit string from raw words, clearing bits past `len`.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        mask_tail(&mut words, len);
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn push(&mut self, value: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    /// Appends all bits of `other`.
    pub fn extend_from(&mut self, other: &BitString) {
        let shift = self.len % 64;
        if shift == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                *self.words.last_mut().expect("partial word exists") |= w << shift;
                self.words.push(w >> (64 - shift));
            }
        }
        self.len += other.len;
        self.words.truncate(words_for(self.len));
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, Error> {
        self.check_len(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitString {
            len: self.len,
            words,
        })
    }

    pub fn xor_assign(&mut self, other: &BitString) -> Result<(), Error> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// GF(2) inner product: parity of `self AND other`.
    pub fn dot(&self, other: &BitString) -> Result<bool, Error> {
        self.check_len(other)?;
        Ok(parity_and(&self.words, &other.words))
    }

    /// Number of positions where the two strings differ.
    pub fn distance(&self, other: &BitString) -> Result<usize, Error> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// The `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let shift = start % 64;
        let first = start / 64;
        let words = (0..words_for(len))
            .map(|i| {
                let lo = self.words[first + i] >> shift;
                let hi = match (shift, self.words.get(first + i + 1)) {
                    (0, _) | (_, None) => 0,
                    (_, Some(w)) => w << (64 - shift),
                };
                lo | hi
            })
            .collect();
        BitString::from_words(len, words)
    }

    /// The bits in reverse order.
    pub fn reversed(&self) -> BitString {
        (0..self.len).rev().map(|i| self.get(i)).collect()
    }

    /// The substring at the given positions, in the order given.
    pub fn select(&self, indices: &[usize]) -> BitString {
        BitString::from_bits(indices.iter().map(|&i| self.get(i)))
    }

    /// LSB-first packed bytes, `ceil(len / 8)` of them.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    /// Inverse of [`BitString::to_bytes`]. Padding bits past `len` must be zero.
    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<BitString, Error> {
        let need = len.div_ceil(8);
        if bytes.len() != need {
            return Err(Error::LengthMismatch {
                expected: need,
                actual: bytes.len(),
            });
        }
        if len % 8 != 0 && bytes[need - 1] >> (len % 8) != 0 {
            return Err(Error::NonzeroPadding);
        }
        let words = bytes
            .chunks(8)
            .map(|chunk| {
                let mut buf = [0u8; 8];
                buf[..chunk.len()].copy_from_slice(chunk);
                u64::from_le_bytes(buf)
            })
            .collect();
        Ok(BitString { len, words })
    }

    fn check_len(&self, other: &BitString) -> Result<(), Error> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn parity_and(a: &[u64], b: &[u64]) -> bool {
    let acc = a.iter().zip(b).fold(0u64, |acc, (x, y)| acc ^ (x & y));
    acc.count_ones() & 1 == 1
}

fn mask_tail(words: &mut [u64], len: usize) {
    if len % 64 != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << (len % 64)) - 1;
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 64;
        write!(f, "BitString({}; ", self.len)?;
        for b in self.iter().take(SHOWN) {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.len > SHOWN {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString::from_bits(iter)
    }
}
