use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Selection result, one bit per element; bits past `len` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bitmap {
    len: usize,
    words: Vec<u64>,
}

impl Bitmap {
    pub fn zeros(len: usize) -> Self {
        Bitmap { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bitmap { len, words: vec![u64::MAX; len.div_ceil(64)] };
        b.clear_tail();
        b
    }

    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != len.div_ceil(64) {
            return Err(Error::LengthMismatch { left: words.len(), right: len.div_ceil(64) });
        }
        let mut b = Bitmap { len, words };
        b.clear_tail();
        Ok(b)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Bitmap::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            if v {
                b.set(i);
            }
        }
        b
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bitmap::zeros(len);
        for i in indices {
            b.set(i);
        }
        b
    }

    fn clear_tail(&mut self) {
        let used = self.len % 64;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
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

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn zip(&self, other: &Bitmap, f: impl Fn(u64, u64) -> u64) -> Result<Bitmap> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { left: self.len, right: other.len });
        }
        let words = self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect();
        Ok(Bitmap { len: self.len, words })
    }

    pub fn and(&self, other: &Bitmap) -> Result<Bitmap> {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Bitmap) -> Result<Bitmap> {
        self.zip(other, |a, b| a | b)
    }

    pub fn not(&self) -> Bitmap {
        let mut b = Bitmap { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        b.clear_tail();
        b
    }

    /// Set-bit indices in ascending order, one trailing-zero count per hit.
    pub fn iter_set_bits(&self) -> SetBits<'_> {
        SetBits { words: &self.words, index: 0, current: self.words.first().copied().unwrap_or(0) }
    }
}

pub struct SetBits<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for SetBits<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
        let tz = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.index * 64 + tz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_tail_clear() {
        let b = Bitmap::ones(70);
        assert_eq!(b.popcount(), 70);
        assert_eq!(b.words()[1], (1 << 6) - 1);
        assert_eq!(b.not().popcount(), 0);
    }

    #[test]
    fn set_bits_ascending() {
        let b = Bitmap::from_indices(200, [1, 3, 64, 127, 199]);
        assert_eq!(b.iter_set_bits().collect::<Vec<_>>(), vec![1, 3, 64, 127, 199]);
        assert_eq!(Bitmap::zeros(0).iter_set_bits().count(), 0);
        assert_eq!(Bitmap::zeros(1000).iter_set_bits().count(), 0);
    }

    #[test]
    fn identities() {
        let a = Bitmap::from_indices(100, [0, 5, 99]);
        assert_eq!(a.and(&Bitmap::ones(100)).unwrap(), a);
        assert_eq!(a.and(&a.not()).unwrap().popcount(), 0);
        assert_eq!(a.or(&a.not()).unwrap(), Bitmap::ones(100));
        assert!(a.and(&Bitmap::ones(99)).is_err());
    }

    #[test]
    fn from_words_masks_tail() {
        let b = Bitmap::from_words(3, vec![u64::MAX]).unwrap();
        assert_eq!(b.popcount(), 3);
        assert!(Bitmap::from_words(65, vec![0]).is_err());
    }
}
