use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lane widths the comparator block can be configured for.
pub const WIDTHS: [u32; 6] = [2, 4, 8, 16, 32, 64];

/// Fixed-width unsigned codes, `64 / width` per word, element 0 in the low bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedColumn {
    width: u32,
    len: usize,
    words: Vec<u64>,
}

fn check_width(width: u32) -> Result<()> {
    if WIDTHS.contains(&width) {
        Ok(())
    } else {
        Err(Error::Width(width))
    }
}

fn lane_mask(width: u32) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Smallest supported width able to represent `max_code`.
pub fn min_width(max_code: u64) -> u32 {
    WIDTHS
        .into_iter()
        .find(|&w| w == 64 || max_code < (1u64 << w))
        .expect("64 bits hold any u64")
}

pub fn pack_column(values: &[u64], width: u32) -> Result<PackedColumn> {
    check_width(width)?;
    let mask = lane_mask(width);
    let lanes = (64 / width) as usize;
    let mut words = vec![0u64; values.len().div_ceil(lanes)];
    for (i, &v) in values.iter().enumerate() {
        if v & !mask != 0 {
            return Err(Error::ValueOverflow { index: i, value: v, width });
        }
        words[i / lanes] |= v << ((i % lanes) as u32 * width);
    }
    Ok(PackedColumn { width, len: values.len(), words })
}

pub fn unpack_column(col: &PackedColumn) -> Vec<u64> {
    (0..col.len).map(|i| col.get(i)).collect()
}

impl PackedColumn {
    /// Rebuild from raw parts, checking the word count and the zero tail.
    pub fn from_words(width: u32, len: usize, words: Vec<u64>) -> Result<Self> {
        check_width(width)?;
        let lanes = (64 / width) as usize;
        if words.len() != len.div_ceil(lanes) {
            return Err(Error::LengthMismatch { left: words.len(), right: len.div_ceil(lanes) });
        }
        let used = len % lanes;
        if used != 0 {
            let tail = *words.last().expect("non-empty when used > 0") >> (used as u32 * width);
            if tail != 0 {
                return Err(Error::Format("packed column has non-zero tail slots".into()));
            }
        }
        Ok(PackedColumn { width, len, words })
    }

    pub fn width(&self) -> u32 {
        self.width
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

    pub fn lanes_per_word(&self) -> usize {
        (64 / self.width) as usize
    }

    /// Packed size in bytes.
    pub fn bytes(&self) -> u64 {
        self.words.len() as u64 * 8
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let lanes = self.lanes_per_word();
        (self.words[i / lanes] >> ((i % lanes) as u32 * self.width)) & lane_mask(self.width)
    }

    pub fn max_code(&self) -> u64 {
        (0..self.len).map(|i| self.get(i)).max().unwrap_or(0)
    }
}

/// Monotone map from `f64` to `u64`: `a < b` implies `f(a) < f(b)` (NaN excluded).
pub fn f64_to_ordered(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

pub fn ordered_to_f64(code: u64) -> f64 {
    if code >> 63 == 1 {
        f64::from_bits(code & !(1 << 63))
    } else {
        f64::from_bits(!code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_example() {
        let col = pack_column(&[1, 5, 9, 5], 16).unwrap();
        assert_eq!(col.words(), &[0x0005_0009_0005_0001]);
        assert_eq!(unpack_column(&col), vec![1, 5, 9, 5]);
    }

    #[test]
    fn overflow_rejected() {
        match pack_column(&[1, 70_000], 16) {
            Err(Error::ValueOverflow { index: 1, value: 70_000, width: 16 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(pack_column(&[1], 12), Err(Error::Width(12))));
    }

    #[test]
    fn word_count_and_tail() {
        let col = pack_column(&[3; 33], 2).unwrap();
        assert_eq!(col.words().len(), 2);
        assert_eq!(col.words()[1], 3);
        assert!(PackedColumn::from_words(2, 33, vec![0, 0b1100]).is_err());
        assert!(PackedColumn::from_words(2, 33, vec![0]).is_err());
    }

    #[test]
    fn width_64() {
        let v = vec![u64::MAX, 0, 12345];
        assert_eq!(unpack_column(&pack_column(&v, 64).unwrap()), v);
    }

    #[test]
    fn min_width_steps() {
        assert_eq!(min_width(0), 2);
        assert_eq!(min_width(3), 2);
        assert_eq!(min_width(4), 4);
        assert_eq!(min_width(255), 8);
        assert_eq!(min_width(256), 16);
        assert_eq!(min_width(65_535), 16);
        assert_eq!(min_width(65_536), 32);
        assert_eq!(min_width(u64::MAX), 64);
    }

    #[test]
    fn float_order() {
        let xs = [f64::NEG_INFINITY, -1e300, -2.5, -0.0, 0.0, 1e-300, 3.0, f64::INFINITY];
        for w in xs.windows(2) {
            assert!(f64_to_ordered(w[0]) <= f64_to_ordered(w[1]), "{w:?}");
        }
        for x in xs {
            assert_eq!(ordered_to_f64(f64_to_ordered(x)).to_bits(), x.to_bits());
        }
    }
}
