use serde::{Deserialize, Serialize};

use super::{Bitmap, PackedColumn};
use crate::error::{Error, Result};

/// Comparison against unsigned codes. `Between` is inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredOp {
    Eq(u64),
    Neq(u64),
    Lt(u64),
    Le(u64),
    Gt(u64),
    Ge(u64),
    Between(u64, u64),
}

impl PredOp {
    /// Scalar reference semantics.
    #[inline]
    pub fn eval(&self, v: u64) -> bool {
        match *self {
            PredOp::Eq(a) => v == a,
            PredOp::Neq(a) => v != a,
            PredOp::Lt(a) => v < a,
            PredOp::Le(a) => v <= a,
            PredOp::Gt(a) => v > a,
            PredOp::Ge(a) => v >= a,
            PredOp::Between(lo, hi) => lo <= v && v <= hi,
        }
    }

    fn operands(&self) -> (u64, u64) {
        match *self {
            PredOp::Eq(a) | PredOp::Neq(a) | PredOp::Lt(a) | PredOp::Le(a) | PredOp::Gt(a) | PredOp::Ge(a) => (a, a),
            PredOp::Between(lo, hi) => (lo, hi),
        }
    }
}

/// A code-space predicate on a named column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Predicate {
    pub column: String,
    pub op: PredOp,
}

/// Comparator programmed for one lane width: operands broadcast to every lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfiguredComparator {
    width: u32,
    op: PredOp,
    a: u64,
    b: u64,
    high: u64,
    low: u64,
    /// Masks for the log-step compaction of lane results into adjacent bits.
    compact: [u64; 5],
}

fn broadcast(v: u64, width: u32) -> u64 {
    (0..64 / width).fold(0u64, |acc, lane| acc | v << (lane * width))
}

fn compaction_masks(width: u32) -> [u64; 5] {
    let mut masks = [0u64; 5];
    let (mut g, mut i) = (1u32, 0);
    while g * width < 64 {
        let block = 2 * g * width;
        let keep = (1u64 << (2 * g)) - 1;
        masks[i] = (0..64 / block).fold(0, |acc, k| acc | keep << (k * block));
        g *= 2;
        i += 1;
    }
    masks
}

pub fn compile_predicate(op: PredOp, width: u32) -> Result<ConfiguredComparator> {
    if !super::WIDTHS.contains(&width) {
        return Err(Error::Width(width));
    }
    let (a, b) = op.operands();
    for v in [a, b] {
        if width < 64 && v >> width != 0 {
            return Err(Error::ValueOverflow { index: 0, value: v, width });
        }
    }
    if let PredOp::Between(lo, hi) = op {
        if lo > hi {
            return Err(Error::Invalid(format!("between bounds reversed: {lo} > {hi}")));
        }
    }
    let high = broadcast(1u64 << (width - 1), width);
    Ok(ConfiguredComparator {
        width,
        op,
        a: broadcast(a, width),
        b: broadcast(b, width),
        high,
        low: !high,
        compact: compaction_masks(width),
    })
}

impl ConfiguredComparator {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn op(&self) -> PredOp {
        self.op
    }

    pub fn lanes(&self) -> u32 {
        64 / self.width
    }

    /// Lane-wise `x < y`, reported in each lane's high bit.
    #[inline]
    fn lt(&self, x: u64, y: u64) -> u64 {
        let h = self.high;
        let diff = ((x | h).wrapping_sub(y & !h)) ^ ((x ^ !y) & h);
        ((!x & y) | ((!x | y) & diff)) & h
    }

    #[inline]
    fn eq(&self, x: u64, y: u64) -> u64 {
        let z = x ^ y;
        let nonzero = (((z & self.low).wrapping_add(self.low)) | z) & self.high;
        !nonzero & self.high
    }

    /// High bit of every lane set where the predicate holds.
    #[inline]
    pub fn eval_word(&self, x: u64) -> u64 {
        let h = self.high;
        match self.op {
            PredOp::Eq(_) => self.eq(x, self.a),
            PredOp::Neq(_) => !self.eq(x, self.a) & h,
            PredOp::Lt(_) => self.lt(x, self.a),
            PredOp::Le(_) => !self.lt(self.a, x) & h,
            PredOp::Gt(_) => self.lt(self.a, x),
            PredOp::Ge(_) => !self.lt(x, self.a) & h,
            PredOp::Between(..) => !self.lt(x, self.a) & !self.lt(self.b, x) & h,
        }
    }

    /// Compact the per-lane high bits of `eval_word` into the low `lanes` bits.
    #[inline]
    pub fn lane_bits(&self, x: u64) -> u64 {
        let w = self.width;
        let mut m = self.eval_word(x) >> (w - 1);
        let mut g = 1;
        for &mask in &self.compact[..(64 / w).trailing_zeros() as usize] {
            m = (m | m >> (g * w - g)) & mask;
            g *= 2;
        }
        m
    }
}

/// Evaluate `cmp` over `col`, ANDing into `acc` when given.
///
/// Results are gathered into a 64-bit output buffer and written out one
/// full buffer at a time.
pub fn filter_column(col: &PackedColumn, cmp: &ConfiguredComparator, acc: Option<&Bitmap>) -> Result<Bitmap> {
    if col.width() != cmp.width() {
        return Err(Error::Invalid(format!(
            "comparator width {} does not match column width {}",
            cmp.width(),
            col.width()
        )));
    }
    if let Some(acc) = acc {
        if acc.len() != col.len() {
            return Err(Error::LengthMismatch { left: col.len(), right: acc.len() });
        }
    }
    let lanes = col.lanes_per_word() as u32;
    let words_per_flush = (64 / lanes) as usize;
    let mut out = Vec::with_capacity(col.len().div_ceil(64));
    for chunk in col.words().chunks(words_per_flush) {
        let mut buffer = 0u64;
        for (j, &w) in chunk.iter().enumerate() {
            buffer |= cmp.lane_bits(w) << (j as u32 * lanes);
        }
        let i = out.len();
        if let Some(acc) = acc {
            buffer &= acc.words()[i];
        }
        out.push(buffer);
    }
    Bitmap::from_words(col.len(), out)
}
