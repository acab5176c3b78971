//! Functional model of the bank-level filtering unit.
//!
//! Columns are bit-packed into 64-bit words; a [`ConfiguredComparator`]
//! evaluates every lane of a word at once and the resulting bits are
//! collected into a [`Bitmap`], optionally ANDed with an earlier result.

mod bitmap;
mod compare;
mod packed;

pub use bitmap::{Bitmap, SetBits};
pub use compare::{compile_predicate, filter_column, ConfiguredComparator, PredOp, Predicate};
pub use packed::{f64_to_ordered, min_width, ordered_to_f64, pack_column, unpack_column, PackedColumn, WIDTHS};
