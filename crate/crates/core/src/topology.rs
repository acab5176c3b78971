//! Address mapping, PIM page arithmetic and the de-interleaved word layout.

use serde::{Deserialize, Serialize};

use crate::config::{DramConfig, InterleaveField};
use crate::error::{Error, Result};

/// Location of one 64-bit word in the hierarchy.
///
/// `chip` records which device of the rank holds the word; with the
/// de-interleaving unit every word lives wholly in a single chip.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AddressParts {
    pub channel: u32,
    pub rank: u32,
    pub bank_group: u32,
    pub bank: u32,
    pub subarray: u32,
    pub row_in_subarray: u32,
    pub column: u32,
    pub chip: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PimPageGeometry {
    pub bytes: u64,
    /// Chip rows per page per bank.
    pub rows_spanned: u64,
    /// Banks across the system touched by one page.
    pub banks_covered: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn interleave(cfg: &DramConfig) -> Vec<InterleaveField> {
    if cfg.interleave.is_empty() {
        DramConfig::default_interleave()
    } else {
        cfg.interleave.clone()
    }
}

fn radix(cfg: &DramConfig, f: InterleaveField) -> u64 {
    let low = 1u64 << cfg.column_low_bits;
    match f {
        InterleaveField::Chip => cfg.chips_per_rank as u64,
        InterleaveField::ColumnLow => low,
        InterleaveField::Channel => cfg.channels as u64,
        InterleaveField::Rank => cfg.ranks_per_channel as u64,
        InterleaveField::BankGroup => cfg.bank_groups as u64,
        InterleaveField::Bank => cfg.banks_per_group as u64,
        InterleaveField::ColumnHigh => cfg.columns_per_row as u64 / low,
        InterleaveField::Subarray => cfg.subarrays_per_bank as u64,
        InterleaveField::Row => cfg.rows_per_subarray as u64,
    }
}

pub fn pim_page_geometry(cfg: &DramConfig) -> PimPageGeometry {
    let banks_covered = cfg.total_banks();
    let base = banks_covered * cfg.chip_row_bytes();
    let rows_spanned = match cfg.superpage_bytes {
        Some(sp) if sp > 0 => sp / gcd(base, sp),
        _ => 1,
    };
    PimPageGeometry { bytes: base * rows_spanned, rows_spanned, banks_covered }
}

pub fn pim_page_bytes(cfg: &DramConfig) -> u64 {
    pim_page_geometry(cfg).bytes
}

/// Pages needed to hold `column_bytes`, the last one zero-padded.
pub fn pim_page_count(column_bytes: u64, cfg: &DramConfig) -> u64 {
    column_bytes.div_ceil(pim_page_bytes(cfg))
}

pub fn decompose_address(cfg: &DramConfig, physical: u64) -> Result<AddressParts> {
    if !physical.is_multiple_of(8) {
        return Err(Error::Invalid(format!("address {physical:#x} is not 8-byte aligned")));
    }
    if physical >= cfg.total_capacity_bytes() {
        return Err(Error::Invalid(format!(
            "address {physical:#x} beyond capacity {:#x}",
            cfg.total_capacity_bytes()
        )));
    }
    let mut word = physical / 8;
    let mut parts = AddressParts::default();
    let (mut col_low, mut col_high) = (0u64, 0u64);
    for f in interleave(cfg) {
        let r = radix(cfg, f);
        let digit = word % r;
        word /= r;
        match f {
            InterleaveField::Chip => parts.chip = digit as u32,
            InterleaveField::ColumnLow => col_low = digit,
            InterleaveField::Channel => parts.channel = digit as u32,
            InterleaveField::Rank => parts.rank = digit as u32,
            InterleaveField::BankGroup => parts.bank_group = digit as u32,
            InterleaveField::Bank => parts.bank = digit as u32,
            InterleaveField::ColumnHigh => col_high = digit,
            InterleaveField::Subarray => parts.subarray = digit as u32,
            InterleaveField::Row => parts.row_in_subarray = digit as u32,
        }
    }
    parts.column = ((col_high << cfg.column_low_bits) | col_low) as u32;
    Ok(parts)
}

pub fn compose_address(cfg: &DramConfig, parts: &AddressParts) -> Result<u64> {
    let bounds = [
        ("channel", parts.channel, cfg.channels),
        ("rank", parts.rank, cfg.ranks_per_channel),
        ("bank_group", parts.bank_group, cfg.bank_groups),
        ("bank", parts.bank, cfg.banks_per_group),
        ("subarray", parts.subarray, cfg.subarrays_per_bank),
        ("row_in_subarray", parts.row_in_subarray, cfg.rows_per_subarray),
        ("column", parts.column, cfg.columns_per_row),
        ("chip", parts.chip, cfg.chips_per_rank),
    ];
    for (name, v, bound) in bounds {
        if v >= bound {
            return Err(Error::Invalid(format!("{name} index {v} out of range (< {bound})")));
        }
    }
    let low_mask = (1u64 << cfg.column_low_bits) - 1;
    let mut word = 0u64;
    for f in interleave(cfg).into_iter().rev() {
        let digit = match f {
            InterleaveField::Chip => parts.chip as u64,
            InterleaveField::ColumnLow => parts.column as u64 & low_mask,
            InterleaveField::Channel => parts.channel as u64,
            InterleaveField::Rank => parts.rank as u64,
            InterleaveField::BankGroup => parts.bank_group as u64,
            InterleaveField::Bank => parts.bank as u64,
            InterleaveField::ColumnHigh => parts.column as u64 >> cfg.column_low_bits,
            InterleaveField::Subarray => parts.subarray as u64,
            InterleaveField::Row => parts.row_in_subarray as u64,
        };
        word = word * radix(cfg, f) + digit;
    }
    Ok(word * 8)
}

/// Size of the block the de-interleaving unit operates on: one cache line,
/// or enough lines to hand every chip at least one whole word.
pub fn deinterleave_block_bytes(cfg: &DramConfig) -> usize {
    64usize.max(8 * cfg.chips_per_rank as usize)
}

/// Per-chip contents of a de-interleaved block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipLayout {
    pub device_width: u32,
    /// `chips[k]` lists the whole words held by chip k, in address order.
    pub chips: Vec<Vec<u64>>,
}

impl ChipLayout {
    pub fn beats(&self) -> usize {
        let words = self.chips.first().map_or(0, |c| c.len());
        words * 64 / self.device_width as usize
    }

    /// What a rank-wide read returns at beat `i`: the i-th `device_width`-bit
    /// slice of each chip's word stream.
    pub fn beat(&self, i: usize) -> Vec<u16> {
        let w = self.device_width as usize;
        let mask = (1u64 << w) - 1;
        self.chips
            .iter()
            .map(|words| {
                let bit = i * w;
                ((words[bit / 64] >> (bit % 64)) & mask) as u16
            })
            .collect()
    }

    pub fn chip_of_word(&self, word_index: usize) -> usize {
        word_index % self.chips.len()
    }
}

/// Scatter a block so each little-endian 64-bit word lands in a single chip.
pub fn deinterleave_cacheline(line: &[u8], cfg: &DramConfig) -> Result<ChipLayout> {
    let block = deinterleave_block_bytes(cfg);
    if line.len() != block {
        return Err(Error::LengthMismatch { left: line.len(), right: block });
    }
    if ![4, 8, 16].contains(&cfg.device_width) {
        return Err(Error::Width(cfg.device_width));
    }
    let chips = cfg.chips_per_rank as usize;
    let mut out = vec![Vec::with_capacity(block / 8 / chips); chips];
    for (w, bytes) in line.chunks_exact(8).enumerate() {
        out[w % chips].push(u64::from_le_bytes(bytes.try_into().expect("8-byte chunk")));
    }
    Ok(ChipLayout { device_width: cfg.device_width, chips: out })
}

pub fn reinterleave(layout: &ChipLayout) -> Vec<u8> {
    let chips = layout.chips.len();
    let per_chip = layout.chips.first().map_or(0, |c| c.len());
    let mut out = Vec::with_capacity(chips * per_chip * 8);
    for w in 0..chips * per_chip {
        out.extend_from_slice(&layout.chips[w % chips][w / chips].to_le_bytes());
    }
    out
}
