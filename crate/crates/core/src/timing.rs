//! Analytic per-page and per-column filter latency at each hierarchy level.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::DramConfig;
use crate::error::{Error, Result};
use crate::topology::pim_page_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PimLevel {
    Channel,
    Rank,
    BankSb,
    BankAb,
    Subarray,
}

impl PimLevel {
    pub const ALL: [PimLevel; 5] =
        [PimLevel::Channel, PimLevel::Rank, PimLevel::BankSb, PimLevel::BankAb, PimLevel::Subarray];

    pub fn as_str(self) -> &'static str {
        match self {
            PimLevel::Channel => "channel",
            PimLevel::Rank => "rank",
            PimLevel::BankSb => "bank_sb",
            PimLevel::BankAb => "bank_ab",
            PimLevel::Subarray => "subarray",
        }
    }
}

impl FromStr for PimLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PimLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Invalid(format!("unknown PIM level {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    #[default]
    Optimistic,
    Pessimistic,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Optimistic => "optimistic",
            Placement::Pessimistic => "pessimistic",
        }
    }
}

impl FromStr for Placement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "optimistic" | "opt" => Ok(Placement::Optimistic),
            "pessimistic" | "pess" => Ok(Placement::Pessimistic),
            _ => Err(Error::Invalid(format!("unknown placement {s:?}"))),
        }
    }
}

/// Whether one command drives a single bank or every bank of a chip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PimMode {
    SingleBank,
    AllBank,
}

impl PimMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PimMode::SingleBank => "sb",
            PimMode::AllBank => "ab",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PimLevelSpec {
    pub level: PimLevel,
    #[serde(default = "one")]
    pub salp: u32,
    #[serde(default)]
    pub placement: Placement,
}

fn one() -> u32 {
    1
}

impl PimLevelSpec {
    pub fn new(level: PimLevel) -> Self {
        PimLevelSpec { level, salp: 1, placement: Placement::Optimistic }
    }

    pub fn subarray(salp: u32, placement: Placement) -> Self {
        PimLevelSpec { level: PimLevel::Subarray, salp, placement }
    }

    /// The six configurations of the single-column filter table.
    pub fn table_grid() -> Vec<PimLevelSpec> {
        vec![
            PimLevelSpec::new(PimLevel::Channel),
            PimLevelSpec::new(PimLevel::Rank),
            PimLevelSpec::new(PimLevel::BankAb),
            PimLevelSpec::subarray(2, Placement::Optimistic),
            PimLevelSpec::subarray(4, Placement::Optimistic),
            PimLevelSpec::subarray(8, Placement::Optimistic),
        ]
    }

    pub fn mode(&self) -> PimMode {
        match self.level {
            PimLevel::BankAb | PimLevel::Subarray => PimMode::AllBank,
            _ => PimMode::SingleBank,
        }
    }

    /// Check the spec against a config; non-subarray specs are normalized
    /// to `salp = 1`, optimistic.
    pub fn validate(self, cfg: &DramConfig) -> Result<Self> {
        if self.level != PimLevel::Subarray {
            return Ok(PimLevelSpec::new(self.level));
        }
        let max = cfg.subarrays_per_bank / 2;
        if self.salp == 0 || self.salp > max {
            return Err(Error::Invalid(format!(
                "salp {} outside 1..={max} (each processing element serves two subarrays)",
                self.salp
            )));
        }
        Ok(self)
    }
}

impl fmt::Display for PimLevelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            PimLevel::Subarray => write!(f, "salp-{}-{}", self.salp, self.placement.as_str()),
            l => f.write_str(l.as_str()),
        }
    }
}

/// Latency components in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub activation: f64,
    pub column_stream: f64,
    pub lisa: f64,
    pub bitmap_writeback: f64,
    pub mode_switch: f64,
    pub total: f64,
}

impl LatencyBreakdown {
    fn from_parts(activation: f64, column_stream: f64, lisa: f64, bitmap_writeback: f64, mode_switch: f64) -> Self {
        LatencyBreakdown {
            activation,
            column_stream,
            lisa,
            bitmap_writeback,
            mode_switch,
            total: activation + column_stream + lisa + bitmap_writeback + mode_switch,
        }
    }

    /// Everything except mode switching.
    pub fn filter_ns(&self) -> f64 {
        self.activation + self.column_stream + self.lisa + self.bitmap_writeback
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(
            self.activation * factor,
            self.column_stream * factor,
            self.lisa * factor,
            self.bitmap_writeback * factor,
            self.mode_switch * factor,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_parts(
            self.activation + other.activation,
            self.column_stream + other.column_stream,
            self.lisa + other.lisa,
            self.bitmap_writeback + other.bitmap_writeback,
            self.mode_switch + other.mode_switch,
        )
    }

    pub fn with_mode_switch(&self, ns: f64) -> Self {
        Self::from_parts(self.activation, self.column_stream, self.lisa, self.bitmap_writeback, ns)
    }
}

/// Hops for data in `subarray_index` to reach a subarray served by a processing element.
///
/// Processing elements sit between subarray pairs `(2p, 2p+1)`. Optimistic
/// placement spaces the `salp` equipped pairs evenly; pessimistic placement
/// is the worst choice of `salp` pairs for this subarray.
pub fn salp_hop_count(subarrays: u32, subarray_index: u32, salp: u32, placement: Placement) -> u32 {
    let pairs = subarrays / 2;
    assert!(subarray_index < subarrays, "subarray index {subarray_index} >= {subarrays}");
    assert!(salp >= 1 && salp <= pairs, "salp {salp} outside 1..={pairs}");
    match placement {
        Placement::Optimistic => (0..salp)
            .map(|j| pair_distance(subarray_index, j * pairs / salp))
            .min()
            .expect("salp >= 1"),
        Placement::Pessimistic => {
            let mut d: Vec<u32> = (0..pairs).map(|p| pair_distance(subarray_index, p)).collect();
            d.sort_unstable_by(|a, b| b.cmp(a));
            d[salp as usize - 1]
        }
    }
}

/// Subarray hops from `i` to the nearer subarray of pair `p`.
pub fn pair_distance(i: u32, p: u32) -> u32 {
    if i / 2 == p {
        0
    } else if 2 * p > i {
        2 * p - i
    } else {
        i - (2 * p + 1)
    }
}

/// One hop costs a fixed fraction of a row activation (tRCD + tRAS).
pub fn lisa_transfer_latency(cfg: &DramConfig, hops: u32) -> f64 {
    let activation = cfg.cycles_to_ns((cfg.timing.t_rcd + cfg.timing.t_ras) as f64);
    hops as f64 * activation * cfg.timing.lisa_hop_fraction
}

/// Latency to filter one PIM page.
pub fn page_filter_latency(cfg: &DramConfig, spec: &PimLevelSpec) -> Result<LatencyBreakdown> {
    let spec = spec.validate(cfg)?;
    let t = &cfg.timing;
    let ns = |c: f64| cfg.cycles_to_ns(c);
    let precharge_activate = (t.t_rp + t.t_rcd) as f64;
    let columns = cfg.columns_per_row as f64;
    let writeback = t.t_ccd_s as f64;

    let ab = || {
        LatencyBreakdown::from_parts(
            ns(precharge_activate),
            ns(columns * t.t_ccd_s as f64),
            0.0,
            ns(writeback),
            0.0,
        )
    };
    // Consecutive reads from the same bank obey the long column delay.
    let sb = || {
        let banks = cfg.banks_per_chip() as f64;
        LatencyBreakdown::from_parts(
            ns(banks * precharge_activate),
            ns(banks * columns * t.t_ccd_l as f64),
            0.0,
            ns(banks * writeback),
            0.0,
        )
    };
    Ok(match spec.level {
        PimLevel::BankAb => ab(),
        PimLevel::BankSb | PimLevel::Rank => sb(),
        PimLevel::Channel => sb().scale(cfg.ranks_per_channel as f64),
        PimLevel::Subarray => {
            let k = spec.salp as f64;
            let hops = match spec.placement {
                Placement::Optimistic => 0,
                Placement::Pessimistic => (0..cfg.subarrays_per_bank)
                    .map(|i| salp_hop_count(cfg.subarrays_per_bank, i, spec.salp, Placement::Pessimistic))
                    .max()
                    .unwrap_or(0),
            };
            LatencyBreakdown::from_parts(
                ns(precharge_activate) / k,
                ns(columns * t.subarray_word_cycles + t.subarray_extra_cycles) / k,
                lisa_transfer_latency(cfg, hops),
                ns(writeback) / k,
                0.0,
            )
        }
    })
}

/// Enter plus exit.
pub fn mode_switch_overhead(cfg: &DramConfig) -> f64 {
    2.0 * cfg.mode_switch_ns
}

/// `passes` full-column sweeps over a packed column plus one mode-switch pair.
pub fn column_filter_latency(
    cfg: &DramConfig,
    spec: &PimLevelSpec,
    packed_bytes: u64,
    passes: u32,
) -> Result<LatencyBreakdown> {
    if passes == 0 {
        return Err(Error::Invalid("passes must be at least 1".into()));
    }
    let page = page_filter_latency(cfg, spec)?;
    let pages = pim_page_count(packed_bytes, cfg) as f64;
    Ok(page.scale(passes as f64 * pages).with_mode_switch(mode_switch_overhead(cfg)))
}

/// Smallest page count whose filter time is at least 100x the mode-switch
/// overhead, i.e. keeps that overhead below 1% of the filter time.
pub fn pages_to_amortize(cfg: &DramConfig, spec: &PimLevelSpec, passes: u32) -> Result<u64> {
    let per_page = page_filter_latency(cfg, spec)?.filter_ns() * passes.max(1) as f64;
    Ok((100.0 * mode_switch_overhead(cfg) / per_page).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MICRO_BYTES: u64 = 600_038_146 * 2;

    fn cfg() -> DramConfig {
        DramConfig::default()
    }

    #[test]
    fn bank_ab_row_latency() {
        let b = page_filter_latency(&cfg(), &PimLevelSpec::new(PimLevel::BankAb)).unwrap();
        assert!((b.total - 350.0).abs() < 1e-9, "{}", b.total);
        assert!((340.0..=420.0).contains(&b.total));
    }

    #[test]
    fn channel_is_ranks_times_rank() {
        let c = cfg();
        let rank = page_filter_latency(&c, &PimLevelSpec::new(PimLevel::Rank)).unwrap();
        let chan = page_filter_latency(&c, &PimLevelSpec::new(PimLevel::Channel)).unwrap();
        assert_eq!(chan.total, rank.total * c.ranks_per_channel as f64);
    }

    #[test]
    fn salp_halving_is_exact() {
        let c = cfg();
        let l = |k| page_filter_latency(&c, &PimLevelSpec::subarray(k, Placement::Optimistic)).unwrap().total;
        assert_eq!(l(4), l(2) / 2.0);
        assert_eq!(l(8), l(4) / 2.0);
    }

    #[test]
    fn microbenchmark_ordering_and_ratio() {
        let c = cfg();
        let totals: Vec<f64> = PimLevelSpec::table_grid()
            .iter()
            .map(|s| column_filter_latency(&c, s, MICRO_BYTES, 2).unwrap().total)
            .collect();
        for w in totals.windows(2) {
            assert!(w[0] > w[1], "{totals:?}");
        }
        let ratio = totals[1] / totals[2];
        assert!((ratio / 29.4 - 1.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn empty_column_costs_mode_switch_only() {
        let c = cfg();
        let l = column_filter_latency(&c, &PimLevelSpec::new(PimLevel::BankAb), 0, 1).unwrap();
        assert_eq!(l.total, mode_switch_overhead(&c));
        assert_eq!(l.filter_ns(), 0.0);
    }

    #[test]
    fn zero_passes_rejected() {
        assert!(column_filter_latency(&cfg(), &PimLevelSpec::new(PimLevel::Rank), 10, 0).is_err());
    }

    #[test]
    fn invalid_salp_rejected() {
        let c = cfg();
        assert!(page_filter_latency(&c, &PimLevelSpec::subarray(9, Placement::Optimistic)).is_err());
        assert!(page_filter_latency(&c, &PimLevelSpec::subarray(0, Placement::Optimistic)).is_err());
        // salp is ignored away from the subarray level.
        let spec = PimLevelSpec { level: PimLevel::Rank, salp: 99, placement: Placement::Pessimistic };
        assert_eq!(spec.validate(&c).unwrap(), PimLevelSpec::new(PimLevel::Rank));
    }

    #[test]
    fn lisa_linear() {
        let c = cfg();
        assert_eq!(lisa_transfer_latency(&c, 0), 0.0);
        let one = lisa_transfer_latency(&c, 1);
        assert!((one - (22.0 + 52.0) * 0.625 / 8.0).abs() < 1e-12);
        assert!((lisa_transfer_latency(&c, 8) - 8.0 * one).abs() < 1e-12);
    }

    #[test]
    fn full_salp_needs_no_hops() {
        for i in 0..16 {
            for p in [Placement::Optimistic, Placement::Pessimistic] {
                assert_eq!(salp_hop_count(16, i, 8, p), 0);
            }
        }
    }

    fn brute_pessimistic(subarrays: u32, i: u32, k: u32) -> u32 {
        let pairs = subarrays / 2;
        let mut best = 0;
        for mask in 0u32..(1 << pairs) {
            if mask.count_ones() != k {
                continue;
            }
            let nearest = (0..pairs)
                .filter(|p| mask & (1 << p) != 0)
                .map(|p| pair_distance(i, p))
                .min()
                .unwrap();
            best = best.max(nearest);
        }
        best
    }

    fn brute_distance(i: u32, p: u32) -> u32 {
        [2 * p, 2 * p + 1].iter().map(|&s| s.abs_diff(i)).min().unwrap()
    }

    #[test]
    fn pessimistic_matches_exhaustive_placement() {
        for k in 1..=8 {
            for i in 0..16 {
                assert_eq!(
                    salp_hop_count(16, i, k, Placement::Pessimistic),
                    brute_pessimistic(16, i, k),
                    "i={i} k={k}"
                );
            }
        }
        assert_eq!(salp_hop_count(16, 0, 1, Placement::Pessimistic), 14);
    }

    #[test]
    fn pair_distance_matches_definition() {
        for i in 0..16 {
            for p in 0..8 {
                assert_eq!(pair_distance(i, p), brute_distance(i, p));
            }
        }
    }

    #[test]
    fn optimistic_never_exceeds_pessimistic() {
        for k in 1..=8 {
            for i in 0..16 {
                assert!(
                    salp_hop_count(16, i, k, Placement::Optimistic) <= salp_hop_count(16, i, k, Placement::Pessimistic)
                );
            }
        }
    }

    #[test]
    fn amortization_threshold() {
        let c = cfg();
        let spec = PimLevelSpec::new(PimLevel::BankAb);
        let n = pages_to_amortize(&c, &spec, 1).unwrap();
        let page = pim_page_count(1, &c) * crate::topology::pim_page_bytes(&c);
        let at = |pages: u64| column_filter_latency(&c, &spec, pages * page, 1).unwrap();
        let ok = at(n);
        assert!(ok.mode_switch <= 0.01 * ok.filter_ns() + 1e-9);
        let short = at(n - 1);
        assert!(short.mode_switch > 0.01 * short.filter_ns());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("bank_ab".parse::<PimLevel>().unwrap(), PimLevel::BankAb);
        assert!("dimm".parse::<PimLevel>().is_err());
        assert_eq!(PimLevelSpec::subarray(4, Placement::Pessimistic).to_string(), "salp-4-pessimistic");
    }
}
