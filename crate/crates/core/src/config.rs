//! DRAM system configuration.
//!
//! [`DramConfig`] carries the hierarchy geometry together with the timing,
//! power, area and host parameters consumed by every model in the crate.
//! The shipped default corresponds to an 8-channel, 4-rank DDR4-3200 system
//! built from 8Gb x8 devices (`fixtures/ddr4_8gb_x8_3200.json`).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};

/// The JSON text of the default configuration.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../fixtures/ddr4_8gb_x8_3200.json");

/// Prefix of environment variables that override configuration fields.
///
/// Nested fields are separated by a double underscore, e.g.
/// `PIMDB_CFG__TIMING__T_RCD=24` or `PIMDB_CFG__CHANNELS=4`.
pub const ENV_PREFIX: &str = "PIMDB_CFG__";

/// JEDEC timing parameters in DRAM clock cycles, plus the subarray
/// processing-element cadence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingParams {
    pub t_ccd_s: u32,
    pub t_ccd_l: u32,
    pub t_rcd: u32,
    pub t_rp: u32,
    pub t_ras: u32,
    pub t_cl: u32,
    /// Clock cycles per 64-bit word at a subarray processing element.
    pub subarray_word_cycles: f64,
    /// Extra per-row cycles at the subarray level. Calibration knob, zero by default.
    pub subarray_extra_cycles: f64,
    /// Cost of one inter-subarray hop as a fraction of a row activation (tRCD + tRAS).
    pub lisa_hop_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerParams {
    /// Active power of one filtering unit, in microwatts.
    pub bfu_active_uw: f64,
    /// System-wide DRAM power during normal operation, in watts.
    pub dram_normal_w: f64,
    /// Peak DRAM power multiplier while operating in all-bank mode.
    pub ab_peak_multiplier: f64,
    /// Host CPU power while active, in watts.
    pub cpu_active_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaParams {
    pub bfu_mm2: f64,
    pub walker_mm2: f64,
    /// Reference DRAM chip area that overheads are expressed against.
    pub chip_reference_mm2: f64,
}

/// Analytic host-side cost parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostParams {
    /// Sequential scan bandwidth in GB/s (1 GB = 1e9 bytes).
    pub seq_bandwidth_gbps: f64,
    /// Divisor applied to the sequential bandwidth for bitmap-driven gathers.
    pub random_derate: f64,
    pub fixed_overhead_ns: f64,
    pub aggregate_ns_per_row: f64,
    pub probe_ns_per_row: f64,
}

/// One digit of the physical address decomposition, least significant first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterleaveField {
    Chip,
    ColumnLow,
    Channel,
    Rank,
    BankGroup,
    Bank,
    ColumnHigh,
    Subarray,
    Row,
}

impl InterleaveField {
    pub const ALL: [InterleaveField; 9] = [
        InterleaveField::Chip,
        InterleaveField::ColumnLow,
        InterleaveField::Channel,
        InterleaveField::Rank,
        InterleaveField::BankGroup,
        InterleaveField::Bank,
        InterleaveField::ColumnHigh,
        InterleaveField::Subarray,
        InterleaveField::Row,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DramConfig {
    pub name: String,
    pub channels: u32,
    pub ranks_per_channel: u32,
    pub chips_per_rank: u32,
    /// Device width in bits (x4, x8 or x16).
    pub device_width: u32,
    pub bank_groups: u32,
    pub banks_per_group: u32,
    pub subarrays_per_bank: u32,
    pub rows_per_subarray: u32,
    /// 64-bit column positions per chip row.
    pub columns_per_row: u32,
    /// Low column bits placed below the channel digit in the interleave.
    #[serde(default)]
    pub column_low_bits: u32,
    pub clock_period_ns: f64,
    pub timing: TimingParams,
    pub power: PowerParams,
    pub area: AreaParams,
    pub host: HostParams,
    /// One-way PIM mode switch cost (enter or exit), in nanoseconds.
    pub mode_switch_ns: f64,
    /// OS superpage size a PIM page must be a multiple of, if any.
    #[serde(default)]
    pub superpage_bytes: Option<u64>,
    /// Address digits from least to most significant. Empty means the default order.
    #[serde(default)]
    pub interleave: Vec<InterleaveField>,
}

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl Default for DramConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CONFIG_JSON).expect("bundled default config parses")
    }
}

impl DramConfig {
    pub fn default_interleave() -> Vec<InterleaveField> {
        InterleaveField::ALL.to_vec()
    }

    pub fn banks_per_chip(&self) -> u32 {
        self.bank_groups * self.banks_per_group
    }

    pub fn rows_per_bank(&self) -> u64 {
        self.subarrays_per_bank as u64 * self.rows_per_subarray as u64
    }

    /// Bytes held by one row of one bank in one chip.
    pub fn chip_row_bytes(&self) -> u64 {
        self.columns_per_row as u64 * 8
    }

    /// Physical banks across the whole system.
    pub fn total_banks(&self) -> u64 {
        self.channels as u64
            * self.ranks_per_channel as u64
            * self.chips_per_rank as u64
            * self.banks_per_chip() as u64
    }

    pub fn total_capacity_bytes(&self) -> u64 {
        self.total_banks() * self.rows_per_bank() * self.chip_row_bytes()
    }

    pub fn cycles_to_ns(&self, cycles: f64) -> f64 {
        cycles * self.clock_period_ns
    }

    /// Parse a JSON document, apply environment overrides, and validate.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut doc: Json = serde_json::from_str(text)?;
        apply_env_overrides(&mut doc, std::env::vars())?;
        let cfg: DramConfig = serde_json::from_value(doc)?;
        cfg.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// The bundled default with environment overrides applied.
    pub fn from_env_default() -> Result<Self> {
        Self::from_json_str(DEFAULT_CONFIG_JSON)
    }

    /// Check every invariant; returns the normalized config or all violations.
    pub fn validate(mut self) -> Result<Self> {
        let issues = self.issues();
        if !issues.is_empty() {
            return Err(Error::Config(issues));
        }
        if self.interleave.is_empty() {
            self.interleave = Self::default_interleave();
        }
        Ok(self)
    }

    fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut push = |field: &'static str, message: String| out.push(ConfigIssue { field, message });

        let counts = [
            ("channels", self.channels),
            ("ranks_per_channel", self.ranks_per_channel),
            ("chips_per_rank", self.chips_per_rank),
            ("device_width", self.device_width),
            ("bank_groups", self.bank_groups),
            ("banks_per_group", self.banks_per_group),
            ("subarrays_per_bank", self.subarrays_per_bank),
            ("rows_per_subarray", self.rows_per_subarray),
            ("columns_per_row", self.columns_per_row),
        ];
        for (field, v) in counts {
            if v == 0 {
                push(field, "must be at least 1".into());
            }
        }
        if self.channels != 0 && !self.channels.is_power_of_two() {
            push("channels", format!("{} is not a power of two", self.channels));
        }
        if self.ranks_per_channel != 0 && !self.ranks_per_channel.is_power_of_two() {
            push(
                "ranks_per_channel",
                format!("{} is not a power of two", self.ranks_per_channel),
            );
        }
        let banks = self.banks_per_chip();
        if banks != 0 && !banks.is_power_of_two() {
            push("banks_per_group", format!("{banks} banks per chip is not a power of two"));
        }
        if ![4, 8, 16].contains(&self.device_width) {
            push("device_width", format!("{} is not one of 4, 8, 16", self.device_width));
        }
        if self.chips_per_rank * self.device_width != 64 {
            push(
                "chips_per_rank",
                format!(
                    "{} chips x {} bits = {} (a rank must deliver 64 bits per beat)",
                    self.chips_per_rank,
                    self.device_width,
                    self.chips_per_rank * self.device_width
                ),
            );
        }
        if !self.subarrays_per_bank.is_multiple_of(2) {
            push(
                "subarrays_per_bank",
                format!("{} is odd; processing elements are shared by subarray pairs", self.subarrays_per_bank),
            );
        }
        if self.column_low_bits >= 32
            || (self.columns_per_row != 0 && !self.columns_per_row.is_multiple_of(1u32 << self.column_low_bits.min(31)))
        {
            push(
                "column_low_bits",
                format!("2^{} does not divide columns_per_row", self.column_low_bits),
            );
        }
        if !(self.clock_period_ns > 0.0 && self.clock_period_ns.is_finite()) {
            push("clock_period_ns", "must be positive".into());
        }
        let t = &self.timing;
        if t.t_ccd_s == 0 || t.t_ccd_l == 0 {
            push("timing", "column-to-column delays must be at least one cycle".into());
        }
        if !(t.subarray_word_cycles > 0.0 && t.subarray_word_cycles.is_finite()) {
            push("timing.subarray_word_cycles", "must be positive".into());
        }
        if !(t.subarray_extra_cycles >= 0.0 && t.subarray_extra_cycles.is_finite()) {
            push("timing.subarray_extra_cycles", "must be non-negative".into());
        }
        if !(t.lisa_hop_fraction >= 0.0 && t.lisa_hop_fraction.is_finite()) {
            push("timing.lisa_hop_fraction", "must be non-negative".into());
        }
        let nonneg = [
            ("mode_switch_ns", self.mode_switch_ns),
            ("power.bfu_active_uw", self.power.bfu_active_uw),
            ("power.dram_normal_w", self.power.dram_normal_w),
            ("power.cpu_active_w", self.power.cpu_active_w),
            ("area.bfu_mm2", self.area.bfu_mm2),
            ("area.walker_mm2", self.area.walker_mm2),
            ("host.fixed_overhead_ns", self.host.fixed_overhead_ns),
            ("host.aggregate_ns_per_row", self.host.aggregate_ns_per_row),
            ("host.probe_ns_per_row", self.host.probe_ns_per_row),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                push(field, format!("{v} must be a finite non-negative number"));
            }
        }
        let positive = [
            ("power.ab_peak_multiplier", self.power.ab_peak_multiplier),
            ("area.chip_reference_mm2", self.area.chip_reference_mm2),
            ("host.seq_bandwidth_gbps", self.host.seq_bandwidth_gbps),
            ("host.random_derate", self.host.random_derate),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                push(field, format!("{v} must be positive"));
            }
        }
        if let Some(sp) = self.superpage_bytes {
            if sp == 0 {
                push("superpage_bytes", "must be positive".into());
            }
        }
        if !self.interleave.is_empty() {
            let mut seen = Vec::new();
            for f in &self.interleave {
                if seen.contains(f) {
                    push("interleave", format!("{f:?} appears twice"));
                }
                seen.push(*f);
            }
            for f in InterleaveField::ALL {
                if !seen.contains(&f) {
                    push("interleave", format!("{f:?} missing"));
                }
            }
        }
        out
    }
}

/// Apply `PIMDB_CFG__A__B=value` style overrides to a config document.
///
/// Values that parse as JSON are inserted as such; anything else is taken
/// as a string.
pub fn apply_env_overrides<I>(doc: &mut Json, vars: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<_> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key[ENV_PREFIX.len()..]
            .split("__")
            .map(|s| s.to_ascii_lowercase())
            .collect();
        let value = serde_json::from_str(&raw).unwrap_or(Json::String(raw.clone()));
        let mut node = &mut *doc;
        for (i, seg) in path.iter().enumerate() {
            let obj = node.as_object_mut().ok_or_else(|| {
                Error::Invalid(format!("override {key}: {seg} is not inside an object"))
            })?;
            if !obj.contains_key(seg) {
                return Err(Error::Invalid(format!("override {key}: unknown field {seg}")));
            }
            if i + 1 == path.len() {
                obj.insert(seg.clone(), value.clone());
                break;
            }
            node = obj.get_mut(seg).expect("checked above");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issues_for(cfg: DramConfig) -> Vec<ConfigIssue> {
        match cfg.validate() {
            Err(Error::Config(v)) => v,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn default_is_valid() {
        let cfg = DramConfig::default().validate().unwrap();
        assert_eq!(cfg.channels, 8);
        assert_eq!(cfg.ranks_per_channel, 4);
        assert_eq!(cfg.bank_groups, 4);
        assert_eq!(cfg.banks_per_group, 4);
        assert_eq!(cfg.subarrays_per_bank, 16);
        assert_eq!(cfg.columns_per_row, 128);
        assert_eq!(cfg.interleave, DramConfig::default_interleave());
    }

    #[test]
    fn default_row_miss_near_hundred_cycles() {
        let t = DramConfig::default().timing;
        let row_miss = t.t_rp + t.t_rcd + t.t_cl;
        assert!((50..=200).contains(&row_miss), "{row_miss}");
    }

    #[test]
    fn x16_with_eight_chips_rejected() {
        let cfg = DramConfig { device_width: 16, ..DramConfig::default() };
        let issues = issues_for(cfg);
        assert!(issues.iter().any(|i| i.field == "chips_per_rank"), "{issues:?}");
    }

    #[test]
    fn three_channels_rejected() {
        let cfg = DramConfig { channels: 3, ..DramConfig::default() };
        let issues = issues_for(cfg);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].field, "channels");
    }

    #[test]
    fn every_violation_reported() {
        let cfg = DramConfig {
            channels: 3,
            rows_per_subarray: 0,
            subarrays_per_bank: 15,
            ..DramConfig::default()
        };
        let fields: Vec<_> = issues_for(cfg).into_iter().map(|i| i.field).collect();
        assert!(fields.contains(&"channels"));
        assert!(fields.contains(&"rows_per_subarray"));
        assert!(fields.contains(&"subarrays_per_bank"));
    }

    #[test]
    fn duplicate_interleave_field_rejected() {
        let mut order = DramConfig::default_interleave();
        order[1] = InterleaveField::Chip;
        let cfg = DramConfig { interleave: order, ..DramConfig::default() };
        let issues = issues_for(cfg);
        assert!(issues.iter().all(|i| i.field == "interleave"));
        assert_eq!(issues.len(), 2);
    }

    #[test]
    fn env_override_nested_field() {
        let mut doc: Json = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        let vars = vec![
            ("PIMDB_CFG__TIMING__T_RCD".to_string(), "24".to_string()),
            ("PIMDB_CFG__NAME".to_string(), "custom".to_string()),
            ("UNRELATED".to_string(), "1".to_string()),
        ];
        apply_env_overrides(&mut doc, vars).unwrap();
        let cfg: DramConfig = serde_json::from_value(doc).unwrap();
        assert_eq!(cfg.timing.t_rcd, 24);
        assert_eq!(cfg.name, "custom");
    }

    #[test]
    fn env_override_unknown_field_is_error() {
        let mut doc: Json = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        let vars = vec![("PIMDB_CFG__NOPE".to_string(), "1".to_string())];
        assert!(apply_env_overrides(&mut doc, vars).is_err());
    }
}
