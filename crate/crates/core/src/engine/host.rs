//! Analytic host-side time model.

use serde::{Deserialize, Serialize};

use crate::config::DramConfig;

/// Modeled host time per operator, in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HostCost {
    pub fixed: f64,
    /// Sequential scan of filter columns (CPU-only baseline).
    pub scan: f64,
    /// Bitmap-driven random gather.
    pub gather: f64,
    pub join: f64,
    pub aggregate: f64,
}

impl HostCost {
    pub fn total(&self) -> f64 {
        self.fixed + self.scan + self.gather + self.join + self.aggregate
    }
}

/// Fixed overhead, plus the gather at the derated bandwidth, plus an
/// aggregation term linear in the gathered rows.
pub fn cpu_cost_model(rows_gathered: u64, bytes_per_row: f64, cfg: &DramConfig) -> f64 {
    let h = &cfg.host;
    h.fixed_overhead_ns + gather_ns(rows_gathered, bytes_per_row, cfg) + h.aggregate_ns_per_row * rows_gathered as f64
}

pub fn gather_ns(rows: u64, bytes_per_row: f64, cfg: &DramConfig) -> f64 {
    // GB/s equals bytes per ns.
    rows as f64 * bytes_per_row * cfg.host.random_derate / cfg.host.seq_bandwidth_gbps
}

pub fn scan_ns(bytes: u64, cfg: &DramConfig) -> f64 {
    bytes as f64 / cfg.host.seq_bandwidth_gbps
}

/// Host operator costs for a query gathering `rows` rows through `joins` probes each.
pub fn host_cost(rows: u64, bytes_per_row: f64, joins: usize, scan_bytes: u64, cfg: &DramConfig) -> HostCost {
    HostCost {
        fixed: cfg.host.fixed_overhead_ns,
        scan: scan_ns(scan_bytes, cfg),
        gather: gather_ns(rows, bytes_per_row, cfg),
        join: rows as f64 * joins as f64 * cfg.host.probe_ns_per_row,
        aggregate: rows as f64 * cfg.host.aggregate_ns_per_row,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rows_is_fixed_overhead() {
        let cfg = DramConfig::default();
        assert_eq!(cpu_cost_model(0, 12.0, &cfg), cfg.host.fixed_overhead_ns);
    }

    #[test]
    fn variable_term_is_linear() {
        let cfg = DramConfig::default();
        let f = cfg.host.fixed_overhead_ns;
        let one = cpu_cost_model(1000, 12.0, &cfg) - f;
        let two = cpu_cost_model(2000, 12.0, &cfg) - f;
        assert!((two - 2.0 * one).abs() < 1e-9 * two);
    }

    #[test]
    fn breakdown_sums() {
        let cfg = DramConfig::default();
        let c = host_cost(10, 4.0, 2, 1 << 20, &cfg);
        assert!((c.total() - (c.fixed + c.scan + c.gather + c.join + c.aggregate)).abs() < 1e-9);
        assert!((c.fixed + c.gather + c.aggregate - cpu_cost_model(10, 4.0, &cfg)).abs() < 1e-9);
    }
}
