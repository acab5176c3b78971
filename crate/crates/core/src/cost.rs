//! Area, peak-power and energy accounting.

use serde::{Deserialize, Serialize};

use crate::config::DramConfig;
use crate::engine::ExecutionReport;
use crate::error::{Error, Result};
use crate::timing::{PimLevel, PimLevelSpec, PimMode};

/// On-chip area added by the filtering logic, as a fraction of the reference chip area.
///
/// Subarray units are replicated in every bank, so the per-bank cost
/// `k * (bfu + 2 * walker)` is multiplied by the bank count like the
/// bank-level units.
pub fn area_overhead(cfg: &DramConfig, spec: &PimLevelSpec) -> f64 {
    let a = &cfg.area;
    let banks = cfg.banks_per_chip() as f64;
    match spec.level {
        PimLevel::Channel | PimLevel::Rank => 0.0,
        PimLevel::BankSb | PimLevel::BankAb => banks * a.bfu_mm2 / a.chip_reference_mm2,
        PimLevel::Subarray => {
            spec.salp as f64 * banks * (a.bfu_mm2 + 2.0 * a.walker_mm2) / a.chip_reference_mm2
        }
    }
}

/// Filtering units that run concurrently for one command.
pub fn active_bfus(cfg: &DramConfig, spec: &PimLevelSpec) -> u64 {
    let chips = cfg.channels as u64 * cfg.ranks_per_channel as u64 * cfg.chips_per_rank as u64;
    match spec.level {
        PimLevel::Channel => cfg.channels as u64,
        PimLevel::Rank => cfg.channels as u64 * cfg.ranks_per_channel as u64,
        PimLevel::BankSb => chips,
        PimLevel::BankAb => cfg.total_banks(),
        PimLevel::Subarray => cfg.total_banks() * spec.salp as u64,
    }
}

fn bfu_w(cfg: &DramConfig, count: u64) -> f64 {
    count as f64 * cfg.power.bfu_active_uw * 1e-6
}

/// System peak power in watts.
pub fn peak_power(cfg: &DramConfig, spec: &PimLevelSpec, mode: PimMode) -> f64 {
    let dram = match mode {
        PimMode::AllBank => cfg.power.dram_normal_w * cfg.power.ab_peak_multiplier,
        PimMode::SingleBank => cfg.power.dram_normal_w,
    };
    dram + bfu_w(cfg, active_bfus(cfg, spec))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyPhase {
    pub label: String,
    pub duration_ns: f64,
    pub dram_power_w: f64,
    pub bfu_count: u64,
    pub cpu_power_w: f64,
    pub ab_active: bool,
}

/// Total energy in joules.
pub fn energy(phases: &[EnergyPhase], cfg: &DramConfig) -> Result<f64> {
    let mut joules = 0.0;
    for p in phases {
        if p.duration_ns.is_nan() || p.duration_ns < 0.0 {
            return Err(Error::Invalid(format!("phase {} has duration {} ns", p.label, p.duration_ns)));
        }
        let dram = if p.ab_active { p.dram_power_w * cfg.power.ab_peak_multiplier } else { p.dram_power_w };
        joules += p.duration_ns * 1e-9 * (dram + bfu_w(cfg, p.bfu_count) + p.cpu_power_w);
    }
    Ok(joules)
}

/// Baseline energy over PIM energy.
pub fn relative_efficiency(baseline: &[EnergyPhase], pim: &[EnergyPhase], cfg: &DramConfig) -> Result<f64> {
    let (b, p) = (energy(baseline, cfg)?, energy(pim, cfg)?);
    if p == 0.0 {
        return Err(Error::Invalid("PIM energy is zero".into()));
    }
    Ok(b / p)
}

/// Phases of a PIM run and of the CPU-only baseline for the same query.
pub fn query_phases(report: &ExecutionReport, cfg: &DramConfig) -> (Vec<EnergyPhase>, Vec<EnergyPhase>) {
    let spec = report.spec;
    let host_ns = report.operators.total() - report.operators.pim_filter;
    let pim = vec![
        EnergyPhase {
            label: "pim_filter".into(),
            duration_ns: report.operators.pim_filter,
            dram_power_w: cfg.power.dram_normal_w,
            bfu_count: active_bfus(cfg, &spec),
            cpu_power_w: 0.0,
            ab_active: spec.mode() == PimMode::AllBank,
        },
        EnergyPhase {
            label: "host".into(),
            duration_ns: host_ns,
            dram_power_w: cfg.power.dram_normal_w,
            bfu_count: 0,
            cpu_power_w: cfg.power.cpu_active_w,
            ab_active: false,
        },
    ];
    let baseline = vec![EnergyPhase {
        label: "baseline".into(),
        duration_ns: report.baseline_ns,
        dram_power_w: cfg.power.dram_normal_w,
        bfu_count: 0,
        cpu_power_w: cfg.power.cpu_active_w,
        ab_active: false,
    }];
    (pim, baseline)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub area_overhead: f64,
    pub peak_power_w: f64,
    pub pim_energy_j: f64,
    pub baseline_energy_j: f64,
    pub relative_efficiency: f64,
}

pub fn cost_report(report: &ExecutionReport, cfg: &DramConfig) -> Result<CostReport> {
    let (pim, base) = query_phases(report, cfg);
    let (pe, be) = (energy(&pim, cfg)?, energy(&base, cfg)?);
    Ok(CostReport {
        area_overhead: area_overhead(cfg, &report.spec),
        peak_power_w: peak_power(cfg, &report.spec, report.spec.mode()),
        pim_energy_j: pe,
        baseline_energy_j: be,
        relative_efficiency: if pe > 0.0 { be / pe } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::synthetic::{selectivity_sweep, synthetic_database};
    use crate::timing::Placement;

    fn phase(d: f64) -> EnergyPhase {
        EnergyPhase {
            label: "p".into(),
            duration_ns: d,
            dram_power_w: 2.0,
            bfu_count: 10,
            cpu_power_w: 3.0,
            ab_active: false,
        }
    }

    #[test]
    fn bank_area_is_a_tenth_of_a_percent() {
        let cfg = DramConfig::default();
        let a = area_overhead(&cfg, &PimLevelSpec::new(PimLevel::BankAb));
        assert!((a - 0.001).abs() <= 0.0001, "{a}");
        assert_eq!(area_overhead(&cfg, &PimLevelSpec::new(PimLevel::Rank)), 0.0);
        assert_eq!(area_overhead(&cfg, &PimLevelSpec::new(PimLevel::Channel)), 0.0);
    }

    #[test]
    fn subarray_area_linear_in_salp() {
        let cfg = DramConfig::default();
        let a = |k| area_overhead(&cfg, &PimLevelSpec::subarray(k, Placement::Optimistic));
        assert!((a(4) - 2.0 * a(2)).abs() < 1e-12);
        assert!(a(1) < a(2) && a(2) < a(8));
        let mut ab = PimLevelSpec::new(PimLevel::BankAb);
        ab.salp = 8;
        assert_eq!(area_overhead(&cfg, &ab), area_overhead(&cfg, &PimLevelSpec::new(PimLevel::BankAb)));
    }

    #[test]
    fn all_bank_peak_is_four_times_dram() {
        let cfg = DramConfig::default();
        let spec = PimLevelSpec::new(PimLevel::BankAb);
        let bfu = bfu_w(&cfg, active_bfus(&cfg, &spec));
        assert_eq!(peak_power(&cfg, &spec, PimMode::AllBank) - bfu, 4.0 * cfg.power.dram_normal_w);
        let mut zero = cfg.clone();
        zero.power.bfu_active_uw = 0.0;
        assert_eq!(peak_power(&zero, &spec, PimMode::SingleBank), cfg.power.dram_normal_w);
        assert!((bfu_w(&cfg, 1) - 118.7e-6).abs() < 1e-12);
    }

    #[test]
    fn energy_hand_arithmetic() {
        let cfg = DramConfig::default();
        assert_eq!(energy(&[], &cfg).unwrap(), 0.0);
        let e = energy(&[phase(1e9)], &cfg).unwrap();
        assert!((e - (5.0 + 10.0 * 118.7e-6)).abs() < 1e-9);
        assert!(energy(&[phase(-1.0)], &cfg).is_err());
        assert_eq!(relative_efficiency(&[phase(5.0)], &[phase(5.0)], &cfg).unwrap(), 1.0);
    }

    #[test]
    fn selective_queries_are_more_efficient() {
        let cfg = DramConfig::default();
        let db = synthetic_database(100_000, 3).unwrap();
        let pts = selectivity_sweep(&db, &[1e-4, 1e-1], PimLevelSpec::new(PimLevel::BankAb), &cfg).unwrap();
        let eff: Vec<f64> = pts.iter().map(|p| cost_report(&p.report, &cfg).unwrap().relative_efficiency).collect();
        assert!(eff[0] > eff[1], "{eff:?}");
    }
}
