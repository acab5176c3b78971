//! Long-format result rows shared by `run`, `sweep` and `report`.

use std::fmt;
use std::io::Write;

use pimdb_core::config::DramConfig;
use pimdb_core::cost::cost_report;
use pimdb_core::engine::ExecutionReport;
use pimdb_core::error::Result;
use pimdb_core::timing::PimLevelSpec;
use serde::{Deserialize, Serialize};

pub const HEADER: [&str; 9] = ["sf", "denorm", "level", "mode", "salp", "placement", "query", "metric", "value"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Val {
    Num(f64),
    Text(String),
}

impl Val {
    pub fn num(&self) -> Option<f64> {
        match self {
            Val::Num(x) => Some(*x),
            Val::Text(_) => None,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Num(x) => write!(f, "{x}"),
            Val::Text(s) => f.write_str(s),
        }
    }
}

/// The configuration columns of a row.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Key {
    pub sf: String,
    pub denorm: String,
    pub level: String,
    pub mode: String,
    pub salp: String,
    pub placement: String,
}

impl Key {
    pub fn new(sf: &str, denorm: &str, spec: Option<&PimLevelSpec>) -> Key {
        let mut k = Key { sf: sf.into(), denorm: denorm.into(), ..Key::default() };
        if let Some(s) = spec {
            k.level = s.level.as_str().into();
            k.mode = s.mode().as_str().into();
            k.salp = s.salp.to_string();
            k.placement = s.placement.as_str().into();
        }
        k
    }

    /// Short label for the PIM configuration.
    pub fn config_label(&self) -> String {
        if self.level == "subarray" {
            format!("salp-{}-{}", self.salp, self.placement)
        } else {
            self.level.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(flatten)]
    pub key: Key,
    pub query: String,
    pub metric: String,
    pub value: Val,
}

impl Row {
    pub fn num(key: &Key, query: &str, metric: &str, value: f64) -> Row {
        Row { key: key.clone(), query: query.into(), metric: metric.into(), value: Val::Num(value) }
    }

    pub fn text(key: &Key, query: &str, metric: &str, value: impl Into<String>) -> Row {
        Row { key: key.clone(), query: query.into(), metric: metric.into(), value: Val::Text(value.into()) }
    }
}

/// Metric rows for one executed query. Measured wall time is left out so
/// that outputs depend only on inputs.
pub fn report_rows(key: &Key, r: &ExecutionReport, cfg: &DramConfig) -> Result<Vec<Row>> {
    let c = cost_report(r, cfg)?;
    let o = &r.operators;
    let metrics = [
        ("pim_activation_ns", r.pim.activation),
        ("pim_column_stream_ns", r.pim.column_stream),
        ("pim_lisa_ns", r.pim.lisa),
        ("pim_writeback_ns", r.pim.bitmap_writeback),
        ("pim_mode_switch_ns", r.pim.mode_switch),
        ("pim_passes", r.pim_passes as f64),
        ("op_pim_filter_ns", o.pim_filter),
        ("op_fixed_ns", o.fixed),
        ("op_gather_ns", o.gather),
        ("op_join_ns", o.join),
        ("op_aggregate_ns", o.aggregate),
        ("total_ns", r.total_ns()),
        ("baseline_ns", r.baseline_ns),
        ("speedup", r.speedup),
        ("selectivity", r.pim_selectivity),
        ("fact_rows", r.fact_rows as f64),
        ("rows_gathered", r.rows_gathered as f64),
        ("result_rows", r.result.rows.len() as f64),
        ("area_overhead", c.area_overhead),
        ("peak_power_w", c.peak_power_w),
        ("pim_energy_j", c.pim_energy_j),
        ("baseline_energy_j", c.baseline_energy_j),
        ("relative_efficiency", c.relative_efficiency),
    ];
    Ok(metrics.iter().map(|&(m, v)| Row::num(key, &r.query, m, v)).collect())
}

pub fn geomean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| v.is_nan() || *v <= 0.0 || !v.is_finite()) {
        return None;
    }
    Some((values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp())
}

pub fn write_csv<W: Write>(rows: &[Row], w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        let k = &r.key;
        let value = r.value.to_string();
        out.write_record([
            k.sf.as_str(),
            &k.denorm,
            &k.level,
            &k.mode,
            &k.salp,
            &k.placement,
            &r.query,
            &r.metric,
            &value,
        ])?;
    }
    out.flush()
}

pub fn to_csv_string(rows: &[Row]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8 rows")
}
