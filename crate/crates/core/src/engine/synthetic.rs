//! Controlled single-column workload for selectivity sweeps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{run_query, ExecutionReport};
use crate::config::DramConfig;
use crate::error::{Error, Result};
use crate::query::Query;
use crate::store::{Column, ColumnDef, Database, LogicalType, Table, TableDef};
use crate::timing::PimLevelSpec;

pub const SYNTHETIC_TABLE: &str = "synthetic";

/// `rows` distinct 32-bit keys in random order plus a small payload column.
pub fn synthetic_database(rows: usize, seed: u64) -> Result<Database> {
    if rows == 0 {
        return Err(Error::Invalid("synthetic table needs at least one row".into()));
    }
    let step = (1u64 << 32) / rows as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keys: Vec<i64> = (0..rows as i64).map(|k| k * step as i64).collect();
    // Pin the top of the 32-bit range so the column packs at width 32.
    if let Some(last) = keys.last_mut() {
        *last = u32::MAX as i64;
    }
    keys.shuffle(&mut rng);
    let payload: Vec<i64> = (0..rows).map(|_| rng.gen_range(0..1000)).collect();
    let def = TableDef {
        name: SYNTHETIC_TABLE.into(),
        columns: vec![ColumnDef::new("key", LogicalType::Int), ColumnDef::new("payload", LogicalType::Int)],
        primary_key: None,
        foreign_keys: vec![],
    };
    let columns = vec![Column::from_ints(def.columns[0].clone(), &keys)?, Column::from_ints(def.columns[1].clone(), &payload)?];
    Database::new(vec![Table::new(def, columns)?])
}

/// `SELECT SUM(payload) WHERE key < t`, with `t` chosen so that
/// `max(1, round(selectivity * rows))` rows qualify.
pub fn selectivity_query(rows: usize, selectivity: f64) -> Result<Query> {
    if !(0.0..=1.0).contains(&selectivity) {
        return Err(Error::Invalid(format!("selectivity {selectivity} outside [0, 1]")));
    }
    let step = (1u64 << 32) / rows as u64;
    let hits = ((selectivity * rows as f64).round() as u64).clamp(1, rows as u64);
    let threshold = if hits == rows as u64 { u32::MAX as u64 + 1 } else { hits * step };
    Query::from_json(&format!(
        r#"{{"name": "sel_{selectivity:e}", "fact": "{SYNTHETIC_TABLE}",
            "select": [{{"agg": "sum", "expr": {{"col": "{SYNTHETIC_TABLE}.payload"}}, "alias": "s"}}],
            "where": {{"cmp": {{"col": "{SYNTHETIC_TABLE}.key", "op": "lt", "value": {threshold}}}}}}}"#
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub target: f64,
    pub report: ExecutionReport,
}

pub fn selectivity_sweep(
    db: &Database,
    selectivities: &[f64],
    spec: PimLevelSpec,
    cfg: &DramConfig,
) -> Result<Vec<SweepPoint>> {
    let rows = db.table(SYNTHETIC_TABLE)?.rows();
    selectivities
        .iter()
        .map(|&s| Ok(SweepPoint { target: s, report: run_query(&selectivity_query(rows, s)?, db, spec, cfg)? }))
        .collect()
}

/// Decades from 1e-6 to 1e-1.
pub fn default_selectivities() -> Vec<f64> {
    (1..=6).rev().map(|e| 10f64.powi(-e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::PimLevel;

    #[test]
    fn hits_match_target() {
        let db = synthetic_database(100_000, 1).unwrap();
        assert_eq!(db.table(SYNTHETIC_TABLE).unwrap().column("key").unwrap().width(), 32);
        let pts = selectivity_sweep(&db, &[1e-5, 1e-3, 0.1, 1.0], PimLevelSpec::new(PimLevel::BankAb), &DramConfig::default())
            .unwrap();
        let gathered: Vec<u64> = pts.iter().map(|p| p.report.rows_gathered).collect();
        assert_eq!(gathered, vec![1, 100, 10_000, 100_000]);
    }

    #[test]
    fn speedup_falls_with_selectivity() {
        let db = synthetic_database(200_000, 2).unwrap();
        let pts =
            selectivity_sweep(&db, &default_selectivities(), PimLevelSpec::new(PimLevel::BankAb), &DramConfig::default())
                .unwrap();
        for w in pts.windows(2) {
            assert!(w[0].report.speedup > w[1].report.speedup);
        }
    }
}
