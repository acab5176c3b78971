//! Summary tables derived from a sweep result matrix.

use std::collections::BTreeMap;

use pimdb_core::error::{Error, Result};
use serde::Serialize;

use crate::rows::{Key, Row};

/// (configuration, query) -> metric -> value
type Pivot<'a> = BTreeMap<(&'a Key, &'a str), BTreeMap<&'a str, f64>>;

fn pivot(rows: &[Row]) -> Pivot<'_> {
    let mut p: Pivot = BTreeMap::new();
    for r in rows {
        if let Some(v) = r.value.num() {
            p.entry((&r.key, r.query.as_str())).or_default().insert(r.metric.as_str(), v);
        }
    }
    p
}

pub struct Tables {
    pub speedup_vs_selectivity: String,
    pub operator_breakdown: String,
    pub memory_overhead: String,
    pub area_overhead: String,
    pub summary: Summary,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub points: usize,
    pub errors: usize,
    /// Geometric-mean rows, keyed by configuration.
    pub geomeans: Vec<GeomeanEntry>,
}

#[derive(Debug, Serialize)]
pub struct GeomeanEntry {
    #[serde(flatten)]
    pub key: Key,
    pub metric: String,
    pub value: f64,
}

const OPERATORS: [(&str, &str); 5] = [
    ("pim_filter", "op_pim_filter_ns"),
    ("fixed", "op_fixed_ns"),
    ("gather", "op_gather_ns"),
    ("join", "op_join_ns"),
    ("aggregate", "op_aggregate_ns"),
];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn config_cols(k: &Key) -> [String; 4] {
    [k.sf.clone(), k.denorm.clone(), k.config_label(), k.mode.clone()]
}

pub fn build(rows: &[Row]) -> Result<Tables> {
    if rows.is_empty() {
        return Err(Error::Invalid("result matrix is empty".into()));
    }
    let p = pivot(rows);
    let points: Vec<_> = p.iter().filter(|((k, q), m)| !k.level.is_empty() && *q != "geomean" && m.contains_key("speedup")).collect();

    let mut sel = writer();
    sel.write_record(["sf", "denorm", "config", "mode", "query", "selectivity", "speedup"]).expect("write");
    let mut ops = writer();
    let mut header: Vec<&str> = vec!["sf", "denorm", "config", "mode", "query"];
    header.extend(OPERATORS.iter().map(|o| o.0));
    ops.write_record(&header).expect("write");
    for ((k, q), m) in &points {
        let mut rec = config_cols(k).to_vec();
        rec.push(q.to_string());
        let mut s = rec.clone();
        s.push(m.get("selectivity").copied().unwrap_or(0.0).to_string());
        s.push(m["speedup"].to_string());
        sel.write_record(&s).expect("write");
        let total: f64 = OPERATORS.iter().map(|o| m.get(o.1).copied().unwrap_or(0.0)).sum();
        for o in OPERATORS {
            let x = m.get(o.1).copied().unwrap_or(0.0);
            rec.push(format!("{:.4}", if total > 0.0 { 100.0 * x / total } else { 0.0 }));
        }
        ops.write_record(&rec).expect("write");
    }

    let mut mem = writer();
    mem.write_record(["sf", "denorm", "memory_overhead", "folded_columns"]).expect("write");
    for ((k, q), m) in &p {
        if *q == "*" {
            if let Some(o) = m.get("memory_overhead") {
                let folds = m.get("folded_columns").copied().unwrap_or(0.0);
                mem.write_record([k.sf.as_str(), &k.denorm, &o.to_string(), &folds.to_string()]).expect("write");
            }
        }
    }

    let mut area: BTreeMap<String, (String, f64)> = BTreeMap::new();
    for ((k, _), m) in &points {
        if let Some(a) = m.get("area_overhead") {
            area.insert(k.config_label(), (k.mode.clone(), *a));
        }
    }
    let mut ar = writer();
    ar.write_record(["config", "mode", "area_overhead_pct"]).expect("write");
    for (c, (mode, a)) in &area {
        ar.write_record([c.as_str(), mode, &(100.0 * a).to_string()]).expect("write");
    }

    let geomeans = rows
        .iter()
        .filter(|r| r.query == "geomean")
        .filter_map(|r| r.value.num().map(|v| GeomeanEntry { key: r.key.clone(), metric: r.metric.clone(), value: v }))
        .collect();
    Ok(Tables {
        speedup_vs_selectivity: finish(sel),
        operator_breakdown: finish(ops),
        memory_overhead: finish(mem),
        area_overhead: finish(ar),
        summary: Summary { points: points.len(), errors: rows.iter().filter(|r| r.metric == "error").count(), geomeans },
    })
}
