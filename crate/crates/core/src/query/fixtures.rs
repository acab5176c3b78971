//! Bundled query workloads.

use super::Query;
use crate::error::Result;
use crate::store::Schema;

macro_rules! bundle {
    ($dir:literal: $($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../fixtures/queries/", $dir, "/", $name, ".json")))),*]
    };
}

const SSB: &[(&str, &str)] = bundle!("ssb":
    "q1.1", "q1.2", "q1.3", "q2.1", "q2.2", "q2.3", "q3.1", "q3.2", "q3.3", "q3.4", "q4.1", "q4.2", "q4.3");

const TPCH: &[(&str, &str)] = bundle!("tpch": "q1", "q3", "q5", "q6", "q10", "q12", "q14", "q19");

const TPCH_SCHEMA: &str = include_str!("../../fixtures/tpch_schema.json");

fn parse(set: &[(&str, &str)]) -> Result<Vec<Query>> {
    set.iter()
        .map(|(name, text)| {
            let mut q = Query::from_json(text)?;
            if q.name.is_empty() {
                q.name = name.to_string();
            }
            Ok(q)
        })
        .collect()
}

/// The 13 Star Schema Benchmark queries.
pub fn ssb_queries() -> Vec<Query> {
    parse(SSB).expect("bundled queries parse")
}

/// TPC-H subset whose joins all follow single-column foreign keys.
pub fn tpch_queries() -> Vec<Query> {
    parse(TPCH).expect("bundled queries parse")
}

pub fn tpch_schema() -> Schema {
    serde_json::from_str(TPCH_SCHEMA).expect("bundled schema parses")
}

/// Look up a bundled workload by name (`ssb` or `tpch`).
pub fn workload(name: &str) -> Option<Vec<Query>> {
    match name {
        "ssb" => Some(ssb_queries()),
        "tpch" => Some(tpch_queries()),
        _ => None,
    }
}
