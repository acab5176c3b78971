//! Experiment grid over denormalization level, PIM configuration and scale factor.

use std::collections::BTreeMap;

use pimdb_core::config::DramConfig;
use pimdb_core::denorm::{analyze_workload, build_widetable, memory_overhead, rewrite_query, DenormLevel, DenormPlan};
use pimdb_core::engine::run_query;
use pimdb_core::engine::synthetic::{default_selectivities, selectivity_sweep, synthetic_database};
use pimdb_core::error::{Error, Result};
use pimdb_core::query::fixtures::workload;
use pimdb_core::query::Query;
use pimdb_core::reference::reference_execute;
use pimdb_core::store::Database;
use pimdb_core::timing::{column_filter_latency, PimLevelSpec};
use pimdb_core::topology::pim_page_count;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rows::{geomean, report_rows, Key, Row};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub rows: usize,
    #[serde(default = "default_selectivities")]
    pub selectivities: Vec<f64>,
}

/// Single packed column filtered analytically, without data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrobenchSpec {
    pub rows: u64,
    pub width_bits: u32,
    #[serde(default = "one")]
    pub passes: u32,
}

fn one() -> u32 {
    1
}

fn default_sfs() -> Vec<f64> {
    vec![0.01]
}

fn default_denorm() -> Vec<DenormLevel> {
    vec![DenormLevel::D1, DenormLevel::D2, DenormLevel::D3]
}

fn default_workload() -> String {
    "ssb".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_sfs")]
    pub scale_factors: Vec<f64>,
    #[serde(default = "default_denorm")]
    pub denorm: Vec<DenormLevel>,
    #[serde(default = "PimLevelSpec::table_grid")]
    pub levels: Vec<PimLevelSpec>,
    #[serde(default = "default_workload")]
    pub workload: String,
    /// Subset of workload query names; all when absent.
    #[serde(default)]
    pub queries: Option<Vec<String>>,
    /// Also check every result against the reference interpreter.
    #[serde(default)]
    pub verify: bool,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default)]
    pub microbench: Option<MicrobenchSpec>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl SweepSpec {
    pub fn validate(mut self, cfg: &DramConfig) -> Result<Self> {
        for &sf in &self.scale_factors {
            pimdb_core::store::ssb::cardinality(sf)?;
        }
        if self.levels.is_empty() {
            return Err(Error::Invalid("sweep needs at least one PIM level".into()));
        }
        self.levels = self.levels.iter().map(|s| s.validate(cfg)).collect::<Result<_>>()?;
        let all = self.workload_queries()?;
        if let Some(names) = &self.queries {
            for n in names {
                if !all.iter().any(|q| &q.name == n) {
                    return Err(Error::Invalid(format!("unknown query {n:?} in workload {}", self.workload)));
                }
            }
        }
        if let Some(s) = &self.synthetic {
            if s.rows == 0 || s.selectivities.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::Invalid("synthetic sweep needs rows > 0 and selectivities in [0, 1]".into()));
            }
        }
        if let Some(m) = &self.microbench {
            if m.passes == 0 || !pimdb_core::kernel::WIDTHS.contains(&m.width_bits) {
                return Err(Error::Invalid("microbench needs passes > 0 and a supported width".into()));
            }
        }
        Ok(self)
    }

    /// The whole workload; denormalization is always analyzed over all of it.
    pub fn workload_queries(&self) -> Result<Vec<Query>> {
        workload(&self.workload).ok_or_else(|| Error::Invalid(format!("unknown workload {:?}", self.workload)))
    }

    fn selected(&self) -> Result<Vec<Query>> {
        let all = self.workload_queries()?;
        Ok(match &self.queries {
            Some(names) => names.iter().filter_map(|n| all.iter().find(|q| &q.name == n).cloned()).collect(),
            None => all,
        })
    }
}

pub struct Prepared {
    pub plan: DenormPlan,
    pub wide: Database,
}

pub fn prepare(db: &Database, queries: &[Query], level: DenormLevel) -> Result<Prepared> {
    let plan = analyze_workload(queries, db.schema(), level)?;
    let wide = build_widetable(db, &plan)?;
    Ok(Prepared { plan, wide })
}

/// Run one query through a prepared denormalization and return its metric rows.
pub fn run_point(
    key: &Key,
    q: &Query,
    db: &Database,
    prep: &Prepared,
    spec: PimLevelSpec,
    cfg: &DramConfig,
    verify: bool,
) -> Result<Vec<Row>> {
    let rq = rewrite_query(q, &prep.plan, db.schema())?;
    let report = run_query(&rq, &prep.wide, spec, cfg)?;
    let mut rows = report_rows(key, &report, cfg)?;
    if verify {
        let ok = reference_execute(q, db)? == report.result;
        rows.push(Row::num(key, &q.name, "matches_reference", if ok { 1.0 } else { 0.0 }));
    }
    Ok(rows)
}

pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub failures: usize,
}

/// A data source for one scale factor: a label and the database.
pub type Source = (String, Database);

pub fn run_sweep(spec: &SweepSpec, sources: &[Source], cfg: &DramConfig, seed: u64) -> Result<SweepOutput> {
    let all = spec.workload_queries()?;
    let queries = spec.selected()?;
    let mut rows = Vec::new();
    let mut failures = 0;

    if let Some(m) = &spec.microbench {
        let bytes = (m.rows * m.width_bits as u64).div_ceil(8);
        for s in &spec.levels {
            let key = Key::new("", "", Some(s));
            let l = column_filter_latency(cfg, s, bytes, m.passes)?;
            rows.push(Row::num(&key, "microbench", "pages", pim_page_count(bytes, cfg) as f64));
            rows.push(Row::num(&key, "microbench", "filter_ns", l.filter_ns()));
            rows.push(Row::num(&key, "microbench", "total_ns", l.total));
        }
    }

    for (label, db) in sources {
        let prepared: Vec<(DenormLevel, Result<Prepared>)> =
            spec.denorm.par_iter().map(|&d| (d, prepare(db, &all, d))).collect();
        let mut tasks = Vec::new();
        for (d, prep) in &prepared {
            let key = Key::new(label, &d.to_string(), None);
            match prep {
                Ok(p) => {
                    rows.push(Row::num(&key, "*", "memory_overhead", memory_overhead(db, &p.wide)));
                    rows.push(Row::num(&key, "*", "folded_columns", p.plan.folds.len() as f64));
                    for s in &spec.levels {
                        for q in &queries {
                            tasks.push((Key::new(label, &d.to_string(), Some(s)), q, p, *s));
                        }
                    }
                }
                Err(e) => {
                    failures += 1;
                    rows.push(Row::text(&key, "*", "error", e.to_string()));
                }
            }
        }
        let results: Vec<(Key, String, Result<Vec<Row>>)> = tasks
            .par_iter()
            .map(|(key, q, p, s)| (key.clone(), q.name.clone(), run_point(key, q, db, p, *s, cfg, spec.verify)))
            .collect();
        failures += collect(results, &mut rows);
    }

    if let Some(syn) = &spec.synthetic {
        let db = synthetic_database(syn.rows, seed)?;
        let results: Vec<(Key, String, Result<Vec<Row>>)> = spec
            .levels
            .par_iter()
            .map(|s| {
                let key = Key::new("synthetic", "D1", Some(s));
                let out = selectivity_sweep(&db, &syn.selectivities, *s, cfg).and_then(|pts| {
                    let mut rows = Vec::new();
                    for p in pts {
                        rows.push(Row::num(&key, &p.report.query, "target_selectivity", p.target));
                        rows.extend(report_rows(&key, &p.report, cfg)?);
                    }
                    Ok(rows)
                });
                (key, "synthetic".to_string(), out)
            })
            .collect();
        failures += collect(results, &mut rows);
    }

    rows.extend(geomean_rows(&rows));
    Ok(SweepOutput { rows, failures })
}

fn collect(results: Vec<(Key, String, Result<Vec<Row>>)>, rows: &mut Vec<Row>) -> usize {
    let mut failures = 0;
    for (key, name, r) in results {
        match r {
            Ok(rs) => rows.extend(rs),
            Err(e) => {
                failures += 1;
                rows.push(Row::text(&key, &name, "error", e.to_string()));
            }
        }
    }
    failures
}

/// Geometric means per configuration over queries, for the headline metrics.
pub fn geomean_rows(rows: &[Row]) -> Vec<Row> {
    const METRICS: [&str; 4] = ["total_ns", "baseline_ns", "speedup", "relative_efficiency"];
    let mut groups: BTreeMap<(Key, &str), Vec<f64>> = BTreeMap::new();
    for r in rows {
        if r.query == "microbench" || r.key.level.is_empty() || !METRICS.contains(&r.metric.as_str()) {
            continue;
        }
        if let Some(v) = r.value.num() {
            groups.entry((r.key.clone(), r.metric.as_str())).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .filter_map(|((key, metric), vals)| geomean(&vals).map(|g| Row::num(&key, "geomean", metric, g)))
        .collect()
}

