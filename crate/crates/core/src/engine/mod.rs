//! Query planning and execution.
//!
//! The filter is split three ways: conjuncts over packed fact columns run as
//! modeled PIM passes producing a bitmap; conjuncts over a single dimension
//! table filter that table's hash index; the rest are evaluated per joined row.

mod eval;
pub mod host;
pub mod ops;
pub mod synthetic;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::DramConfig;
use crate::error::{Error, Result};
use crate::kernel::{compile_predicate, filter_column, Bitmap};
use crate::query::{output_types, AggFn, BoolExpr, JoinEdge, PostJoin, Query, ResultTable, Scalar, SelectItem};
use crate::store::{CodePred, Database, Value};
use crate::timing::{column_filter_latency, mode_switch_overhead, LatencyBreakdown, PimLevelSpec};
use eval::{code_pred, CpuPred, CpuScalar, Resolver};
pub use host::{cpu_cost_model, host_cost, HostCost};
use ops::{GroupAggregate, JoinIndex};

/// One PIM pass: a code-space predicate on a fact column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PimPred {
    pub column: String,
    pub pred: CodePred,
    /// Fraction of the code domain admitted, used for ordering.
    pub fraction: f64,
}

/// PIM-evaluable boolean tree. Conjunctions accumulate in the bitmap;
/// disjunction branches are separate passes ORed on the host.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PimExpr {
    Pred(PimPred),
    And(Vec<PimExpr>),
    Or(Vec<PimExpr>),
}

impl PimExpr {
    pub fn fraction(&self) -> f64 {
        match self {
            PimExpr::Pred(p) => p.fraction,
            PimExpr::And(v) => v.iter().map(PimExpr::fraction).product(),
            PimExpr::Or(v) => v.iter().map(PimExpr::fraction).sum::<f64>().min(1.0),
        }
    }

    pub fn passes(&self) -> u32 {
        match self {
            PimExpr::Pred(p) => u32::from(p.pred != CodePred::All),
            PimExpr::And(v) | PimExpr::Or(v) => v.iter().map(PimExpr::passes).sum(),
        }
    }

    fn sort(&mut self) {
        match self {
            PimExpr::Pred(_) => {}
            PimExpr::And(v) => {
                v.iter_mut().for_each(PimExpr::sort);
                v.sort_by(|a, b| a.fraction().total_cmp(&b.fraction()));
            }
            PimExpr::Or(v) => v.iter_mut().for_each(PimExpr::sort),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPlan {
    pub query: Query,
    pub spec: PimLevelSpec,
    /// Conjunctive terms over the fact table, most selective first.
    pub pim_terms: Vec<PimExpr>,
    /// Filters applied while building each dimension's hash index.
    pub dim_filters: BTreeMap<String, Vec<BoolExpr>>,
    /// Residual terms evaluated on joined rows.
    pub cpu_predicates: Vec<BoolExpr>,
    /// Join edges, parents before children.
    pub joins: Vec<JoinEdge>,
    pub post_joins: Vec<PostJoin>,
}

fn pim_expr(e: &BoolExpr, db: &Database, fact: &str) -> Result<Option<PimExpr>> {
    let leaf = |col: &str, pred: CodePred| -> Result<PimExpr> {
        let c = db.table(fact)?.column(col)?;
        Ok(PimExpr::Pred(PimPred { column: col.to_string(), fraction: c.domain_fraction(&pred), pred }))
    };
    match e {
        BoolExpr::Cmp { col, .. } | BoolExpr::Between { col, .. } | BoolExpr::In { col, .. } => {
            if col.table != fact {
                return Ok(None);
            }
            let column = db.table(fact)?.column(&col.column)?;
            let mut preds = code_pred(column, e)?.expect("comparison");
            if preds.contains(&CodePred::All) {
                preds = vec![CodePred::All];
            }
            preds.retain(|p| *p != CodePred::Empty);
            if preds.is_empty() {
                preds.push(CodePred::Empty);
            }
            if preds.len() == 1 {
                Ok(Some(leaf(&col.column, preds[0])?))
            } else {
                Ok(Some(PimExpr::Or(preds.into_iter().map(|p| leaf(&col.column, p)).collect::<Result<_>>()?)))
            }
        }
        BoolExpr::And(v) | BoolExpr::Or(v) => {
            let mut parts = Vec::with_capacity(v.len());
            for x in v {
                match pim_expr(x, db, fact)? {
                    Some(p) => parts.push(p),
                    None => return Ok(None),
                }
            }
            Ok(Some(if matches!(e, BoolExpr::And(_)) { PimExpr::And(parts) } else { PimExpr::Or(parts) }))
        }
        BoolExpr::Not(_) | BoolExpr::Like { .. } | BoolExpr::ColCmp { .. } => Ok(None),
    }
}

pub fn plan_query(q: &Query, db: &Database, spec: PimLevelSpec) -> Result<PhysicalPlan> {
    q.validate(db.schema())?;
    let mut pim_terms = Vec::new();
    let mut dim_filters: BTreeMap<String, Vec<BoolExpr>> = BTreeMap::new();
    let mut cpu_predicates = Vec::new();
    if let Some(w) = &q.filter {
        for term in w.conjuncts() {
            let tables = term.tables();
            if tables.len() == 1 && tables.contains(&q.fact) {
                match pim_expr(term, db, &q.fact)? {
                    Some(p) => pim_terms.push(p),
                    None => cpu_predicates.push(term.clone()),
                }
            } else if tables.len() == 1 {
                let t = tables.into_iter().next().expect("one table");
                dim_filters.entry(t).or_default().push(term.clone());
            } else {
                cpu_predicates.push(term.clone());
            }
        }
    }
    pim_terms.iter_mut().for_each(PimExpr::sort);
    pim_terms.sort_by(|a, b| a.fraction().total_cmp(&b.fraction()));
    let mut joins = Vec::with_capacity(q.joins.len());
    let mut have: BTreeSet<&str> = [q.fact.as_str()].into();
    while joins.len() < q.joins.len() {
        for j in &q.joins {
            if have.contains(j.fk.table.as_str()) && !have.contains(j.pk.table.as_str()) {
                have.insert(&j.pk.table);
                joins.push(j.clone());
            }
        }
    }
    Ok(PhysicalPlan {
        query: q.clone(),
        spec,
        pim_terms,
        dim_filters,
        cpu_predicates,
        joins,
        post_joins: q.post_joins.clone(),
    })
}

/// Modeled time per operator, in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatorTimes {
    pub pim_filter: f64,
    pub fixed: f64,
    pub gather: f64,
    pub join: f64,
    pub aggregate: f64,
}

impl OperatorTimes {
    pub fn total(&self) -> f64 {
        self.pim_filter + self.fixed + self.gather + self.join + self.aggregate
    }

    /// Labeled shares in percent.
    pub fn percentages(&self) -> Vec<(&'static str, f64)> {
        let t = self.total();
        let pct = |x: f64| if t > 0.0 { 100.0 * x / t } else { 0.0 };
        vec![
            ("pim_filter", pct(self.pim_filter)),
            ("fixed", pct(self.fixed)),
            ("gather", pct(self.gather)),
            ("join", pct(self.join)),
            ("aggregate", pct(self.aggregate)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub query: String,
    pub spec: PimLevelSpec,
    pub result: ResultTable,
    pub fact_rows: u64,
    pub pim: LatencyBreakdown,
    pub pim_passes: u32,
    /// Popcount of the PIM bitmap over the fact row count.
    pub pim_selectivity: f64,
    pub rows_gathered: u64,
    pub bytes_per_row: f64,
    pub operators: OperatorTimes,
    /// Modeled CPU-only time: sequential scan instead of PIM passes.
    pub baseline_ns: f64,
    pub speedup: f64,
    /// Measured; informational only.
    pub wall_ns: u64,
}

impl ExecutionReport {
    pub fn total_ns(&self) -> f64 {
        self.operators.total()
    }
}

struct PimRun<'a> {
    db: &'a Database,
    fact: &'a str,
    cfg: &'a DramConfig,
    spec: PimLevelSpec,
    latency: LatencyBreakdown,
    passes: u32,
}

impl PimRun<'_> {
    fn eval(&mut self, e: &PimExpr, acc: Option<&Bitmap>) -> Result<Bitmap> {
        match e {
            PimExpr::Pred(p) => {
                let col = self.db.table(self.fact)?.column(&p.column)?;
                let Some(op) = p.pred.kernel_op() else {
                    return Ok(acc.cloned().unwrap_or_else(|| Bitmap::ones(col.len())));
                };
                let cmp = compile_predicate(op, col.width())?;
                let lat = column_filter_latency(self.cfg, &self.spec, col.data().bytes(), 1)?;
                self.latency = self.latency.add(&lat.with_mode_switch(0.0));
                self.passes += 1;
                filter_column(col.data(), &cmp, acc)
            }
            PimExpr::And(v) => {
                let mut cur = acc.cloned();
                for x in v {
                    cur = Some(self.eval(x, cur.as_ref())?);
                }
                let n = self.db.table(self.fact)?.rows();
                Ok(cur.unwrap_or_else(|| Bitmap::ones(n)))
            }
            PimExpr::Or(v) => {
                let n = self.db.table(self.fact)?.rows();
                let mut out = Bitmap::zeros(n);
                for x in v {
                    out = out.or(&self.eval(x, acc)?)?;
                }
                Ok(out)
            }
        }
    }
}

enum AggInput<'a> {
    Star,
    Scalar(CpuScalar<'a>),
    /// MIN/MAX over a plain column compares decoded values.
    Raw(eval::Bound<'a>),
}

pub fn execute(plan: &PhysicalPlan, db: &Database, cfg: &DramConfig) -> Result<ExecutionReport> {
    let started = Instant::now();
    let q = &plan.query;
    let spec = plan.spec.validate(cfg)?;
    let fact = db.table(&q.fact)?;
    let n = fact.rows();

    let mut pim = PimRun { db, fact: &q.fact, cfg, spec, latency: LatencyBreakdown::default(), passes: 0 };
    let mut bitmap: Option<Bitmap> = None;
    for term in &plan.pim_terms {
        bitmap = Some(pim.eval(term, bitmap.as_ref())?);
    }
    let bitmap = bitmap.unwrap_or_else(|| Bitmap::ones(n));
    let pim_latency = if pim.passes > 0 {
        pim.latency.with_mode_switch(mode_switch_overhead(cfg))
    } else {
        LatencyBreakdown::default()
    };

    let mut tables = vec![(q.fact.as_str(), fact)];
    for j in &plan.joins {
        tables.push((j.pk.table.as_str(), db.table(&j.pk.table)?));
    }
    let resolver = Resolver::new(tables.iter().copied());
    let mut indexes = Vec::with_capacity(plan.joins.len());
    for j in &plan.joins {
        let dim = db.table(&j.pk.table)?;
        let local = Resolver::new([(j.pk.table.as_str(), dim)]);
        let filters = plan
            .dim_filters
            .get(&j.pk.table)
            .map(|v| v.iter().map(|e| CpuPred::compile(e, &local)).collect::<Result<Vec<_>>>())
            .transpose()?
            .unwrap_or_default();
        let idx = JoinIndex::build(dim, &j.pk.column, |r| filters.iter().all(|f| f.eval(&[r])))?;
        let parent = resolver.bind(&j.fk)?;
        indexes.push((parent, idx));
    }
    for t in plan.dim_filters.keys() {
        if !plan.joins.iter().any(|j| &j.pk.table == t) {
            return Err(Error::Invalid(format!("filter on {t}, which is not joined")));
        }
    }
    let residual: Vec<CpuPred> =
        plan.cpu_predicates.iter().map(|e| CpuPred::compile(e, &resolver)).collect::<Result<_>>()?;

    let aggregate = q.is_aggregate();
    let post_tables: BTreeSet<&str> = plan.post_joins.iter().map(|p| p.table.as_str()).collect();
    let group_keys: Vec<eval::Bound> = q.group_by.iter().map(|c| resolver.bind(c)).collect::<Result<_>>()?;
    let mut agg_funcs = Vec::new();
    let mut agg_inputs = Vec::new();
    let mut projections = Vec::new();
    for s in &q.select {
        match s {
            SelectItem::Aggregate { agg, expr, .. } => {
                agg_funcs.push(*agg);
                agg_inputs.push(match (agg, expr) {
                    (_, None) => AggInput::Star,
                    (AggFn::Min | AggFn::Max, Some(Scalar::Col(c))) => AggInput::Raw(resolver.bind(c)?),
                    (_, Some(e)) => AggInput::Scalar(CpuScalar::compile(e, &resolver)?.0),
                });
            }
            SelectItem::Column { col, .. } if !aggregate => projections.push(resolver.bind(col)?),
            SelectItem::Column { .. } => {}
        }
    }

    let mut groups = GroupAggregate::new(agg_funcs, !q.group_by.is_empty());
    let mut plain_rows = Vec::new();
    let mut gathered = 0u64;
    let mut rows = vec![0u32; tables.len()];
    'rows: for i in bitmap.iter_set_bits() {
        gathered += 1;
        rows[0] = i as u32;
        for (k, (parent, idx)) in indexes.iter().enumerate() {
            match idx.probe(&parent.value(&rows)) {
                Some(r) => rows[k + 1] = r,
                None => continue 'rows,
            }
        }
        if !residual.iter().all(|p| p.eval(&rows)) {
            continue;
        }
        if aggregate {
            let key = group_keys.iter().map(|b| b.value(&rows)).collect();
            let inputs = agg_inputs
                .iter()
                .map(|a| {
                    Ok(match a {
                        AggInput::Star => Value::Null,
                        AggInput::Scalar(s) => Value::Int(s.eval(&rows)?),
                        AggInput::Raw(b) => b.value(&rows),
                    })
                })
                .collect::<Result<_>>()?;
            groups.update(key, inputs)?;
        } else {
            plain_rows.push(projections.iter().map(|b| b.value(&rows)).collect::<Vec<_>>());
        }
    }

    let out_rows = if aggregate {
        let post = post_lookup(plan, db, q)?;
        let mut out = Vec::new();
        for (key, vals) in groups.finish() {
            let mut post_rows: HashMap<&str, u32> = HashMap::new();
            for (p, (kpos, idx)) in plan.post_joins.iter().zip(&post) {
                let r = idx.probe(&key[*kpos]).ok_or_else(|| Error::DanglingKey {
                    column: p.key.to_string(),
                    value: format!("{:?}", key[*kpos]),
                })?;
                post_rows.insert(&p.table, r);
            }
            let mut vals = vals.into_iter();
            let mut row = Vec::with_capacity(q.select.len());
            for s in &q.select {
                row.push(match s {
                    SelectItem::Aggregate { .. } => vals.next().expect("one value per aggregate"),
                    SelectItem::Column { col, .. } if post_tables.contains(col.table.as_str()) => {
                        db.table(&col.table)?.column(&col.column)?.value(post_rows[col.table.as_str()] as usize)
                    }
                    SelectItem::Column { col, .. } => {
                        key[q.group_by.iter().position(|g| g == col).expect("validated: grouped")].clone()
                    }
                });
            }
            out.push(row);
        }
        out
    } else {
        plain_rows
    };
    let mut result = ResultTable { columns: q.output_names(), types: output_types(q, db.schema())?, rows: out_rows };
    result.finish(&q.order_by, q.limit)?;

    let bytes_per_row = gathered_bytes_per_row(plan, db)?;
    let scan_bytes: u64 = pim_columns(plan)
        .iter()
        .map(|c| fact.column(c).map(|c| c.data().bytes()))
        .sum::<Result<u64>>()?;
    let hc = host_cost(gathered, bytes_per_row, plan.joins.len(), scan_bytes, cfg);
    let operators =
        OperatorTimes { pim_filter: pim_latency.total, fixed: hc.fixed, gather: hc.gather, join: hc.join, aggregate: hc.aggregate };
    let baseline_ns = hc.total();
    Ok(ExecutionReport {
        query: q.name.clone(),
        spec,
        result,
        fact_rows: n as u64,
        pim: pim_latency,
        pim_passes: pim.passes,
        pim_selectivity: if n == 0 { 0.0 } else { bitmap.popcount() as f64 / n as f64 },
        rows_gathered: gathered,
        bytes_per_row,
        operators,
        baseline_ns,
        speedup: baseline_ns / operators.total(),
        wall_ns: started.elapsed().as_nanos() as u64,
    })
}

fn post_lookup(plan: &PhysicalPlan, db: &Database, q: &Query) -> Result<Vec<(usize, JoinIndex)>> {
    plan.post_joins
        .iter()
        .map(|p| {
            let pos = q
                .group_by
                .iter()
                .position(|g| *g == p.key)
                .ok_or_else(|| Error::Invalid(format!("post join key {} is not grouped", p.key)))?;
            Ok((pos, JoinIndex::build(db.table(&p.table)?, &p.pk, |_| true)?))
        })
        .collect()
}

fn pim_columns(plan: &PhysicalPlan) -> BTreeSet<String> {
    fn walk(e: &PimExpr, out: &mut BTreeSet<String>) {
        match e {
            PimExpr::Pred(p) => {
                out.insert(p.column.clone());
            }
            PimExpr::And(v) | PimExpr::Or(v) => v.iter().for_each(|x| walk(x, out)),
        }
    }
    let mut out = BTreeSet::new();
    plan.pim_terms.iter().for_each(|t| walk(t, &mut out));
    out
}

/// Packed bytes of every fact column the host reads for a selected row.
fn gathered_bytes_per_row(plan: &PhysicalPlan, db: &Database) -> Result<f64> {
    let q = &plan.query;
    let mut cols = Vec::new();
    for s in &q.select {
        match s {
            SelectItem::Column { col, .. } => cols.push(col.clone()),
            SelectItem::Aggregate { expr: Some(e), .. } => e.columns(&mut cols),
            SelectItem::Aggregate { expr: None, .. } => {}
        }
    }
    cols.extend(q.group_by.iter().cloned());
    plan.cpu_predicates.iter().for_each(|p| p.columns(&mut cols));
    cols.extend(plan.joins.iter().map(|j| j.fk.clone()));
    let fact = db.table(&q.fact)?;
    let names: BTreeSet<&str> = cols.iter().filter(|c| c.table == q.fact).map(|c| c.column.as_str()).collect();
    let bits: u32 = names.iter().map(|c| fact.column(c).map(|c| c.width())).sum::<Result<u32>>()?;
    Ok(bits as f64 / 8.0)
}

/// Plan and execute in one step.
pub fn run_query(q: &Query, db: &Database, spec: PimLevelSpec, cfg: &DramConfig) -> Result<ExecutionReport> {
    execute(&plan_query(q, db, spec)?, db, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::fixtures::ssb_queries;
    use crate::store::ssb::generate_ssb;
    use crate::timing::PimLevel;

    fn db() -> Database {
        generate_ssb(0.002, 11).unwrap()
    }

    fn query(text: &str) -> Query {
        Query::from_json(text).unwrap()
    }

    #[test]
    fn numeric_conjunction_goes_to_pim() {
        let q = &ssb_queries()[0];
        let plan = plan_query(q, &db(), PimLevelSpec::new(PimLevel::BankAb)).unwrap();
        assert!(plan.cpu_predicates.is_empty());
        assert_eq!(plan.pim_terms.len(), 2);
        assert_eq!(plan.dim_filters["date"].len(), 1);
    }

    #[test]
    fn like_stays_on_cpu() {
        let q = query(
            r#"{"fact": "lineorder", "select": [{"agg": "count", "alias": "n"}],
                "where": {"and": [
                    {"like": {"col": "lineorder.lo_shipmode", "pattern": "%AIR%"}},
                    {"cmp": {"col": "lineorder.lo_quantity", "op": "lt", "value": 10}}]}}"#,
        );
        let d = db();
        let plan = plan_query(&q, &d, PimLevelSpec::new(PimLevel::BankAb)).unwrap();
        assert_eq!(plan.cpu_predicates.len(), 1);
        assert_eq!(plan.pim_terms.len(), 1);
        let r = execute(&plan, &d, &DramConfig::default()).unwrap();
        let lo = d.table("lineorder").unwrap();
        let expect = (0..lo.rows())
            .filter(|&i| {
                lo.column("lo_quantity").unwrap().int(i).unwrap() < 10
                    && lo.column("lo_shipmode").unwrap().value(i).as_text().unwrap().contains("AIR")
            })
            .count();
        assert_eq!(r.result.rows, vec![vec![Value::Int(expect as i64)]]);
    }

    #[test]
    fn disjunction_split_into_passes() {
        let a = r#"{"cmp": {"col": "lineorder.lo_quantity", "op": "lt", "value": 20}}"#;
        let b = r#"{"cmp": {"col": "lineorder.lo_discount", "op": "eq", "value": 3}}"#;
        let c = r#"{"between": {"col": "lineorder.lo_tax", "lo": 2, "hi": 4}}"#;
        let q = query(&format!(
            r#"{{"fact": "lineorder", "select": [{{"agg": "count", "alias": "n"}}],
                "where": {{"or": [{{"and": [{a}, {b}]}}, {{"and": [{a}, {c}]}}]}}}}"#
        ));
        let d = db();
        let plan = plan_query(&q, &d, PimLevelSpec::new(PimLevel::BankAb)).unwrap();
        assert!(plan.cpu_predicates.is_empty());
        let r = execute(&plan, &d, &DramConfig::default()).unwrap();
        assert_eq!(r.pim_passes, 4);
        let lo = d.table("lineorder").unwrap();
        let get = |c: &str, i| lo.column(c).unwrap().int(i).unwrap();
        let expect = (0..lo.rows())
            .filter(|&i| get("lo_quantity", i) < 20 && (get("lo_discount", i) == 3 || (2..=4).contains(&get("lo_tax", i))))
            .count();
        assert_eq!(r.rows_gathered, expect as u64);
    }

    #[test]
    fn no_predicates_gathers_everything() {
        let q = query(r#"{"fact": "lineorder", "select": [{"agg": "count", "alias": "n"}]}"#);
        let d = db();
        let r = run_query(&q, &d, PimLevelSpec::new(PimLevel::Rank), &DramConfig::default()).unwrap();
        assert_eq!(r.rows_gathered, r.fact_rows);
        assert_eq!(r.pim_selectivity, 1.0);
        assert_eq!(r.pim_passes, 0);
        assert_eq!(r.pim.total, 0.0);
    }

    #[test]
    fn spec_changes_time_not_result() {
        let d = db();
        let cfg = DramConfig::default();
        for q in ssb_queries() {
            let a = run_query(&q, &d, PimLevelSpec::new(PimLevel::BankAb), &cfg).unwrap();
            let b = run_query(&q, &d, PimLevelSpec::subarray(8, Default::default()), &cfg).unwrap();
            assert_eq!(a.result, b.result);
            assert_eq!(a.pim_passes, b.pim_passes);
            assert!(b.pim.total < a.pim.total || a.pim_passes == 0);
            let sum = a.operators.percentages().iter().map(|p| p.1).sum::<f64>();
            assert!((sum - 100.0).abs() < 1e-6);
        }
    }

    #[test]
    fn selectivity_invariant_to_term_order() {
        let d = db();
        let cfg = DramConfig::default();
        let q = &ssb_queries()[2];
        let mut plan = plan_query(q, &d, PimLevelSpec::new(PimLevel::BankAb)).unwrap();
        let a = execute(&plan, &d, &cfg).unwrap();
        plan.pim_terms.reverse();
        let b = execute(&plan, &d, &cfg).unwrap();
        assert_eq!(a.pim_selectivity, b.pim_selectivity);
        assert_eq!(a.result, b.result);
    }
}
