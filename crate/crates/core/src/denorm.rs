//! Workload-driven denormalization into a wide fact table.
//!
//! A fold entry copies one dimension column into the fact table, reached
//! from the fact through a chain of foreign keys (`path`). Referencing a
//! dimension's primary key is treated as referencing the foreign key that
//! points at it, so primary keys are never folded.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::{ColumnRef, PostJoin, Query, SelectItem};
use crate::store::{ColumnDef, Database, Schema, Table, TableDef, Value};

/// Longest foreign-key chain that may be folded.
pub const MAX_FK_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DenormLevel {
    D1,
    D2,
    D3,
    D4,
}

impl DenormLevel {
    pub const ALL: [DenormLevel; 4] = [DenormLevel::D1, DenormLevel::D2, DenormLevel::D3, DenormLevel::D4];
}

impl fmt::Display for DenormLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for DenormLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D1" => Ok(DenormLevel::D1),
            "D2" => Ok(DenormLevel::D2),
            "D3" => Ok(DenormLevel::D3),
            "D4" => Ok(DenormLevel::D4),
            _ => Err(Error::Invalid(format!("unknown denormalization level {s:?}"))),
        }
    }
}

/// A dimension column addressed by its FK path from the fact table.
pub type FoldKey = (Vec<String>, String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldEntry {
    /// Foreign-key columns followed from the fact table, outermost first.
    pub path: Vec<String>,
    pub table: String,
    pub column: String,
    /// Column name in the wide table.
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenormPlan {
    pub level: DenormLevel,
    pub fact: String,
    pub folds: Vec<FoldEntry>,
    pub widetable: TableDef,
    /// Post-aggregation joins per query name.
    pub residual_joins: BTreeMap<String, Vec<PostJoin>>,
}

impl DenormPlan {
    pub fn fold_set(&self) -> BTreeSet<FoldKey> {
        self.folds.iter().map(|f| (f.path.clone(), f.column.clone())).collect()
    }

    /// Fold set as (dimension table, column) pairs.
    pub fn fold_columns(&self) -> BTreeSet<(String, String)> {
        self.folds.iter().map(|f| (f.table.clone(), f.column.clone())).collect()
    }

    pub fn folded_name(&self, path: &[String], column: &str) -> Option<&str> {
        self.folds.iter().find(|f| f.path == path && f.column == column).map(|f| f.name.as_str())
    }
}

/// Table positions of one query, keyed by table name.
struct QueryPaths<'a> {
    schema: &'a Schema,
    fact: &'a str,
    paths: HashMap<String, Vec<String>>,
}

impl<'a> QueryPaths<'a> {
    fn new(q: &'a Query, schema: &'a Schema) -> Result<Self> {
        q.validate(schema)?;
        let mut paths = HashMap::new();
        paths.insert(q.fact.clone(), Vec::new());
        let mut pending: Vec<_> = q.joins.iter().collect();
        while !pending.is_empty() {
            pending.retain(|j| match paths.get(&j.fk.table).cloned() {
                Some(mut p) => {
                    p.push(j.fk.column.clone());
                    paths.insert(j.pk.table.clone(), p);
                    false
                }
                None => true,
            });
        }
        for p in paths.values() {
            if p.len() > MAX_FK_DEPTH {
                return Err(Error::FkDepth { limit: MAX_FK_DEPTH, path: p.join(".") });
            }
        }
        Ok(QueryPaths { schema, fact: &q.fact, paths })
    }

    fn path(&self, table: &str) -> &[String] {
        &self.paths[table]
    }

    /// (path, column) with a dimension primary key mapped to its referencing FK.
    fn normalize(&self, c: &ColumnRef) -> FoldKey {
        let path = self.path(&c.table);
        let is_pk = c.table != self.fact && self.schema.primary_key(&c.table).ok() == Some(c.column.as_str());
        if is_pk {
            let (last, parent) = path.split_last().expect("dimension has a path");
            (parent.to_vec(), last.clone())
        } else {
            (path.to_vec(), c.column.clone())
        }
    }

    fn table_at(&self, path: &[String]) -> &str {
        self.paths.iter().find(|(_, p)| p.as_slice() == path).map(|(t, _)| t.as_str()).expect("known path")
    }
}

/// Column usage of one query, in normalized form.
struct Usage {
    filter: BTreeSet<FoldKey>,
    aggregated: BTreeSet<FoldKey>,
    plain: BTreeSet<FoldKey>,
    grouped: BTreeSet<FoldKey>,
}

fn usage(q: &Query, qp: &QueryPaths) -> Usage {
    let norm = |cols: Vec<ColumnRef>| -> BTreeSet<FoldKey> { cols.iter().map(|c| qp.normalize(c)).collect() };
    let mut f = Vec::new();
    if let Some(w) = &q.filter {
        w.columns(&mut f);
    }
    let mut agg = Vec::new();
    let mut plain = q.group_by.clone();
    for s in &q.select {
        match s {
            SelectItem::Column { col, .. } => plain.push(col.clone()),
            SelectItem::Aggregate { expr: Some(e), .. } => e.columns(&mut agg),
            SelectItem::Aggregate { expr: None, .. } => {}
        }
    }
    Usage { filter: norm(f), aggregated: norm(agg), plain: norm(plain), grouped: norm(q.group_by.clone()) }
}

impl Usage {
    /// Plain SELECT/GROUP BY dimension columns whose dimension's key is grouped.
    fn determined(&self) -> BTreeSet<FoldKey> {
        self.plain
            .iter()
            .filter(|(path, _)| !path.is_empty())
            .filter(|k| !self.filter.contains(*k) && !self.aggregated.contains(*k))
            .filter(|(path, _)| {
                let (last, parent) = path.split_last().expect("non-empty");
                self.grouped.contains(&(parent.to_vec(), last.clone()))
            })
            .cloned()
            .collect()
    }
}

fn all_dimension_columns(schema: &Schema, fact: &str) -> Result<Vec<(Vec<String>, String, String)>> {
    fn walk(
        schema: &Schema,
        table: &str,
        path: &mut Vec<String>,
        visiting: &mut Vec<String>,
        out: &mut Vec<(Vec<String>, String, String)>,
    ) -> Result<()> {
        for fk in &schema.table(table)?.foreign_keys {
            if visiting.contains(&fk.table) {
                return Err(Error::FkCycle(format!("{} -> {}", visiting.join(" -> "), fk.table)));
            }
            path.push(fk.column.clone());
            if path.len() > MAX_FK_DEPTH {
                return Err(Error::FkDepth { limit: MAX_FK_DEPTH, path: path.join(".") });
            }
            let dim = schema.table(&fk.table)?;
            for c in &dim.columns {
                if dim.primary_key.as_deref() != Some(c.name.as_str()) {
                    out.push((path.clone(), dim.name.clone(), c.name.clone()));
                }
            }
            visiting.push(fk.table.clone());
            walk(schema, &fk.table, path, visiting, out)?;
            visiting.pop();
            path.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(schema, fact, &mut Vec::new(), &mut vec![fact.to_string()], &mut out)?;
    Ok(out)
}

/// Choose the columns to fold for `level` over `queries`.
pub fn analyze_workload(queries: &[Query], schema: &Schema, level: DenormLevel) -> Result<DenormPlan> {
    let fact = match queries.first() {
        Some(q) => q.fact.clone(),
        None => return Err(Error::Invalid("empty workload".into())),
    };
    if let Some(q) = queries.iter().find(|q| q.fact != fact) {
        return Err(Error::Invalid(format!("{}: fact table {} differs from {fact}", q.name, q.fact)));
    }
    let fact_def = schema.table(&fact)?;
    // (path, column) -> table
    let mut chosen: BTreeMap<FoldKey, String> = BTreeMap::new();
    let everything = all_dimension_columns(schema, &fact)?;
    if level == DenormLevel::D4 {
        for (path, table, column) in everything {
            chosen.insert((path, column), table);
        }
    } else if level != DenormLevel::D1 {
        for q in queries {
            let qp = QueryPaths::new(q, schema)?;
            let u = usage(q, &qp);
            let mut keys: BTreeSet<FoldKey> = u.filter.clone();
            if level == DenormLevel::D3 {
                let determined = u.determined();
                keys.extend(u.aggregated.iter().cloned());
                keys.extend(u.plain.iter().filter(|k| !determined.contains(*k)).cloned());
            }
            for k in keys.into_iter().filter(|(p, _)| !p.is_empty()) {
                let table = qp.table_at(&k.0).to_string();
                chosen.insert(k, table);
            }
        }
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (_, c) in chosen.keys() {
        *counts.entry(c.as_str()).or_default() += 1;
    }
    let folds: Vec<FoldEntry> = chosen
        .iter()
        .map(|((path, column), table)| {
            let clash = counts[column.as_str()] > 1 || fact_def.column(column).is_some();
            let name = if clash { format!("{}__{column}", path.join("__")) } else { column.clone() };
            FoldEntry { path: path.clone(), table: table.clone(), column: column.clone(), name }
        })
        .collect();
    let mut widetable = fact_def.clone();
    for f in &folds {
        widetable.columns.push(ColumnDef::new(&f.name, schema.column(&f.table, &f.column)?.ty));
    }
    let mut plan = DenormPlan { level, fact, folds, widetable, residual_joins: BTreeMap::new() };
    for q in queries {
        let r = rewrite_query(q, &plan, schema)?;
        if !r.post_joins.is_empty() {
            plan.residual_joins.insert(q.name.clone(), r.post_joins);
        }
    }
    Ok(plan)
}

/// Fact table of `db` with every fold entry of `plan` appended.
pub fn build_widetable(db: &Database, plan: &DenormPlan) -> Result<Database> {
    let fact = db.table(&plan.fact)?;
    if plan.folds.is_empty() {
        return Ok(db.clone());
    }
    let mut row_maps: HashMap<Vec<String>, Vec<u32>> = HashMap::new();
    let identity: Vec<u32> = (0..fact.rows() as u32).collect();
    let mut columns = fact.columns().to_vec();
    for f in &plan.folds {
        for depth in 1..=f.path.len() {
            let prefix = &f.path[..depth];
            if row_maps.contains_key(prefix) {
                continue;
            }
            let parent_rows = if depth == 1 { &identity } else { &row_maps[&f.path[..depth - 1]] };
            let parent = if depth == 1 { fact } else { db.table(table_for(db, &plan.fact, &f.path[..depth - 1])?)? };
            let rows = follow_fk(db, parent, &prefix[depth - 1], parent_rows)?;
            row_maps.insert(prefix.to_vec(), rows);
        }
        let src = db.table(&f.table)?.column(&f.column)?;
        columns.push(src.gather(ColumnDef::new(&f.name, src.ty()), &row_maps[&f.path])?);
    }
    db.with_table(Table::new(plan.widetable.clone(), columns)?)
}

fn table_for<'a>(db: &'a Database, fact: &str, path: &[String]) -> Result<&'a str> {
    let mut table = db.schema().table(fact)?;
    for fk in path {
        let target = table
            .foreign_key(fk)
            .ok_or_else(|| Error::UnknownColumn(format!("{}.{fk} is not a foreign key", table.name)))?;
        table = db.schema().table(&target.table)?;
    }
    Ok(&table.name)
}

/// Row of the referenced table for each parent row.
fn follow_fk(db: &Database, parent: &Table, fk: &str, parent_rows: &[u32]) -> Result<Vec<u32>> {
    let target_name = &parent
        .def()
        .foreign_key(fk)
        .ok_or_else(|| Error::UnknownColumn(format!("{}.{fk} is not a foreign key", parent.name())))?
        .table;
    let target = db.table(target_name)?;
    let pk = target.column(db.schema().primary_key(target_name)?)?;
    let index: HashMap<Value, u32> = (0..target.rows()).map(|r| (pk.value(r), r as u32)).collect();
    let fk_col = parent.column(fk)?;
    let mut by_code: HashMap<u64, u32> = HashMap::new();
    parent_rows
        .iter()
        .map(|&r| {
            let code = fk_col.code(r as usize);
            if let Some(&t) = by_code.get(&code) {
                return Ok(t);
            }
            let v = fk_col.decode(code);
            let t = *index.get(&v).ok_or_else(|| Error::DanglingKey {
                column: format!("{}.{fk}", parent.name()),
                value: format!("{v:?}"),
            })?;
            by_code.insert(code, t);
            Ok(t)
        })
        .collect()
}

/// Redirect folded references to wide-table columns and drop joins that are
/// no longer needed. Under D3, grouped columns determined by a grouped key
/// become post-aggregation joins. Queries over another fact table pass through.
pub fn rewrite_query(q: &Query, plan: &DenormPlan, schema: &Schema) -> Result<Query> {
    if q.fact != plan.fact || plan.folds.is_empty() {
        return Ok(q.clone());
    }
    let qp = QueryPaths::new(q, schema)?;
    let u = usage(q, &qp);
    let fact = q.fact.clone();
    let available = |k: &FoldKey| -> Option<ColumnRef> {
        if k.0.is_empty() {
            Some(ColumnRef::new(&fact, &k.1))
        } else {
            plan.folded_name(&k.0, &k.1).map(|n| ColumnRef::new(&fact, n))
        }
    };
    let redirect = |c: &ColumnRef| available(&qp.normalize(c)).unwrap_or_else(|| c.clone());

    // Candidate post-join tables: every plain reference to them is determined and unfolded.
    let mut post: BTreeSet<String> = BTreeSet::new();
    if plan.level == DenormLevel::D3 {
        let determined: BTreeSet<FoldKey> =
            u.determined().into_iter().filter(|k| plan.folded_name(&k.0, &k.1).is_none()).collect();
        for (path, _) in &determined {
            let (last, parent) = path.split_last().expect("non-empty");
            if available(&(parent.to_vec(), last.clone())).is_some() {
                post.insert(qp.table_at(path).to_string());
            }
        }
    }
    loop {
        let needed = needed_tables(q, &qp, &post, &redirect);
        let before = post.len();
        post.retain(|t| !needed.contains(t));
        if post.len() == before {
            break;
        }
    }

    let keep = |c: &ColumnRef| post.contains(&c.table);
    let map = |c: &ColumnRef| if keep(c) { c.clone() } else { redirect(c) };
    let select = q
        .select
        .iter()
        .map(|s| match s {
            SelectItem::Column { col, alias } => SelectItem::Column {
                col: map(col),
                alias: alias.clone().or_else(|| (map(col).column != col.column).then(|| col.column.clone())),
            },
            SelectItem::Aggregate { agg, expr, alias } => SelectItem::Aggregate {
                agg: *agg,
                expr: expr.as_ref().map(|e| e.map_columns(&redirect)),
                alias: alias.clone(),
            },
        })
        .collect();
    let mut group_by: Vec<ColumnRef> = Vec::new();
    for g in q.group_by.iter().filter(|g| !keep(g)) {
        let m = redirect(g);
        if !group_by.contains(&m) {
            group_by.push(m);
        }
    }
    let needed = needed_tables(q, &qp, &post, &redirect);
    let joins = q.joins.iter().filter(|j| needed.contains(&j.pk.table)).cloned().collect();
    let post_joins = post
        .iter()
        .map(|t| {
            let (last, parent) = qp.path(t).split_last().expect("dimension");
            PostJoin {
                table: t.clone(),
                pk: schema.primary_key(t).expect("validated").to_string(),
                key: available(&(parent.to_vec(), last.clone())).expect("checked available"),
            }
        })
        .collect();
    Ok(Query {
        name: q.name.clone(),
        fact: q.fact.clone(),
        select,
        joins,
        filter: q.filter.as_ref().map(|w| w.map_columns(&redirect)),
        group_by,
        order_by: q.order_by.clone(),
        limit: q.limit,
        post_joins,
    })
}

/// Tables that must stay joined: those still referenced after redirection,
/// plus every table on the path to them.
fn needed_tables(
    q: &Query,
    qp: &QueryPaths,
    post: &BTreeSet<String>,
    redirect: &dyn Fn(&ColumnRef) -> ColumnRef,
) -> BTreeSet<String> {
    let mut refs = Vec::new();
    for s in &q.select {
        match s {
            SelectItem::Column { col, .. } if !post.contains(&col.table) => refs.push(redirect(col)),
            SelectItem::Column { .. } => {}
            SelectItem::Aggregate { expr, .. } => {
                let mut cols = Vec::new();
                if let Some(e) = expr {
                    e.columns(&mut cols);
                }
                refs.extend(cols.iter().map(redirect));
            }
        }
    }
    if let Some(w) = &q.filter {
        let mut cols = Vec::new();
        w.columns(&mut cols);
        refs.extend(cols.iter().map(redirect));
    }
    refs.extend(q.group_by.iter().filter(|g| !post.contains(&g.table)).map(redirect));
    let mut needed = BTreeSet::new();
    for r in refs.iter().filter(|r| r.table != q.fact) {
        let path = qp.path(&r.table);
        for d in 1..=path.len() {
            needed.insert(qp.table_at(&path[..d]).to_string());
        }
    }
    needed
}

/// Relative growth of the encoded size.
pub fn memory_overhead(original: &Database, denorm: &Database) -> f64 {
    let a = original.encoded_bytes() as f64;
    (denorm.encoded_bytes() as f64 - a) / a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::fixtures::{ssb_queries, tpch_queries, tpch_schema};
    use crate::store::ssb::{generate_ssb, ssb_schema};
    use crate::store::{ForeignKey, LogicalType};

    #[test]
    fn q10_d3_excludes_c_name() {
        let schema = tpch_schema();
        let plan = analyze_workload(&tpch_queries(), &schema, DenormLevel::D3).unwrap();
        let cols = plan.fold_columns();
        assert!(!cols.contains(&("customer".into(), "c_name".into())));
        assert!(cols.contains(&("orders".into(), "o_custkey".into())));
        assert!(cols.contains(&("nation".into(), "n_name".into())));
        let q10 = tpch_queries().into_iter().find(|q| q.name == "q10").unwrap();
        let r = rewrite_query(&q10, &plan, &schema).unwrap();
        assert_eq!(r.post_joins.len(), 1);
        assert_eq!(r.post_joins[0].table, "customer");
        assert_eq!(r.post_joins[0].key, ColumnRef::new("lineitem", "o_custkey"));
        assert!(r.joins.is_empty(), "{:?}", r.joins);
        assert_eq!(r.output_names(), q10.output_names());
        assert_eq!(plan.residual_joins["q10"].len(), 1);
    }

    #[test]
    fn ssb_d2_equals_d3_and_nesting() {
        let schema = ssb_schema();
        let qs = ssb_queries();
        let sets: Vec<_> =
            DenormLevel::ALL.iter().map(|&l| analyze_workload(&qs, &schema, l).unwrap().fold_set()).collect();
        assert!(sets[0].is_empty());
        assert_eq!(sets[1], sets[2]);
        assert!(sets[0].is_subset(&sets[1]) && sets[2].is_subset(&sets[3]));
        let t = tpch_schema();
        let tq = tpch_queries();
        let tsets: Vec<_> =
            DenormLevel::ALL.iter().map(|&l| analyze_workload(&tq, &t, l).unwrap().fold_set()).collect();
        for w in tsets.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
    }

    #[test]
    fn residual_joins_only_at_d3() {
        let schema = tpch_schema();
        for l in [DenormLevel::D1, DenormLevel::D2, DenormLevel::D4] {
            assert!(analyze_workload(&tpch_queries(), &schema, l).unwrap().residual_joins.is_empty());
        }
    }

    #[test]
    fn flight_one_at_d2_has_no_joins() {
        let schema = ssb_schema();
        let qs = ssb_queries();
        let plan = analyze_workload(&qs, &schema, DenormLevel::D2).unwrap();
        for q in qs.iter() {
            let r = rewrite_query(q, &plan, &schema).unwrap();
            assert!(r.joins.is_empty(), "{}", q.name);
            r.validate(&plan_schema(&schema, &plan)).unwrap();
        }
    }

    fn plan_schema(schema: &Schema, plan: &DenormPlan) -> Schema {
        let mut s = schema.clone();
        for t in &mut s.tables {
            if t.name == plan.fact {
                *t = plan.widetable.clone();
            }
        }
        s
    }

    #[test]
    fn fact_only_query_is_untouched() {
        let schema = tpch_schema();
        let qs = tpch_queries();
        let plan = analyze_workload(&qs, &schema, DenormLevel::D4).unwrap();
        let q6 = qs.iter().find(|q| q.name == "q6").unwrap();
        assert_eq!(&rewrite_query(q6, &plan, &schema).unwrap(), q6);
    }

    #[test]
    fn widetable_values_follow_fk() {
        let db = generate_ssb(0.001, 5).unwrap();
        let plan = analyze_workload(&ssb_queries(), db.schema(), DenormLevel::D2).unwrap();
        let wide = build_widetable(&db, &plan).unwrap();
        let lo = wide.table("lineorder").unwrap();
        let date = db.table("date").unwrap();
        for i in (0..lo.rows()).step_by(97) {
            let key = lo.column("lo_orderdate").unwrap().value(i);
            let r = (0..date.rows()).find(|&r| date.column("d_datekey").unwrap().value(r) == key).unwrap();
            assert_eq!(lo.column("d_year").unwrap().value(i), date.column("d_year").unwrap().value(r));
        }
        let d1 = analyze_workload(&ssb_queries(), db.schema(), DenormLevel::D1).unwrap();
        assert_eq!(build_widetable(&db, &d1).unwrap(), db);
        assert_eq!(memory_overhead(&db, &db), 0.0);
        assert!(memory_overhead(&db, &wide) > 0.0);
    }

    fn snowflake(depth: usize) -> Schema {
        let mut tables = Vec::new();
        for i in 0..=depth {
            let mut cols = vec![ColumnDef::new(format!("k{i}"), LogicalType::Int)];
            cols.push(ColumnDef::new(format!("v{i}"), LogicalType::Text));
            let mut fks = Vec::new();
            if i < depth {
                cols.push(ColumnDef::new(format!("f{i}"), LogicalType::Int));
                fks.push(ForeignKey { column: format!("f{i}"), table: format!("t{}", i + 1) });
            }
            tables.push(TableDef {
                name: format!("t{i}"),
                columns: cols,
                primary_key: Some(format!("k{i}")),
                foreign_keys: fks,
            });
        }
        Schema { tables }
    }

    fn chain_query(depth: usize) -> Query {
        let joins: Vec<String> =
            (0..depth).map(|i| format!(r#"{{"fk": "t{i}.f{i}", "pk": "t{}.k{}"}}"#, i + 1, i + 1)).collect();
        Query::from_json(&format!(
            r#"{{"name": "c", "fact": "t0", "select": [{{"agg": "count", "alias": "n"}}], "joins": [{}],
                "where": {{"cmp": {{"col": "t{depth}.v{depth}", "op": "eq", "value": "x"}}}}}}"#,
            joins.join(",")
        ))
        .unwrap()
    }

    #[test]
    fn depth_limit_and_cycles() {
        let ok = snowflake(MAX_FK_DEPTH);
        assert!(analyze_workload(&[chain_query(MAX_FK_DEPTH)], &ok, DenormLevel::D4).is_ok());
        let deep = snowflake(MAX_FK_DEPTH + 1);
        assert!(matches!(
            analyze_workload(&[chain_query(MAX_FK_DEPTH + 1)], &deep, DenormLevel::D2),
            Err(Error::FkDepth { .. })
        ));
        let mut cyc = snowflake(2);
        cyc.tables[2].columns.push(ColumnDef::new("back", LogicalType::Int));
        cyc.tables[2].foreign_keys.push(ForeignKey { column: "back".into(), table: "t1".into() });
        assert!(matches!(analyze_workload(&[chain_query(2)], &cyc, DenormLevel::D4), Err(Error::FkCycle(_))));
    }

    #[test]
    fn snowflake_fold_composes_lookups() {
        let schema = snowflake(2);
        let mk = |i: usize, rows: Vec<Vec<Value>>| {
            let def = schema.tables[i].clone();
            let cols = (0..def.columns.len()).map(|c| rows.iter().map(|r| r[c].clone()).collect()).collect();
            Table::from_values(def, cols).unwrap()
        };
        let (int, txt) = (Value::Int, |s: &str| Value::Text(s.into()));
        let t0 = mk(0, vec![vec![int(1), txt("a"), int(20)], vec![int(2), txt("b"), int(10)]]);
        let t1 = mk(1, vec![vec![int(10), txt("p"), int(7)], vec![int(20), txt("q"), int(8)]]);
        let t2 = mk(2, vec![vec![int(7), txt("x")], vec![int(8), txt("y")]]);
        let db = Database::new(vec![t0, t1, t2]).unwrap();
        let plan = analyze_workload(&[chain_query(2)], &schema, DenormLevel::D2).unwrap();
        assert_eq!(plan.folds[0].path, vec!["f0".to_string(), "f1".to_string()]);
        let wide = build_widetable(&db, &plan).unwrap();
        assert_eq!(wide.table("t0").unwrap().column("v2").unwrap().values(), vec![txt("y"), txt("x")]);
        let bad = db.with_table(mk(1, vec![vec![int(10), txt("p"), int(9)], vec![int(20), txt("q"), int(8)]])).unwrap();
        assert!(matches!(build_widetable(&bad, &plan), Err(Error::DanglingKey { .. })));
    }
}
