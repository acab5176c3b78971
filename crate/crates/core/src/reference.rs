//! Naive interpreter used as a correctness oracle.
//!
//! Works on fully decoded rows: every table is materialized as values,
//! joins look keys up in ordered maps, and the WHERE tree is evaluated
//! directly on values with literals coerced per comparison.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::query::{
    eval_scalar, like_match, output_types, AggFn, BoolExpr, ColumnRef, Query, ResultTable, Scalar, SelectItem,
};
use crate::store::{Database, LogicalType, Value};

struct Decoded {
    types: HashMap<String, LogicalType>,
    index: HashMap<String, usize>,
    rows: Vec<Vec<Value>>,
}

fn decode(db: &Database, name: &str) -> Result<Decoded> {
    let t = db.table(name)?;
    Ok(Decoded {
        types: t.columns().iter().map(|c| (c.name().to_string(), c.ty())).collect(),
        index: t.columns().iter().enumerate().map(|(i, c)| (c.name().to_string(), i)).collect(),
        rows: (0..t.rows()).map(|i| t.row(i)).collect(),
    })
}

type Tuple<'a> = HashMap<&'a str, &'a Vec<Value>>;

fn lookup(tables: &HashMap<String, Decoded>, tuple: &Tuple, c: &ColumnRef) -> Result<(Value, LogicalType)> {
    let d = tables.get(&c.table).ok_or_else(|| Error::UnknownTable(c.table.clone()))?;
    let i = *d.index.get(&c.column).ok_or_else(|| Error::UnknownColumn(c.to_string()))?;
    let row = tuple.get(c.table.as_str()).ok_or_else(|| Error::UnknownTable(c.table.clone()))?;
    Ok((row[i].clone(), d.types[&c.column]))
}

fn test(e: &BoolExpr, get: &dyn Fn(&ColumnRef) -> Result<(Value, LogicalType)>) -> Result<bool> {
    Ok(match e {
        BoolExpr::And(v) => {
            for x in v {
                if !test(x, get)? {
                    return Ok(false);
                }
            }
            true
        }
        BoolExpr::Or(v) => {
            for x in v {
                if test(x, get)? {
                    return Ok(true);
                }
            }
            false
        }
        BoolExpr::Not(x) => !test(x, get)?,
        BoolExpr::Cmp { col, op, value } => {
            let (v, ty) = get(col)?;
            op.holds(v.cmp(&value.coerce(ty)?))
        }
        BoolExpr::Between { col, lo, hi } => {
            let (v, ty) = get(col)?;
            lo.coerce(ty)? <= v && v <= hi.coerce(ty)?
        }
        BoolExpr::In { col, values } => {
            let (v, ty) = get(col)?;
            let mut hit = false;
            for l in values {
                hit |= l.coerce(ty)? == v;
            }
            hit
        }
        BoolExpr::Like { col, pattern, negated } => match get(col)?.0 {
            Value::Text(s) => like_match(&s, pattern) != *negated,
            v => return Err(Error::Invalid(format!("LIKE on {v:?}"))),
        },
        BoolExpr::ColCmp { left, op, right } => op.holds(get(left)?.0.cmp(&get(right)?.0)),
    })
}

/// Evaluate `q` against `db` without using the planner or the packed kernels.
pub fn reference_execute(q: &Query, db: &Database) -> Result<ResultTable> {
    q.validate(db.schema())?;
    let mut tables: HashMap<String, Decoded> = HashMap::new();
    for t in q.joined_tables().into_iter().chain(q.post_join_tables()) {
        if !tables.contains_key(&t) {
            tables.insert(t.clone(), decode(db, &t)?);
        }
    }
    let mut keyed: HashMap<String, BTreeMap<Value, usize>> = HashMap::new();
    for j in &q.joins {
        let d = &tables[&j.pk.table];
        let i = d.index[&j.pk.column];
        keyed.insert(j.pk.table.clone(), d.rows.iter().enumerate().map(|(r, row)| (row[i].clone(), r)).collect());
    }

    let aggregate = q.is_aggregate();
    let mut groups: BTreeMap<Vec<Value>, Vec<Option<Value>>> = BTreeMap::new();
    let mut counts: BTreeMap<Vec<Value>, Vec<i64>> = BTreeMap::new();
    let mut plain = Vec::new();
    let fact = &tables[&q.fact];
    'rows: for row in &fact.rows {
        let mut tuple: Tuple = HashMap::new();
        tuple.insert(&q.fact, row);
        while tuple.len() <= q.joins.len() {
            for j in &q.joins {
                if tuple.contains_key(j.pk.table.as_str()) || !tuple.contains_key(j.fk.table.as_str()) {
                    continue;
                }
                let key = lookup(&tables, &tuple, &j.fk)?.0;
                match keyed[&j.pk.table].get(&key) {
                    Some(&r) => {
                        tuple.insert(&j.pk.table, &tables[&j.pk.table].rows[r]);
                    }
                    None => continue 'rows,
                }
            }
        }
        let get = |c: &ColumnRef| lookup(&tables, &tuple, c);
        if let Some(w) = &q.filter {
            if !test(w, &get)? {
                continue;
            }
        }
        if !aggregate {
            plain.push(
                q.select
                    .iter()
                    .map(|s| match s {
                        SelectItem::Column { col, .. } => get(col).map(|v| v.0),
                        SelectItem::Aggregate { .. } => unreachable!("plain query"),
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
            continue;
        }
        let key: Vec<Value> = q.group_by.iter().map(|c| get(c).map(|v| v.0)).collect::<Result<_>>()?;
        let n_aggs = q.select.iter().filter(|s| s.is_aggregate()).count();
        let state = groups.entry(key.clone()).or_insert_with(|| vec![None; n_aggs]);
        let cnt = counts.entry(key).or_insert_with(|| vec![0; n_aggs]);
        let cond = |b: &BoolExpr| test(b, &get);
        for (k, (agg, expr)) in q
            .select
            .iter()
            .filter_map(|s| match s {
                SelectItem::Aggregate { agg, expr, .. } => Some((*agg, expr)),
                _ => None,
            })
            .enumerate()
        {
            cnt[k] += 1;
            let v = match (agg, expr) {
                (_, None) => continue,
                (AggFn::Min | AggFn::Max, Some(Scalar::Col(c))) => get(c)?.0,
                (_, Some(e)) => Value::Int(eval_scalar(e, &get, &cond)?.value),
            };
            state[k] = Some(match (agg, state[k].take()) {
                (_, None) => v,
                (AggFn::Sum, Some(Value::Int(a))) => Value::Int(
                    a.checked_add(v.as_int().expect("numeric"))
                        .ok_or_else(|| Error::AggregateOverflow("SUM exceeds 64 bits".into()))?,
                ),
                (AggFn::Min, Some(a)) => a.min(v),
                (AggFn::Max, Some(a)) => a.max(v),
                (_, Some(a)) => a,
            });
        }
    }

    let rows = if aggregate {
        if groups.is_empty() && q.group_by.is_empty() {
            let n_aggs = q.select.iter().filter(|s| s.is_aggregate()).count();
            groups.insert(Vec::new(), vec![None; n_aggs]);
            counts.insert(Vec::new(), vec![0; n_aggs]);
        }
        let mut out = Vec::new();
        for (key, state) in &groups {
            let cnt = &counts[key];
            let mut k = 0;
            let mut row = Vec::new();
            for s in &q.select {
                row.push(match s {
                    SelectItem::Aggregate { agg, .. } => {
                        let v = if *agg == AggFn::Count {
                            Value::Int(cnt[k])
                        } else {
                            state[k].clone().unwrap_or(Value::Null)
                        };
                        k += 1;
                        v
                    }
                    SelectItem::Column { col, .. } => match q.group_by.iter().position(|g| g == col) {
                        Some(i) => key[i].clone(),
                        None => post_value(q, &tables, key, col)?,
                    },
                });
            }
            out.push(row);
        }
        out
    } else {
        plain
    };
    let mut result = ResultTable { columns: q.output_names(), types: output_types(q, db.schema())?, rows };
    result.finish(&q.order_by, q.limit)?;
    Ok(result)
}

fn post_value(
    q: &Query,
    tables: &HashMap<String, Decoded>,
    key: &[Value],
    col: &ColumnRef,
) -> Result<Value> {
    let p = q
        .post_joins
        .iter()
        .find(|p| p.table == col.table)
        .ok_or_else(|| Error::Invalid(format!("{col} is neither grouped nor post-joined")))?;
    let k = &key[q.group_by.iter().position(|g| *g == p.key).expect("validated")];
    let d = &tables[&p.table];
    let pk = d.index[&p.pk];
    let row = d
        .rows
        .iter()
        .find(|r| r[pk] == *k)
        .ok_or_else(|| Error::DanglingKey { column: p.key.to_string(), value: format!("{k:?}") })?;
    Ok(row[d.index[&col.column]].clone())
}
