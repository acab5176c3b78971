//! Host-side join and aggregation operators.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::AggFn;
use crate::store::{Table, Value};

/// Hash table from key value to row, built over a filtered key column.
#[derive(Debug, Default)]
pub struct JoinIndex {
    map: HashMap<Value, u32>,
}

impl JoinIndex {
    /// Index the rows of `table` that satisfy `keep`. Keys must be unique.
    pub fn build(table: &Table, key: &str, keep: impl Fn(u32) -> bool) -> Result<JoinIndex> {
        let col = table.column(key)?;
        let mut map = HashMap::with_capacity(table.rows());
        for r in 0..table.rows() as u32 {
            if keep(r) && map.insert(col.value(r as usize), r).is_some() {
                return Err(Error::Invalid(format!("duplicate key {:?} in {}.{key}", col.value(r as usize), table.name())));
            }
        }
        Ok(JoinIndex { map })
    }

    #[inline]
    pub fn probe(&self, key: &Value) -> Option<u32> {
        self.map.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Equality join of `left.left_key` against the unique key `right.right_key`;
/// returns matching (left row, right row) pairs in left order.
pub fn hash_join(left: &Table, left_key: &str, right: &Table, right_key: &str) -> Result<Vec<(u32, u32)>> {
    let index = JoinIndex::build(right, right_key, |_| true)?;
    let col = left.column(left_key)?;
    Ok((0..left.rows() as u32).filter_map(|l| index.probe(&col.value(l as usize)).map(|r| (l, r))).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Accumulator {
    Sum(Option<i64>),
    Count(i64),
    Min(Option<Value>),
    Max(Option<Value>),
}

impl Accumulator {
    pub fn new(f: AggFn) -> Self {
        match f {
            AggFn::Sum => Accumulator::Sum(None),
            AggFn::Count => Accumulator::Count(0),
            AggFn::Min => Accumulator::Min(None),
            AggFn::Max => Accumulator::Max(None),
        }
    }

    /// `COUNT(*)` passes `Value::Null`.
    pub fn update(&mut self, v: Value) -> Result<()> {
        match self {
            Accumulator::Sum(s) => {
                let x = v.as_int().ok_or_else(|| Error::Invalid(format!("SUM over non-numeric {v:?}")))?;
                *s = Some(match s {
                    None => x,
                    Some(a) => a.checked_add(x).ok_or_else(|| Error::AggregateOverflow("SUM exceeds 64 bits".into()))?,
                });
            }
            Accumulator::Count(c) => *c += 1,
            Accumulator::Min(m) => {
                if m.as_ref().is_none_or(|cur| v < *cur) {
                    *m = Some(v);
                }
            }
            Accumulator::Max(m) => {
                if m.as_ref().is_none_or(|cur| v > *cur) {
                    *m = Some(v);
                }
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> Value {
        match self {
            Accumulator::Sum(s) => s.map_or(Value::Null, Value::Int),
            Accumulator::Count(c) => Value::Int(*c),
            Accumulator::Min(m) | Accumulator::Max(m) => m.clone().unwrap_or(Value::Null),
        }
    }
}

/// Grouped aggregation keyed by the GROUP BY values.
#[derive(Debug)]
pub struct GroupAggregate {
    funcs: Vec<AggFn>,
    grouped: bool,
    groups: BTreeMap<Vec<Value>, Vec<Accumulator>>,
}

impl GroupAggregate {
    pub fn new(funcs: Vec<AggFn>, grouped: bool) -> Self {
        GroupAggregate { funcs, grouped, groups: BTreeMap::new() }
    }

    pub fn update(&mut self, key: Vec<Value>, inputs: Vec<Value>) -> Result<()> {
        let funcs = &self.funcs;
        let accs = self.groups.entry(key).or_insert_with(|| funcs.iter().map(|&f| Accumulator::new(f)).collect());
        for (a, v) in accs.iter_mut().zip(inputs) {
            a.update(v)?;
        }
        Ok(())
    }

    /// One row per group; an ungrouped aggregate over no input yields one
    /// row of empty accumulators.
    pub fn finish(self) -> Vec<(Vec<Value>, Vec<Value>)> {
        if self.groups.is_empty() && !self.grouped {
            return vec![(Vec::new(), self.funcs.iter().map(|&f| Accumulator::new(f).finish()).collect())];
        }
        self.groups.into_iter().map(|(k, accs)| (k, accs.iter().map(Accumulator::finish).collect())).collect()
    }
}

/// Aggregate rows given as (key, inputs) pairs.
pub fn group_aggregate(
    rows: impl IntoIterator<Item = (Vec<Value>, Vec<Value>)>,
    funcs: &[AggFn],
    grouped: bool,
) -> Result<Vec<(Vec<Value>, Vec<Value>)>> {
    let mut g = GroupAggregate::new(funcs.to_vec(), grouped);
    for (k, v) in rows {
        g.update(k, v)?;
    }
    Ok(g.finish())
}
