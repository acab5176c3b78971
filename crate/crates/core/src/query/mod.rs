//! Declarative query representation.
//!
//! Queries are JSON documents. Column references are written as
//! `"table.column"`; boolean expressions and scalars use single-key objects,
//! e.g. `{"cmp": {"col": "date.d_year", "op": "eq", "value": 1993}}` or
//! `{"mul": [{"col": "lineorder.lo_extendedprice"}, {"col": "lineorder.lo_discount"}]}`.

pub mod fixtures;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::store::CmpOp;
use crate::store::{parse_value, LogicalType, Schema, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        ColumnRef { table: table.into(), column: column.into() }
    }
}

impl TryFrom<String> for ColumnRef {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        match s.split_once('.') {
            Some((t, c)) if !t.is_empty() && !c.is_empty() => Ok(ColumnRef::new(t, c)),
            _ => Err(format!("column reference {s:?} is not of the form table.column")),
        }
    }
}

impl From<ColumnRef> for String {
    fn from(c: ColumnRef) -> String {
        c.to_string()
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

/// A constant, coerced to the type of the column it is compared with.
/// Decimals and dates are written as strings (`"0.05"`, `"1994-01-01"`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Text(String),
}

impl Literal {
    pub fn coerce(&self, ty: LogicalType) -> Result<Value> {
        match (self, ty) {
            (Literal::Int(v), LogicalType::Int) => Ok(Value::Int(*v)),
            (Literal::Int(v), LogicalType::Decimal { scale, .. }) => v
                .checked_mul(10i64.pow(scale as u32))
                .map(Value::Int)
                .ok_or_else(|| Error::Invalid(format!("literal {v} overflows"))),
            (Literal::Int(v), LogicalType::Text) => Ok(Value::Text(v.to_string())),
            (Literal::Int(v), LogicalType::Date) => Err(Error::Invalid(format!(
                "date literal must be a \"YYYY-MM-DD\" string, got {v}"
            ))),
            (Literal::Text(s), t) => parse_value(t, s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoolExpr {
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
    Not(Box<BoolExpr>),
    Cmp { col: ColumnRef, op: CmpOp, value: Literal },
    /// Inclusive on both ends.
    Between { col: ColumnRef, lo: Literal, hi: Literal },
    In { col: ColumnRef, values: Vec<Literal> },
    /// SQL pattern with `%` and `_` wildcards.
    Like {
        col: ColumnRef,
        pattern: String,
        #[serde(default)]
        negated: bool,
    },
    ColCmp { left: ColumnRef, op: CmpOp, right: ColumnRef },
}

impl BoolExpr {
    pub fn columns(&self, out: &mut Vec<ColumnRef>) {
        match self {
            BoolExpr::And(v) | BoolExpr::Or(v) => v.iter().for_each(|e| e.columns(out)),
            BoolExpr::Not(e) => e.columns(out),
            BoolExpr::Cmp { col, .. }
            | BoolExpr::Between { col, .. }
            | BoolExpr::In { col, .. }
            | BoolExpr::Like { col, .. } => out.push(col.clone()),
            BoolExpr::ColCmp { left, right, .. } => {
                out.push(left.clone());
                out.push(right.clone());
            }
        }
    }

    pub fn tables(&self) -> BTreeSet<String> {
        let mut cols = Vec::new();
        self.columns(&mut cols);
        cols.into_iter().map(|c| c.table).collect()
    }

    /// Top-level conjuncts, flattening nested ANDs.
    pub fn conjuncts(&self) -> Vec<&BoolExpr> {
        match self {
            BoolExpr::And(v) => v.iter().flat_map(|e| e.conjuncts()).collect(),
            e => vec![e],
        }
    }

    pub fn map_columns(&self, f: &impl Fn(&ColumnRef) -> ColumnRef) -> BoolExpr {
        match self {
            BoolExpr::And(v) => BoolExpr::And(v.iter().map(|e| e.map_columns(f)).collect()),
            BoolExpr::Or(v) => BoolExpr::Or(v.iter().map(|e| e.map_columns(f)).collect()),
            BoolExpr::Not(e) => BoolExpr::Not(Box::new(e.map_columns(f))),
            BoolExpr::Cmp { col, op, value } => BoolExpr::Cmp { col: f(col), op: *op, value: value.clone() },
            BoolExpr::Between { col, lo, hi } => BoolExpr::Between { col: f(col), lo: lo.clone(), hi: hi.clone() },
            BoolExpr::In { col, values } => BoolExpr::In { col: f(col), values: values.clone() },
            BoolExpr::Like { col, pattern, negated } => {
                BoolExpr::Like { col: f(col), pattern: pattern.clone(), negated: *negated }
            }
            BoolExpr::ColCmp { left, op, right } => BoolExpr::ColCmp { left: f(left), op: *op, right: f(right) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scalar {
    Col(ColumnRef),
    Lit(Literal),
    Add(Box<Scalar>, Box<Scalar>),
    Sub(Box<Scalar>, Box<Scalar>),
    Mul(Box<Scalar>, Box<Scalar>),
    Case {
        when: Box<BoolExpr>,
        then: Box<Scalar>,
        #[serde(rename = "else")]
        otherwise: Box<Scalar>,
    },
}

impl Scalar {
    pub fn columns(&self, out: &mut Vec<ColumnRef>) {
        match self {
            Scalar::Col(c) => out.push(c.clone()),
            Scalar::Lit(_) => {}
            Scalar::Add(a, b) | Scalar::Sub(a, b) | Scalar::Mul(a, b) => {
                a.columns(out);
                b.columns(out);
            }
            Scalar::Case { when, then, otherwise } => {
                when.columns(out);
                then.columns(out);
                otherwise.columns(out);
            }
        }
    }

    pub fn map_columns(&self, f: &impl Fn(&ColumnRef) -> ColumnRef) -> Scalar {
        let bx = |s: &Scalar| Box::new(s.map_columns(f));
        match self {
            Scalar::Col(c) => Scalar::Col(f(c)),
            Scalar::Lit(l) => Scalar::Lit(l.clone()),
            Scalar::Add(a, b) => Scalar::Add(bx(a), bx(b)),
            Scalar::Sub(a, b) => Scalar::Sub(bx(a), bx(b)),
            Scalar::Mul(a, b) => Scalar::Mul(bx(a), bx(b)),
            Scalar::Case { when, then, otherwise } => {
                Scalar::Case { when: Box::new(when.map_columns(f)), then: bx(then), otherwise: bx(otherwise) }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggFn {
    Sum,
    Count,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SelectItem {
    Column {
        col: ColumnRef,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alias: Option<String>,
    },
    Aggregate {
        agg: AggFn,
        /// Absent for `COUNT(*)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expr: Option<Scalar>,
        alias: String,
    },
}

impl SelectItem {
    pub fn output_name(&self) -> &str {
        match self {
            SelectItem::Column { col, alias } => alias.as_deref().unwrap_or(&col.column),
            SelectItem::Aggregate { alias, .. } => alias,
        }
    }

    pub fn is_aggregate(&self) -> bool {
        matches!(self, SelectItem::Aggregate { .. })
    }
}

/// `fk` (on the fact table or an already joined table) equals the primary key `pk`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JoinEdge {
    pub fk: ColumnRef,
    pub pk: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderKey {
    /// Output column name.
    pub key: String,
    #[serde(default)]
    pub desc: bool,
}

/// Join applied after aggregation: select items on `table` are fetched by
/// matching its primary key `pk` against the grouped value of `key`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PostJoin {
    pub table: String,
    pub pk: String,
    pub key: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    #[serde(default)]
    pub name: String,
    pub fact: String,
    pub select: Vec<SelectItem>,
    #[serde(default)]
    pub joins: Vec<JoinEdge>,
    #[serde(default, rename = "where", skip_serializing_if = "Option::is_none")]
    pub filter: Option<BoolExpr>,
    #[serde(default)]
    pub group_by: Vec<ColumnRef>,
    #[serde(default)]
    pub order_by: Vec<OrderKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub post_joins: Vec<PostJoin>,
}

impl Query {
    pub fn from_json(text: &str) -> Result<Query> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn is_aggregate(&self) -> bool {
        !self.group_by.is_empty() || self.select.iter().any(SelectItem::is_aggregate)
    }

    pub fn output_names(&self) -> Vec<String> {
        self.select.iter().map(|s| s.output_name().to_string()).collect()
    }

    /// Tables reachable through the join edges, fact first.
    pub fn joined_tables(&self) -> Vec<String> {
        let mut out = vec![self.fact.clone()];
        out.extend(self.joins.iter().map(|j| j.pk.table.clone()));
        out
    }

    pub fn post_join_tables(&self) -> BTreeSet<String> {
        self.post_joins.iter().map(|p| p.table.clone()).collect()
    }

    /// Every column referenced outside join conditions.
    pub fn referenced_columns(&self) -> Vec<ColumnRef> {
        let mut out = Vec::new();
        for s in &self.select {
            match s {
                SelectItem::Column { col, .. } => out.push(col.clone()),
                SelectItem::Aggregate { expr: Some(e), .. } => e.columns(&mut out),
                SelectItem::Aggregate { expr: None, .. } => {}
            }
        }
        if let Some(w) = &self.filter {
            w.columns(&mut out);
        }
        out.extend(self.group_by.iter().cloned());
        out.extend(self.post_joins.iter().map(|p| p.key.clone()));
        out
    }

    /// Check references against `schema`: columns exist, joins follow declared
    /// foreign keys and form a tree rooted at the fact table, ordering keys
    /// name output columns.
    pub fn validate(&self, schema: &Schema) -> Result<()> {
        schema.table(&self.fact)?;
        let mut joined: Vec<&str> = vec![&self.fact];
        let mut pending: Vec<&JoinEdge> = self.joins.iter().collect();
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|j| {
                if joined.contains(&j.fk.table.as_str()) && !joined.contains(&j.pk.table.as_str()) {
                    joined.push(&j.pk.table);
                    false
                } else {
                    true
                }
            });
            if pending.len() == before {
                return Err(Error::Invalid(format!(
                    "{}: join {} = {} does not extend the join tree",
                    self.name, pending[0].fk, pending[0].pk
                )));
            }
        }
        for j in &self.joins {
            schema.column(&j.fk.table, &j.fk.column)?;
            let fk = schema.table(&j.fk.table)?.foreign_key(&j.fk.column);
            if fk.map(|f| f.table.as_str()) != Some(j.pk.table.as_str()) || schema.primary_key(&j.pk.table)? != j.pk.column
            {
                return Err(Error::Invalid(format!(
                    "{}: join {} = {} is not a declared foreign key",
                    self.name, j.fk, j.pk
                )));
            }
        }
        let post = self.post_join_tables();
        for c in self.referenced_columns() {
            schema.column(&c.table, &c.column)?;
            if !joined.contains(&c.table.as_str()) && !post.contains(&c.table) {
                return Err(Error::Invalid(format!("{}: {c} refers to a table that is not joined", self.name)));
            }
        }
        for p in &self.post_joins {
            if schema.primary_key(&p.table)? != p.pk {
                return Err(Error::Invalid(format!("{}: post join must use {}'s primary key", self.name, p.table)));
            }
            if !self.group_by.contains(&p.key) {
                return Err(Error::Invalid(format!("{}: post join key {} is not grouped", self.name, p.key)));
            }
        }
        if let Some(w) = &self.filter {
            if w.tables().iter().any(|t| post.contains(t)) {
                return Err(Error::Invalid(format!("{}: filter on a post-joined table", self.name)));
            }
        }
        let names = self.output_names();
        for k in &self.order_by {
            if !names.contains(&k.key) {
                return Err(Error::Invalid(format!("{}: order key {} is not an output column", self.name, k.key)));
            }
        }
        if self.is_aggregate() {
            for s in &self.select {
                if let SelectItem::Column { col, .. } = s {
                    let via_post = post.contains(&col.table);
                    if !via_post && !self.group_by.contains(col) {
                        return Err(Error::Invalid(format!("{}: {col} is neither grouped nor aggregated", self.name)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// SQL `LIKE` with `%` (any run) and `_` (one character).
pub fn like_match(text: &str, pattern: &str) -> bool {
    let t: Vec<char> = text.chars().collect();
    let p: Vec<char> = pattern.chars().collect();
    let (mut ti, mut pi) = (0usize, 0usize);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '_' || p[pi] == t[ti]) {
            ti += 1;
            pi += 1;
        } else if pi < p.len() && p[pi] == '%' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '%')
}

/// A fixed-point number produced by scalar evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Num {
    pub value: i64,
    pub scale: u8,
}

fn overflow(what: &str) -> Error {
    Error::AggregateOverflow(what.to_string())
}

impl Num {
    pub fn rescale(self, scale: u8) -> Result<Num> {
        debug_assert!(scale >= self.scale);
        let f = 10i64.pow((scale - self.scale) as u32);
        Ok(Num { value: self.value.checked_mul(f).ok_or_else(|| overflow("rescale"))?, scale })
    }
}

/// Numeric value and scale of a literal; `"0.05"` has scale 2.
pub fn literal_num(l: &Literal) -> Result<Num> {
    match l {
        Literal::Int(v) => Ok(Num { value: *v, scale: 0 }),
        Literal::Text(s) => {
            let scale = s.split_once('.').map_or(0, |(_, f)| f.len()) as u8;
            match parse_value(LogicalType::Decimal { precision: 18, scale }, s)? {
                Value::Int(v) => Ok(Num { value: v, scale }),
                _ => unreachable!("decimal parses to int"),
            }
        }
    }
}

/// Evaluate arithmetic. `get` returns a column's value and type; `cond`
/// evaluates the condition of a CASE.
pub fn eval_scalar(
    e: &Scalar,
    get: &dyn Fn(&ColumnRef) -> Result<(Value, LogicalType)>,
    cond: &dyn Fn(&BoolExpr) -> Result<bool>,
) -> Result<Num> {
    let align = |a: Num, b: Num| -> Result<(Num, Num)> {
        let s = a.scale.max(b.scale);
        Ok((a.rescale(s)?, b.rescale(s)?))
    };
    match e {
        Scalar::Col(c) => match get(c)? {
            (Value::Int(v), ty) => Ok(Num { value: v, scale: ty.scale() }),
            (v, _) => Err(Error::Invalid(format!("{c} = {v:?} is not numeric"))),
        },
        Scalar::Lit(l) => literal_num(l),
        Scalar::Add(a, b) | Scalar::Sub(a, b) => {
            let (x, y) = align(eval_scalar(a, get, cond)?, eval_scalar(b, get, cond)?)?;
            let v = if matches!(e, Scalar::Add(..)) { x.value.checked_add(y.value) } else { x.value.checked_sub(y.value) };
            Ok(Num { value: v.ok_or_else(|| overflow("add"))?, scale: x.scale })
        }
        Scalar::Mul(a, b) => {
            let (x, y) = (eval_scalar(a, get, cond)?, eval_scalar(b, get, cond)?);
            Ok(Num {
                value: x.value.checked_mul(y.value).ok_or_else(|| overflow("mul"))?,
                scale: x.scale + y.scale,
            })
        }
        Scalar::Case { when, then, otherwise } => {
            let (t, o) = align(eval_scalar(then, get, cond)?, eval_scalar(otherwise, get, cond)?)?;
            Ok(if cond(when)? { t } else { o })
        }
    }
}

/// Result column type, used for rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OutType {
    Int,
    Decimal { scale: u8 },
    Date,
    Text,
}

impl OutType {
    pub fn from_logical(t: LogicalType) -> OutType {
        match t {
            LogicalType::Int => OutType::Int,
            LogicalType::Decimal { scale, .. } => OutType::Decimal { scale },
            LogicalType::Date => OutType::Date,
            LogicalType::Text => OutType::Text,
        }
    }

    pub fn render(&self, v: &Value) -> String {
        let lt = match *self {
            OutType::Int => LogicalType::Int,
            OutType::Decimal { scale } => LogicalType::Decimal { precision: 18, scale },
            OutType::Date => LogicalType::Date,
            OutType::Text => LogicalType::Text,
        };
        crate::store::format_value(lt, v)
    }
}

/// Static scale of a scalar expression.
pub fn scalar_scale(e: &Scalar, schema: &Schema) -> Result<u8> {
    Ok(match e {
        Scalar::Col(c) => schema.column(&c.table, &c.column)?.ty.scale(),
        Scalar::Lit(l) => literal_num(l)?.scale,
        Scalar::Add(a, b) | Scalar::Sub(a, b) => scalar_scale(a, schema)?.max(scalar_scale(b, schema)?),
        Scalar::Mul(a, b) => scalar_scale(a, schema)? + scalar_scale(b, schema)?,
        Scalar::Case { then, otherwise, .. } => scalar_scale(then, schema)?.max(scalar_scale(otherwise, schema)?),
    })
}

pub fn output_types(q: &Query, schema: &Schema) -> Result<Vec<OutType>> {
    q.select
        .iter()
        .map(|s| {
            Ok(match s {
                SelectItem::Column { col, .. } => OutType::from_logical(schema.column(&col.table, &col.column)?.ty),
                SelectItem::Aggregate { agg: AggFn::Count, .. } => OutType::Int,
                SelectItem::Aggregate { agg, expr: Some(e), .. } => match (agg, e) {
                    (AggFn::Min | AggFn::Max, Scalar::Col(c)) => {
                        OutType::from_logical(schema.column(&c.table, &c.column)?.ty)
                    }
                    _ => match scalar_scale(e, schema)? {
                        0 => OutType::Int,
                        scale => OutType::Decimal { scale },
                    },
                },
                SelectItem::Aggregate { expr: None, .. } => {
                    return Err(Error::Invalid(format!("{}: aggregate without an expression", q.name)))
                }
            })
        })
        .collect()
}

/// Query output: named, typed columns and rows of decoded values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub types: Vec<OutType>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    /// Sort rows by every column, then stably by the ORDER BY keys, then truncate.
    pub fn finish(&mut self, order_by: &[OrderKey], limit: Option<usize>) -> Result<()> {
        self.rows.sort();
        let keys: Vec<(usize, bool)> = order_by
            .iter()
            .map(|k| {
                self.columns
                    .iter()
                    .position(|c| *c == k.key)
                    .map(|i| (i, k.desc))
                    .ok_or_else(|| Error::Invalid(format!("order key {} is not an output column", k.key)))
            })
            .collect::<Result<_>>()?;
        if !keys.is_empty() {
            self.rows.sort_by(|a, b| {
                for &(i, desc) in &keys {
                    let o = a[i].cmp(&b[i]);
                    let o = if desc { o.reverse() } else { o };
                    if o.is_ne() {
                        return o;
                    }
                }
                std::cmp::Ordering::Equal
            });
        }
        if let Some(n) = limit {
            self.rows.truncate(n);
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut w = ::csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().zip(&self.types).map(|(v, t)| t.render(v))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_ref_json() {
        let c: ColumnRef = serde_json::from_str("\"date.d_year\"").unwrap();
        assert_eq!(c, ColumnRef::new("date", "d_year"));
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"date.d_year\"");
        assert!(serde_json::from_str::<ColumnRef>("\"d_year\"").is_err());
    }

    #[test]
    fn like() {
        assert!(like_match("PROMO BRUSHED TIN", "PROMO%"));
        assert!(!like_match("STANDARD TIN", "PROMO%"));
        assert!(like_match("abc", "a_c"));
        assert!(like_match("abc", "%"));
        assert!(like_match("", "%%"));
        assert!(like_match("xxabyyab", "%ab"));
        assert!(!like_match("ab", "a"));
        assert!(like_match("special requests here", "%special%requests%"));
    }

    #[test]
    fn literal_coercion() {
        let dec = LogicalType::Decimal { precision: 15, scale: 2 };
        assert_eq!(Literal::Int(3).coerce(dec).unwrap(), Value::Int(300));
        assert_eq!(Literal::Text("0.05".into()).coerce(dec).unwrap(), Value::Int(5));
        assert!(Literal::Int(3).coerce(LogicalType::Date).is_err());
        assert_eq!(Literal::Text("x".into()).coerce(LogicalType::Text).unwrap(), Value::Text("x".into()));
    }

    #[test]
    fn scalar_arith_scales() {
        let e: Scalar = serde_json::from_str(
            r#"{"mul": [{"col": "t.price"}, {"sub": [{"lit": 1}, {"col": "t.disc"}]}]}"#,
        )
        .unwrap();
        let get = |c: &ColumnRef| -> Result<(Value, LogicalType)> {
            let dec = LogicalType::Decimal { precision: 15, scale: 2 };
            Ok(match c.column.as_str() {
                "price" => (Value::Int(1000), dec),
                _ => (Value::Int(5), dec),
            })
        };
        let n = eval_scalar(&e, &get, &|_| Ok(true)).unwrap();
        assert_eq!(n, Num { value: 1000 * 95, scale: 4 });
    }

    #[test]
    fn finish_orders_and_limits() {
        let mut t = ResultTable {
            columns: vec!["a".into(), "b".into()],
            types: vec![OutType::Int, OutType::Int],
            rows: vec![
                vec![Value::Int(2), Value::Int(1)],
                vec![Value::Int(1), Value::Int(1)],
                vec![Value::Int(3), Value::Int(0)],
            ],
        };
        t.finish(&[OrderKey { key: "b".into(), desc: true }], Some(2)).unwrap();
        assert_eq!(t.rows, vec![vec![Value::Int(1), Value::Int(1)], vec![Value::Int(2), Value::Int(1)]]);
        assert!(t.finish(&[OrderKey { key: "z".into(), desc: false }], None).is_err());
    }
}
