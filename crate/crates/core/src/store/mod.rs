//! Encoded column store.
//!
//! Every column is held as bit-packed unsigned codes. Strings go through an
//! order-preserving [`Dictionary`]; integers, decimals and dates are offset
//! by a base so that code order equals value order.

mod binary;
mod csv;
mod dictionary;
mod schema;
pub mod ssb;

use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

pub use self::binary::{open_store, read_store, save_store, write_store};
pub use self::csv::{load_csv, load_csv_reader};
pub use dictionary::{build_dictionary, Dictionary};
pub use schema::{ColumnDef, ForeignKey, LogicalType, Schema, TableDef};

use crate::error::{Error, Result};
use crate::kernel::{min_width, pack_column, PackedColumn, PredOp};

/// A decoded cell. Decimals and dates are carried as their scaled integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Int(i64),
    Text(String),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Int(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Neq => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

pub fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date")
}

pub fn date_to_days(d: NaiveDate) -> i64 {
    (d - epoch()).num_days()
}

pub fn days_to_date(days: i64) -> Option<NaiveDate> {
    epoch().checked_add_signed(chrono::Duration::try_days(days)?)
}

/// Largest magnitude representable by a decimal of `precision` digits.
pub fn decimal_limit(precision: u8) -> i64 {
    10i64.pow(precision as u32) - 1
}

fn parse_decimal(text: &str, precision: u8, scale: u8) -> Option<i64> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.len() > scale as usize || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut v: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    v = v.checked_mul(10i64.pow(scale as u32))?;
    if !frac_part.is_empty() {
        let f: i64 = frac_part.parse().ok()?;
        v = v.checked_add(f * 10i64.pow((scale as usize - frac_part.len()) as u32))?;
    }
    if v > decimal_limit(precision) {
        return None;
    }
    Some(if neg { -v } else { v })
}

/// Parse the textual form of a value of type `ty`.
pub fn parse_value(ty: LogicalType, text: &str) -> Result<Value> {
    let bad = || Error::Invalid(format!("cannot parse {text:?} as {ty:?}"));
    Ok(match ty {
        LogicalType::Int => Value::Int(text.trim().parse().map_err(|_| bad())?),
        LogicalType::Decimal { precision, scale } => Value::Int(parse_decimal(text, precision, scale).ok_or_else(bad)?),
        LogicalType::Date => {
            let d = NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").map_err(|_| bad())?;
            Value::Int(date_to_days(d))
        }
        LogicalType::Text => Value::Text(text.to_string()),
    })
}

/// Render a scaled integer with `scale` fractional digits.
pub fn format_scaled(v: i64, scale: u8) -> String {
    if scale == 0 {
        return v.to_string();
    }
    let p = 10u64.pow(scale as u32);
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    format!("{sign}{}.{:0width$}", a / p, a % p, width = scale as usize)
}

pub fn format_value(ty: LogicalType, v: &Value) -> String {
    match (ty, v) {
        (LogicalType::Decimal { scale, .. }, Value::Int(i)) => format_scaled(*i, scale),
        (LogicalType::Date, Value::Int(d)) => match days_to_date(*d) {
            Some(date) => format!("{:04}-{:02}-{:02}", date.year(), date.month(), date.day()),
            None => d.to_string(),
        },
        _ => v.to_string(),
    }
}

/// How codes map back to values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Encoding {
    Dictionary { dictionary: Dictionary },
    /// `value = base + code`, codes in `0..=max_code`.
    Offset { base: i64, max_code: u64 },
}

/// Outcome of mapping a value-space comparison into code space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodePred {
    /// Every stored value qualifies.
    All,
    /// No stored value can qualify.
    Empty,
    Op(PredOp),
}

impl CodePred {
    /// The predicate the filtering unit is programmed with; `Empty` becomes
    /// the always-false `Lt(0)`.
    pub fn kernel_op(&self) -> Option<PredOp> {
        match self {
            CodePred::All => None,
            CodePred::Empty => Some(PredOp::Lt(0)),
            CodePred::Op(op) => Some(*op),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    def: ColumnDef,
    encoding: Encoding,
    data: PackedColumn,
}

impl Column {
    pub fn from_ints(def: ColumnDef, values: &[i64]) -> Result<Column> {
        if def.ty.is_text() {
            return Err(Error::Invalid(format!("column {} is text", def.name)));
        }
        let (base, max_code) = match def.ty {
            LogicalType::Decimal { precision, .. } => {
                let lim = decimal_limit(precision);
                if let Some(v) = values.iter().find(|v| v.abs() > lim) {
                    return Err(Error::Invalid(format!("{}: {v} exceeds DECIMAL({precision})", def.name)));
                }
                (-lim, 2 * lim as u64)
            }
            _ => {
                let min = values.iter().copied().min().unwrap_or(0);
                let max = values.iter().copied().max().unwrap_or(0);
                (min, (max as i128 - min as i128) as u64)
            }
        };
        let codes: Vec<u64> = values.iter().map(|&v| (v as i128 - base as i128) as u64).collect();
        let data = pack_column(&codes, min_width(max_code))?;
        Ok(Column { def, encoding: Encoding::Offset { base, max_code }, data })
    }

    pub fn from_strs<S: AsRef<str>>(def: ColumnDef, values: &[S]) -> Result<Column> {
        if !def.ty.is_text() {
            return Err(Error::Invalid(format!("column {} is not text", def.name)));
        }
        let dictionary = build_dictionary(values.iter().map(|s| s.as_ref()));
        let codes = dictionary.encode_column(values.iter().map(|s| s.as_ref()))?;
        let data = pack_column(&codes, dictionary.width())?;
        Ok(Column { def, encoding: Encoding::Dictionary { dictionary }, data })
    }

    pub fn from_values(def: ColumnDef, values: &[Value]) -> Result<Column> {
        let null = || Error::Invalid(format!("column {} holds a null", def.name));
        if def.ty.is_text() {
            let strs: Vec<&str> = values.iter().map(|v| v.as_text().ok_or_else(null)).collect::<Result<_>>()?;
            Column::from_strs(def, &strs)
        } else {
            let ints: Vec<i64> = values.iter().map(|v| v.as_int().ok_or_else(null)).collect::<Result<_>>()?;
            Column::from_ints(def, &ints)
        }
    }

    /// Reassemble a column from stored parts, checking codes against the encoding.
    pub fn from_parts(def: ColumnDef, encoding: Encoding, data: PackedColumn) -> Result<Column> {
        let limit = match &encoding {
            Encoding::Dictionary { dictionary } => {
                if !def.ty.is_text() {
                    return Err(Error::Format(format!("{}: dictionary on non-text column", def.name)));
                }
                dictionary.len() as u64
            }
            Encoding::Offset { max_code, .. } => {
                if def.ty.is_text() {
                    return Err(Error::Format(format!("{}: offset encoding on text column", def.name)));
                }
                max_code + 1
            }
        };
        if !data.is_empty() && data.max_code() >= limit {
            return Err(Error::Format(format!("{}: code outside encoding domain", def.name)));
        }
        Ok(Column { def, encoding, data })
    }

    /// New column holding `self[rows[i]]` at position `i`, re-encoded so the
    /// dictionary or offset range covers only the gathered values.
    pub fn gather(&self, def: ColumnDef, rows: &[u32]) -> Result<Column> {
        if def.ty != self.def.ty {
            return Err(Error::Invalid(format!("{}: type differs from source {}", def.name, self.def.name)));
        }
        match &self.encoding {
            Encoding::Dictionary { dictionary } => {
                let mut remap = vec![u64::MAX; dictionary.len()];
                for &r in rows {
                    remap[self.code(r as usize) as usize] = 0;
                }
                let mut kept = Vec::new();
                for (code, slot) in remap.iter_mut().enumerate() {
                    if *slot == 0 {
                        *slot = kept.len() as u64;
                        kept.push(dictionary.values()[code].clone());
                    }
                }
                let dictionary = Dictionary::from_sorted(kept)?;
                let codes: Vec<u64> = rows.iter().map(|&r| remap[self.code(r as usize) as usize]).collect();
                let data = pack_column(&codes, dictionary.width())?;
                Ok(Column { def, encoding: Encoding::Dictionary { dictionary }, data })
            }
            Encoding::Offset { .. } => {
                let ints: Vec<i64> = rows.iter().map(|&r| self.int(r as usize).expect("offset column")).collect();
                Column::from_ints(def, &ints)
            }
        }
    }

    pub fn def(&self) -> &ColumnDef {
        &self.def
    }

    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn ty(&self) -> LogicalType {
        self.def.ty
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn data(&self) -> &PackedColumn {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.data.width()
    }

    #[inline]
    pub fn code(&self, row: usize) -> u64 {
        self.data.get(row)
    }

    pub fn decode(&self, code: u64) -> Value {
        match &self.encoding {
            Encoding::Dictionary { dictionary } => {
                Value::Text(dictionary.decode(code).expect("stored codes are in range").to_string())
            }
            Encoding::Offset { base, .. } => Value::Int(base + code as i64),
        }
    }

    #[inline]
    pub fn value(&self, row: usize) -> Value {
        self.decode(self.code(row))
    }

    /// Integer value of a non-text column, without allocating.
    #[inline]
    pub fn int(&self, row: usize) -> Option<i64> {
        match &self.encoding {
            Encoding::Offset { base, .. } => Some(base + self.code(row) as i64),
            Encoding::Dictionary { .. } => None,
        }
    }

    pub fn values(&self) -> Vec<Value> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// Code assigned to `v`, if `v` is representable.
    pub fn code_of(&self, v: &Value) -> Option<u64> {
        match (&self.encoding, v) {
            (Encoding::Dictionary { dictionary }, Value::Text(s)) => dictionary.code(s),
            (Encoding::Offset { base, max_code }, Value::Int(i)) => {
                let c = *i as i128 - *base as i128;
                (c >= 0 && c <= *max_code as i128).then_some(c as u64)
            }
            _ => None,
        }
    }

    fn domain_size(&self) -> u64 {
        match &self.encoding {
            Encoding::Dictionary { dictionary } => dictionary.len() as u64,
            Encoding::Offset { max_code, .. } => max_code + 1,
        }
    }

    /// First code whose value is `>= v` (or `> v` when `strict`).
    fn bound(&self, v: &Value, strict: bool) -> Result<u64> {
        match (&self.encoding, v) {
            (Encoding::Dictionary { dictionary }, Value::Text(s)) => {
                Ok(if strict { dictionary.upper_bound(s) } else { dictionary.lower_bound(s) })
            }
            (Encoding::Offset { base, max_code }, Value::Int(i)) => {
                let c = *i as i128 - *base as i128 + strict as i128;
                Ok(c.clamp(0, *max_code as i128 + 1) as u64)
            }
            _ => Err(Error::Invalid(format!("literal {v:?} does not match column {}", self.def.name))),
        }
    }

    fn interval(&self, lo: u64, hi_exclusive: u64) -> CodePred {
        let n = self.domain_size();
        if hi_exclusive <= lo {
            CodePred::Empty
        } else if lo == 0 && hi_exclusive >= n {
            CodePred::All
        } else if lo == 0 {
            CodePred::Op(PredOp::Le(hi_exclusive - 1))
        } else if hi_exclusive >= n {
            CodePred::Op(PredOp::Ge(lo))
        } else if hi_exclusive - lo == 1 {
            CodePred::Op(PredOp::Eq(lo))
        } else {
            CodePred::Op(PredOp::Between(lo, hi_exclusive - 1))
        }
    }

    /// Translate `column <op> v` into an equivalent code-space predicate.
    pub fn code_pred(&self, op: CmpOp, v: &Value) -> Result<CodePred> {
        let lower = self.bound(v, false)?;
        let upper = self.bound(v, true)?;
        let n = self.domain_size();
        Ok(match op {
            CmpOp::Eq => self.interval(lower, upper),
            CmpOp::Neq => {
                if upper > lower {
                    if n == 1 {
                        CodePred::Empty
                    } else {
                        CodePred::Op(PredOp::Neq(lower))
                    }
                } else {
                    CodePred::All
                }
            }
            CmpOp::Lt => self.interval(0, lower),
            CmpOp::Le => self.interval(0, upper),
            CmpOp::Gt => self.interval(upper, n),
            CmpOp::Ge => self.interval(lower, n),
        })
    }

    /// Inclusive range `lo <= column <= hi`.
    pub fn code_pred_between(&self, lo: &Value, hi: &Value) -> Result<CodePred> {
        let l = self.bound(lo, false)?;
        let h = self.bound(hi, true)?;
        Ok(self.interval(l, h))
    }

    /// Estimated fraction of the code domain a predicate admits.
    pub fn domain_fraction(&self, p: &CodePred) -> f64 {
        let n = self.domain_size().max(1) as f64;
        match p {
            CodePred::All => 1.0,
            CodePred::Empty => 0.0,
            CodePred::Op(op) => {
                let last = n - 1.0;
                let count = match *op {
                    PredOp::Eq(_) => 1.0,
                    PredOp::Neq(_) => n - 1.0,
                    PredOp::Lt(a) => a as f64,
                    PredOp::Le(a) => a as f64 + 1.0,
                    PredOp::Gt(a) => last - a as f64,
                    PredOp::Ge(a) => n - a as f64,
                    PredOp::Between(lo, hi) => (hi - lo) as f64 + 1.0,
                };
                (count / n).clamp(0.0, 1.0)
            }
        }
    }

    pub fn encoded_bytes(&self) -> u64 {
        let dict = match &self.encoding {
            Encoding::Dictionary { dictionary } => dictionary.heap_bytes(),
            Encoding::Offset { .. } => 0,
        };
        self.data.bytes() + dict
    }

    /// Size of the column as plain fixed-width values and raw strings.
    pub fn plain_bytes(&self) -> u64 {
        match (&self.encoding, self.def.ty) {
            (Encoding::Dictionary { dictionary }, _) => (0..self.len())
                .map(|i| dictionary.values()[self.code(i) as usize].len() as u64)
                .sum(),
            (Encoding::Offset { .. }, LogicalType::Decimal { .. }) => 8 * self.len() as u64,
            (Encoding::Offset { base, max_code }, _) => {
                let hi = *base as i128 + *max_code as i128;
                let fits32 = *base as i128 >= i32::MIN as i128 && hi <= i32::MAX as i128;
                (if fits32 { 4 } else { 8 }) * self.len() as u64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    def: TableDef,
    columns: Vec<Column>,
    rows: usize,
}

impl Table {
    pub fn new(def: TableDef, columns: Vec<Column>) -> Result<Table> {
        if def.columns.len() != columns.len() {
            return Err(Error::LengthMismatch { left: def.columns.len(), right: columns.len() });
        }
        for (d, c) in def.columns.iter().zip(&columns) {
            if d != c.def() {
                return Err(Error::Invalid(format!("column {} does not match its definition", d.name)));
            }
        }
        let rows = columns.first().map_or(0, Column::len);
        if let Some(c) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::LengthMismatch { left: c.len(), right: rows });
        }
        Ok(Table { def, columns, rows })
    }

    /// Encode column-major raw values.
    pub fn from_values(def: TableDef, columns: Vec<Vec<Value>>) -> Result<Table> {
        if def.columns.len() != columns.len() {
            return Err(Error::LengthMismatch { left: def.columns.len(), right: columns.len() });
        }
        let cols = def
            .columns
            .iter()
            .zip(&columns)
            .map(|(d, v)| Column::from_values(d.clone(), v))
            .collect::<Result<Vec<_>>>()?;
        Table::new(def, cols)
    }

    pub fn def(&self) -> &TableDef {
        &self.def
    }

    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownColumn(format!("{}.{name}", self.def.name)))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name() == name)
    }

    pub fn row(&self, i: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.value(i)).collect()
    }

    pub fn encoded_bytes(&self) -> u64 {
        self.columns.iter().map(Column::encoded_bytes).sum()
    }

    pub fn plain_bytes(&self) -> u64 {
        self.columns.iter().map(Column::plain_bytes).sum()
    }
}

/// A set of encoded tables under a validated schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    schema: Schema,
    tables: Vec<Table>,
}

impl Database {
    pub fn new(tables: Vec<Table>) -> Result<Database> {
        let schema = Schema { tables: tables.iter().map(|t| t.def.clone()).collect() };
        schema.validate()?;
        Ok(Database { schema, tables })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Result<&Table> {
        self.tables
            .iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    pub fn encoded_bytes(&self) -> u64 {
        self.tables.iter().map(Table::encoded_bytes).sum()
    }

    pub fn plain_bytes(&self) -> u64 {
        self.tables.iter().map(Table::plain_bytes).sum()
    }

    /// Replace one table, keeping the others in place.
    pub fn with_table(&self, table: Table) -> Result<Database> {
        let mut tables = self.tables.clone();
        match tables.iter().position(|t| t.name() == table.name()) {
            Some(i) => tables[i] = table,
            None => tables.push(table),
        }
        Database::new(tables)
    }

    /// Row counts per table, in schema order.
    pub fn manifest(&self) -> Vec<(String, usize)> {
        self.tables.iter().map(|t| (t.name().to_string(), t.rows())).collect()
    }
}
