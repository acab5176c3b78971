//! Row-at-a-time evaluation over encoded columns.
//!
//! Expressions are bound to concrete columns once. Comparisons against
//! literals run in code space; `LIKE` is resolved against the dictionary.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::query::{like_match, literal_num, BoolExpr, CmpOp, ColumnRef, Scalar};
use crate::store::{CodePred, Column, Encoding, Table, Value};

/// Maps table names to tuple slots.
pub(crate) struct Resolver<'a> {
    slots: HashMap<&'a str, (usize, &'a Table)>,
}

#[derive(Clone, Copy)]
pub(crate) struct Bound<'a> {
    pub slot: usize,
    pub col: &'a Column,
}

impl<'a> Bound<'a> {
    #[inline]
    pub fn code(&self, rows: &[u32]) -> u64 {
        self.col.code(rows[self.slot] as usize)
    }

    #[inline]
    pub fn value(&self, rows: &[u32]) -> Value {
        self.col.value(rows[self.slot] as usize)
    }
}

impl<'a> Resolver<'a> {
    pub fn new(tables: impl IntoIterator<Item = (&'a str, &'a Table)>) -> Self {
        Resolver { slots: tables.into_iter().enumerate().map(|(i, (n, t))| (n, (i, t))).collect() }
    }

    pub fn bind(&self, c: &ColumnRef) -> Result<Bound<'a>> {
        let &(slot, table) = self.slots.get(c.table.as_str()).ok_or_else(|| Error::UnknownTable(c.table.clone()))?;
        Ok(Bound { slot, col: table.column(&c.column)? })
    }
}

/// Code-space form of `column <op> literal`.
pub(crate) fn code_pred(col: &Column, e: &BoolExpr) -> Result<Option<Vec<CodePred>>> {
    Ok(Some(match e {
        BoolExpr::Cmp { op, value, .. } => vec![col.code_pred(*op, &value.coerce(col.ty())?)?],
        BoolExpr::Between { lo, hi, .. } => {
            vec![col.code_pred_between(&lo.coerce(col.ty())?, &hi.coerce(col.ty())?)?]
        }
        BoolExpr::In { values, .. } => {
            let mut preds = Vec::with_capacity(values.len());
            for v in values {
                let p = col.code_pred(CmpOp::Eq, &v.coerce(col.ty())?)?;
                if !preds.contains(&p) {
                    preds.push(p);
                }
            }
            preds
        }
        _ => return Ok(None),
    }))
}

fn holds(p: &CodePred, code: u64) -> bool {
    match p {
        CodePred::All => true,
        CodePred::Empty => false,
        CodePred::Op(op) => op.eval(code),
    }
}

pub(crate) enum CpuPred<'a> {
    And(Vec<CpuPred<'a>>),
    Or(Vec<CpuPred<'a>>),
    Not(Box<CpuPred<'a>>),
    /// Any of the code predicates holds.
    Codes(Bound<'a>, Vec<CodePred>),
    /// Per-code truth table.
    Table(Bound<'a>, Vec<bool>),
    ColCmp(Bound<'a>, CmpOp, Bound<'a>),
}

impl<'a> CpuPred<'a> {
    pub fn compile(e: &BoolExpr, r: &Resolver<'a>) -> Result<Self> {
        Ok(match e {
            BoolExpr::And(v) => CpuPred::And(v.iter().map(|x| Self::compile(x, r)).collect::<Result<_>>()?),
            BoolExpr::Or(v) => CpuPred::Or(v.iter().map(|x| Self::compile(x, r)).collect::<Result<_>>()?),
            BoolExpr::Not(x) => CpuPred::Not(Box::new(Self::compile(x, r)?)),
            BoolExpr::Cmp { col, .. } | BoolExpr::Between { col, .. } | BoolExpr::In { col, .. } => {
                let b = r.bind(col)?;
                CpuPred::Codes(b, code_pred(b.col, e)?.expect("comparison"))
            }
            BoolExpr::Like { col, pattern, negated } => {
                let b = r.bind(col)?;
                let Encoding::Dictionary { dictionary } = b.col.encoding() else {
                    return Err(Error::Invalid(format!("LIKE on non-text column {col}")));
                };
                CpuPred::Table(b, dictionary.values().iter().map(|s| like_match(s, pattern) != *negated).collect())
            }
            BoolExpr::ColCmp { left, op, right } => {
                let (l, rr) = (r.bind(left)?, r.bind(right)?);
                if l.col.ty() != rr.col.ty() {
                    return Err(Error::Invalid(format!("{left} and {right} have different types")));
                }
                CpuPred::ColCmp(l, *op, rr)
            }
        })
    }

    pub fn eval(&self, rows: &[u32]) -> bool {
        match self {
            CpuPred::And(v) => v.iter().all(|p| p.eval(rows)),
            CpuPred::Or(v) => v.iter().any(|p| p.eval(rows)),
            CpuPred::Not(p) => !p.eval(rows),
            CpuPred::Codes(b, preds) => {
                let c = b.code(rows);
                preds.iter().any(|p| holds(p, c))
            }
            CpuPred::Table(b, t) => t[b.code(rows) as usize],
            CpuPred::ColCmp(l, op, r) => op.holds(l.value(rows).cmp(&r.value(rows))),
        }
    }
}

/// Fixed-point arithmetic with scales resolved at bind time.
pub(crate) enum CpuScalar<'a> {
    Col(Bound<'a>),
    Const(i64),
    /// Operands and the factors that bring each to the common scale.
    Add(Box<CpuScalar<'a>>, i64, Box<CpuScalar<'a>>, i64),
    Sub(Box<CpuScalar<'a>>, i64, Box<CpuScalar<'a>>, i64),
    Mul(Box<CpuScalar<'a>>, Box<CpuScalar<'a>>),
    Case(CpuPred<'a>, Box<CpuScalar<'a>>, i64, Box<CpuScalar<'a>>, i64),
}

fn ovf() -> Error {
    Error::AggregateOverflow("arithmetic overflow in expression".into())
}

impl<'a> CpuScalar<'a> {
    /// Bind and return the expression with its scale.
    pub fn compile(e: &Scalar, r: &Resolver<'a>) -> Result<(Self, u8)> {
        let pow = |d: u8| 10i64.pow(d as u32);
        Ok(match e {
            Scalar::Col(c) => {
                let b = r.bind(c)?;
                if b.col.ty().is_text() {
                    return Err(Error::Invalid(format!("{c} is not numeric")));
                }
                (CpuScalar::Col(b), b.col.ty().scale())
            }
            Scalar::Lit(l) => {
                let n = literal_num(l)?;
                (CpuScalar::Const(n.value), n.scale)
            }
            Scalar::Add(a, b) | Scalar::Sub(a, b) => {
                let ((x, sx), (y, sy)) = (Self::compile(a, r)?, Self::compile(b, r)?);
                let s = sx.max(sy);
                let (fx, fy) = (pow(s - sx), pow(s - sy));
                let node = if matches!(e, Scalar::Add(..)) {
                    CpuScalar::Add(Box::new(x), fx, Box::new(y), fy)
                } else {
                    CpuScalar::Sub(Box::new(x), fx, Box::new(y), fy)
                };
                (node, s)
            }
            Scalar::Mul(a, b) => {
                let ((x, sx), (y, sy)) = (Self::compile(a, r)?, Self::compile(b, r)?);
                (CpuScalar::Mul(Box::new(x), Box::new(y)), sx + sy)
            }
            Scalar::Case { when, then, otherwise } => {
                let ((x, sx), (y, sy)) = (Self::compile(then, r)?, Self::compile(otherwise, r)?);
                let s = sx.max(sy);
                (CpuScalar::Case(CpuPred::compile(when, r)?, Box::new(x), pow(s - sx), Box::new(y), pow(s - sy)), s)
            }
        })
    }

    pub fn eval(&self, rows: &[u32]) -> Result<i64> {
        let scaled = |x: &CpuScalar, f: i64| -> Result<i64> { x.eval(rows)?.checked_mul(f).ok_or_else(ovf) };
        match self {
            CpuScalar::Col(b) => Ok(b.col.int(rows[b.slot] as usize).expect("numeric column")),
            CpuScalar::Const(v) => Ok(*v),
            CpuScalar::Add(x, fx, y, fy) => scaled(x, *fx)?.checked_add(scaled(y, *fy)?).ok_or_else(ovf),
            CpuScalar::Sub(x, fx, y, fy) => scaled(x, *fx)?.checked_sub(scaled(y, *fy)?).ok_or_else(ovf),
            CpuScalar::Mul(x, y) => x.eval(rows)?.checked_mul(y.eval(rows)?).ok_or_else(ovf),
            CpuScalar::Case(c, x, fx, y, fy) => {
                if c.eval(rows) {
                    scaled(x, *fx)
                } else {
                    scaled(y, *fy)
                }
            }
        }
    }
}
