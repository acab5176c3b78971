use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LogicalType {
    Int,
    /// Fixed-point number stored as an integer scaled by `10^scale`.
    Decimal { precision: u8, scale: u8 },
    /// Days since 1970-01-01.
    Date,
    Text,
}

impl LogicalType {
    pub fn scale(&self) -> u8 {
        match self {
            LogicalType::Decimal { scale, .. } => *scale,
            _ => 0,
        }
    }

    pub fn is_text(&self) -> bool {
        matches!(self, LogicalType::Text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: LogicalType,
}

impl ColumnDef {
    pub fn new(name: impl Into<String>, ty: LogicalType) -> Self {
        ColumnDef { name: name.into(), ty }
    }
}

/// `column` references the primary key of `table`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForeignKey {
    pub column: String,
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    #[serde(default)]
    pub primary_key: Option<String>,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKey>,
}

impl TableDef {
    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn foreign_key(&self, column: &str) -> Option<&ForeignKey> {
        self.foreign_keys.iter().find(|f| f.column == column)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub tables: Vec<TableDef>,
}

impl Schema {
    pub fn table(&self, name: &str) -> Result<&TableDef> {
        self.tables
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    pub fn column(&self, table: &str, column: &str) -> Result<&ColumnDef> {
        self.table(table)?
            .column(column)
            .ok_or_else(|| Error::UnknownColumn(format!("{table}.{column}")))
    }

    /// Primary key column of `table`.
    pub fn primary_key(&self, table: &str) -> Result<&str> {
        self.table(table)?
            .primary_key
            .as_deref()
            .ok_or_else(|| Error::Invalid(format!("table {table} has no primary key")))
    }

    /// Every table has unique column names, PKs and FKs name real columns,
    /// and FK targets exist and declare a primary key.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.tables.iter().enumerate() {
            if self.tables[..i].iter().any(|o| o.name == t.name) {
                return Err(Error::Invalid(format!("duplicate table {}", t.name)));
            }
            for (j, c) in t.columns.iter().enumerate() {
                if t.columns[..j].iter().any(|o| o.name == c.name) {
                    return Err(Error::Invalid(format!("duplicate column {}.{}", t.name, c.name)));
                }
                if let LogicalType::Decimal { precision, scale } = c.ty {
                    if precision == 0 || precision > 18 || scale > precision {
                        return Err(Error::Invalid(format!(
                            "{}.{}: unsupported DECIMAL({precision},{scale})",
                            t.name, c.name
                        )));
                    }
                }
            }
            if let Some(pk) = &t.primary_key {
                if t.column(pk).is_none() {
                    return Err(Error::UnknownColumn(format!("{}.{pk}", t.name)));
                }
            }
            for fk in &t.foreign_keys {
                if t.column(&fk.column).is_none() {
                    return Err(Error::UnknownColumn(format!("{}.{}", t.name, fk.column)));
                }
                self.primary_key(&fk.table)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_tables() -> Schema {
        Schema {
            tables: vec![
                TableDef {
                    name: "f".into(),
                    columns: vec![ColumnDef::new("f_d", LogicalType::Int)],
                    primary_key: None,
                    foreign_keys: vec![ForeignKey { column: "f_d".into(), table: "d".into() }],
                },
                TableDef {
                    name: "d".into(),
                    columns: vec![ColumnDef::new("d_k", LogicalType::Int)],
                    primary_key: Some("d_k".into()),
                    foreign_keys: vec![],
                },
            ],
        }
    }

    #[test]
    fn valid_schema() {
        two_tables().validate().unwrap();
    }

    #[test]
    fn missing_fk_target() {
        let mut s = two_tables();
        s.tables[0].foreign_keys[0].table = "nope".into();
        assert!(matches!(s.validate(), Err(Error::UnknownTable(_))));
    }

    #[test]
    fn target_without_pk() {
        let mut s = two_tables();
        s.tables[1].primary_key = None;
        assert!(s.validate().is_err());
    }

    #[test]
    fn type_json_shape() {
        let t: LogicalType = serde_json::from_str(r#"{"kind":"decimal","precision":15,"scale":2}"#).unwrap();
        assert_eq!(t, LogicalType::Decimal { precision: 15, scale: 2 });
        assert_eq!(t.scale(), 2);
    }
}
