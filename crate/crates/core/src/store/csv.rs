use std::io::Read;
use std::path::Path;

use super::{parse_value, Database, Schema, Table, TableDef, Value};
use crate::error::{Error, Result};

/// Read one table from CSV text. The header must list the table's columns in order.
///
/// Errors report the file line (header is line 1) and the column name.
pub fn load_csv_reader<R: Read>(reader: R, def: &TableDef) -> Result<Table> {
    let mut rdr = ::csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Csv { row: 1, column: String::new(), message: e.to_string() })?
        .clone();
    let expected: Vec<&str> = def.columns.iter().map(|c| c.name.as_str()).collect();
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Csv {
            row: 1,
            column: String::new(),
            message: format!("header {got:?} does not match columns {expected:?}"),
        });
    }
    let mut columns: Vec<Vec<Value>> = vec![Vec::new(); def.columns.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            Error::Csv { row, column: String::new(), message: e.to_string() }
        })?;
        let row = rec.position().map_or(0, |p| p.line());
        if rec.len() != def.columns.len() {
            return Err(Error::Csv {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", def.columns.len(), rec.len()),
            });
        }
        for ((cell, cdef), out) in rec.iter().zip(&def.columns).zip(columns.iter_mut()) {
            let v = parse_value(cdef.ty, cell).map_err(|e| Error::Csv {
                row,
                column: cdef.name.clone(),
                message: e.to_string(),
            })?;
            out.push(v);
        }
    }
    Table::from_values(def.clone(), columns)
}

/// Load `<dir>/<table>.csv` for every table of `schema`.
pub fn load_csv(dir: &Path, schema: &Schema) -> Result<Database> {
    schema.validate()?;
    let mut tables = Vec::with_capacity(schema.tables.len());
    for def in &schema.tables {
        let path = dir.join(format!("{}.csv", def.name));
        let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        tables.push(load_csv_reader(std::io::BufReader::new(file), def)?);
    }
    Database::new(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{ColumnDef, LogicalType};

    fn def() -> TableDef {
        TableDef {
            name: "t".into(),
            columns: vec![
                ColumnDef::new("id", LogicalType::Int),
                ColumnDef::new("name", LogicalType::Text),
                ColumnDef::new("price", LogicalType::Decimal { precision: 9, scale: 2 }),
                ColumnDef::new("day", LogicalType::Date),
            ],
            primary_key: Some("id".into()),
            foreign_keys: vec![],
        }
    }

    #[test]
    fn three_rows() {
        let text = "id,name,price,day\n3,pear,1.50,1970-01-03\n1,apple,0.25,1970-01-01\n2,fig,10,1970-01-02\n";
        let t = load_csv_reader(text.as_bytes(), &def()).unwrap();
        assert_eq!(t.rows(), 3);
        let codes = |c: &str| (0..3).map(|i| t.column(c).unwrap().code(i)).collect::<Vec<_>>();
        assert_eq!(codes("id"), vec![2, 0, 1]);
        assert_eq!(codes("name"), vec![2, 0, 1]);
        assert_eq!(codes("day"), vec![2, 0, 1]);
        assert_eq!(t.column("price").unwrap().value(2), Value::Int(1000));
    }

    #[test]
    fn malformed_number_names_row_and_column() {
        let text = "id,name,price,day\n1,a,1.0,1970-01-01\n2,b,x.5,1970-01-01\n";
        match load_csv_reader(text.as_bytes(), &def()) {
            Err(Error::Csv { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "price");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arity_and_header_checked() {
        let short = "id,name,price,day\n1,a,1.0\n";
        assert!(matches!(load_csv_reader(short.as_bytes(), &def()), Err(Error::Csv { .. })));
        let wrong = "id,nom,price,day\n";
        assert!(matches!(load_csv_reader(wrong.as_bytes(), &def()), Err(Error::Csv { row: 1, .. })));
    }
}
