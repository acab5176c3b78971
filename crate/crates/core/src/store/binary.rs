//! Binary store file.
//!
//! Layout (little-endian, every section padded to 8 bytes):
//! magic `PIMDBST\0`, u32 version, u32 reserved, then a length-prefixed JSON
//! schema, then for each table and each of its columns: a length-prefixed
//! JSON encoding (offset base or dictionary), u32 width, u32 reserved,
//! u64 element count, u64 word count and the packed words.

use std::io::{Read, Write};
use std::path::Path;

use super::{Column, Database, Encoding, Schema, Table};
use crate::error::{Error, Result};
use crate::kernel::PackedColumn;

const MAGIC: &[u8; 8] = b"PIMDBST\0";
const VERSION: u32 = 1;

fn w_err(e: std::io::Error) -> Error {
    Error::Format(format!("write failed: {e}"))
}

fn r_err(e: std::io::Error) -> Error {
    Error::Format(format!("truncated or unreadable store: {e}"))
}

fn write_blob<W: Write>(w: &mut W, bytes: &[u8]) -> Result<()> {
    w.write_all(&(bytes.len() as u64).to_le_bytes()).map_err(w_err)?;
    w.write_all(bytes).map_err(w_err)?;
    let pad = (8 - bytes.len() % 8) % 8;
    w.write_all(&[0u8; 8][..pad]).map_err(w_err)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(r_err)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(r_err)?;
    Ok(u32::from_le_bytes(b))
}

fn read_blob<R: Read>(r: &mut R) -> Result<Vec<u8>> {
    let len = read_u64(r)? as usize;
    if len > 1 << 34 {
        return Err(Error::Format(format!("implausible section length {len}")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(r_err)?;
    let pad = (8 - len % 8) % 8;
    let mut skip = [0u8; 8];
    r.read_exact(&mut skip[..pad]).map_err(r_err)?;
    Ok(buf)
}

pub fn write_store<W: Write>(db: &Database, w: &mut W) -> Result<()> {
    w.write_all(MAGIC).map_err(w_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(w_err)?;
    w.write_all(&0u32.to_le_bytes()).map_err(w_err)?;
    write_blob(w, &serde_json::to_vec(db.schema())?)?;
    for table in db.tables() {
        for col in table.columns() {
            write_blob(w, &serde_json::to_vec(col.encoding())?)?;
            let data = col.data();
            w.write_all(&data.width().to_le_bytes()).map_err(w_err)?;
            w.write_all(&0u32.to_le_bytes()).map_err(w_err)?;
            w.write_all(&(data.len() as u64).to_le_bytes()).map_err(w_err)?;
            w.write_all(&(data.words().len() as u64).to_le_bytes()).map_err(w_err)?;
            let mut buf = Vec::with_capacity(data.words().len() * 8);
            for word in data.words() {
                buf.extend_from_slice(&word.to_le_bytes());
            }
            w.write_all(&buf).map_err(w_err)?;
        }
    }
    w.flush().map_err(w_err)
}

pub fn read_store<R: Read>(r: &mut R) -> Result<Database> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(r_err)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    read_u32(r)?;
    let schema: Schema = serde_json::from_slice(&read_blob(r)?)?;
    schema.validate()?;
    let mut tables = Vec::with_capacity(schema.tables.len());
    for def in &schema.tables {
        let mut columns = Vec::with_capacity(def.columns.len());
        for cdef in &def.columns {
            let encoding: Encoding = serde_json::from_slice(&read_blob(r)?)?;
            let width = read_u32(r)?;
            read_u32(r)?;
            let len = read_u64(r)? as usize;
            let nwords = read_u64(r)? as usize;
            if nwords > 1 << 32 {
                return Err(Error::Format(format!("implausible word count {nwords}")));
            }
            let mut raw = vec![0u8; nwords * 8];
            r.read_exact(&mut raw).map_err(r_err)?;
            let words = raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            let data = PackedColumn::from_words(width, len, words)?;
            columns.push(Column::from_parts(cdef.clone(), encoding, data)?);
        }
        tables.push(Table::new(def.clone(), columns)?);
    }
    Database::new(tables)
}

pub fn save_store(db: &Database, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_store(db, &mut w)
}

pub fn open_store(path: &Path) -> Result<Database> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_store(&mut std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::ssb::generate_ssb;

    #[test]
    fn round_trip_identity() {
        let db = generate_ssb(0.001, 3).unwrap();
        let mut buf = Vec::new();
        write_store(&db, &mut buf).unwrap();
        assert_eq!(buf.len() % 8, 0);
        let back = read_store(&mut buf.as_slice()).unwrap();
        assert_eq!(back, db);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_store(&mut &b"not a store at all"[..]).is_err());
        let db = generate_ssb(0.001, 3).unwrap();
        let mut buf = Vec::new();
        write_store(&db, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_store(&mut buf.as_slice()).is_err());
    }
}
