//! Binary snapshots of named fields on one grid.
//!
//! Layout (little-endian): magic `NVKS`, format version `u32`, `n_points u64`,
//! `half_width f64`, field count `u32`, then per field a `u32` name length,
//! the UTF-8 name and `n_points` samples as `f64`.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

const MAGIC: &[u8; 4] = b"NVKS";
const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut out: W, fields: &[(&str, &Field)]) -> Result<()> {
    let first = match fields.first() {
        Some((_, f)) => *f,
        None => return Err(Error::Snapshot("no fields to write".into())),
    };
    let grid = first.grid();
    if fields.iter().any(|(_, f)| !f.same_grid(first)) {
        return Err(Error::GridMismatch);
    }
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.n_points() as u64).to_le_bytes())?;
    out.write_all(&grid.half_width().to_le_bytes())?;
    out.write_all(&(fields.len() as u32).to_le_bytes())?;
    for (name, field) in fields {
        out.write_all(&(name.len() as u32).to_le_bytes())?;
        out.write_all(name.as_bytes())?;
        let mut buf = Vec::with_capacity(8 * grid.n_points());
        for v in field.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn read_array<const K: usize, R: Read>(input: &mut R) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    input.read_exact(&mut b)?;
    Ok(b)
}

/// Grid and named fields of a snapshot.
pub type Snapshot = (Arc<Grid>, Vec<(String, Field)>);

/// Reads a snapshot back; the grid is rebuilt from the header.
pub fn read_snapshot<R: Read>(mut input: R) -> Result<Snapshot> {
    if &read_array::<4, _>(&mut input)? != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n_points = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let half_width = f64::from_le_bytes(read_array(&mut input)?);
    let grid = Grid::new(n_points, half_width)?;
    let count = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let len = u32::from_le_bytes(read_array(&mut input)?) as usize;
        let mut name = vec![0u8; len];
        input.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|e| Error::Snapshot(e.to_string()))?;
        let mut raw = vec![0u8; 8 * n_points];
        input.read_exact(&mut raw)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        fields.push((name, Field::from_values(&grid, values)?));
    }
    Ok((grid, fields))
}
