//! Binary snapshot of a coefficient table for checkpoint/resume.
//!
//! Layout (little endian): magic `HTSB`, format version u32, dimension
//! u32, maximum order u32, point count u64, the flat point coordinates as
//! f64, then the per-shape coefficient arrays as i64 in the canonical
//! shape arrangement. Loading replays the points and rejects snapshots
//! whose arrays disagree with the replay.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use haarthin_core::{CoefficientTable, PointSet};

const MAGIC: &[u8; 4] = b"HTSB";
const VERSION: u32 = 1;

pub fn write_snapshot(table: &CoefficientTable, mut out: impl Write) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(table.dim() as u32).to_le_bytes())?;
    out.write_all(&table.max_order().to_le_bytes())?;
    out.write_all(&(table.n_kept() as u64).to_le_bytes())?;
    for &coord in table.kept_points().as_flat() {
        out.write_all(&coord.to_le_bytes())?;
    }
    for (_, entries) in table.shape_slots() {
        for &entry in entries {
            out.write_all(&entry.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(mut input: impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(mut input: impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_snapshot(mut input: impl Read) -> Result<CoefficientTable> {
    let mut magic = [0u8; 4];
    input
        .read_exact(&mut magic)
        .context("reading snapshot header")?;
    if &magic != MAGIC {
        bail!("not a table snapshot (bad magic)");
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        bail!("unsupported snapshot version {version}");
    }
    let dim = read_u32(&mut input)? as usize;
    let max_order = read_u32(&mut input)?;
    let n_kept = read_u64(&mut input)? as usize;
    if dim == 0 {
        bail!("snapshot has dimension 0");
    }

    let mut coords = vec![0f64; n_kept * dim];
    let mut buf = [0u8; 8];
    for coord in coords.iter_mut() {
        input
            .read_exact(&mut buf)
            .context("reading snapshot points")?;
        *coord = f64::from_le_bytes(buf);
    }
    let points = PointSet::from_flat(dim, coords)
        .map_err(|e| anyhow::anyhow!("snapshot points invalid: {e}"))?;

    let mut arrays = Vec::new();
    if max_order > 0 {
        for shape in haarthin_core::enumerate_shapes(max_order, dim as u32)
            .map_err(|e| anyhow::anyhow!("snapshot header invalid: {e}"))?
        {
            let mut entries = vec![0i64; shape.position_count() as usize];
            for entry in entries.iter_mut() {
                input
                    .read_exact(&mut buf)
                    .context("reading snapshot arrays")?;
                *entry = i64::from_le_bytes(buf);
            }
            arrays.push(entries);
        }
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        bail!("trailing bytes after snapshot payload");
    }
    CoefficientTable::from_parts(dim, max_order, points, arrays)
        .map_err(|e| anyhow::anyhow!("snapshot rejected: {e}"))
}
