//! Binary snapshot files.
//!
//! Layout, little-endian: magic `MVEU`, version `u32`, dim `u32`, n `u32`,
//! `L`, `t`, `c_v` as `f64`, then the arrays `rho`, `m_1 .. m_d`,
//! `E_total`, each `n^dim` values of `f64` in row-major cell order.

use std::io::{Read, Write};

use super::{Result, SnapshotError};
use crate::solver::{CellState, ConservedField, Grid};

pub const MAGIC: &[u8; 4] = b"MVEU";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: ConservedField,
    pub c_v: f64,
}

pub fn write_snapshot<W: Write>(mut w: W, field: &ConservedField, c_v: f64) -> Result<()> {
    let g = &field.grid;
    let mut buf = Vec::with_capacity(40 + 8 * (g.dim() + 2) * g.num_cells());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.n() as u32).to_le_bytes());
    for v in [g.length(), field.t, c_v] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut push = |f: &dyn Fn(&CellState) -> f64| {
        for c in &field.cells {
            buf.extend_from_slice(&f(c).to_le_bytes());
        }
    };
    push(&|c| c.rho);
    for k in 0..g.dim() {
        push(&|c| c.momentum[k]);
    }
    push(&|c| c.total_energy);
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(SnapshotError::Format("bad magic".into()));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(SnapshotError::Format(format!("unsupported version {version}")));
    }
    let dim = cur.u32()? as usize;
    let n = cur.u32()? as usize;
    let (length, t, c_v) = (cur.f64()?, cur.f64()?, cur.f64()?);
    let grid = Grid::new(dim, n, length).map_err(|e| SnapshotError::Format(e.to_string()))?;
    let cells = grid.num_cells();
    if bytes.len() - cur.pos != 8 * cells * (dim + 2) {
        return Err(SnapshotError::Format(format!(
            "payload is {} bytes, expected {}",
            bytes.len() - cur.pos,
            8 * cells * (dim + 2)
        )));
    }
    let mut states = vec![CellState::default(); cells];
    for s in states.iter_mut() {
        s.rho = cur.f64()?;
    }
    for k in 0..dim {
        for s in states.iter_mut() {
            s.momentum[k] = cur.f64()?;
        }
    }
    for s in states.iter_mut() {
        s.total_energy = cur.f64()?;
    }
    let field = ConservedField::new(grid, t, states).map_err(|e| SnapshotError::Format(e.to_string()))?;
    Ok(Snapshot { field, c_v })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos + k;
        let s = self.bytes.get(self.pos..end).ok_or_else(|| SnapshotError::Format("truncated".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
