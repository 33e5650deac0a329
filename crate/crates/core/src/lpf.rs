//! The "LPF1" binary field format: magic, u64 n, f64 L, then n² f64 values
//! (all little-endian, row-major).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

const MAGIC: &[u8; 4] = b"LPF1";

pub fn write_field<W: Write>(mut w: W, field: &Field) -> Result<()> {
    let grid = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&grid.extent().to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * grid.len());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word).map_err(|_| Error::Format("truncated header".into()))?;
    let n = u64::from_le_bytes(word);
    r.read_exact(&mut word).map_err(|_| Error::Format("truncated header".into()))?;
    let extent = f64::from_le_bytes(word);
    let n = usize::try_from(n).map_err(|_| Error::Format(format!("resolution {n} too large")))?;
    if n > 1 << 15 {
        return Err(Error::Format(format!("resolution {n} too large")));
    }
    let grid = Grid::new(n, extent)?;
    let mut bytes = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut bytes).map_err(|_| Error::Format("truncated payload".into()))?;
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Field::new(grid, values)
}

pub fn save(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_field(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    let file = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(file))
}
