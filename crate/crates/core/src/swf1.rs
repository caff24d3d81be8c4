//! `SWF1` field files: magic `SWF1`, little-endian `u32` dimension, `u32`
//! component count, one `u32` size per axis, then the samples as
//! little-endian `f64`, component-major and row-major within a component.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, RealField, MAX_DIM};

pub const MAGIC: [u8; 4] = *b"SWF1";

pub fn write_field<W: Write>(f: &RealField, mut out: W) -> Result<()> {
    out.write_all(&MAGIC)?;
    let grid = f.grid();
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(f.components() as u32).to_le_bytes())?;
    for &s in grid.sizes() {
        out.write_all(&(s as u32).to_le_bytes())?;
    }
    for v in f.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated file while reading {what}")),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_field<R: Read>(mut r: R) -> Result<RealField> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected SWF1")));
    }
    let d = read_u32(&mut r, "dimension")? as usize;
    if d == 0 || d > MAX_DIM {
        return Err(Error::Format(format!("dimension {d} is not in 1..={MAX_DIM}")));
    }
    let m = read_u32(&mut r, "component count")? as usize;
    if m == 0 {
        return Err(Error::Format("component count is zero".into()));
    }
    let sizes = (0..d)
        .map(|_| read_u32(&mut r, "sizes").map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    let grid = GridSpec::new(&sizes).map_err(|e| Error::Format(e.to_string()))?;
    let count = m
        .checked_mul(grid.len())
        .ok_or_else(|| Error::Format("sample count overflows".into()))?;
    let mut bytes = vec![0u8; count * 8];
    read_exact(&mut r, &mut bytes, "samples")?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    RealField::new(grid, m, values)
}

pub fn save(path: impl AsRef<Path>, f: &RealField) -> Result<()> {
    write_field(f, BufWriter::new(File::create(path)?))
}

pub fn load(path: impl AsRef<Path>) -> Result<RealField> {
    read_field(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = GridSpec::new(&[8, 4]).unwrap();
        let f = RealField::from_fn(g, 2, |c, x| (x[0] + c as f64).sin() / 3.0 + 1e-300).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"SWF1");
        assert_eq!(buf.len(), 4 + 4 + 4 + 2 * 4 + 2 * 32 * 8);
        let back = read_field(buf.as_slice()).unwrap();
        assert_eq!(back.grid(), f.grid());
        let same = back
            .values()
            .iter()
            .zip(f.values())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
    }

    #[test]
    fn header_errors() {
        let g = GridSpec::new(&[4]).unwrap();
        let mut buf = Vec::new();
        write_field(&RealField::zeros(g, 1), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_field(bad.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_field(&buf[..buf.len() - 1]), Err(Error::Format(_))));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_field(long.as_slice()), Err(Error::Format(_))));
        let mut odd = buf.clone();
        odd[12..16].copy_from_slice(&6u32.to_le_bytes());
        assert!(matches!(read_field(odd.as_slice()), Err(Error::Format(_))));
    }
}
