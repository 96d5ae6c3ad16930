//! Field snapshot export.
//!
//! Binary layout (little-endian):
//!
//! | bytes  | content                                   |
//! |--------|-------------------------------------------|
//! | 0..8   | magic `PMLFIELD`                          |
//! | 8..12  | `u32` dimension `d`                        |
//! | 12..24 | `u32` cell count per axis (1 for unused)   |
//! | 24..28 | `u32` scalar kind (0 real, 1 complex)      |
//! | 28..32 | reserved, zero                            |
//!
//! followed by the values in storage order as `f64`, complex values as
//! interleaved `(re, im)` pairs.

use std::io::{Read, Write};

use super::{Field, GridSpec, Scalar, ScalarKind, MAX_DIM};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PMLFIELD";
pub const HEADER_LEN: usize = 32;

/// Decoded binary snapshot; grid spacing and origin are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSnapshot {
    pub shape: Vec<usize>,
    pub kind: ScalarKind,
    /// Flat `f64` components (`len * kind.width()`).
    pub data: Vec<f64>,
}

impl RawSnapshot {
    /// Reattaches the snapshot to a grid with matching shape.
    pub fn into_field<T: Scalar>(self, grid: GridSpec) -> Result<Field<T>> {
        if self.shape != grid.shape() {
            return Err(Error::Snapshot(format!(
                "shape {:?} does not match grid {:?}",
                self.shape,
                grid.shape()
            )));
        }
        if self.kind != T::KIND {
            return Err(Error::Snapshot(format!(
                "snapshot holds {:?} values, requested {:?}",
                self.kind,
                T::KIND
            )));
        }
        let values = match self.kind {
            ScalarKind::Real => self.data.iter().map(|&x| T::from_parts(x, 0.0)).collect(),
            ScalarKind::Complex => self
                .data
                .chunks_exact(2)
                .map(|c| T::from_parts(c[0], c[1]))
                .collect(),
        };
        Field::from_values(grid, values)
    }
}

pub fn write_binary<T: Scalar, W: Write>(field: &Field<T>, mut out: W) -> std::io::Result<()> {
    let grid = field.grid();
    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(MAGIC);
    header[8..12].copy_from_slice(&(grid.dim() as u32).to_le_bytes());
    for axis in 0..MAX_DIM {
        let n = grid.shape().get(axis).copied().unwrap_or(1) as u32;
        header[12 + 4 * axis..16 + 4 * axis].copy_from_slice(&n.to_le_bytes());
    }
    header[24..28].copy_from_slice(&T::KIND.code().to_le_bytes());
    out.write_all(&header)?;

    let width = T::KIND.width();
    let mut buf = Vec::with_capacity(field.values().len() * width * 8);
    for v in field.values() {
        let p = v.parts();
        for x in &p[..width] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    out.write_all(&buf)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<RawSnapshot> {
    let mut header = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|e| Error::Snapshot(format!("short header: {e}")))?;
    if &header[..8] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap());
    let dim = word(8) as usize;
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::Snapshot(format!("unsupported dimension {dim}")));
    }
    let shape: Vec<usize> = (0..dim).map(|a| word(12 + 4 * a) as usize).collect();
    let kind = ScalarKind::from_code(word(24))
        .ok_or_else(|| Error::Snapshot(format!("unknown scalar kind {}", word(24))))?;

    let count = shape.iter().product::<usize>() * kind.width();
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Snapshot(e.to_string()))?;
    if bytes.len() != count * 8 {
        return Err(Error::Snapshot(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(RawSnapshot { shape, kind, data })
}

/// One line per cell: lattice coordinates, then the value (`re,im` for
/// complex fields).
pub fn write_csv<T: Scalar, W: Write>(field: &Field<T>, mut out: W) -> std::io::Result<()> {
    let grid = field.grid();
    let d = grid.dim();
    let mut head: Vec<String> = (0..d).map(|a| format!("i{a}")).collect();
    match T::KIND {
        ScalarKind::Real => head.push("value".into()),
        ScalarKind::Complex => {
            head.push("re".into());
            head.push("im".into());
        }
    }
    writeln!(out, "{}", head.join(","))?;
    for (off, v) in field.values().iter().enumerate() {
        let c = grid.lattice_coords(off);
        let coords: Vec<String> = c[..d].iter().map(|x| x.to_string()).collect();
        let p = v.parts();
        match T::KIND {
            ScalarKind::Real => writeln!(out, "{},{:.16e}", coords.join(","), p[0])?,
            ScalarKind::Complex => {
                writeln!(out, "{},{:.16e},{:.16e}", coords.join(","), p[0], p[1])?
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = GridSpec::new(1.0, &[4, 5], &[0, 0]).unwrap();
        let f = Field::<f64>::zeros(g);
        let mut bytes = Vec::new();
        write_binary(&f, &mut bytes).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 20 * 8);
        assert_eq!(&bytes[..8], b"PMLFIELD");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[24..28].try_into().unwrap()), 0);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(read_binary(&b"NOTFIELD"[..]).is_err());
        let g = make_grid(1, 1.0, 4).unwrap();
        let mut bytes = Vec::new();
        write_binary(&Field::<f64>::zeros(g), &mut bytes).unwrap();
        bytes.pop();
        assert!(read_binary(&bytes[..]).is_err());
    }

    #[test]
    fn wrong_kind_rejected() {
        let g = make_grid(1, 1.0, 4).unwrap();
        let mut bytes = Vec::new();
        write_binary(&Field::<f64>::zeros(g), &mut bytes).unwrap();
        let raw = read_binary(&bytes[..]).unwrap();
        assert!(raw.into_field::<Complex64>(g).is_err());
    }

    #[test]
    fn csv_lines() {
        let g = GridSpec::new(1.0, &[4], &[-2]).unwrap();
        let f = Field::from_values(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut out = Vec::new();
        write_csv(&f, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "i0,value");
        assert!(lines[1].starts_with("-2,1.0"));
    }

    proptest! {
        #[test]
        fn binary_roundtrip(re in proptest::collection::vec(-1e6f64..1e6, 30), im in proptest::collection::vec(-1e6f64..1e6, 30)) {
            let g = GridSpec::new(0.1, &[5, 6], &[-2, -3]).unwrap();
            let f = Field::from_values(g, re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect()).unwrap();
            let mut bytes = Vec::new();
            write_binary(&f, &mut bytes).unwrap();
            let back: Field<Complex64> = read_binary(&bytes[..]).unwrap().into_field(g).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
