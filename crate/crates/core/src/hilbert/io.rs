//! Binary encoding of complex vectors and matrices.
//!
//! Layout: `u32` dimension, then `(re, im)` little-endian `f64` pairs in
//! row-major order.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{CMatrix, CVector, C64, MAX_DIM};
use crate::error::{Error, Result};

pub fn write_amplitudes<W: Write>(w: &mut W, amps: &[C64]) -> Result<()> {
    for z in amps {
        w.write_f64::<LittleEndian>(z.re)?;
        w.write_f64::<LittleEndian>(z.im)?;
    }
    Ok(())
}

pub fn read_amplitudes<R: Read>(r: &mut R, len: usize) -> Result<Vec<C64>> {
    (0..len)
        .map(|_| {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            Ok(C64::new(re, im))
        })
        .collect()
}

fn read_dim<R: Read>(r: &mut R) -> Result<usize> {
    let dim = r.read_u32::<LittleEndian>()? as usize;
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Container(format!("dimension {dim} out of range")));
    }
    Ok(dim)
}

pub fn write_vector<W: Write>(w: &mut W, v: &CVector) -> Result<()> {
    w.write_u32::<LittleEndian>(v.len() as u32)?;
    write_amplitudes(w, v.as_slice())
}

pub fn read_vector<R: Read>(r: &mut R) -> Result<CVector> {
    let dim = read_dim(r)?;
    Ok(CVector::from_vec(read_amplitudes(r, dim)?))
}

/// Writes a square matrix; the leading `u32` is its side length.
pub fn write_matrix<W: Write>(w: &mut W, m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    w.write_u32::<LittleEndian>(m.nrows() as u32)?;
    // nalgebra is column-major; transpose to emit rows
    write_amplitudes(w, m.transpose().as_slice())
}

pub fn read_matrix<R: Read>(r: &mut R) -> Result<CMatrix> {
    let dim = read_dim(r)?;
    let data = read_amplitudes(r, dim * dim)?;
    Ok(CMatrix::from_row_slice(dim, dim, &data))
}
