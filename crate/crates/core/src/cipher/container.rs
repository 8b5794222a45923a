//! `QCT1` ciphertext container.
//!
//! ```text
//! "QCT1" | u8 cipher id | u16 n | u16 t | u32 block count | blocks
//! ```
//! Each block is `2^n` little-endian `(re, im)` double pairs. All integers
//! are little-endian.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{decrypt, encrypt, CipherKey, CipherKind, CipherSpec};
use crate::error::{Error, Result};
use crate::hilbert::io::{read_amplitudes, write_amplitudes};
use crate::hilbert::{CVector, StateVector};

pub const QCT_MAGIC: &[u8; 4] = b"QCT1";

/// Wire identifier of a cipher family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum CipherId {
    OneTimePad = 0,
    Hn = 1,
    Wn = 2,
}

impl CipherId {
    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Self::OneTimePad),
            1 => Ok(Self::Hn),
            2 => Ok(Self::Wn),
            other => Err(Error::Container(format!("unknown cipher id {other}"))),
        }
    }

    pub fn of(spec: &CipherSpec) -> Result<Self> {
        match spec.kind() {
            CipherKind::Hn => Ok(Self::Hn),
            CipherKind::Wn => Ok(Self::Wn),
            CipherKind::OneTimePad => Ok(Self::OneTimePad),
            other => Err(Error::Container(format!(
                "cipher kind {} has no wire id",
                other.name()
            ))),
        }
    }
}

pub(crate) fn read_magic<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Container("truncated magic".into()))?;
    if &buf != magic {
        return Err(Error::Container(format!("bad magic {buf:?}")));
    }
    Ok(())
}

pub(crate) fn truncated(e: Error) -> Error {
    match e {
        Error::Io(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Container("truncated container".into())
        }
        other => other,
    }
}

pub(crate) fn write_blocks<W: Write>(w: &mut W, blocks: &[CVector]) -> Result<()> {
    for b in blocks {
        write_amplitudes(w, b.as_slice())?;
    }
    Ok(())
}

pub(crate) fn read_blocks<R: Read>(r: &mut R, n: u16, count: u32) -> Result<Vec<CVector>> {
    let dim = 1usize << n;
    let blocks = (0..count)
        .map(|_| read_amplitudes(r, dim).map(CVector::from_vec))
        .collect::<Result<Vec<_>>>()
        .map_err(truncated)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Container("trailing bytes after last block".into()));
    }
    Ok(blocks)
}

/// A sequence of ciphertext blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct QctContainer {
    pub cipher: CipherId,
    pub n: u16,
    pub t: u16,
    pub blocks: Vec<CVector>,
}

impl QctContainer {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(QCT_MAGIC)?;
        w.write_u8(self.cipher as u8)?;
        w.write_u16::<LittleEndian>(self.n)?;
        w.write_u16::<LittleEndian>(self.t)?;
        w.write_u32::<LittleEndian>(self.blocks.len() as u32)?;
        write_blocks(w, &self.blocks)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        read_magic(r, QCT_MAGIC)?;
        let cipher = CipherId::from_u8(r.read_u8().map_err(Error::from).map_err(truncated)?)?;
        let mut header = || -> Result<(u16, u16, u32)> {
            Ok((
                r.read_u16::<LittleEndian>()?,
                r.read_u16::<LittleEndian>()?,
                r.read_u32::<LittleEndian>()?,
            ))
        };
        let (n, t, count) = header().map_err(truncated)?;
        if n == 0 || n > 12 {
            return Err(Error::Container(format!("n = {n} out of range")));
        }
        let blocks = read_blocks(r, n, count)?;
        Ok(Self { cipher, n, t, blocks })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    /// Checks that the header agrees with `spec`.
    pub fn check_spec(&self, spec: &CipherSpec) -> Result<()> {
        if CipherId::of(spec)? != self.cipher || spec.n() as u16 != self.n || spec.t() as u16 != self.t {
            return Err(Error::Container(format!(
                "container header ({:?}, n={}, t={}) does not match cipher ({}, n={}, t={})",
                self.cipher,
                self.n,
                self.t,
                spec.kind().name(),
                spec.n(),
                spec.t()
            )));
        }
        Ok(())
    }
}

/// Encrypts plaintext blocks, one key per block.
pub fn encrypt_blocks(spec: &CipherSpec, keys: &[CipherKey], plaintexts: &[u32]) -> Result<QctContainer> {
    if keys.len() != plaintexts.len() {
        return Err(Error::Parameter(format!(
            "{} keys for {} blocks",
            keys.len(),
            plaintexts.len()
        )));
    }
    let blocks = keys
        .iter()
        .zip(plaintexts)
        .map(|(&key, &p)| encrypt(spec, key, p).map(StateVector::into_amps))
        .collect::<Result<Vec<_>>>()?;
    Ok(QctContainer {
        cipher: CipherId::of(spec)?,
        n: spec.n() as u16,
        t: spec.t() as u16,
        blocks,
    })
}

/// Inverse of [`encrypt_blocks`].
pub fn decrypt_blocks(spec: &CipherSpec, keys: &[CipherKey], container: &QctContainer) -> Result<Vec<u32>> {
    container.check_spec(spec)?;
    if keys.len() != container.blocks.len() {
        return Err(Error::Parameter(format!(
            "{} keys for {} blocks",
            keys.len(),
            container.blocks.len()
        )));
    }
    keys.iter()
        .zip(&container.blocks)
        .map(|(&key, block)| decrypt(spec, key, &StateVector::new(block.clone())?))
        .collect()
}
