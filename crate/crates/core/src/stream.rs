//! Stream mode: a locally random keystream supplies fresh cipher keys per block.
//!
//! The keystream is `core XOR mixer`. The core evaluates a random polynomial of
//! degree `e - 1` over `GF(2^w)` at the bit index and keeps the constant-term
//! coordinate, so any `e` core bits are exactly uniform over the seed. The
//! mixer is SHA-256 in counter mode under a key derived from the seed and a
//! nonce.
//!
//! Container layout (little-endian):
//! ```text
//! "QSC1" | u8 version | u8 cipher id | u16 n | u16 t | u16 e | u16 pad bits
//!        | u32 stream length | u32 block count | u64 nonce | blocks
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bits::bytes_to_bits;
use crate::cipher::container::{read_blocks, read_magic, truncated, write_blocks, CipherId};
use crate::cipher::{decrypt, encrypt, CipherKey, CipherSpec};
use crate::error::{Error, Result};
use crate::gf2n::{FieldContext, MAX_DEGREE};
use crate::hilbert::{CVector, StateVector};

pub const QSC_MAGIC: &[u8; 4] = b"QSC1";
pub const QSC_VERSION: u8 = 1;
/// Longest supported stream, limited by the largest core field.
pub const MAX_STREAM_BITS: u64 = 1 << MAX_DEGREE;

const MIXER_DOMAIN: &[u8] = b"mubkit/stream/mixer/v1";
const MIXER_BLOCK_BITS: u64 = 256;

/// Keyed pseudorandom bit source XORed onto the core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mixer {
    None,
    Sha256Counter([u8; 32]),
}

impl Mixer {
    pub fn derive(seed: &[u8], nonce: u64) -> Self {
        let key = Sha256::new()
            .chain_update(MIXER_DOMAIN)
            .chain_update((seed.len() as u64).to_le_bytes())
            .chain_update(seed)
            .chain_update(nonce.to_le_bytes())
            .finalize();
        Self::Sha256Counter(key.into())
    }

    fn block(key: &[u8; 32], counter: u64) -> [u8; 32] {
        Sha256::new()
            .chain_update(key)
            .chain_update(counter.to_le_bytes())
            .finalize()
            .into()
    }

    /// Mixer bits `offset..offset + len`.
    pub fn bits(&self, offset: u64, len: u64) -> Vec<bool> {
        match self {
            Self::None => vec![false; len as usize],
            Self::Sha256Counter(key) => {
                let mut out = Vec::with_capacity(len as usize);
                let mut cached: Option<(u64, [u8; 32])> = None;
                for i in offset..offset + len {
                    let counter = i / MIXER_BLOCK_BITS;
                    let block = match cached {
                        Some((c, b)) if c == counter => b,
                        _ => {
                            let b = Self::block(key, counter);
                            cached = Some((counter, b));
                            b
                        }
                    };
                    let pos = (i % MIXER_BLOCK_BITS) as usize;
                    out.push(block[pos / 8] >> (7 - pos % 8) & 1 == 1);
                }
                out
            }
        }
    }
}

/// Keystream of at most `len` bits with `e`-wise uniform core.
#[derive(Debug, Clone)]
pub struct KeystreamGenerator {
    e: u32,
    len: u64,
    field: FieldContext,
    /// Core polynomial coefficients, constant term first.
    coefficients: Vec<u32>,
    seed_bits: usize,
    mixer: Mixer,
}

/// Bits needed to index `len` positions, at least 1.
pub fn index_width(len: u64) -> u32 {
    (64 - len.saturating_sub(1).leading_zeros()).max(1)
}

impl KeystreamGenerator {
    /// Builds a generator from a seed given as bits. The first `e * w` bits
    /// (most significant first) are the core coefficients.
    pub fn from_seed_bits(seed: &[bool], e: u32, len: u64, mixer: Mixer) -> Result<Self> {
        if e == 0 {
            return Err(Error::Parameter("e must be positive".into()));
        }
        if len == 0 || len > MAX_STREAM_BITS {
            return Err(Error::Parameter(format!(
                "stream length must be in 1..={MAX_STREAM_BITS}, got {len}"
            )));
        }
        let w = index_width(len);
        let bound = seed.len() as f64 / w as f64;
        if e as f64 > bound {
            return Err(Error::InfeasibleGenerator { e, bound });
        }
        let field = FieldContext::new(w, None)?;
        let coefficients = seed[..(e * w) as usize]
            .chunks(w as usize)
            .map(|c| c.iter().fold(0u32, |acc, &b| acc << 1 | b as u32))
            .collect();
        Ok(Self {
            e,
            len,
            field,
            coefficients,
            seed_bits: seed.len(),
            mixer,
        })
    }

    /// Seeded generator with the SHA-256 mixer keyed by `(seed, nonce)`.
    pub fn new(seed: &[u8], e: u32, len: u64, nonce: u64) -> Result<Self> {
        Self::from_seed_bits(&bytes_to_bits(seed), e, len, Mixer::derive(seed, nonce))
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.field.n()
    }

    pub fn seed_bits(&self) -> usize {
        self.seed_bits
    }

    pub fn mixer(&self) -> &Mixer {
        &self.mixer
    }

    fn core_bit(&self, index: u64) -> bool {
        let x = index as u32;
        let value = self
            .coefficients
            .iter()
            .rev()
            .fold(0u32, |acc, &a| self.field.add(self.field.mul(acc, x), a));
        value & 1 == 1
    }

    /// Keystream bits `offset..offset + len`.
    pub fn keystream(&self, offset: u64, len: u64) -> Result<Vec<bool>> {
        let end = offset.checked_add(len).filter(|&e| e <= self.len).ok_or(Error::KeystreamExhausted {
            offset,
            end: offset.saturating_add(len),
            len: self.len,
        })?;
        let mixer = self.mixer.bits(offset, len);
        Ok((offset..end)
            .zip(mixer)
            .map(|(i, m)| self.core_bit(i) ^ m)
            .collect())
    }
}

/// Outcome of an exhaustive local-randomness check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EwiseReport {
    pub core_e: u32,
    pub subset_size: u32,
    pub stream_len: u64,
    pub seeds: u64,
    pub subsets_checked: u64,
    pub uniform: bool,
    /// First position subset whose joint distribution is not uniform.
    pub first_failure: Option<Vec<u64>>,
}

/// Largest core seed enumerated by [`ewise_check`].
pub const MAX_ENUMERATED_SEED_BITS: u32 = 20;

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        if !f(&idx) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Checks by enumeration over all core seeds that every `subset_size` output
/// positions of a degree-`core_e - 1` core are jointly uniform.
pub fn ewise_check(core_e: u32, subset_size: u32, stream_len: u64, mixer: &Mixer) -> Result<EwiseReport> {
    if stream_len > 64 {
        return Err(Error::Parameter("enumeration supports at most 64 positions".into()));
    }
    if subset_size == 0 || subset_size as u64 > stream_len {
        return Err(Error::Parameter(format!("subset size {subset_size} out of range")));
    }
    let w = index_width(stream_len);
    let seed_bits = core_e * w;
    if seed_bits > MAX_ENUMERATED_SEED_BITS {
        return Err(Error::Parameter(format!("{seed_bits}-bit seed space too large to enumerate")));
    }
    let seeds = 1u64 << seed_bits;
    let streams: Vec<u64> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let bits: Vec<bool> = (0..seed_bits).rev().map(|i| s >> i & 1 == 1).collect();
            let generator = KeystreamGenerator::from_seed_bits(&bits, core_e, stream_len, mixer.clone())?;
            Ok(generator
                .keystream(0, stream_len)?
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i))
        })
        .collect::<Result<_>>()?;

    let k = subset_size as usize;
    let expected = seeds >> subset_size.min(63);
    let divisible = seeds % (1u64 << subset_size.min(63)) == 0;
    let mut checked = 0u64;
    let mut failure = None;
    let mut counts = vec![0u64; 1 << k];
    for_each_subset(stream_len as usize, k, |positions| {
        checked += 1;
        counts.iter_mut().for_each(|c| *c = 0);
        for s in &streams {
            let pattern = positions
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &p)| acc | ((s >> p & 1) as usize) << j);
            counts[pattern] += 1;
        }
        if !divisible || counts.iter().any(|&c| c != expected) {
            failure = Some(positions.iter().map(|&p| p as u64).collect());
            return false;
        }
        true
    });
    Ok(EwiseReport {
        core_e,
        subset_size,
        stream_len,
        seeds,
        subsets_checked: checked,
        uniform: failure.is_none(),
        first_failure: failure,
    })
}

/// Stream container header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub cipher: CipherId,
    pub n: u16,
    pub t: u16,
    pub e: u16,
    pub pad_bits: u16,
    pub stream_len: u32,
    pub block_count: u32,
    pub nonce: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamContainer {
    pub header: StreamHeader,
    pub blocks: Vec<CVector>,
}

impl StreamContainer {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let h = &self.header;
        w.write_all(QSC_MAGIC)?;
        w.write_u8(h.version)?;
        w.write_u8(h.cipher as u8)?;
        w.write_u16::<LittleEndian>(h.n)?;
        w.write_u16::<LittleEndian>(h.t)?;
        w.write_u16::<LittleEndian>(h.e)?;
        w.write_u16::<LittleEndian>(h.pad_bits)?;
        w.write_u32::<LittleEndian>(h.stream_len)?;
        w.write_u32::<LittleEndian>(self.blocks.len() as u32)?;
        w.write_u64::<LittleEndian>(h.nonce)?;
        write_blocks(w, &self.blocks)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        read_magic(r, QSC_MAGIC)?;
        let mut fields = || -> Result<StreamHeader> {
            let version = r.read_u8()?;
            let cipher = r.read_u8()?;
            Ok(StreamHeader {
                version,
                cipher: CipherId::from_u8(cipher)?,
                n: r.read_u16::<LittleEndian>()?,
                t: r.read_u16::<LittleEndian>()?,
                e: r.read_u16::<LittleEndian>()?,
                pad_bits: r.read_u16::<LittleEndian>()?,
                stream_len: r.read_u32::<LittleEndian>()?,
                block_count: r.read_u32::<LittleEndian>()?,
                nonce: r.read_u64::<LittleEndian>()?,
            })
        };
        let header = fields().map_err(truncated)?;
        if header.version != QSC_VERSION {
            return Err(Error::Container(format!("unsupported version {}", header.version)));
        }
        if header.n == 0 || header.n > 12 {
            return Err(Error::Container(format!("n = {} out of range", header.n)));
        }
        if header.pad_bits >= header.n.max(1) || (header.block_count == 0 && header.pad_bits != 0) {
            return Err(Error::Container(format!("invalid padding length {}", header.pad_bits)));
        }
        let blocks = read_blocks(r, header.n, header.block_count)?;
        Ok(Self { header, blocks })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    /// Message length in bits after removing padding.
    pub fn message_bits(&self) -> u64 {
        self.blocks.len() as u64 * self.header.n as u64 - self.header.pad_bits as u64
    }
}

/// Keys for `blocks` blocks; each takes `m` bits, basis bits first, then the pad.
fn block_keys(gen: &KeystreamGenerator, spec: &CipherSpec, blocks: usize) -> Result<Vec<CipherKey>> {
    let m = spec.m() as u64;
    let stream = gen.keystream(0, m * blocks as u64)?;
    Ok(stream
        .chunks(m as usize)
        .map(|c| spec.key_from_index(c.iter().fold(0usize, |acc, &b| acc << 1 | b as usize)))
        .collect())
}

/// Encrypts `message` block by block, each block under the next `m` keystream bits.
pub fn stream_encrypt(gen: &KeystreamGenerator, spec: &CipherSpec, nonce: u64, message: &[bool]) -> Result<StreamContainer> {
    let n = spec.n() as usize;
    let mut padded = message.to_vec();
    let pad_bits = if message.len() % n == 0 { 0 } else { n - message.len() % n };
    if pad_bits > 0 {
        padded.push(true);
        padded.resize(message.len() + pad_bits, false);
    }
    let count = padded.len() / n;
    let keys = block_keys(gen, spec, count)?;
    let blocks = padded
        .par_chunks(n)
        .zip(keys.par_iter())
        .map(|(bits, &key)| {
            let p = bits.iter().fold(0u32, |acc, &b| acc << 1 | b as u32);
            encrypt(spec, key, p).map(StateVector::into_amps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StreamContainer {
        header: StreamHeader {
            version: QSC_VERSION,
            cipher: CipherId::of(spec)?,
            n: spec.n() as u16,
            t: spec.t() as u16,
            e: gen.e() as u16,
            pad_bits: pad_bits as u16,
            stream_len: gen.len() as u32,
            block_count: count as u32,
            nonce,
        },
        blocks,
    })
}

/// Inverse of [`stream_encrypt`].
pub fn stream_decrypt(gen: &KeystreamGenerator, spec: &CipherSpec, container: &StreamContainer) -> Result<Vec<bool>> {
    let h = &container.header;
    if CipherId::of(spec)? != h.cipher || spec.n() as u16 != h.n || spec.t() as u16 != h.t {
        return Err(Error::Container(format!(
            "header ({:?}, n={}, t={}) does not match cipher ({}, n={}, t={})",
            h.cipher,
            h.n,
            h.t,
            spec.kind().name(),
            spec.n(),
            spec.t()
        )));
    }
    if gen.e() as u16 != h.e || gen.len() != h.stream_len as u64 {
        return Err(Error::Container("generator parameters do not match header".into()));
    }
    let keys = block_keys(gen, spec, container.blocks.len())?;
    let words = container
        .blocks
        .par_iter()
        .zip(keys.par_iter())
        .map(|(block, &key)| decrypt(spec, key, &StateVector::new(block.clone())?))
        .collect::<Result<Vec<u32>>>()?;
    let mut bits = crate::bits::words_to_bits(&words, spec.n());
    if h.pad_bits > 0 {
        let keep = bits.len() - h.pad_bits as usize;
        if !bits[keep] || bits[keep + 1..].iter().any(|&b| b) {
            return Err(Error::Container("malformed padding".into()));
        }
        bits.truncate(keep);
    }
    Ok(bits)
}

/// Known-plaintext bits an adversary needs for a `t_distinguish`-bit advantage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlaintextBudget {
    /// `t n` for the `W_n` stream.
    pub wn: u64,
    /// `2 t` for the `H_n` stream.
    pub hn: u64,
    /// `t 2^n`, if the entropy gap were zero.
    pub optimistic: u64,
}

pub fn plaintext_budget(t_distinguish: u64, n: u32) -> Result<PlaintextBudget> {
    if t_distinguish == 0 || n == 0 || n > 62 {
        return Err(Error::Parameter(format!("invalid budget inputs t={t_distinguish}, n={n}")));
    }
    let overflow = || Error::Parameter("budget overflows".into());
    Ok(PlaintextBudget {
        wn: t_distinguish.checked_mul(n as u64).ok_or_else(overflow)?,
        hn: t_distinguish.checked_mul(2).ok_or_else(overflow)?,
        optimistic: t_distinguish.checked_mul(1 << n).ok_or_else(overflow)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{hn_spec, key_averaged, wn_spec};
    use crate::hilbert::DensityOperator;
    use crate::mub::MubFamily;
    use proptest::prelude::*;

    fn seed() -> Vec<u8> {
        (0u8..32).collect()
    }

    #[test]
    fn widths() {
        assert_eq!(index_width(1), 1);
        assert_eq!(index_width(16), 4);
        assert_eq!(index_width(17), 5);
        assert_eq!(index_width(1 << 16), 16);
    }

    #[test]
    fn core_is_pairwise_and_triplewise_uniform() {
        for (core, check) in [(1, 1), (2, 2), (3, 3), (2, 3)] {
            let r = ewise_check(core, check, 16, &Mixer::None).unwrap();
            assert!(r.uniform, "{r:?}");
        }
    }

    #[test]
    fn linear_core_fails_four_wise() {
        let r = ewise_check(2, 4, 16, &Mixer::None).unwrap();
        assert!(!r.uniform);
        assert_eq!(r.first_failure, Some(vec![0, 1, 2, 3]));
    }

    #[test]
    fn mixing_preserves_uniformity() {
        let mixer = Mixer::derive(b"fixed", 9);
        assert!(ewise_check(2, 2, 16, &mixer).unwrap().uniform);
        assert!(ewise_check(3, 3, 16, &mixer).unwrap().uniform);
    }

    #[test]
    fn feasibility_and_range() {
        assert!(matches!(
            KeystreamGenerator::from_seed_bits(&[true; 8], 3, 16, Mixer::None),
            Err(Error::InfeasibleGenerator { .. })
        ));
        let g = KeystreamGenerator::new(&seed(), 4, 100, 0).unwrap();
        assert_eq!(g.keystream(0, 100).unwrap().len(), 100);
        assert!(matches!(g.keystream(90, 11), Err(Error::KeystreamExhausted { .. })));
        assert!(g.keystream(u64::MAX, 2).is_err());
        assert!(KeystreamGenerator::new(&seed(), 1, MAX_STREAM_BITS + 1, 0).is_err());
    }

    #[test]
    fn deterministic_and_random_access() {
        let a = KeystreamGenerator::new(&seed(), 8, 4096, 5).unwrap();
        let b = KeystreamGenerator::new(&seed(), 8, 4096, 5).unwrap();
        let full = a.keystream(0, 4096).unwrap();
        assert_eq!(full, b.keystream(0, 4096).unwrap());
        assert_eq!(&full[1000..1300], a.keystream(1000, 300).unwrap().as_slice());
        let other = KeystreamGenerator::new(&seed(), 8, 4096, 6).unwrap();
        assert_ne!(full, other.keystream(0, 4096).unwrap());
    }

    #[test]
    fn padding_and_empty() {
        let spec = hn_spec(3).unwrap();
        let g = KeystreamGenerator::new(&seed(), 4, 1024, 1).unwrap();
        let empty = stream_encrypt(&g, &spec, 1, &[]).unwrap();
        assert!(empty.blocks.is_empty());
        assert_eq!(empty.to_bytes().unwrap().len(), 30);
        assert!(stream_decrypt(&g, &spec, &empty).unwrap().is_empty());

        let msg = [true, false, true, true];
        let c = stream_encrypt(&g, &spec, 1, &msg).unwrap();
        assert_eq!(c.header.pad_bits, 2);
        assert_eq!(c.message_bits(), 4);
        assert_eq!(stream_decrypt(&g, &spec, &c).unwrap(), msg);
    }

    #[test]
    fn container_roundtrip_and_errors() {
        let spec = wn_spec(&MubFamily::with_default_field(2).unwrap());
        let g = KeystreamGenerator::new(&seed(), 4, 512, 3).unwrap();
        let msg: Vec<bool> = (0..64).map(|i| i % 3 == 0).collect();
        let c = stream_encrypt(&g, &spec, 3, &msg).unwrap();
        let bytes = c.to_bytes().unwrap();
        let back = StreamContainer::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.to_bytes().unwrap(), bytes);
        assert_eq!(stream_decrypt(&g, &spec, &back).unwrap(), msg);

        assert!(matches!(
            StreamContainer::read_from(&mut &bytes[..bytes.len() - 1]),
            Err(Error::Container(_))
        ));
        assert!(matches!(StreamContainer::read_from(&mut &bytes[..20]), Err(Error::Container(_))));
        let wrong = KeystreamGenerator::new(&[7u8; 32], 4, 512, 3).unwrap();
        if let Ok(out) = stream_decrypt(&wrong, &spec, &back) {
            assert_ne!(out, msg);
        }
        let short = KeystreamGenerator::new(&seed(), 4, 64, 3).unwrap();
        assert!(stream_encrypt(&short, &spec, 3, &msg).is_err());
    }

    #[test]
    fn random_keys_hide_every_block() {
        for spec in [hn_spec(2).unwrap(), wn_spec(&MubFamily::with_default_field(2).unwrap())] {
            let mixed = DensityOperator::maximally_mixed(spec.dim());
            for a in 0..4 {
                let rho = key_averaged(&spec, a).unwrap();
                assert!((rho.matrix() - mixed.matrix()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn budget_figures() {
        let b = plaintext_budget(100, 8).unwrap();
        assert_eq!((b.wn, b.hn, b.optimistic), (800, 200, 25600));
        assert!(plaintext_budget(0, 8).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_random_messages(bits in prop::collection::vec(any::<bool>(), 0..64), nonce in any::<u64>()) {
            let spec = hn_spec(2).unwrap();
            let g = KeystreamGenerator::new(&seed(), 4, 256, nonce).unwrap();
            let c = stream_encrypt(&g, &spec, nonce, &bits).unwrap();
            prop_assert_eq!(stream_decrypt(&g, &spec, &c).unwrap(), bits);
        }
    }
}
