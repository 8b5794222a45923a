//! Bit-string helpers. Bits are read most significant first within each byte.

use crate::error::{Error, Result};

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|b| (0..8).rev().map(move |i| b >> i & 1 == 1))
        .collect()
}

/// Packs bits into bytes; the length must be a multiple of 8.
pub fn bits_to_bytes(bits: &[bool]) -> Result<Vec<u8>> {
    if bits.len() % 8 != 0 {
        return Err(Error::Parameter(format!(
            "{} bits do not form whole bytes",
            bits.len()
        )));
    }
    Ok(bits
        .chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| acc << 1 | b as u8))
        .collect())
}

/// Groups bits into `width`-bit values, first bit most significant.
pub fn bits_to_words(bits: &[bool], width: u32) -> Result<Vec<u32>> {
    if width == 0 || width > 32 || bits.len() % width as usize != 0 {
        return Err(Error::Parameter(format!(
            "{} bits do not split into {width}-bit words",
            bits.len()
        )));
    }
    Ok(bits
        .chunks(width as usize)
        .map(|c| c.iter().fold(0u32, |acc, &b| acc << 1 | b as u32))
        .collect())
}

pub fn words_to_bits(words: &[u32], width: u32) -> Vec<bool> {
    words
        .iter()
        .flat_map(|w| (0..width).rev().map(move |i| w >> i & 1 == 1))
        .collect()
}

/// Parses one `bits`-wide key per block from a concatenation of fixed-width
/// hex groups of `ceil(bits / 4)` digits each.
pub fn parse_hex_words(hex: &str, bits: u32, count: usize) -> Result<Vec<u64>> {
    let hex: String = hex.chars().filter(|c| !c.is_whitespace()).collect();
    let digits = bits.div_ceil(4) as usize;
    if hex.len() != digits * count {
        return Err(Error::Parameter(format!(
            "expected {} hex digits ({count} keys of {digits} digits), got {}",
            digits * count,
            hex.len()
        )));
    }
    (0..count)
        .map(|i| {
            let group = &hex[i * digits..(i + 1) * digits];
            let value = u64::from_str_radix(group, 16)
                .map_err(|e| Error::Parameter(format!("bad hex key {group:?}: {e}")))?;
            if bits < 64 && value >> bits != 0 {
                return Err(Error::BitLength { value, bits });
            }
            Ok(value)
        })
        .collect()
}
