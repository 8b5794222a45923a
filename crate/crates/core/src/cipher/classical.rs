use crate::error::{Error, Result};
use crate::hilbert::Distribution;

/// A classical cipher as a (key, plaintext) -> ciphertext table with `|P| = |C|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalCipherTable {
    num_plaintexts: usize,
    rows: Vec<Vec<u32>>,
}

impl ClassicalCipherTable {
    /// Validates that every row is a permutation of the ciphertext space and
    /// that each ciphertext occurs equally often in every column.
    pub fn new(num_plaintexts: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.is_empty() || num_plaintexts == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        for (key, row) in rows.iter().enumerate() {
            let mut seen = vec![false; num_plaintexts];
            if row.len() != num_plaintexts {
                return Err(Error::InvalidTable(format!("row {key} has wrong length")));
            }
            for &c in row {
                match seen.get_mut(c as usize) {
                    Some(s) if !*s => *s = true,
                    _ => {
                        return Err(Error::InvalidTable(format!(
                            "row {key} is not a permutation"
                        )))
                    }
                }
            }
        }
        let expected = rows.len() / num_plaintexts;
        if expected * num_plaintexts != rows.len() {
            return Err(Error::InvalidTable("|K| is not a multiple of |P|".into()));
        }
        for p in 0..num_plaintexts {
            let mut counts = vec![0usize; num_plaintexts];
            for row in &rows {
                counts[row[p] as usize] += 1;
            }
            if counts.iter().any(|&c| c != expected) {
                return Err(Error::InvalidTable(format!(
                    "column {p} is not uniform (no perfect secrecy)"
                )));
            }
        }
        Ok(Self { num_plaintexts, rows })
    }

    /// The one-time pad on `n` bits.
    pub fn one_time_pad(n: u32) -> Self {
        Self::redundant_pad(n, 0)
    }

    /// One-time pad whose key carries `extra` ignored bits in front of the pad.
    pub fn redundant_pad(n: u32, extra: u32) -> Self {
        let size = 1u32 << n;
        let rows = (0..1u32 << (n + extra))
            .map(|key| (0..size).map(|p| p ^ (key & (size - 1))).collect())
            .collect();
        Self::new(size as usize, rows).expect("pad tables are valid")
    }

    pub fn num_keys(&self) -> usize {
        self.rows.len()
    }

    pub fn num_plaintexts(&self) -> usize {
        self.num_plaintexts
    }

    pub fn encrypt(&self, key: usize, plaintext: u32) -> u32 {
        self.rows[key][plaintext as usize]
    }
}

/// Distribution of the key given a matching plaintext/ciphertext pair.
pub fn classical_posterior(
    table: &ClassicalCipherTable,
    plaintext: u32,
    ciphertext: u32,
) -> Result<Distribution> {
    if plaintext as usize >= table.num_plaintexts || ciphertext as usize >= table.num_plaintexts {
        return Err(Error::InconsistentPair);
    }
    let weights: Vec<f64> = table
        .rows
        .iter()
        .map(|row| if row[plaintext as usize] == ciphertext { 1.0 } else { 0.0 })
        .collect();
    Distribution::from_weights(&weights).map_err(|_| Error::InconsistentPair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{min_entropy, shannon_entropy};

    #[test]
    fn otp_posterior_is_point_mass() {
        let t = ClassicalCipherTable::one_time_pad(2);
        let post = classical_posterior(&t, 1, 2).unwrap();
        assert_eq!(post.support(0.0), 1);
        assert_eq!(post.probs()[3], 1.0);
    }

    #[test]
    fn redundant_bit_gives_two_keys() {
        let t = ClassicalCipherTable::redundant_pad(2, 1);
        assert_eq!(t.num_keys(), 8);
        for p in 0..4 {
            for c in 0..4 {
                let post = classical_posterior(&t, p, c).unwrap();
                assert_eq!(post.support(0.0), 2);
                assert_eq!(shannon_entropy(&post), 1.0);
                assert_eq!(min_entropy(&post), 1.0);
            }
        }
    }

    #[test]
    fn rejects_invalid_tables() {
        assert!(ClassicalCipherTable::new(2, vec![vec![0, 0]]).is_err());
        // rows are permutations but column 0 never maps to 1
        assert!(ClassicalCipherTable::new(2, vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(ClassicalCipherTable::new(2, vec![vec![0, 1], vec![1, 0], vec![0, 1]]).is_err());
        assert!(ClassicalCipherTable::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn out_of_range_pair() {
        let t = ClassicalCipherTable::one_time_pad(1);
        assert!(matches!(classical_posterior(&t, 2, 0), Err(Error::InconsistentPair)));
    }
}
