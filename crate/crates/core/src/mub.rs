//! Wootters-Fields mutually unbiased bases for `n` qubits.
//!
//! Bit strings map to computational indices with the first bit most
//! significant. The `s`-th vector of the `r`-th basis has amplitudes
//! `2^(-n/2) i^(l^T (r.alpha) l) (-1)^(s.l)`, with the exponent of `i` taken
//! over the integers and reduced mod 4.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2n::{AlphaTensor, FieldContext};
use crate::hilbert::{CMatrix, CVector, OrthonormalBasis, StateVector, C64, STRUCTURAL_TOL};

/// Largest `n` for which a full family is built.
pub const MAX_FAMILY_N: u32 = 6;
/// Largest `n` certified exhaustively at construction.
pub const EAGER_CERT_N: u32 = 3;
/// Vector pairs drawn when certifying by sampling.
pub const SAMPLED_PAIRS: usize = 1024;

const CERT_SEED: u64 = 0x6d75_625f_6365_7274;

/// Bit `i` (zero-based, most significant first) of an `n`-bit string.
#[inline]
pub fn bit(x: u32, n: u32, i: usize) -> u32 {
    x >> (n as usize - 1 - i) & 1
}

/// `l^T m l mod 4` for an `n`-bit string `l` and an integer matrix `m`.
pub fn phase_exponent(m: &[Vec<u32>], n: u32, l: u32) -> u32 {
    let mut acc = 0u32;
    for (i, row) in m.iter().enumerate() {
        if bit(l, n, i) == 0 {
            continue;
        }
        for (j, &entry) in row.iter().enumerate() {
            acc = acc.wrapping_add(entry * bit(l, n, j));
        }
    }
    acc % 4
}

/// `i^q` for `q` in `0..4`, exact.
pub fn i_pow(q: u32) -> C64 {
    match q % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn check_bits(value: u32, bits: u32) -> Result<()> {
    if bits < 32 && value >> bits != 0 {
        return Err(Error::BitLength {
            value: value as u64,
            bits,
        });
    }
    Ok(())
}

fn amplitudes(alpha: &AlphaTensor, contracted: &[Vec<u32>], s: u32) -> CVector {
    let n = alpha.n() as u32;
    let dim = 1usize << n;
    let scale = (dim as f64).sqrt().recip();
    CVector::from_fn(dim, |l, _| {
        let l = l as u32;
        let q = phase_exponent(contracted, n, l) + 2 * ((s & l).count_ones() % 2);
        i_pow(q) * scale
    })
}

/// The `s`-th vector of the `r`-th Wootters-Fields basis.
pub fn wf_vector(alpha: &AlphaTensor, r: u32, s: u32) -> Result<StateVector> {
    let n = alpha.n() as u32;
    check_bits(r, n)?;
    check_bits(s, n)?;
    Ok(StateVector::from_unit(amplitudes(alpha, &alpha.contract(r), s)))
}

/// The `r`-th Wootters-Fields basis; column `s` is `wf_vector(r, s)`.
pub fn wf_basis(alpha: &AlphaTensor, r: u32) -> Result<OrthonormalBasis> {
    let n = alpha.n() as u32;
    check_bits(r, n)?;
    let contracted = alpha.contract(r);
    let columns: Vec<CVector> = (0..1u32 << n)
        .map(|s| amplitudes(alpha, &contracted, s))
        .collect();
    OrthonormalBasis::from_matrix(CMatrix::from_columns(&columns))
}

/// Largest `||<u|v>|^2 - 1/d|` over `u` in `b1`, `v` in `b2`.
pub fn check_unbiased(b1: &OrthonormalBasis, b2: &OrthonormalBasis) -> Result<f64> {
    if b1.dim() != b2.dim() {
        return Err(Error::DimensionMismatch {
            expected: b1.dim(),
            got: b2.dim(),
        });
    }
    let target = 1.0 / b1.dim() as f64;
    let gram = b1.unitary().ad_mul(b2.unitary());
    Ok(gram
        .iter()
        .map(|z| (z.norm_sqr() - target).abs())
        .fold(0.0, f64::max))
}

/// Outcome of an unbiasedness certification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub n: u32,
    /// Basis pairs checked in full, or vector pairs when sampled.
    pub pairs_checked: usize,
    pub max_deviation: f64,
    pub exhaustive: bool,
}

/// `2^n` Wootters-Fields bases followed by the computational basis.
#[derive(Debug, Clone)]
pub struct MubFamily {
    n: u32,
    ctx: FieldContext,
    alpha: AlphaTensor,
    bases: Vec<OrthonormalBasis>,
    certificate: Certificate,
}

impl MubFamily {
    /// Builds and certifies the family: exhaustively for `n <= 3`,
    /// by sampling vector pairs above that.
    pub fn new(ctx: FieldContext) -> Result<Self> {
        let n = ctx.n();
        if n > MAX_FAMILY_N {
            return Err(Error::Parameter(format!(
                "MUB family limited to n <= {MAX_FAMILY_N}, got {n}"
            )));
        }
        let alpha = AlphaTensor::new(&ctx);
        let mut bases = (0..1u32 << n)
            .into_par_iter()
            .map(|r| wf_basis(&alpha, r))
            .collect::<Result<Vec<_>>>()?;
        bases.push(OrthonormalBasis::computational(1 << n));
        let mut family = Self {
            n,
            ctx,
            alpha,
            bases,
            certificate: Certificate {
                n,
                pairs_checked: 0,
                max_deviation: f64::NAN,
                exhaustive: false,
            },
        };
        family.certificate = if n <= EAGER_CERT_N {
            family.certify_full()?
        } else {
            family.certify_sampled(SAMPLED_PAIRS, CERT_SEED)?
        };
        Ok(family)
    }

    /// Family over the default field of degree `n`.
    pub fn with_default_field(n: u32) -> Result<Self> {
        Self::new(FieldContext::new(n, None)?)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn field(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn alpha(&self) -> &AlphaTensor {
        &self.alpha
    }

    /// All `2^n + 1` bases; the computational basis is last.
    pub fn bases(&self) -> &[OrthonormalBasis] {
        &self.bases
    }

    /// The `2^n` Wootters-Fields bases indexed by `r`.
    pub fn wf_bases(&self) -> &[OrthonormalBasis] {
        &self.bases[..self.bases.len() - 1]
    }

    /// Index of the computational basis.
    pub fn computational_index(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    fn pair_indices(&self) -> Vec<(usize, usize)> {
        let count = self.bases.len();
        (0..count)
            .flat_map(|a| (a + 1..count).map(move |b| (a, b)))
            .collect()
    }

    /// Checks every pair of distinct bases.
    pub fn certify_full(&self) -> Result<Certificate> {
        let pairs = self.pair_indices();
        let results = pairs
            .par_iter()
            .map(|&(a, b)| check_unbiased(&self.bases[a], &self.bases[b]).map(|d| (a, b, d)))
            .collect::<Result<Vec<_>>>()?;
        let (a, b, max_deviation) = results
            .into_iter()
            .fold((0, 0, 0.0f64), |acc, x| if x.2 > acc.2 { x } else { acc });
        if max_deviation > STRUCTURAL_TOL {
            return Err(Error::CertificationFailed {
                a,
                b,
                deviation: max_deviation,
            });
        }
        Ok(Certificate {
            n: self.n,
            pairs_checked: pairs.len(),
            max_deviation,
            exhaustive: true,
        })
    }

    /// Checks `samples` random vector pairs drawn from distinct bases.
    pub fn certify_sampled(&self, samples: usize, seed: u64) -> Result<Certificate> {
        let pairs = self.pair_indices();
        let dim = 1usize << self.n;
        let target = 1.0 / dim as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = (0, 0, 0.0f64);
        for _ in 0..samples {
            let &(a, b) = pairs.choose(&mut rng).expect("at least three bases");
            let i = rng.random_range(0..dim);
            let j = rng.random_range(0..dim);
            let overlap = self.bases[a].vector(i).fidelity(&self.bases[b].vector(j));
            let dev = (overlap - target).abs();
            if dev > worst.2 {
                worst = (a, b, dev);
            }
        }
        if worst.2 > STRUCTURAL_TOL {
            return Err(Error::CertificationFailed {
                a: worst.0,
                b: worst.1,
                deviation: worst.2,
            });
        }
        Ok(Certificate {
            n: self.n,
            pairs_checked: samples,
            max_deviation: worst.2,
            exhaustive: false,
        })
    }
}

/// Convenience wrapper for [`MubFamily::new`].
pub fn mub_family(ctx: FieldContext) -> Result<MubFamily> {
    MubFamily::new(ctx)
}
