//! Ciphers of the form `U_c X^k |p>`: a one-time pad followed by a basis
//! change selected by `t` further key bits.

mod classical;
pub mod container;

pub use classical::{classical_posterior, ClassicalCipherTable};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{
    density_from_ensemble, trace_distance, DensityOperator, Distribution, OrthonormalBasis,
    StateVector, STRUCTURAL_TOL,
};
use crate::mub::MubFamily;

/// Maximum off-peak mass accepted by [`decrypt`].
pub const DECRYPT_TOL: f64 = 1e-8;
/// Overlap tolerance used when checking that bases share no vector.
pub const OVERLAP_TOL: f64 = 1e-8;

/// Which construction a [`CipherSpec`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CipherKind {
    /// Computational and Hadamard bases.
    Hn,
    /// The `2^n` Wootters-Fields bases.
    Wn,
    /// Computational basis only: the classical one-time pad.
    OneTimePad,
    /// `v`-fold tensor power of another spec.
    Composed { base: &'static str, v: u32 },
    Custom,
}

impl CipherKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Hn => "hn",
            Self::Wn => "wn",
            Self::OneTimePad => "otp",
            Self::Composed { .. } => "composed",
            Self::Custom => "custom",
        }
    }
}

/// A cipher built from `2^t` non-overlapping orthonormal bases of `n` qubits.
#[derive(Debug, Clone)]
pub struct CipherSpec {
    n: u32,
    t: u32,
    kind: CipherKind,
    bases: Vec<OrthonormalBasis>,
}

/// Basis selector `c` (`t` bits) and pad `k` (`n` bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CipherKey {
    pub c: u32,
    pub k: u32,
}

impl CipherKey {
    pub fn new(c: u32, k: u32) -> Self {
        Self { c, k }
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

impl CipherSpec {
    /// Builds a spec from explicit bases, checking count, dimension and overlap.
    pub fn new(n: u32, bases: Vec<OrthonormalBasis>) -> Result<Self> {
        let count = bases.len();
        if count == 0 || !count.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "basis count {count} is not a power of two"
            )));
        }
        let dim = 1usize << n;
        for b in &bases {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.dim(),
                });
            }
        }
        let spec = Self {
            n,
            t: count.trailing_zeros(),
            kind: CipherKind::Custom,
            bases,
        };
        spec.check_non_overlapping()?;
        Ok(spec)
    }

    fn check_non_overlapping(&self) -> Result<()> {
        let count = self.bases.len();
        let pairs: Vec<(usize, usize)> = (0..count)
            .flat_map(|a| (a + 1..count).map(move |b| (a, b)))
            .collect();
        let clash = pairs.par_iter().find_any(|&&(a, b)| {
            let gram = self.bases[a].unitary().ad_mul(self.bases[b].unitary());
            gram.iter().any(|z| z.norm() > 1.0 - OVERLAP_TOL)
        });
        match clash {
            Some(&(a, b)) => Err(Error::OverlappingBases { a, b }),
            None => Ok(()),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// Key length `m = t + n`.
    pub fn m(&self) -> u32 {
        self.t + self.n
    }

    pub fn kind(&self) -> CipherKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn num_keys(&self) -> usize {
        1 << self.m()
    }

    pub fn num_plaintexts(&self) -> usize {
        1 << self.n
    }

    pub fn bases(&self) -> &[OrthonormalBasis] {
        &self.bases
    }

    /// Key with index `(c << n) | k`.
    pub fn key_from_index(&self, index: usize) -> CipherKey {
        CipherKey {
            c: (index >> self.n) as u32,
            k: (index & (self.dim() - 1)) as u32,
        }
    }

    pub fn key_index(&self, key: CipherKey) -> usize {
        ((key.c as usize) << self.n) | key.k as usize
    }

    pub fn keys(&self) -> impl Iterator<Item = CipherKey> + '_ {
        (0..self.num_keys()).map(|i| self.key_from_index(i))
    }

    pub fn validate_key(&self, key: CipherKey) -> Result<()> {
        check_bits(key.c, self.t)?;
        check_bits(key.k, self.n)
    }

    /// Cipher-states of plaintext `a` under every key, in key-index order.
    pub fn cipher_states(&self, a: u32) -> Result<Vec<StateVector>> {
        self.keys().map(|key| encrypt(self, key, a)).collect()
    }

    /// `v`-fold composition: bases are all `v`-fold tensor products, with
    /// the first factor most significant in both basis and state index.
    pub fn compose(&self, v: u32) -> Result<Self> {
        if v == 0 {
            return Err(Error::Parameter("fold count must be positive".into()));
        }
        let n = self.n * v;
        if n > 12 {
            return Err(Error::DimensionCap(n));
        }
        let mut bases = self.bases.clone();
        for _ in 1..v {
            bases = bases
                .iter()
                .flat_map(|outer| self.bases.iter().map(move |inner| outer.kron(inner)))
                .collect();
        }
        Ok(Self {
            n,
            t: self.t * v,
            kind: CipherKind::Composed {
                base: self.kind.name(),
                v,
            },
            bases,
        })
    }
}

/// The `(n+1, n)` cipher with bases `{I, H^(tensor n)}`.
pub fn hn_spec(n: u32) -> Result<CipherSpec> {
    if !(1..=12).contains(&n) {
        return Err(Error::Parameter(format!("H_n requires 1 <= n <= 12, got {n}")));
    }
    let dim = 1usize << n;
    Ok(CipherSpec {
        n,
        t: 1,
        kind: CipherKind::Hn,
        bases: vec![
            OrthonormalBasis::computational(dim),
            OrthonormalBasis::hadamard(dim),
        ],
    })
}

/// The `(2n, n)` cipher over the `2^n` Wootters-Fields bases of `family`.
pub fn wn_spec(family: &MubFamily) -> CipherSpec {
    // A certified family is pairwise unbiased, hence non-overlapping.
    CipherSpec {
        n: family.n(),
        t: family.n(),
        kind: CipherKind::Wn,
        bases: family.wf_bases().to_vec(),
    }
}

/// The classical one-time pad as a single-basis spec (`t = 0`).
pub fn one_time_pad_spec(n: u32) -> Result<CipherSpec> {
    if !(1..=12).contains(&n) {
        return Err(Error::Parameter(format!("one-time pad requires 1 <= n <= 12, got {n}")));
    }
    Ok(CipherSpec {
        n,
        t: 0,
        kind: CipherKind::OneTimePad,
        bases: vec![OrthonormalBasis::computational(1 << n)],
    })
}

/// `U_c X^k |plaintext>`.
pub fn encrypt(spec: &CipherSpec, key: CipherKey, plaintext: u32) -> Result<StateVector> {
    spec.validate_key(key)?;
    check_bits(plaintext, spec.n)?;
    Ok(spec.bases[key.c as usize].vector((plaintext ^ key.k) as usize))
}

/// Inverts [`encrypt`]: applies `U_c^dag`, reads the peak, removes the pad.
pub fn decrypt(spec: &CipherSpec, key: CipherKey, state: &StateVector) -> Result<u32> {
    spec.validate_key(key)?;
    if state.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: state.dim(),
        });
    }
    let coords = spec.bases[key.c as usize].unitary().ad_mul(state.amps());
    let (peak, peak_mass) = coords
        .iter()
        .map(|z| z.norm_sqr())
        .enumerate()
        .fold((0, -1.0), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
    let off_peak = (1.0 - peak_mass).max(0.0);
    if off_peak > DECRYPT_TOL {
        return Err(Error::NotACiphertext(off_peak));
    }
    Ok(peak as u32 ^ key.k)
}

fn max_pairwise_distance(ensembles: &[DensityOperator]) -> Result<f64> {
    let count = ensembles.len();
    let pairs: Vec<(usize, usize)> = (0..count)
        .flat_map(|a| (a + 1..count).map(move |b| (a, b)))
        .collect();
    let distances = pairs
        .par_iter()
        .map(|&(a, b)| trace_distance(&ensembles[a], &ensembles[b]))
        .collect::<Result<Vec<_>>>()?;
    Ok(distances.into_iter().fold(0.0, f64::max))
}

/// Ensemble of key `key` averaged over all plaintexts.
pub fn plaintext_averaged(spec: &CipherSpec, key: CipherKey) -> Result<DensityOperator> {
    let states = (0..spec.num_plaintexts() as u32)
        .map(|a| encrypt(spec, key, a))
        .collect::<Result<Vec<_>>>()?;
    density_from_ensemble(&states, &Distribution::uniform(states.len()))
}

/// Ensemble of plaintext `a` averaged over all keys.
pub fn key_averaged(spec: &CipherSpec, a: u32) -> Result<DensityOperator> {
    let states = spec.cipher_states(a)?;
    density_from_ensemble(&states, &Distribution::uniform(states.len()))
}

/// Largest trace distance between plaintext-averaged ensembles of two keys.
pub fn key_hiding_residual(spec: &CipherSpec) -> Result<f64> {
    let ensembles = spec
        .keys()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|key| plaintext_averaged(spec, key))
        .collect::<Result<Vec<_>>>()?;
    max_pairwise_distance(&ensembles)
}

/// Largest trace distance between key-averaged ensembles of two plaintexts.
pub fn data_hiding_residual(spec: &CipherSpec) -> Result<f64> {
    let ensembles = (0..spec.num_plaintexts() as u32)
        .into_par_iter()
        .map(|a| key_averaged(spec, a))
        .collect::<Result<Vec<_>>>()?;
    max_pairwise_distance(&ensembles)
}

/// Trace distances comparing the key-fixed and plaintext-fixed ensembles.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RhoSigma {
    /// `D(rho, sigma)`.
    pub rho_sigma: f64,
    /// `D(rho, I/2^n)`.
    pub rho_mixed: f64,
}

impl RhoSigma {
    pub fn within(&self, tol: f64) -> bool {
        self.rho_sigma <= tol && self.rho_mixed <= tol
    }
}

/// Compares `rho` (key 0, averaged over plaintexts) with `sigma`
/// (plaintext 0, averaged over keys) and with the complete mixture.
pub fn rho_sigma_check(spec: &CipherSpec) -> Result<RhoSigma> {
    let rho = plaintext_averaged(spec, spec.key_from_index(0))?;
    let sigma = key_averaged(spec, 0)?;
    Ok(RhoSigma {
        rho_sigma: trace_distance(&rho, &sigma)?,
        rho_mixed: trace_distance(&rho, &DensityOperator::maximally_mixed(spec.dim()))?,
    })
}

/// True when all three hiding checks pass at the structural tolerance.
pub fn hiding_properties_hold(spec: &CipherSpec) -> Result<bool> {
    Ok(key_hiding_residual(spec)? <= STRUCTURAL_TOL
        && data_hiding_residual(spec)? <= STRUCTURAL_TOL
        && rho_sigma_check(spec)?.within(STRUCTURAL_TOL))
}
