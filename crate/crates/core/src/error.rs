use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("extension degree {0} out of range (1..=16)")]
    DegreeOutOfRange(u32),
    #[error("modulus {modulus:#x} does not have degree {n}")]
    ModulusDegree { modulus: u32, n: u32 },
    #[error("modulus {modulus:#x} is reducible: divisible by {factor:#x}")]
    ReducibleModulus { modulus: u32, factor: u32 },
    #[error("field basis is not linearly independent over GF(2)")]
    DependentBasis,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bit string {value:#x} does not fit in {bits} bits")]
    BitLength { value: u64, bits: u32 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("unbiasedness certification failed for bases ({a}, {b}): deviation {deviation:e}")]
    CertificationFailed { a: usize, b: usize, deviation: f64 },
    #[error("bases {a} and {b} share a vector (overlap)")]
    OverlappingBases { a: usize, b: usize },
    #[error("not a valid ciphertext under this key (off-peak mass {0:e})")]
    NotACiphertext(f64),
    #[error("POVM completion is not positive semidefinite (min eigenvalue {0:e})")]
    CompletionNotPsd(f64),
    #[error("plaintext/ciphertext pair is inconsistent with every key")]
    InconsistentPair,
    #[error("classical table is not a valid perfectly secret cipher: {0}")]
    InvalidTable(String),
    #[error("undefined input: {0}")]
    Undefined(String),
    #[error("composition dimension 2^{0} exceeds the cap 2^12")]
    DimensionCap(u32),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("keystream exhausted: requested bits [{offset}, {end}) but stream length is {len}")]
    KeystreamExhausted { offset: u64, end: u64, len: u64 },
    #[error("infeasible generator: e = {e} exceeds k / log2 N = {bound:.3}")]
    InfeasibleGenerator { e: u32, bound: f64 },
    #[error("malformed container: {0}")]
    Container(String),
    #[error("ancilla registers remain entangled (residual {0:e})")]
    EntangledAncilla(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
