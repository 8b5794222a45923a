//! Arithmetic in GF(2^n) and the structure-constant tensor of a field basis.
//!
//! Elements are bitmasks: bit `i` holds the coefficient of `x^i`. The modulus
//! mask includes the leading `x^n` term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Low-weight irreducible polynomials, indexed by degree.
const DEFAULT_MODULI: [u32; 17] = [
    0,
    0b11,                  // x + 1
    0b111,                 // x^2 + x + 1
    0b1011,                // x^3 + x + 1
    0b1_0011,              // x^4 + x + 1
    0b10_0101,             // x^5 + x^2 + 1
    0b100_0011,            // x^6 + x + 1
    0b1000_0011,           // x^7 + x + 1
    0b1_0001_1011,         // x^8 + x^4 + x^3 + x + 1
    0b10_0001_0001,        // x^9 + x^4 + 1
    0b100_0000_1001,       // x^10 + x^3 + 1
    0b1000_0000_0101,      // x^11 + x^2 + 1
    0b1_0000_0101_0011,    // x^12 + x^6 + x^4 + x + 1
    0b10_0000_0001_1011,   // x^13 + x^4 + x^3 + x + 1
    0b100_0000_0010_0001,  // x^14 + x^5 + 1
    0b1000_0000_0000_0011, // x^15 + x + 1
    0x1_002B,              // x^16 + x^5 + x^3 + x + 1
];

/// Degree of a nonzero polynomial given as a bitmask.
fn degree(p: u64) -> u32 {
    debug_assert!(p != 0);
    63 - p.leading_zeros()
}

/// Carry-less product of two polynomials over GF(2).
pub fn clmul(a: u32, b: u32) -> u64 {
    let (a, mut b) = (a as u64, b as u64);
    let mut acc = 0u64;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

/// Remainder of `a` modulo `m` over GF(2).
pub fn poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = degree(m);
    while a != 0 && degree(a) >= dm {
        a ^= m << (degree(a) - dm);
    }
    a
}

/// Smallest nontrivial factor of `p` found by trial division, if any.
fn find_factor(p: u32) -> Option<u32> {
    let d = degree(p as u64);
    (2u32..(1u32 << (d / 2 + 1)))
        .filter(|&q| degree(q as u64) <= d / 2)
        .find(|&q| poly_rem(p as u64, q as u64) == 0)
}

/// Incremental GF(2) row reduction used to express elements in a basis.
#[derive(Debug, Clone)]
struct Gf2Span {
    // pivots[b] = (vector whose highest set bit is b, combination of inputs)
    pivots: Vec<Option<(u32, u32)>>,
}

impl Gf2Span {
    fn new(bits: u32) -> Self {
        Self { pivots: vec![None; bits as usize] }
    }

    /// Inserts `v` tagged with `tag`; returns false if `v` is already in the span.
    fn insert(&mut self, mut v: u32, mut tag: u32) -> bool {
        for b in (0..self.pivots.len()).rev() {
            if v >> b & 1 == 0 {
                continue;
            }
            match self.pivots[b] {
                Some((pv, pt)) => {
                    v ^= pv;
                    tag ^= pt;
                }
                None => {
                    self.pivots[b] = Some((v, tag));
                    return true;
                }
            }
        }
        false
    }

    fn express(&self, mut v: u32) -> Option<u32> {
        let mut tag = 0;
        for b in (0..self.pivots.len()).rev() {
            if v >> b & 1 == 1 {
                let (pv, pt) = self.pivots[b]?;
                v ^= pv;
                tag ^= pt;
            }
        }
        (v == 0).then_some(tag)
    }
}

/// A finite field GF(2^n) together with a chosen vector-space basis.
#[derive(Debug, Clone)]
pub struct FieldContext {
    n: u32,
    modulus: u32,
    basis: Vec<u32>,
    span: Gf2Span,
}

/// JSON form of a [`FieldContext`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub n: u32,
    pub modulus_hex: String,
    pub basis_hex: Vec<String>,
}

impl FieldContext {
    /// Builds GF(2^n) with the default modulus (or `modulus` if given) and the
    /// polynomial basis `{1, x, ..., x^(n-1)}`.
    pub fn new(n: u32, modulus: Option<u32>) -> Result<Self> {
        let basis = (0..n.min(MAX_DEGREE)).map(|i| 1u32 << i).collect();
        Self::with_basis(n, modulus, basis)
    }

    /// Builds GF(2^n) with an explicit basis `{f_1, ..., f_n}`.
    pub fn with_basis(n: u32, modulus: Option<u32>, basis: Vec<u32>) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&n) {
            return Err(Error::DegreeOutOfRange(n));
        }
        let modulus = modulus.unwrap_or(DEFAULT_MODULI[n as usize]);
        if modulus == 0 || degree(modulus as u64) != n {
            return Err(Error::ModulusDegree { modulus, n });
        }
        if let Some(factor) = find_factor(modulus) {
            return Err(Error::ReducibleModulus { modulus, factor });
        }
        if basis.len() != n as usize || basis.iter().any(|&f| f >> n != 0) {
            return Err(Error::DependentBasis);
        }
        let mut span = Gf2Span::new(n);
        for (m, &f) in basis.iter().enumerate() {
            if !span.insert(f, 1 << m) {
                return Err(Error::DependentBasis);
            }
        }
        Ok(Self { n, modulus, basis, span })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    /// Number of field elements, `2^n`.
    pub fn order(&self) -> u64 {
        1u64 << self.n
    }

    pub fn is_element(&self, a: u32) -> bool {
        a >> self.n == 0
    }

    /// Field product `a * b`.
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!(self.is_element(a) && self.is_element(b));
        poly_rem(clmul(a, b), self.modulus as u64) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    /// `a^e` by square and multiply.
    pub fn pow(&self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }

    /// Coordinates of `a` in the field basis: bit `m` is the coefficient of `f_(m+1)`.
    pub fn coordinates(&self, a: u32) -> u32 {
        self.span
            .express(a)
            .expect("basis spans the field by construction")
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        let width = (self.n as usize).div_ceil(4);
        FieldDescriptor {
            n: self.n,
            modulus_hex: format!("{:x}", self.modulus),
            basis_hex: self
                .basis
                .iter()
                .map(|f| format!("{f:0width$x}"))
                .collect(),
        }
    }
}

/// Structure constants of the field basis: `f_i f_j = sum_m alpha[m][i][j] f_m`.
///
/// Indices are zero-based, so `alpha[m][i][j]` pairs with `f_(m+1)`, `f_(i+1)`, `f_(j+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaTensor {
    n: usize,
    entries: Vec<Vec<Vec<u8>>>,
}

impl AlphaTensor {
    pub fn new(ctx: &FieldContext) -> Self {
        let n = ctx.n() as usize;
        let mut entries = vec![vec![vec![0u8; n]; n]; n];
        let f = ctx.basis();
        for i in 0..n {
            for j in 0..n {
                let coords = ctx.coordinates(ctx.mul(f[i], f[j]));
                for (m, plane) in entries.iter_mut().enumerate() {
                    plane[i][j] = (coords >> m & 1) as u8;
                }
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, m: usize, i: usize, j: usize) -> u8 {
        self.entries[m][i][j]
    }

    pub fn matrix(&self, m: usize) -> &[Vec<u8>] {
        &self.entries[m]
    }

    /// Integer matrix `sum_m r_m alpha^(m)`, where `r_m` is bit `m` of `r`
    /// counted from the most significant of `n` bits.
    pub fn contract(&self, r: u32) -> Vec<Vec<u32>> {
        let n = self.n;
        let mut out = vec![vec![0u32; n]; n];
        for m in 0..n {
            if r >> (n - 1 - m) & 1 == 0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[i][j] += self.entries[m][i][j] as u32;
                }
            }
        }
        out
    }
}

/// Convenience wrapper for [`AlphaTensor::new`].
pub fn alpha_tensor(ctx: &FieldContext) -> AlphaTensor {
    AlphaTensor::new(ctx)
}
