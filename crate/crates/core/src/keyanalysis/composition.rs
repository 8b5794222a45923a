//! Partition of a `v`-fold composed cipher's bases into mutually unbiased parts.
//!
//! With `T` input bases, part `(i_2, .., i_v)` holds the `T` product bases
//! `B_j ⊗ B_(j+i_2) ⊗ .. ⊗ B_(j+i_v)` for `j` in `0..T`, offsets taken mod `T`.

use serde::Serialize;

use super::bounds::delta;
use super::mes::{mes_search, MesConfig, MesResult};
use crate::cipher::{wn_spec, CipherSpec};
use crate::error::{Error, Result};
use crate::hilbert::{OrthonormalBasis, STRUCTURAL_TOL};
use crate::mub::{check_unbiased, MubFamily};

#[derive(Debug, Clone)]
pub struct CompositionPartition {
    pub v: u32,
    /// Offset vector of each part, in lexicographic order.
    pub offsets: Vec<Vec<usize>>,
    /// Indices into the composed cipher's basis list.
    pub indices: Vec<Vec<usize>>,
    pub parts: Vec<Vec<OrthonormalBasis>>,
    total: usize,
}

impl CompositionPartition {
    pub fn is_disjoint(&self) -> bool {
        let mut seen = vec![false; self.total];
        self.indices.iter().flatten().all(|&i| !std::mem::replace(&mut seen[i], true))
    }

    pub fn is_covering(&self) -> bool {
        let mut seen = vec![false; self.total];
        for &i in self.indices.iter().flatten() {
            seen[i] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// Largest unbiasedness deviation between two bases of the same part.
    pub fn max_unbiased_deviation(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for part in &self.parts {
            for (a, b1) in part.iter().enumerate() {
                for b2 in &part[a + 1..] {
                    worst = worst.max(check_unbiased(b1, b2)?);
                }
            }
        }
        Ok(worst)
    }

    pub fn verify(&self, tol: f64) -> Result<bool> {
        Ok(self.is_disjoint() && self.is_covering() && self.max_unbiased_deviation()? <= tol)
    }
}

fn offset_vectors(width: usize, base: usize) -> Vec<Vec<usize>> {
    let count = base.pow(width as u32);
    (0..count)
        .map(|mut x| {
            let mut digits = vec![0; width];
            for d in digits.iter_mut().rev() {
                *d = x % base;
                x /= base;
            }
            digits
        })
        .collect()
}

pub fn compose_partition(spec: &CipherSpec, v: u32) -> Result<CompositionPartition> {
    let composed = spec.compose(v)?;
    let count = spec.bases().len();
    let offsets = offset_vectors(v as usize - 1, count);
    let indices: Vec<Vec<usize>> = offsets
        .iter()
        .map(|off| {
            (0..count)
                .map(|j| {
                    off.iter()
                        .fold(j, |acc, &i| acc * count + (j + i) % count)
                })
                .collect()
        })
        .collect();
    let parts = indices
        .iter()
        .map(|idx| idx.iter().map(|&i| composed.bases()[i].clone()).collect())
        .collect();
    Ok(CompositionPartition {
        v,
        offsets,
        indices,
        parts,
        total: composed.bases().len(),
    })
}

/// Minimum over parts of the searched entropy sum.
#[derive(Debug, Clone)]
pub struct PartMinimum {
    pub value: f64,
    /// Lowest-index part attaining `value`.
    pub part: usize,
    pub per_part: Vec<MesResult>,
}

pub fn minimal_part_entropy(partition: &CompositionPartition, cfg: &MesConfig) -> Result<PartMinimum> {
    let per_part = partition
        .parts
        .iter()
        .map(|p| mes_search(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (part, value) = per_part
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, r)| {
            if r.value < bv {
                (i, r.value)
            } else {
                (bi, bv)
            }
        });
    Ok(PartMinimum { value, part, per_part })
}

/// `v t + m_v / 2^t` for the `v`-fold composition of `spec`.
pub fn composed_key_uncertainty_bound(spec: &CipherSpec, v: u32, m_v: f64) -> f64 {
    (v * spec.t()) as f64 + m_v / (1u64 << spec.t()) as f64
}

/// How a searched value was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub method: &'static str,
    pub config: MesConfig,
    pub starts_per_part: usize,
    pub converged: bool,
}

/// Gap estimate for `2^n` mutually unbiased bases in dimension `2^(vn)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureProbe {
    pub n: u32,
    pub v: u32,
    /// Searched minimal part entropy (upper bound on the true minimum).
    pub m_v: f64,
    /// `(2^n - 1) v n - m_v`; a lower bound on the true gap.
    pub delta: f64,
    /// `2^n - v n`.
    pub conjectured_bound: f64,
    pub nonnegative: bool,
    pub within_bound: bool,
    pub provenance: Provenance,
}

pub const PROBE_MAX_QUBITS: u32 = 3;

/// Probes the gap for the `v`-fold composition of `W_n`, requiring `v n <= 3`.
pub fn conjecture_probe(n: u32, v: u32, cfg: &MesConfig) -> Result<ConjectureProbe> {
    if v == 0 || n == 0 || v * n > PROBE_MAX_QUBITS {
        return Err(Error::Parameter(format!(
            "probe needs 1 <= v n <= {PROBE_MAX_QUBITS}, got n={n} v={v}"
        )));
    }
    let spec = wn_spec(&MubFamily::with_default_field(n)?);
    let partition = compose_partition(&spec, v)?;
    let min = minimal_part_entropy(&partition, cfg)?;
    let gap = delta(v * n, n, min.value);
    let bound = (1u64 << n) as f64 - (v * n) as f64;
    let best = &min.per_part[min.part];
    Ok(ConjectureProbe {
        n,
        v,
        m_v: min.value,
        delta: gap,
        conjectured_bound: bound,
        nonnegative: gap >= -1e-4,
        within_bound: gap <= bound + 1e-3,
        provenance: Provenance {
            method: "multi-start projected gradient on the unit sphere",
            config: *cfg,
            starts_per_part: best.restarts,
            converged: best.converged,
        },
    })
}

/// Tolerance used when verifying partitions.
pub const PARTITION_TOL: f64 = STRUCTURAL_TOL;
