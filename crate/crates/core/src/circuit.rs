//! Gate-level `W_n` encryption circuit with a classical product register `A`
//! and a two-qubit phase accumulator `I`.
//!
//! Qubits `0..n` hold the data (qubit 0 is the most significant bit), qubit
//! `n` is the low bit of `I` and qubit `n + 1` its high bit. The circuit pads
//! the plaintext with `X^k`, applies `H^n`, then accumulates
//! `d = l^T (c.alpha) l mod 4` into `I`, applies `i^d`, and uncomputes `I` and `A`.
//! Key material is classical, so gates that depend on `k` or on entries of
//! `A = c.alpha` carry a classical condition instead of a quantum control.

use serde::Serialize;

use crate::cipher::DECRYPT_TOL;
use crate::error::{Error, Result};
use crate::gf2n::{AlphaTensor, FieldContext};
use crate::hilbert::{CVector, StateVector, C64, STRUCTURAL_TOL};

/// Largest `n` simulated with ancillas.
pub const MAX_CIRCUIT_N: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Op {
    X(usize),
    H(usize),
    Cnot { control: usize, target: usize },
    Toffoli { controls: [usize; 2], target: usize },
    /// `diag(1, i)`.
    S(usize),
    Z(usize),
    /// Classical: `A <- sum_m c_m alpha^(m)`.
    AlphaProduct,
    /// Classical: `A <- 0`.
    ResetA,
}

impl Op {
    pub fn is_classical(self) -> bool {
        matches!(self, Op::AlphaProduct | Op::ResetA)
    }
}

/// When a gate fires, given the classical key `(c, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    Always,
    /// Bit `i` (most significant first) of the pad `k`.
    KeyBit(usize),
    /// Bit `bit` of the integer entry `A[row][col]`.
    AEntryBit { row: usize, col: usize, bit: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Gate {
    pub op: Op,
    pub condition: Condition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    /// Elementary AND/add steps of the classical product stage.
    pub classical: usize,
    pub quantum: usize,
}

#[derive(Debug, Clone)]
pub struct Circuit {
    n: u32,
    alpha: AlphaTensor,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn qubits(&self) -> usize {
        self.n as usize + 2
    }

    pub fn gate_counts(&self) -> GateCounts {
        let n = self.n as usize;
        let mut counts = GateCounts { classical: 0, quantum: 0 };
        for g in &self.gates {
            match g.op {
                Op::AlphaProduct => counts.classical += n * n * n,
                Op::ResetA => counts.classical += n * n,
                _ => counts.quantum += 1,
            }
        }
        counts
    }

    /// Bit position of a qubit within the full state index `data * 4 + I`.
    fn position(&self, qubit: usize) -> usize {
        let n = self.n as usize;
        if qubit < n {
            2 + n - 1 - qubit
        } else {
            qubit - n
        }
    }
}

fn accumulate_phase(n: usize, low: usize, high: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    for i in 0..n {
        // +1 mod 4 when l_i is set and A[i][i] is odd
        let odd = Condition::AEntryBit { row: i, col: i, bit: 0 };
        gates.push(Gate {
            op: Op::Toffoli { controls: [i, low], target: high },
            condition: odd,
        });
        gates.push(Gate { op: Op::Cnot { control: i, target: low }, condition: odd });
        gates.push(Gate {
            op: Op::Cnot { control: i, target: high },
            condition: Condition::AEntryBit { row: i, col: i, bit: 1 },
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            gates.push(Gate {
                op: Op::Toffoli { controls: [i, j], target: high },
                condition: Condition::AEntryBit { row: i, col: j, bit: 0 },
            });
        }
    }
    gates
}

pub fn build_encrypt_circuit(ctx: &FieldContext) -> Result<Circuit> {
    let n = ctx.n();
    if n > MAX_CIRCUIT_N {
        return Err(Error::DimensionCap(n));
    }
    let nq = n as usize;
    let (low, high) = (nq, nq + 1);
    let always = |op| Gate { op, condition: Condition::Always };

    let mut gates: Vec<Gate> = (0..nq)
        .map(|i| Gate { op: Op::X(i), condition: Condition::KeyBit(i) })
        .collect();
    gates.extend((0..nq).map(|i| always(Op::H(i))));
    gates.push(always(Op::AlphaProduct));
    let accumulate = accumulate_phase(nq, low, high);
    gates.extend(accumulate.iter().copied());
    gates.push(always(Op::S(low)));
    gates.push(always(Op::Z(high)));
    gates.extend(accumulate.iter().rev().copied());
    gates.push(always(Op::ResetA));

    Ok(Circuit {
        n,
        alpha: AlphaTensor::new(ctx),
        gates,
    })
}

struct Machine<'a> {
    circ: &'a Circuit,
    c: u32,
    k: u32,
    a_register: Option<Vec<Vec<u32>>>,
    amps: Vec<C64>,
}

impl Machine<'_> {
    fn fires(&self, cond: Condition) -> Result<bool> {
        let n = self.circ.n;
        Ok(match cond {
            Condition::Always => true,
            Condition::KeyBit(i) => crate::mub::bit(self.k, n, i) == 1,
            Condition::AEntryBit { row, col, bit } => {
                let a = self
                    .a_register
                    .as_ref()
                    .ok_or_else(|| Error::InvalidState("A register read before it was computed".into()))?;
                a[row][col] >> bit & 1 == 1
            }
        })
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << self.circ.position(qubit)
    }

    fn permute(&mut self, controls: usize, target: usize) {
        for idx in 0..self.amps.len() {
            if idx & controls == controls && idx & target == 0 {
                self.amps.swap(idx, idx | target);
            }
        }
    }

    fn phase(&mut self, qubit: usize, factor: C64) {
        let m = self.mask(qubit);
        for (idx, z) in self.amps.iter_mut().enumerate() {
            if idx & m != 0 {
                *z *= factor;
            }
        }
    }

    fn apply(&mut self, gate: Gate, adjoint: bool) -> Result<()> {
        match gate.op {
            Op::AlphaProduct if adjoint => self.a_register = None,
            Op::ResetA if adjoint => self.a_register = Some(self.circ.alpha.contract(self.c)),
            Op::AlphaProduct => self.a_register = Some(self.circ.alpha.contract(self.c)),
            Op::ResetA => self.a_register = None,
            _ if !self.fires(gate.condition)? => {}
            Op::X(q) => self.permute(0, self.mask(q)),
            Op::Cnot { control, target } => self.permute(self.mask(control), self.mask(target)),
            Op::Toffoli { controls: [a, b], target } => {
                self.permute(self.mask(a) | self.mask(b), self.mask(target))
            }
            Op::S(q) => self.phase(q, C64::new(0.0, if adjoint { -1.0 } else { 1.0 })),
            Op::Z(q) => self.phase(q, C64::new(-1.0, 0.0)),
            Op::H(q) => {
                let m = self.mask(q);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for idx in 0..self.amps.len() {
                    if idx & m == 0 {
                        let (x, y) = (self.amps[idx], self.amps[idx | m]);
                        self.amps[idx] = (x + y) * s;
                        self.amps[idx | m] = (x - y) * s;
                    }
                }
            }
        }
        Ok(())
    }

    /// Data-register amplitudes with `I = 00`, and the mass left elsewhere.
    fn split(&self) -> (CVector, f64) {
        let data = CVector::from_iterator(
            self.amps.len() / 4,
            self.amps.iter().step_by(4).copied(),
        );
        let residual = (1.0 - data.norm_squared()).max(0.0);
        (data, residual)
    }
}

fn machine<'a>(circ: &'a Circuit, c: u32, k: u32, data: &CVector) -> Result<Machine<'a>> {
    let n = circ.n;
    for (value, name) in [(c, "c"), (k, "k")] {
        if value >> n != 0 {
            return Err(Error::Parameter(format!("{name} = {value} exceeds {n} bits")));
        }
    }
    let mut amps = vec![C64::new(0.0, 0.0); data.len() * 4];
    for (i, z) in data.iter().enumerate() {
        amps[i * 4] = *z;
    }
    Ok(Machine { circ, c, k, a_register: None, amps })
}

/// Output of one encryption run.
#[derive(Debug, Clone)]
pub struct EncryptRun {
    pub state: StateVector,
    /// Probability mass outside `I = 00` after uncomputation.
    pub ancilla_residual: f64,
}

/// Runs the circuit on `|a>|00>` and reports the data state and ancilla residual.
pub fn run_encrypt(circ: &Circuit, a: u32, c: u32, k: u32) -> Result<EncryptRun> {
    let dim = 1usize << circ.n;
    if a as usize >= dim {
        return Err(Error::BitLength { value: a as u64, bits: circ.n });
    }
    let mut m = machine(circ, c, k, &StateVector::basis_state(dim, a as usize).into_amps())?;
    for &g in &circ.gates {
        m.apply(g, false)?;
    }
    if m.a_register.is_some() {
        return Err(Error::InvalidState("A register not reset".into()));
    }
    let (data, residual) = m.split();
    Ok(EncryptRun {
        state: StateVector::normalized(data)?,
        ancilla_residual: residual,
    })
}

/// Encrypts `a` under `(c, k)`; fails if the ancillas are not returned to `|00>`.
pub fn simulate_encrypt(circ: &Circuit, a: u32, c: u32, k: u32) -> Result<StateVector> {
    let run = run_encrypt(circ, a, c, k)?;
    if run.ancilla_residual > STRUCTURAL_TOL {
        return Err(Error::EntangledAncilla(run.ancilla_residual));
    }
    Ok(run.state)
}

/// Runs the adjoint circuit in reverse order and reads the plaintext.
pub fn simulate_decrypt(circ: &Circuit, state: &StateVector, c: u32, k: u32) -> Result<u32> {
    if state.dim() != 1 << circ.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << circ.n,
            got: state.dim(),
        });
    }
    let mut m = machine(circ, c, k, state.amps())?;
    for &g in circ.gates.iter().rev() {
        m.apply(g, true)?;
    }
    let (data, residual) = m.split();
    if residual > STRUCTURAL_TOL {
        return Err(Error::EntangledAncilla(residual));
    }
    let (peak, mass) = data
        .iter()
        .map(|z| z.norm_sqr())
        .enumerate()
        .fold((0, -1.0), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
    let off_peak = (1.0 - mass).max(0.0);
    if off_peak > DECRYPT_TOL {
        return Err(Error::NotACiphertext(off_peak));
    }
    Ok(peak as u32)
}

/// Exhaustive comparison against the direct construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircuitVerification {
    pub n: u32,
    pub gate_counts: GateCounts,
    pub max_infidelity: f64,
    pub ancilla_residual: f64,
    pub roundtrip_ok: bool,
}

pub fn verify_circuit(ctx: &FieldContext) -> Result<CircuitVerification> {
    let circ = build_encrypt_circuit(ctx)?;
    let n = circ.n;
    let mut max_infidelity: f64 = 0.0;
    let mut ancilla_residual: f64 = 0.0;
    let mut roundtrip_ok = true;
    for c in 0..1u32 << n {
        for k in 0..1u32 << n {
            for a in 0..1u32 << n {
                let run = run_encrypt(&circ, a, c, k)?;
                let expected = crate::mub::wf_vector(&circ.alpha, c, a ^ k)?;
                max_infidelity = max_infidelity.max(1.0 - run.state.fidelity(&expected));
                ancilla_residual = ancilla_residual.max(run.ancilla_residual);
                roundtrip_ok &= simulate_decrypt(&circ, &run.state, c, k).ok() == Some(a);
            }
        }
    }
    Ok(CircuitVerification {
        n,
        gate_counts: circ.gate_counts(),
        max_infidelity,
        ancilla_residual,
        roundtrip_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{encrypt, wn_spec};
    use crate::mub::MubFamily;

    fn ctx(n: u32) -> FieldContext {
        FieldContext::new(n, None).unwrap()
    }

    #[test]
    fn matches_direct_construction() {
        for n in 1..=3 {
            let v = verify_circuit(&ctx(n)).unwrap();
            assert!(v.max_infidelity < 1e-10, "{v:?}");
            assert!(v.ancilla_residual < 1e-10);
            assert!(v.roundtrip_ok);
        }
    }

    #[test]
    fn agrees_with_cipher_encrypt() {
        let family = MubFamily::with_default_field(2).unwrap();
        let spec = wn_spec(&family);
        let circ = build_encrypt_circuit(family.field()).unwrap();
        for key in spec.keys() {
            for a in 0..4 {
                let direct = encrypt(&spec, key, a).unwrap();
                let out = simulate_encrypt(&circ, a, key.c, key.k).unwrap();
                assert!(out.fidelity(&direct) > 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn zero_c_is_plain_hadamard() {
        let circ = build_encrypt_circuit(&ctx(2)).unwrap();
        let had = crate::hilbert::OrthonormalBasis::hadamard(4);
        for a in 0..4 {
            for k in 0..4 {
                let out = simulate_encrypt(&circ, a, 0, k).unwrap();
                assert!((out.fidelity(&had.vector((a ^ k) as usize)) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_key_is_detected() {
        let circ = build_encrypt_circuit(&ctx(2)).unwrap();
        let state = simulate_encrypt(&circ, 1, 2, 3).unwrap();
        assert!(matches!(simulate_decrypt(&circ, &state, 1, 3), Err(Error::NotACiphertext(_))));
    }

    #[test]
    fn gate_counts_grow_quadratically() {
        let counts: Vec<GateCounts> = (1..=3)
            .map(|n| build_encrypt_circuit(&ctx(n)).unwrap().gate_counts())
            .collect();
        for (n, c) in (1..=3).zip(&counts) {
            assert_eq!(c.quantum, n * n + 7 * n + 2);
            assert_eq!(c.classical, n * n * n + n * n);
        }
        assert!(counts.windows(2).all(|w| w[1].quantum > w[0].quantum));
    }

    #[test]
    fn alpha_product_stage_matches_field_contraction() {
        let c = ctx(3);
        let circ = build_encrypt_circuit(&c).unwrap();
        let alpha = AlphaTensor::new(&c);
        for r in 0..8 {
            let mut m = machine(&circ, r, 0, &CVector::zeros(8)).unwrap();
            m.apply(Gate { op: Op::AlphaProduct, condition: Condition::Always }, false).unwrap();
            let a = m.a_register.unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let sum: u32 = (0..3)
                        .filter(|mm| r >> (2 - mm) & 1 == 1)
                        .map(|mm| alpha.get(mm, i, j) as u32)
                        .sum();
                    assert_eq!(a[i][j], sum);
                }
            }
        }
    }

    #[test]
    fn rejects_large_n() {
        assert!(build_encrypt_circuit(&ctx(4)).is_err());
    }
}
