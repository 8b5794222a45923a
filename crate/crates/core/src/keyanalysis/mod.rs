//! Key uncertainty of a cipher given a known plaintext and a measurement on
//! the cipher-state.
//!
//! The adversary's view is a uniformly chosen state from a labelled set; a
//! POVM outcome `u` induces the posterior `Pr(K = k | U = u)`, from which
//! Shannon and min-entropy key uncertainties follow.

mod bounds;
mod composition;
mod mes;

pub use bounds::{
    delta, larsen_sum, mu_bound, sanchez_bound, shannon_key_uncertainty_bound,
    wn_full_uncertainty, WnUncertainty,
};
pub use composition::{
    compose_partition, composed_key_uncertainty_bound, conjecture_probe, minimal_part_entropy,
    CompositionPartition, ConjectureProbe, PartMinimum, Provenance, PARTITION_TOL,
    PROBE_MAX_QUBITS,
};
pub use mes::{entropy_sum, mes_search, MesConfig, MesResult};

use nalgebra::DMatrix;

use crate::cipher::CipherSpec;
use crate::error::{Error, Result};
use crate::hilbert::{
    entropy_term, hermitian_eigenvalues, CMatrix, Povm, PovmElement, StateVector, C64,
    STRUCTURAL_TOL,
};

/// A set of states, one per key, chosen uniformly.
#[derive(Debug, Clone)]
pub struct StateSet {
    states: Vec<StateVector>,
}

impl StateSet {
    pub fn new(states: Vec<StateVector>) -> Result<Self> {
        let dim = states
            .first()
            .map(StateVector::dim)
            .ok_or_else(|| Error::InvalidState("empty state set".into()))?;
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        Ok(Self { states })
    }

    /// Cipher-states of plaintext `a`, labelled by key index.
    pub fn from_cipher(spec: &CipherSpec, a: u32) -> Result<Self> {
        Self::new(spec.cipher_states(a)?)
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    fn matrix(&self) -> CMatrix {
        let cols: Vec<_> = self.states.iter().map(|s| s.amps().clone()).collect();
        CMatrix::from_columns(&cols)
    }
}

/// `likelihoods[(u, k)] = Pr(U = u | K = k)`.
pub fn outcome_likelihoods(povm: &Povm, set: &StateSet) -> Result<DMatrix<f64>> {
    if povm.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: povm.dim(),
        });
    }
    let states = set.matrix();
    let mut out = DMatrix::<f64>::zeros(povm.len(), set.len());

    let rank1: Vec<(usize, f64, &_)> = povm
        .elements()
        .iter()
        .enumerate()
        .filter_map(|(u, e)| match e {
            PovmElement::Rank1 { weight, vector } => Some((u, *weight, vector)),
            PovmElement::Dense(_) => None,
        })
        .collect();
    if !rank1.is_empty() {
        let cols: Vec<_> = rank1.iter().map(|(_, _, v)| (*v).clone()).collect();
        let overlaps = CMatrix::from_columns(&cols).ad_mul(&states);
        for (row, &(u, weight, _)) in rank1.iter().enumerate() {
            for k in 0..set.len() {
                out[(u, k)] = weight * overlaps[(row, k)].norm_sqr();
            }
        }
    }
    for (u, e) in povm.elements().iter().enumerate() {
        if let PovmElement::Dense(m) = e {
            let applied = m * &states;
            for k in 0..set.len() {
                out[(u, k)] = states.column(k).dotc(&applied.column(k)).re.max(0.0);
            }
        }
    }
    Ok(out)
}

/// Outcome probability and key posterior for one POVM outcome.
#[derive(Debug, Clone)]
pub struct OutcomePosterior {
    pub outcome: usize,
    pub probability: f64,
    pub posterior: Vec<f64>,
}

/// Posteriors for every outcome with nonzero probability, uniform key prior.
pub fn key_posteriors(povm: &Povm, set: &StateSet) -> Result<Vec<OutcomePosterior>> {
    let lik = outcome_likelihoods(povm, set)?;
    let prior = 1.0 / set.len() as f64;
    Ok((0..povm.len())
        .filter_map(|u| {
            let row = lik.row(u);
            let total: f64 = row.iter().sum();
            (total > 1e-300).then(|| OutcomePosterior {
                outcome: u,
                probability: total * prior,
                posterior: row.iter().map(|l| l / total).collect(),
            })
        })
        .collect())
}

/// Shannon key uncertainty `H(K|U)` of `set` under `povm`.
pub fn conditional_key_entropy(povm: &Povm, set: &StateSet) -> Result<f64> {
    Ok(key_posteriors(povm, set)?
        .iter()
        .map(|o| o.probability * o.posterior.iter().map(|&p| entropy_term(p)).sum::<f64>())
        .sum())
}

/// Min-entropy key uncertainty `H_inf(K|U)` of `set` under `povm`.
pub fn conditional_key_min_entropy(povm: &Povm, set: &StateSet) -> Result<f64> {
    Ok(key_posteriors(povm, set)?
        .iter()
        .map(|o| {
            let max = o.posterior.iter().cloned().fold(0.0, f64::max);
            -o.probability * max.log2()
        })
        .sum())
}

/// `H(K|U)` for cipher-states of plaintext `a` measured with `povm`.
pub fn povm_key_entropy(spec: &CipherSpec, a: u32, povm: &Povm) -> Result<f64> {
    conditional_key_entropy(povm, &StateSet::from_cipher(spec, a)?)
}

/// `H_inf(K|U)` for cipher-states of plaintext `a` measured with `povm`.
pub fn min_entropy_key_uncertainty(spec: &CipherSpec, a: u32, povm: &Povm) -> Result<f64> {
    conditional_key_min_entropy(povm, &StateSet::from_cipher(spec, a)?)
}

/// Entropy of the key posterior after observing the rank-one outcome `u`.
pub fn h_u_sk(u: &StateVector, set: &StateSet) -> Result<f64> {
    if u.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: u.dim(),
        });
    }
    let weights: Vec<f64> = set.states.iter().map(|c| u.fidelity(c)).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 1e-300) {
        return Err(Error::Undefined(
            "measurement vector is orthogonal to every state".into(),
        ));
    }
    Ok(weights.iter().map(|w| entropy_term(w / total)).sum())
}

/// The key-identifying measurement `M_k = (N/M) E_k|a><a|E_k^dag`, plus the
/// completion `I - sum M_k` when it is nonzero. Outcome `k` names key index `k`.
pub fn key_guess_povm(spec: &CipherSpec, a: u32) -> Result<Povm> {
    let weight = spec.num_plaintexts() as f64 / spec.num_keys() as f64;
    let states = spec.cipher_states(a)?;
    let mut elements: Vec<PovmElement> = states
        .iter()
        .map(|s| PovmElement::rank1(weight, s))
        .collect();
    let mut labels: Vec<String> = (0..states.len()).map(|k| format!("key:{k}")).collect();

    let partial = Povm::new(elements.clone(), labels.clone())?;
    let completion = CMatrix::identity(spec.dim(), spec.dim()) - partial.sum();
    let eig = completion.clone().symmetric_eigen();
    let min = hermitian_eigenvalues(&completion).first().cloned().unwrap_or(0.0);
    if min < -STRUCTURAL_TOL {
        return Err(Error::CompletionNotPsd(min));
    }
    let clamped = eig.eigenvalues.map(|e| C64::from(e.max(0.0)));
    if clamped.iter().any(|e| e.re > STRUCTURAL_TOL) {
        let v = &eig.eigenvectors;
        let dense = v * CMatrix::from_diagonal(&clamped) * v.adjoint();
        elements.push(PovmElement::Dense(dense));
        labels.push("completion".into());
    }
    Povm::new(elements, labels)
}

/// Average probability that the outcome of `povm` names the key used.
/// Outcome `k` is read as a guess for key index `k`.
pub fn key_guess_success(spec: &CipherSpec, a: u32, povm: &Povm) -> Result<f64> {
    let set = StateSet::from_cipher(spec, a)?;
    let lik = outcome_likelihoods(povm, &set)?;
    let keys = spec.num_keys().min(povm.len());
    Ok((0..keys).map(|k| lik[(k, k)]).sum::<f64>() / spec.num_keys() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{hn_spec, one_time_pad_spec, wn_spec};
    use crate::hilbert::{povm_validate, OrthonormalBasis};
    use crate::mub::MubFamily;

    fn wn(n: u32) -> CipherSpec {
        wn_spec(&MubFamily::with_default_field(n).unwrap())
    }

    #[test]
    fn key_guess_success_matches_two_to_n_minus_m() {
        let h2 = hn_spec(2).unwrap();
        let povm = key_guess_povm(&h2, 0).unwrap();
        assert!(povm_validate(&povm).within(1e-10));
        assert!((key_guess_success(&h2, 0, &povm).unwrap() - 0.5).abs() < 1e-10);

        let w2 = wn(2);
        let povm = key_guess_povm(&w2, 3).unwrap();
        assert!((key_guess_success(&w2, 3, &povm).unwrap() - 0.25).abs() < 1e-10);

        let otp = one_time_pad_spec(2).unwrap();
        let povm = key_guess_povm(&otp, 1).unwrap();
        assert_eq!(povm.len(), 4, "completion vanishes for the pad");
        assert!((key_guess_success(&otp, 1, &povm).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn key_guess_min_entropy() {
        let h2 = hn_spec(2).unwrap();
        let h = min_entropy_key_uncertainty(&h2, 0, &key_guess_povm(&h2, 0).unwrap()).unwrap();
        assert!(h <= 1.0 + 1e-9);
        let w2 = wn(2);
        let h = min_entropy_key_uncertainty(&w2, 0, &key_guess_povm(&w2, 0).unwrap()).unwrap();
        assert!(h <= 2.0 + 1e-9);
        let otp = one_time_pad_spec(3).unwrap();
        let h = min_entropy_key_uncertainty(&otp, 0, &key_guess_povm(&otp, 0).unwrap()).unwrap();
        assert!(h.abs() < 1e-12);
    }

    #[test]
    fn h_u_sk_examples() {
        let comp: Vec<_> = OrthonormalBasis::computational(4).vectors().collect();
        let set = StateSet::new(comp).unwrap();
        assert_eq!(h_u_sk(&StateVector::basis_state(4, 0), &set).unwrap(), 0.0);

        let h1 = StateSet::from_cipher(&hn_spec(1).unwrap(), 0).unwrap();
        let u = StateVector::basis_state(2, 0);
        assert!((h_u_sk(&u, &h1).unwrap() - 1.5).abs() < 1e-12);
        assert!((h_u_sk(&u.with_phase(1.234), &h1).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn h_u_sk_orthogonal_is_undefined() {
        let set = StateSet::new(vec![StateVector::basis_state(2, 0)]).unwrap();
        assert!(matches!(
            h_u_sk(&StateVector::basis_state(2, 1), &set),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn computational_measurement_on_hn() {
        for (n, expected) in [(2, 2.0), (4, 3.0)] {
            let spec = hn_spec(n).unwrap();
            let povm = Povm::projective(&OrthonormalBasis::computational(spec.dim()));
            let h = povm_key_entropy(&spec, 0, &povm).unwrap();
            assert!((h - expected).abs() < 1e-9, "n={n}: {h}");
        }
    }

    #[test]
    fn dense_and_rank1_paths_agree() {
        let spec = wn(2);
        let basis = spec.bases()[1].clone();
        let rank1 = Povm::projective(&basis);
        let dense = Povm::new(
            rank1.elements().iter().map(|e| PovmElement::Dense(e.to_matrix())).collect(),
            rank1.labels().to_vec(),
        )
        .unwrap();
        let a = povm_key_entropy(&spec, 2, &rank1).unwrap();
        let b = povm_key_entropy(&spec, 2, &dense).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    fn random_dense_povm(dim: usize, outcomes: usize, seed: u64) -> Povm {
        use rand::SeedableRng;
        use rand_distr::{Distribution as _, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<CMatrix> = (0..outcomes)
            .map(|_| {
                let g = CMatrix::from_fn(dim, dim, |_, _| {
                    C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
                });
                &g * g.adjoint()
            })
            .collect();
        let total: CMatrix = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, m| acc + m);
        let eig = total.symmetric_eigen();
        let inv_sqrt = &eig.eigenvectors
            * CMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from(1.0 / e.sqrt())))
            * eig.eigenvectors.adjoint();
        let elements = raw
            .iter()
            .map(|m| {
                let e = &inv_sqrt * m * &inv_sqrt;
                PovmElement::Dense((&e + e.adjoint()) * C64::from(0.5))
            })
            .collect();
        Povm::new(elements, (0..outcomes).map(|i| i.to_string()).collect()).unwrap()
    }

    #[test]
    fn rank1_refinement_never_increases_uncertainty() {
        for (spec, seed) in [(hn_spec(2).unwrap(), 1), (wn(2), 2), (hn_spec(3).unwrap(), 3)] {
            let povm = random_dense_povm(spec.dim(), 3, seed);
            assert!(povm_validate(&povm).within(1e-9));
            let coarse = povm_key_entropy(&spec, 1, &povm).unwrap();
            let fine = povm_key_entropy(&spec, 1, &povm.rank1_refinement()).unwrap();
            assert!(fine <= coarse + 1e-9, "{fine} > {coarse}");
        }
    }

    #[test]
    fn posterior_entropy_matches_measurement() {
        for spec in [hn_spec(1).unwrap(), hn_spec(2).unwrap(), wn(2)] {
            let set = StateSet::from_cipher(&spec, 1).unwrap();
            let povm = random_dense_povm(spec.dim(), spec.dim(), 9).rank1_refinement();
            let basis = povm.elements();
            for post in key_posteriors(&povm, &set).unwrap() {
                let PovmElement::Rank1 { vector, .. } = &basis[post.outcome] else { unreachable!() };
                let u = StateVector::normalized(vector.clone()).unwrap();
                let expected: f64 = post.posterior.iter().map(|&p| entropy_term(p)).sum();
                assert!((h_u_sk(&u, &set).unwrap() - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn uncertainty_independent_of_plaintext() {
        for spec in [hn_spec(1).unwrap(), hn_spec(3).unwrap(), wn(2), wn(3)] {
            let povms = [
                Povm::projective(&OrthonormalBasis::computational(spec.dim())),
                Povm::projective(&spec.bases()[spec.bases().len() - 1]),
                random_dense_povm(spec.dim(), 4, 5),
            ];
            for povm in &povms {
                let h0 = povm_key_entropy(&spec, 0, povm).unwrap();
                for a in 1..spec.num_plaintexts() as u32 {
                    assert!((povm_key_entropy(&spec, a, povm).unwrap() - h0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn measured_entropy_respects_lemma_bound() {
        let spec = wn(2);
        let bound = shannon_key_uncertainty_bound(&spec, sanchez_bound(4));
        for seed in 0..4 {
            let povm = random_dense_povm(4, 4, seed);
            assert!(povm_key_entropy(&spec, 0, &povm).unwrap() >= bound - 1e-9);
        }
    }
}
