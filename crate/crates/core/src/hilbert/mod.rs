//! Dense complex linear algebra on `2^n`-dimensional state spaces.

mod entropy;
pub mod io;

pub use entropy::{
    collision_probability, min_entropy, shannon_entropy, Distribution, DISTRIBUTION_TOL,
};
pub(crate) use entropy::entropy_term;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for structural invariants (norms, orthonormality, Hermiticity).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for comparisons between entropies.
pub const ENTROPY_TOL: f64 = 1e-9;
/// Convergence tolerance of the sphere optimizer.
pub const OPTIMIZER_TOL: f64 = 1e-6;

/// Largest supported state-space dimension.
pub const MAX_DIM: usize = 1 << 12;

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// A unit-norm pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    /// Wraps `amps`, rejecting non power-of-two dimensions and non-unit norms.
    pub fn new(amps: CVector) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim > MAX_DIM {
            return Err(Error::InvalidState(format!("dimension {dim} is not a power of two <= 4096")));
        }
        let norm2 = amps.norm_squared();
        if (norm2 - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm2}")));
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amps / C64::from(norm))
    }

    pub(crate) fn from_unit(amps: CVector) -> Self {
        debug_assert!((amps.norm_squared() - 1.0).abs() < 1e-8);
        Self { amps }
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amps(self) -> CVector {
        self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn with_phase(&self, theta: f64) -> Self {
        Self {
            amps: &self.amps * C64::from_polar(1.0, theta),
        }
    }

    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn kron(&self, other: &StateVector) -> Self {
        Self {
            amps: self.amps.kronecker(&other.amps),
        }
    }
}

/// An orthonormal basis of the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    // columns are the basis vectors
    matrix: CMatrix,
}

impl OrthonormalBasis {
    pub fn new(vectors: Vec<StateVector>) -> Result<Self> {
        let dim = vectors.first().map(StateVector::dim).unwrap_or(0);
        check_dim(dim, vectors.len())?;
        for v in &vectors {
            check_dim(dim, v.dim())?;
        }
        let columns: Vec<CVector> = vectors.into_iter().map(StateVector::into_amps).collect();
        Self::from_matrix(CMatrix::from_columns(&columns))
    }

    /// Basis given by the columns of a unitary.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidState("basis matrix must be square".into()));
        }
        let dev = unitarity_deviation(&matrix);
        if dev > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!(
                "Gram matrix deviates from identity by {dev:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// `{H^(tensor n)|x>}`.
    pub fn hadamard(dim: usize) -> Self {
        let scale = 1.0 / (dim as f64).sqrt();
        let matrix = CMatrix::from_fn(dim, dim, |i, j| {
            let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(sign * scale, 0.0)
        });
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The unitary whose columns are the basis vectors.
    pub fn unitary(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn vector(&self, i: usize) -> StateVector {
        StateVector::from_unit(self.matrix.column(i).into_owned())
    }

    pub fn vectors(&self) -> impl Iterator<Item = StateVector> + '_ {
        (0..self.dim()).map(|i| self.vector(i))
    }

    pub fn kron(&self, other: &OrthonormalBasis) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Reorders the basis vectors so that vector `i` becomes vector `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut matrix = CMatrix::zeros(self.dim(), self.dim());
        for (i, &p) in perm.iter().enumerate() {
            matrix.set_column(p, &self.matrix.column(i));
        }
        Self { matrix }
    }
}

/// Largest entry of `|U^dag U - I|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let gram = u.adjoint() * u;
    let id = CMatrix::identity(u.ncols(), u.ncols());
    (gram - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest entry of `|M - M^dag|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Probabilities of measuring `u` in basis `b`: `|<b_i|u>|^2`.
pub fn measure_in_basis(u: &StateVector, b: &OrthonormalBasis) -> Result<Distribution> {
    check_dim(b.dim(), u.dim())?;
    let coords = b.matrix.ad_mul(&u.amps);
    Distribution::new(coords.iter().map(|z| z.norm_sqr()).collect())
}

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let herm = hermiticity_deviation(&matrix);
        if herm > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STRUCTURAL_TOL || tr.im.abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&matrix).first().cloned().unwrap_or(0.0);
        if min < -STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    /// The complete mixture `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) / C64::from(dim as f64),
        }
    }

    pub fn pure(state: &StateVector) -> Self {
        Self {
            matrix: state.projector(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `sum_i p_i |s_i><s_i|`.
pub fn density_from_ensemble(states: &[StateVector], probs: &Distribution) -> Result<DensityOperator> {
    check_dim(states.len(), probs.len())?;
    let dim = states
        .first()
        .map(StateVector::dim)
        .ok_or_else(|| Error::InvalidState("empty ensemble".into()))?;
    let mut acc = CMatrix::zeros(dim, dim);
    for (s, &p) in states.iter().zip(probs.probs()) {
        check_dim(dim, s.dim())?;
        acc.gerc(C64::from(p), &s.amps, &s.amps, C64::new(1.0, 0.0));
    }
    Ok(DensityOperator { matrix: acc })
}

/// `1/2 sum |eig(rho1 - rho2)|`.
pub fn trace_distance(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    check_dim(rho1.dim(), rho2.dim())?;
    let diff = &rho1.matrix - &rho2.matrix;
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>())
}

/// One outcome of a POVM.
#[derive(Debug, Clone, PartialEq)]
pub enum PovmElement {
    /// `weight * |v><v|` with `v` unit norm.
    Rank1 { weight: f64, vector: CVector },
    Dense(CMatrix),
}

impl PovmElement {
    pub fn rank1(weight: f64, vector: &StateVector) -> Self {
        Self::Rank1 {
            weight,
            vector: vector.amps.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Rank1 { vector, .. } => vector.len(),
            Self::Dense(m) => m.nrows(),
        }
    }

    /// `<psi|M|psi>`.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        match self {
            Self::Rank1 { weight, vector } => weight * vector.dotc(&psi.amps).norm_sqr(),
            Self::Dense(m) => psi.amps.dotc(&(m * &psi.amps)).re,
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        match self {
            Self::Rank1 { weight, vector } => (vector * vector.adjoint()) * C64::from(*weight),
            Self::Dense(m) => m.clone(),
        }
    }

    /// Splits the element into weighted rank-one projectors along its eigenvectors.
    pub fn rank1_refinement(&self) -> Vec<PovmElement> {
        match self {
            Self::Rank1 { .. } => vec![self.clone()],
            Self::Dense(m) => {
                let eig = m.clone().symmetric_eigen();
                eig.eigenvalues
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 1e-14)
                    .map(|(i, &w)| Self::Rank1 {
                        weight: w,
                        vector: eig.eigenvectors.column(i).into_owned(),
                    })
                    .collect()
            }
        }
    }
}

/// A positive-operator-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<PovmElement>,
    labels: Vec<String>,
}

/// Residuals reported by [`povm_validate`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PovmResiduals {
    /// Magnitude of the most negative eigenvalue over all elements.
    pub psd_violation: f64,
    /// Spectral norm of `sum M_k - I`.
    pub completeness_residual: f64,
}

impl PovmResiduals {
    pub fn within(&self, tol: f64) -> bool {
        self.psd_violation <= tol && self.completeness_residual <= tol
    }
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>, labels: Vec<String>) -> Result<Self> {
        check_dim(elements.len(), labels.len())?;
        let dim = elements
            .first()
            .map(PovmElement::dim)
            .ok_or_else(|| Error::InvalidState("POVM has no elements".into()))?;
        for e in &elements {
            check_dim(dim, e.dim())?;
        }
        Ok(Self { dim, elements, labels })
    }

    /// Projective measurement in `basis`, outcomes labeled by index.
    pub fn projective(basis: &OrthonormalBasis) -> Self {
        let elements = basis.vectors().map(|v| PovmElement::rank1(1.0, &v)).collect();
        let labels = (0..basis.dim()).map(|i| i.to_string()).collect();
        Self {
            dim: basis.dim(),
            elements,
            labels,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Every element replaced by its rank-one refinement.
    pub fn rank1_refinement(&self) -> Self {
        let mut elements = Vec::new();
        let mut labels = Vec::new();
        for (e, l) in self.elements.iter().zip(&self.labels) {
            for (i, part) in e.rank1_refinement().into_iter().enumerate() {
                elements.push(part);
                labels.push(format!("{l}.{i}"));
            }
        }
        Self {
            dim: self.dim,
            elements,
            labels,
        }
    }

    /// Scales every element by `factor`; the result is generally not a POVM.
    pub fn scaled(&self, factor: f64) -> Self {
        let elements = self
            .elements
            .iter()
            .map(|e| match e {
                PovmElement::Rank1 { weight, vector } => PovmElement::Rank1 {
                    weight: weight * factor,
                    vector: vector.clone(),
                },
                PovmElement::Dense(m) => PovmElement::Dense(m * C64::from(factor)),
            })
            .collect();
        Self {
            dim: self.dim,
            elements,
            labels: self.labels.clone(),
        }
    }

    pub fn sum(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for e in &self.elements {
            match e {
                PovmElement::Rank1 { weight, vector } => {
                    acc.gerc(C64::from(*weight), vector, vector, C64::new(1.0, 0.0))
                }
                PovmElement::Dense(m) => acc += m,
            }
        }
        acc
    }
}

/// Reports how far `povm` is from being a valid measurement.
pub fn povm_validate(povm: &Povm) -> PovmResiduals {
    let psd_violation = povm
        .elements
        .iter()
        .map(|e| match e {
            PovmElement::Rank1 { weight, .. } => (-weight).max(0.0),
            PovmElement::Dense(m) => {
                let min = hermitian_eigenvalues(m).first().cloned().unwrap_or(0.0);
                (-min).max(hermiticity_deviation(m)).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    let diff = povm.sum() - CMatrix::identity(povm.dim, povm.dim);
    let completeness_residual = hermitian_eigenvalues(&diff)
        .iter()
        .map(|e| e.abs())
        .fold(hermiticity_deviation(&diff), f64::max);
    PovmResiduals {
        psd_violation,
        completeness_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn measure_examples() {
        let zero = StateVector::basis_state(2, 0);
        let comp = measure_in_basis(&zero, &OrthonormalBasis::computational(2)).unwrap();
        assert_eq!(comp.probs(), &[1.0, 0.0]);
        let had = measure_in_basis(&zero, &OrthonormalBasis::hadamard(2)).unwrap();
        assert!((had.probs()[0] - 0.5).abs() < 1e-15 && (had.probs()[1] - 0.5).abs() < 1e-15);
        let wrong = measure_in_basis(&zero, &OrthonormalBasis::computational(4));
        assert!(matches!(wrong, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn state_validation() {
        assert!(StateVector::new(CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
        assert!(StateVector::new(CVector::from_vec(vec![c(1.0, 0.0); 3])).is_err());
        let s = StateVector::normalized(CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        assert!((s.amps()[1].im - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(StateVector::normalized(CVector::zeros(2)).is_err());
    }

    #[test]
    fn basis_validation() {
        let bad = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(OrthonormalBasis::from_matrix(bad).is_err());
        assert!(OrthonormalBasis::from_matrix(OrthonormalBasis::hadamard(8).unitary().clone()).is_ok());
    }

    #[test]
    fn ensemble_examples() {
        let plus = OrthonormalBasis::hadamard(2).vector(0);
        let rho = density_from_ensemble(&[plus.clone()], &Distribution::uniform(1)).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
        assert!((rho.matrix()[(0, 1)].re - 0.5).abs() < 1e-15);

        let basis: Vec<_> = OrthonormalBasis::hadamard(4).vectors().collect();
        let mixed = density_from_ensemble(&basis, &Distribution::uniform(4)).unwrap();
        let td = trace_distance(&mixed, &DensityOperator::maximally_mixed(4)).unwrap();
        assert!(td < 1e-15);

        // H_1 cipher-states of |0> over all four keys.
        let h = OrthonormalBasis::hadamard(2);
        let states = vec![
            StateVector::basis_state(2, 0),
            StateVector::basis_state(2, 1),
            h.vector(0),
            h.vector(1),
        ];
        let rho = density_from_ensemble(&states, &Distribution::uniform(4)).unwrap();
        assert!(trace_distance(&rho, &DensityOperator::maximally_mixed(2)).unwrap() < 1e-15);
    }

    #[test]
    fn ensemble_uses_conjugate() {
        let s = StateVector::normalized(CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)])).unwrap();
        let rho = density_from_ensemble(&[s], &Distribution::uniform(1)).unwrap();
        // |+i><+i| has (0,1) entry -i/2.
        assert!((rho.matrix()[(0, 1)] - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn trace_distance_examples() {
        let p0 = DensityOperator::pure(&StateVector::basis_state(2, 0));
        let p1 = DensityOperator::pure(&StateVector::basis_state(2, 1));
        let mixed = DensityOperator::maximally_mixed(2);
        assert_eq!(trace_distance(&p0, &p0).unwrap(), 0.0);
        assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_distance(&mixed, &p0).unwrap() - 0.5).abs() < 1e-14);
        assert!((trace_distance(&p0, &mixed).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(CMatrix::identity(2, 2)).is_err());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(DensityOperator::new(neg).is_err());
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityOperator::new(non_herm).is_err());
    }

    #[test]
    fn povm_residual_examples() {
        let proj = Povm::projective(&OrthonormalBasis::computational(4));
        let r = povm_validate(&proj);
        assert_eq!(r.psd_violation, 0.0);
        assert!(r.completeness_residual < 1e-15);

        let scaled = povm_validate(&proj.scaled(0.9));
        assert!((scaled.completeness_residual - 0.1).abs() < 1e-12);

        let dense = Povm::new(
            vec![PovmElement::Dense(CMatrix::identity(2, 2) * c(1.2, 0.0)),
                 PovmElement::Dense(CMatrix::identity(2, 2) * c(-0.2, 0.0))],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let r = povm_validate(&dense);
        assert!((r.psd_violation - 0.2).abs() < 1e-12);
        assert!(r.completeness_residual < 1e-12);
    }

    #[test]
    fn refinement_preserves_sum() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.25), c(0.0, -0.25), c(0.5, 0.0)]);
        let other = CMatrix::identity(2, 2) - &m;
        let povm = Povm::new(
            vec![PovmElement::Dense(m), PovmElement::Dense(other)],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let refined = povm.rank1_refinement();
        assert_eq!(refined.len(), 4);
        assert!(povm_validate(&refined).within(1e-12));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn state(dim: usize) -> impl Strategy<Value = StateVector> {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
                .prop_filter_map("nonzero", |v| {
                    StateVector::normalized(CVector::from_iterator(
                        v.len(),
                        v.into_iter().map(|(a, b)| C64::new(a, b)),
                    ))
                    .ok()
                })
        }

        proptest! {
            #[test]
            fn entropy_invariant_under_phase_and_permutation(
                u in state(8),
                theta in 0.0f64..6.3,
                perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(),
            ) {
                let basis = OrthonormalBasis::hadamard(8);
                let h = shannon_entropy(&measure_in_basis(&u, &basis).unwrap());
                let phased = shannon_entropy(&measure_in_basis(&u.with_phase(theta), &basis).unwrap());
                let permuted = shannon_entropy(&measure_in_basis(&u, &basis.permuted(&perm)).unwrap());
                prop_assert!((h - phased).abs() < 1e-9);
                prop_assert!((h - permuted).abs() < 1e-9);
            }

            #[test]
            fn ensemble_invariant_under_pair_permutation(
                states in prop::collection::vec(state(4), 4),
                weights in prop::collection::vec(0.01f64..1.0, 4),
                perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(),
            ) {
                let probs = Distribution::from_weights(&weights).unwrap();
                let rho = density_from_ensemble(&states, &probs).unwrap();
                let ps: Vec<_> = perm.iter().map(|&i| states[i].clone()).collect();
                let pw: Vec<_> = perm.iter().map(|&i| weights[i]).collect();
                let rho2 = density_from_ensemble(&ps, &Distribution::from_weights(&pw).unwrap()).unwrap();
                prop_assert!(trace_distance(&rho, &rho2).unwrap() < 1e-12);
                prop_assert!(DensityOperator::new(rho.matrix().clone()).is_ok());
            }
        }
    }
}
