//! Multi-start search for the minimal entropy sum `min_u sum_i H[u, B_i]`.
//!
//! Each start runs projected gradient descent on the unit sphere of `C^d`
//! (viewed as `R^(2d)`) with Armijo backtracking and renormalization after
//! every step. Starts are Haar-random vectors from a seeded generator plus
//! every vector of every input basis. The best value found is an upper bound
//! on the true minimum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    entropy_term, CMatrix, CVector, OrthonormalBasis, StateVector, C64, MAX_DIM, OPTIMIZER_TOL,
};

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
const PROB_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MesConfig {
    /// Haar-random starts.
    pub restarts: usize,
    pub seed: u64,
    /// Gradient-norm threshold for convergence.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Also start from every vector of every input basis.
    pub seed_basis_vectors: bool,
}

impl Default for MesConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            tolerance: OPTIMIZER_TOL,
            max_iterations: 500,
            seed_basis_vectors: true,
        }
    }
}

impl MesConfig {
    pub fn with_restarts(self, restarts: usize) -> Self {
        Self { restarts, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Result of [`mes_search`]. `value` is an upper bound on the minimal entropy sum.
#[derive(Debug, Clone, PartialEq)]
pub struct MesResult {
    pub value: f64,
    pub argmin: StateVector,
    /// Total number of starts (random and basis-vector seeded).
    pub restarts: usize,
    /// Whether the best start met the gradient tolerance.
    pub converged: bool,
    /// Final value of each start, in start order.
    pub trace: Vec<f64>,
}

/// Sum of measurement entropies of `u` over the bases whose unitaries are given.
fn objective(unitaries: &[CMatrix], u: &CVector) -> f64 {
    unitaries
        .iter()
        .map(|b| b.ad_mul(u).iter().map(|z| entropy_term(z.norm_sqr())).sum::<f64>())
        .sum()
}

/// Value and Euclidean gradient (as a complex vector in `R^(2d)` form).
fn objective_and_gradient(unitaries: &[CMatrix], u: &CVector) -> (f64, CVector) {
    let mut value = 0.0;
    let mut grad = CVector::zeros(u.len());
    let inv_ln2 = std::f64::consts::LOG2_E;
    for b in unitaries {
        let coords = b.ad_mul(u);
        let scaled = coords.map(|z| {
            let p = z.norm_sqr();
            value += entropy_term(p);
            if p > 0.0 {
                // d/dp of -p log2 p, times d p / d u = 2 b <b|u>
                z * (-2.0 * (p.max(PROB_FLOOR).log2() + inv_ln2))
            } else {
                C64::new(0.0, 0.0)
            }
        });
        grad += b * scaled;
    }
    (value, grad)
}

/// Projection of `g` onto the tangent space of the sphere at `u`.
fn tangent(u: &CVector, g: &CVector) -> CVector {
    let radial = u.dotc(g).re;
    g - u * C64::from(radial)
}

fn normalize(v: CVector) -> CVector {
    let norm = v.norm();
    v / C64::from(norm)
}

struct Descent {
    value: f64,
    point: CVector,
    converged: bool,
}

fn descend(unitaries: &[CMatrix], start: CVector, cfg: &MesConfig) -> Descent {
    let mut u = start;
    let (mut value, mut grad) = objective_and_gradient(unitaries, &u);
    let mut step = 1.0;
    for _ in 0..cfg.max_iterations {
        let g = tangent(&u, &grad);
        let gnorm2 = g.norm_squared();
        if gnorm2.sqrt() < cfg.tolerance {
            return Descent { value, point: u, converged: true };
        }
        let mut accepted = None;
        let mut s = step;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = normalize(&u - &g * C64::from(s));
            let cv = objective(unitaries, &candidate);
            if cv <= value - ARMIJO_C1 * s * gnorm2 {
                accepted = Some((candidate, cv));
                break;
            }
            s *= 0.5;
        }
        match accepted {
            Some((next, _)) => {
                u = next;
                (value, grad) = objective_and_gradient(unitaries, &u);
                step = (s * 2.0).min(16.0);
            }
            // no descent direction left at working precision
            None => return Descent { value, point: u, converged: false },
        }
    }
    let converged = tangent(&u, &grad).norm() < cfg.tolerance;
    Descent { value, point: u, converged }
}

fn haar_vector(dim: usize, seed: u64, stream: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let v = CVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    normalize(v)
}

/// `sum_i H[u, B_i]`.
pub fn entropy_sum(u: &StateVector, bases: &[OrthonormalBasis]) -> Result<f64> {
    for b in bases {
        if b.dim() != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                got: u.dim(),
            });
        }
    }
    let unitaries: Vec<CMatrix> = bases.iter().map(|b| b.unitary().clone()).collect();
    Ok(objective(&unitaries, u.amps()))
}

/// Multi-start minimization of the entropy sum over unit vectors.
pub fn mes_search(bases: &[OrthonormalBasis], cfg: &MesConfig) -> Result<MesResult> {
    let dim = bases
        .first()
        .map(OrthonormalBasis::dim)
        .ok_or_else(|| Error::Parameter("no bases given".into()))?;
    if dim > MAX_DIM {
        return Err(Error::DimensionCap(dim.trailing_zeros()));
    }
    if let Some(b) = bases.iter().find(|b| b.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: b.dim(),
        });
    }
    let unitaries: Vec<CMatrix> = bases.iter().map(|b| b.unitary().clone()).collect();

    let mut starts: Vec<CVector> = (0..cfg.restarts)
        .map(|r| haar_vector(dim, cfg.seed, r as u64))
        .collect();
    if cfg.seed_basis_vectors {
        for b in bases {
            starts.extend((0..dim).map(|i| b.unitary().column(i).into_owned()));
        }
    }
    if starts.is_empty() {
        return Err(Error::Parameter("no starting points".into()));
    }

    let runs: Vec<Descent> = starts
        .into_par_iter()
        .map(|s| descend(&unitaries, s, cfg))
        .collect();
    let trace: Vec<f64> = runs.iter().map(|d| d.value).collect();
    let best = runs
        .into_iter()
        .reduce(|best, d| if d.value < best.value { d } else { best })
        .expect("nonempty");
    Ok(MesResult {
        value: best.value,
        argmin: StateVector::normalized(best.point)?,
        restarts: trace.len(),
        converged: best.converged,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference_gradient(unitaries: &[CMatrix], u: &CVector) -> CVector {
        let h = 1e-6;
        CVector::from_fn(u.len(), |i, _| {
            let mut re = u.clone();
            re[i] += C64::new(h, 0.0);
            let mut re_m = u.clone();
            re_m[i] -= C64::new(h, 0.0);
            let mut im = u.clone();
            im[i] += C64::new(0.0, h);
            let mut im_m = u.clone();
            im_m[i] -= C64::new(0.0, h);
            let dre = (objective(unitaries, &re) - objective(unitaries, &re_m)) / (2.0 * h);
            let dim = (objective(unitaries, &im) - objective(unitaries, &im_m)) / (2.0 * h);
            C64::new(dre, dim)
        })
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let unitaries = vec![
            OrthonormalBasis::computational(4).unitary().clone(),
            OrthonormalBasis::hadamard(4).unitary().clone(),
        ];
        let u = haar_vector(4, 7, 0);
        let (_, g) = objective_and_gradient(&unitaries, &u);
        let fd = finite_difference_gradient(&unitaries, &u);
        assert!((g - fd).norm() < 1e-5);
    }

    #[test]
    fn single_basis_minimum_is_zero() {
        let r = mes_search(&[OrthonormalBasis::hadamard(4)], &MesConfig::default().with_restarts(4)).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.restarts, 8);
    }

    #[test]
    fn two_mubs_reach_maassen_uffink() {
        let bases = [OrthonormalBasis::computational(4), OrthonormalBasis::hadamard(4)];
        let r = mes_search(&bases, &MesConfig::default().with_restarts(16)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-4);
        assert!(r.trace.iter().all(|v| *v >= 2.0 - 1e-6));
        assert!((entropy_sum(&r.argmin, &bases).unwrap() - r.value).abs() < 1e-9);
    }

    #[test]
    fn random_descent_decreases() {
        let bases = [OrthonormalBasis::computational(8), OrthonormalBasis::hadamard(8)];
        let cfg = MesConfig {
            seed_basis_vectors: false,
            ..MesConfig::default().with_restarts(4)
        };
        let start = StateVector::normalized(haar_vector(8, cfg.seed, 0)).unwrap();
        let r = mes_search(&bases, &cfg).unwrap();
        assert!(r.trace[0] <= entropy_sum(&start, &bases).unwrap());
        assert!(r.value >= 3.0 - 1e-6);
    }

    #[test]
    fn deterministic_given_seed() {
        let bases = [OrthonormalBasis::computational(4), OrthonormalBasis::hadamard(4)];
        let cfg = MesConfig::default().with_restarts(8).with_seed(42);
        let a = mes_search(&bases, &cfg).unwrap();
        let b = mes_search(&bases, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_inputs() {
        assert!(mes_search(&[], &MesConfig::default()).is_err());
        let mixed = [OrthonormalBasis::computational(2), OrthonormalBasis::computational(4)];
        assert!(mes_search(&mixed, &MesConfig::default()).is_err());
    }
}
