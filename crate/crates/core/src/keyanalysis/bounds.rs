//! Closed-form entropic bounds and the `Delta` gap.

use serde::Serialize;

use super::mes::{mes_search, MesConfig};
use crate::cipher::CipherSpec;
use crate::error::{Error, Result};
use crate::hilbert::{collision_probability, measure_in_basis, StateVector};
use crate::mub::MubFamily;

/// Lower bound `t + mes / 2^t` on `H(K|U)` for a cipher over `2^t` MUBs.
pub fn shannon_key_uncertainty_bound(spec: &CipherSpec, mes: f64) -> f64 {
    spec.t() as f64 + mes / (1u64 << spec.t()) as f64
}

/// Minimal entropy sum of two mutually unbiased bases in dimension `2^n`.
pub fn mu_bound(n: u32) -> f64 {
    n as f64
}

/// Sum of collision probabilities of `u` over every basis of a complete family.
/// Equals 2 for any unit vector.
pub fn larsen_sum(family: &MubFamily, u: &StateVector) -> Result<f64> {
    let expected = (1usize << family.n()) + 1;
    if family.bases().len() != expected {
        return Err(Error::Parameter(format!(
            "complete family needs {expected} bases, got {}",
            family.bases().len()
        )));
    }
    family
        .bases()
        .iter()
        .map(|b| measure_in_basis(u, b).map(|d| collision_probability(&d)))
        .sum()
}

/// Lower bound on the entropy sum over `count` mutually unbiased bases in dimension `count`:
/// `N log2(N / (2 - 1/N))`.
pub fn sanchez_bound(count: u64) -> f64 {
    let n = count as f64;
    n * (n / (2.0 - 1.0 / n)).log2()
}

/// Gap `(2^t - 1) n - mes` between the basis-state value and the minimal entropy sum.
pub fn delta(n: u32, t: u32, mes: f64) -> f64 {
    ((1u64 << t) - 1) as f64 * n as f64 - mes
}

/// Shannon key uncertainty of `W_n`, unconditional and conjecture-dependent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WnUncertainty {
    pub n: u32,
    /// Best entropy sum found over the `2^n` bases (an upper bound on the minimum).
    pub mes_upper_bound: f64,
    /// `n + mes / 2^n`, valid only if the search found the true minimum.
    pub conditional: f64,
    /// `n + sanchez_bound(2^n) / 2^n`.
    pub analytic: f64,
    /// `2n - 1`, always strictly below `analytic`.
    pub unconditional: f64,
    pub delta_estimate: f64,
    pub conjecture_dependent: bool,
}

pub fn wn_full_uncertainty(family: &MubFamily, cfg: &MesConfig) -> Result<WnUncertainty> {
    let n = family.n();
    let count = 1u64 << n;
    let mes = mes_search(family.wf_bases(), cfg)?.value;
    Ok(WnUncertainty {
        n,
        mes_upper_bound: mes,
        conditional: n as f64 + mes / count as f64,
        analytic: n as f64 + sanchez_bound(count) / count as f64,
        unconditional: 2.0 * n as f64 - 1.0,
        delta_estimate: delta(n, n, mes),
        conjecture_dependent: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{hn_spec, one_time_pad_spec, wn_spec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution as _, StandardNormal};

    #[test]
    fn lemma_bound_values() {
        for n in 1..=6 {
            let h = hn_spec(n).unwrap();
            assert_eq!(shannon_key_uncertainty_bound(&h, mu_bound(n)), n as f64 / 2.0 + 1.0);
        }
        let otp = one_time_pad_spec(3).unwrap();
        assert_eq!(shannon_key_uncertainty_bound(&otp, 1.25), 1.25);
        for n in 1..=4u32 {
            let w = wn_spec(&MubFamily::with_default_field(n).unwrap());
            let count = 1u64 << n;
            assert!(shannon_key_uncertainty_bound(&w, sanchez_bound(count)) > 2.0 * n as f64 - 1.0);
        }
    }

    #[test]
    fn sanchez_values() {
        assert!((sanchez_bound(2) - 2.0 * (2.0f64 / 1.5).log2()).abs() < 1e-15);
        assert!((sanchez_bound(2) - 0.830).abs() < 1e-3);
        assert!((sanchez_bound(4) - 4.77).abs() < 1e-2);
        for k in 1..10 {
            let n = 1u64 << k;
            let per = sanchez_bound(n) / n as f64;
            assert!(per > (n as f64 / 2.0).log2() && per < (n as f64).log2());
        }
    }

    #[test]
    fn delta_values() {
        assert_eq!(delta(5, 1, 5.0), 0.0);
        assert_eq!(delta(2, 2, 4.0), 2.0);
    }

    #[test]
    fn larsen_examples() {
        let f1 = MubFamily::with_default_field(1).unwrap();
        assert!((larsen_sum(&f1, &StateVector::basis_state(2, 0)).unwrap() - 2.0).abs() < 1e-12);
        let v = f1.wf_bases()[1].vector(0);
        assert!((larsen_sum(&f1, &v).unwrap() - 2.0).abs() < 1e-12);

        let f2 = MubFamily::with_default_field(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let amps = crate::hilbert::CVector::from_fn(4, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                crate::hilbert::C64::new(re, im)
            });
            let u = StateVector::normalized(amps).unwrap();
            assert!((larsen_sum(&f2, &u).unwrap() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn wn_uncertainty_small() {
        let cfg = MesConfig::default().with_restarts(16);
        for n in 1..=2 {
            let r = wn_full_uncertainty(&MubFamily::with_default_field(n).unwrap(), &cfg).unwrap();
            assert!(r.conditional >= r.unconditional - 1e-6);
            assert!(r.conditional >= r.analytic - 1e-6);
            assert!(r.delta_estimate >= -1e-4);
        }
    }
}
