use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const DISTRIBUTION_TOL: f64 = 1e-9;

/// A finite probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -DISTRIBUTION_TOL) {
            return Err(Error::InvalidDistribution(format!("entry {p} out of range")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
        })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Undefined("weights have no positive mass".into()));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Number of outcomes with probability above `tol`.
    pub fn support(&self, tol: f64) -> usize {
        self.probs.iter().filter(|p| **p > tol).count()
    }
}

/// `-p log2 p` with the convention `0 log 0 = 0`.
pub(crate) fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn shannon_entropy(d: &Distribution) -> f64 {
    d.probs.iter().map(|&p| entropy_term(p)).sum()
}

/// Min-entropy `-log2 max p` in bits.
pub fn min_entropy(d: &Distribution) -> f64 {
    let max = d.probs.iter().cloned().fold(0.0, f64::max);
    // max >= 1/len > 0 for a valid distribution
    -max.log2()
}

/// Collision probability `sum p^2`.
pub fn collision_probability(d: &Distribution) -> f64 {
    d.probs.iter().map(|p| p * p).sum()
}
