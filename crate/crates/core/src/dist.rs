//! Alphabets and probability distributions over them, with the scalar
//! functionals used throughout: entropy, varentropy, and KL divergence, all
//! in bits.

use crate::error::{Error, Result};

/// Tolerance on the normalization of an explicit probability vector.
pub const DIST_SUM_TOL: f64 = 1e-12;

/// A finite source alphabet. Labels default to `x0..x{m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidAlphabet("size must be at least 1".into()));
        }
        Ok(Self {
            labels: (0..size).map(|i| format!("x{i}")).collect(),
        })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidAlphabet("size must be at least 1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(Error::InvalidAlphabet(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// A probability vector over a finite alphabet. Base-2 logs of the entries
/// are cached at construction; zero entries map to -inf.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    probs: Vec<f64>,
    log2_probs: Vec<f64>,
    support: Vec<usize>,
}

impl Dist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidDistribution(
                "entries must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > DIST_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1 within {DIST_SUM_TOL}"
            )));
        }
        let support: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let log2_probs = probs
            .iter()
            .map(|&p| if p > 0.0 { p.log2() } else { f64::NEG_INFINITY })
            .collect();
        Ok(Self {
            probs,
            log2_probs,
            support,
        })
    }

    /// Rescales the vector to sum exactly to 1 before validating. Entry point
    /// for user-supplied vectors that are only approximately normalized.
    pub fn normalized(probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if !(sum.is_finite()) || sum <= 0.0 {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Self::new(probs.iter().map(|&p| p / sum).collect())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    pub fn log2_prob(&self, x: usize) -> f64 {
        self.log2_probs[x]
    }

    pub fn log2_probs(&self) -> &[f64] {
        &self.log2_probs
    }

    /// Indices with strictly positive probability.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// Support as a bitmask; alphabet sizes beyond 64 are not supported.
    pub fn support_mask(&self) -> u64 {
        self.support.iter().fold(0u64, |m, &x| m | (1u64 << x))
    }

    /// Entropy H(P) in bits.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for &x in &self.support {
            h -= self.probs[x] * self.log2_probs[x];
        }
        h
    }

    /// Varentropy V(P) in bits^2: the variance of -log2 P(X).
    pub fn varentropy(&self) -> f64 {
        let h = self.entropy();
        let mut second = 0.0;
        for &x in &self.support {
            let info = -self.log2_probs[x];
            second += self.probs[x] * info * info;
        }
        (second - h * h).max(0.0)
    }
}
