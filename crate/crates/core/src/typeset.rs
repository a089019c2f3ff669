//! Exact combinatorics of empirical types: enumeration, type-class sizes,
//! per-sequence probabilities, and the entropy-based sandwich bound on class
//! size.
//!
//! All counts are exact big naturals; probabilities live in base-2 log domain.
//! Types are enumerated in descending lexicographic order of their count
//! vectors, and that order is the tie-breaker everywhere in the crate.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::numeric::{log2_biguint, log2_factorials, CompensatedSum};

/// An empirical type: integer counts over the alphabet summing to n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeVector {
    n: u32,
    counts: Vec<u32>,
}

impl TypeVector {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidType("empty count vector".into()));
        }
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        if n == 0 {
            return Err(Error::InvalidType("counts sum to 0".into()));
        }
        if n > u32::MAX as u64 {
            return Err(Error::TooLarge(format!("n = {n} exceeds u32")));
        }
        Ok(Self {
            n: n as u32,
            counts,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn support_mask(&self) -> u64 {
        support_mask_of(&self.counts)
    }

    /// Empirical frequency of symbol x.
    pub fn freq(&self, x: usize) -> f64 {
        self.counts[x] as f64 / self.n as f64
    }

    /// Empirical entropy H(t) in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of_counts(&self.counts, self.n)
    }

    /// Empirical varentropy in bits^2: variance of -log2 t(X) under t itself.
    pub fn varentropy(&self) -> f64 {
        let h = self.entropy();
        let n = self.n as f64;
        let mut second = 0.0;
        for &c in &self.counts {
            if c > 0 {
                let info = -((c as f64 / n).log2());
                second += c as f64 / n * info * info;
            }
        }
        (second - h * h).max(0.0)
    }

    /// KL divergence D(t || P) in bits; +inf when t puts mass outside the
    /// support of P (a value, not a fault).
    pub fn kl(&self, p: &Dist) -> f64 {
        let n = self.n as f64;
        let mut d = 0.0;
        for (x, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if p.prob(x) == 0.0 {
                return f64::INFINITY;
            }
            let f = c as f64 / n;
            d += f * (f.log2() - p.log2_prob(x));
        }
        d.max(0.0)
    }
}

#[inline]
pub(crate) fn support_mask_of(counts: &[u32]) -> u64 {
    let mut m = 0u64;
    for (x, &c) in counts.iter().enumerate() {
        if c > 0 {
            m |= 1u64 << x;
        }
    }
    m
}

#[inline]
pub(crate) fn entropy_of_counts(counts: &[u32], n: u32) -> f64 {
    let nf = n as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let f = c as f64 / nf;
            h -= f * f.log2();
        }
    }
    h
}

/// log2 of the probability under P of any single sequence of type `counts`:
/// sum_x counts[x] * log2 P(x). Equals -n (H(t) + D(t||P)); -inf when the
/// type uses a symbol outside the support of P.
#[inline]
pub(crate) fn seq_log2_prob_of_counts(counts: &[u32], p: &Dist) -> f64 {
    let mut s = 0.0;
    for (x, &c) in counts.iter().enumerate() {
        if c > 0 {
            let lp = p.log2_prob(x);
            if lp == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            s += c as f64 * lp;
        }
    }
    s
}

/// Exact multinomial coefficient n! / prod counts[x]!.
pub fn type_class_size(t: &TypeVector) -> BigUint {
    multinomial(t.counts())
}

pub(crate) fn multinomial(counts: &[u32]) -> BigUint {
    let mut result = BigUint::one();
    let mut seen: u64 = 0;
    for &c in counts {
        for j in 1..=c as u64 {
            seen += 1;
            result *= seen;
            result /= j;
        }
    }
    result
}

/// log2 of the probability of a single member of the type under P.
pub fn sequence_log2_prob(t: &TypeVector, p: &Dist) -> f64 {
    seq_log2_prob_of_counts(t.counts(), p)
}

/// Exact and log-domain views of one type class under a source law.
#[derive(Debug, Clone)]
pub struct TypeClassStats {
    pub size_exact: BigUint,
    pub log2_size: f64,
    pub seq_log2_prob: f64,
    pub class_log2_prob: f64,
}

pub fn type_class_stats(t: &TypeVector, p: &Dist) -> TypeClassStats {
    let size_exact = type_class_size(t);
    let log2_size = log2_biguint(&size_exact);
    let seq_log2_prob = sequence_log2_prob(t, p);
    TypeClassStats {
        size_exact,
        log2_size,
        seq_log2_prob,
        class_log2_prob: log2_size + seq_log2_prob,
    }
}

/// The scaled bound functional n f(t) that sandwiches log2 of the class
/// size: n f(t) + c_minus(m) <= log2 |T_t| <= n f(t). The summand for a zero
/// count contributes log2 n (the min saturates there); those contributions
/// are folded into the log n coefficient so the upper bound is exactly 0 for
/// constant types instead of accumulating rounding residue.
pub fn n_f_bound(t: &TypeVector) -> f64 {
    let n = t.n() as f64;
    let log2n = n.log2();
    let mut zeros = 0usize;
    let mut minsum = 0.0;
    let mut n_entropy = 0.0;
    for &c in t.counts() {
        if c == 0 {
            zeros += 1;
        } else {
            let info = -((c as f64 / n).log2());
            n_entropy += c as f64 * info;
            minsum += log2n.min(info);
        }
    }
    let coeff = (1.0 - t.m() as f64) / 2.0 + zeros as f64 / 2.0;
    n_entropy + coeff * log2n + 0.5 * minsum
}

/// The per-symbol form f(t) = n_f_bound(t)/n.
pub fn f_bound(t: &TypeVector) -> f64 {
    n_f_bound(t) / t.n() as f64
}

/// The additive constant in the lower half of the sandwich.
pub fn c_minus(m: usize) -> f64 {
    let m = m as f64;
    (1.0 - m) / 2.0 * (2.0 * std::f64::consts::PI).log2() - m / (12.0 * std::f64::consts::LN_2)
}

/// All types at blocklength n over an alphabet of size m, flattened into one
/// table in descending lexicographic order. Index into the table is the
/// canonical type id used by every ordering in the crate.
pub struct TypeSet {
    n: u32,
    m: usize,
    counts: Vec<u32>,
    log2_fact: Vec<f64>,
}

impl TypeSet {
    pub fn for_alphabet(n: u32, alphabet: &crate::dist::Alphabet) -> Result<Self> {
        Self::enumerate(n, alphabet.size())
    }

    pub fn enumerate(n: u32, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidType("n must be at least 1".into()));
        }
        if m == 0 || m > 64 {
            return Err(Error::InvalidAlphabet(format!(
                "alphabet size {m} outside supported range 1..=64"
            )));
        }
        let total = count_types(n, m).ok_or_else(|| {
            Error::TooLarge(format!("type count for n={n}, m={m} overflows usize"))
        })?;
        let mut counts = Vec::new();
        counts
            .try_reserve_exact(
                total.checked_mul(m).ok_or_else(|| {
                    Error::TooLarge(format!("type table for n={n}, m={m} overflows"))
                })?,
            )
            .map_err(|_| Error::TooLarge(format!("type table for n={n}, m={m}")))?;
        let mut cur = vec![0u32; m];
        cur[0] = n;
        loop {
            counts.extend_from_slice(&cur);
            if !next_type_desc(&mut cur) {
                break;
            }
        }
        debug_assert_eq!(counts.len(), total * m);
        Ok(Self {
            n,
            m,
            counts,
            log2_fact: log2_factorials(n),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.counts.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn counts(&self, id: usize) -> &[u32] {
        &self.counts[id * self.m..(id + 1) * self.m]
    }

    pub fn type_vector(&self, id: usize) -> TypeVector {
        TypeVector::new(self.counts(id).to_vec()).expect("table rows are valid types")
    }

    #[inline]
    pub fn support_mask(&self, id: usize) -> u64 {
        support_mask_of(self.counts(id))
    }

    /// log2 of the exact class size via the factorial table; absolute error
    /// a few ulps of the table entries.
    #[inline]
    pub fn log2_size(&self, id: usize) -> f64 {
        let mut v = self.log2_fact[self.n as usize];
        for &c in self.counts(id) {
            v -= self.log2_fact[c as usize];
        }
        v
    }

    #[inline]
    pub fn seq_log2_prob(&self, id: usize, p: &Dist) -> f64 {
        seq_log2_prob_of_counts(self.counts(id), p)
    }

    #[inline]
    pub fn entropy(&self, id: usize) -> f64 {
        entropy_of_counts(self.counts(id), self.n)
    }

    /// Exact class sizes for every type, in table order.
    ///
    /// A descending-lex step decrements one coordinate and pours the whole
    /// remaining tail onto the next position, so the multinomial updates by
    /// the exact ratio c_j/(tail+1): one small multiply and one exact divide
    /// per type.
    pub fn exact_sizes(&self) -> Vec<BigUint> {
        let mut out = Vec::with_capacity(self.len());
        let mut cur = vec![0u32; self.m];
        cur[0] = self.n;
        let mut size = BigUint::one();
        loop {
            out.push(size.clone());
            match next_desc_info(&cur) {
                None => break,
                Some((j, bump)) => {
                    size *= cur[j];
                    let advanced = next_type_desc(&mut cur);
                    debug_assert!(advanced);
                    size /= bump;
                }
            }
        }
        debug_assert_eq!(out.len(), self.len());
        out
    }

    /// Class probabilities under P in linear domain, in table order.
    pub fn class_probs(&self, p: &Dist) -> Vec<f64> {
        (0..self.len())
            .map(|id| (self.log2_size(id) + self.seq_log2_prob(id, p)).exp2())
            .collect()
    }

    /// Probability that the empirical support equals each mask, by direct
    /// summation over types grouped by exact support.
    pub fn support_probs(&self, p: &Dist) -> std::collections::BTreeMap<u64, f64> {
        let mut acc: std::collections::BTreeMap<u64, CompensatedSum> = Default::default();
        for id in 0..self.len() {
            let w = (self.log2_size(id) + self.seq_log2_prob(id, p)).exp2();
            acc.entry(self.support_mask(id)).or_default().add(w);
        }
        acc.into_iter().map(|(k, v)| (k, v.value())).collect()
    }
}

/// Number of compositions of n into m nonnegative parts: binom(n+m-1, m-1),
/// or None if it does not fit in usize.
pub fn count_types(n: u32, m: usize) -> Option<usize> {
    let b = binomial(n as u64 + m as u64 - 1, m as u64 - 1);
    usize::try_from(&b).ok()
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        r *= n - i;
        r /= i + 1;
    }
    r
}

/// The descending-lex successor step, described without mutating: the
/// rightmost coordinate before the last that can be decremented, and the
/// value the next position receives (the tail mass plus one). None at the
/// last type.
#[inline]
pub(crate) fn next_desc_info(counts: &[u32]) -> Option<(usize, u32)> {
    let m = counts.len();
    if m == 1 {
        return None;
    }
    let mut j = m - 1;
    loop {
        if j == 0 {
            return None;
        }
        j -= 1;
        if counts[j] > 0 {
            break;
        }
    }
    let tail: u32 = counts[j + 1..].iter().sum();
    Some((j, tail + 1))
}

/// Advances a count vector to its successor in descending lexicographic
/// order; returns false at the last type (all mass on the final symbol).
#[inline]
pub(crate) fn next_type_desc(counts: &mut [u32]) -> bool {
    let m = counts.len();
    match next_desc_info(counts) {
        None => false,
        Some((j, bump)) => {
            counts[j] -= 1;
            for c in counts.iter_mut().take(m).skip(j + 1) {
                *c = 0;
            }
            counts[j + 1] = bump;
            true
        }
    }
}

/// Streaming enumeration of all types at blocklength n, in descending
/// lexicographic order.
pub struct TypeEnumerator {
    cur: Option<Vec<u32>>,
}

impl TypeEnumerator {
    pub fn new(n: u32, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidType("n must be at least 1".into()));
        }
        if m == 0 || m > 64 {
            return Err(Error::InvalidAlphabet(format!(
                "alphabet size {m} outside supported range 1..=64"
            )));
        }
        let mut first = vec![0u32; m];
        first[0] = n;
        Ok(Self { cur: Some(first) })
    }
}

impl Iterator for TypeEnumerator {
    type Item = TypeVector;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.cur.take()?;
        let out = TypeVector::new(cur.clone()).expect("enumerator yields valid types");
        let mut next = cur;
        if next_type_desc(&mut next) {
            self.cur = Some(next);
        }
        Some(out)
    }
}
