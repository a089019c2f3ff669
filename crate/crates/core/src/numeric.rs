//! Low-level numeric helpers shared across the crate: compensated summation,
//! log-domain arithmetic, big-integer/float conversions, and deterministic
//! float formatting.
//!
//! Probabilities are carried in base-2 log domain as `f64`; exact counts are
//! [`BigUint`]. These helpers are the only place where the two worlds meet.

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub const LN_2: f64 = std::f64::consts::LN_2;

/// Neumaier-compensated accumulator. Keeps absolute error near one ulp of the
/// final sum even for millions of terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// log2(2^a + 2^b), tolerant of -inf inputs.
#[inline]
pub fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp2().ln_1p() / LN_2
}

/// log2 of a sum of exponentials, max-shifted for stability.
pub fn log2_sum_exp(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add((v - hi).exp2());
    }
    hi + acc.value().log2()
}

/// log2(1 - 2^x) for x < 0, accurate near x = 0.
#[inline]
pub fn log2_one_minus_exp2(x: f64) -> f64 {
    debug_assert!(x < 0.0);
    (-(x * LN_2).exp_m1()).log2()
}

/// log2 of a positive big natural, accurate to a few ulps.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        let v: u64 = x.iter_u64_digits().next().unwrap_or(0);
        return (v as f64).log2();
    }
    // Top 64 bits carry full f64 precision; the shift is exact.
    let shift = bits - 64;
    let top: u64 = (x >> shift).iter_u64_digits().next().unwrap();
    (top as f64).log2() + shift as f64
}

/// a/b in f64 for big naturals with a <= b (or not), via the log domain.
pub fn biguint_ratio(a: &BigUint, b: &BigUint) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    (log2_biguint(a) - log2_biguint(b)).exp2()
}

/// Floor of log2 for a positive big natural: rank 1 -> 0, ranks 2-3 -> 1, ...
pub fn floor_log2(x: &BigUint) -> u64 {
    debug_assert!(!x.is_zero());
    x.bits() - 1
}

/// Ceiling of log2 for a positive big natural.
pub fn ceil_log2(x: &BigUint) -> u64 {
    debug_assert!(!x.is_zero());
    if x.is_one() {
        0
    } else {
        (x - 1u32).bits()
    }
}

/// Running table of log2(j!) for j = 0..=n, compensated so the absolute error
/// stays near one ulp of the entry.
pub fn log2_factorials(n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for j in 1..=n {
        acc.add((j as f64).log2());
        out.push(acc.value());
    }
    out
}

/// Rounds to 12 significant digits, then prints the shortest representation
/// that round-trips. Used for all report output so byte-identical reruns are
/// possible.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float");
    format!("{rounded}")
}
