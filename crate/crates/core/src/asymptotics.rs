//! Finite-n distributions of the empirical entropy and of the log type-class
//! size, their Gaussian approximations with explicit constants, and the
//! second/third-order rate predictions with least-squares estimation of the
//! third-order coefficient.

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::gaussian::{q, q_inv};
use crate::numeric::CompensatedSum;
use crate::typeset::TypeSet;

/// Which code family a rate prediction refers to; fixes the third-order
/// coefficient of the expansion H + sqrt(V/n) Qinv(eps) + c log2(n)/n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateVariant {
    /// Non-universal optimal code: c = -1/2.
    Optimal,
    /// Type Size code: c = (|supp P| - 3)/2.
    TypeSize,
    /// Two-Stage codes (either second stage): c = (|supp P| - 1)/2.
    TwoStage,
}

impl RateVariant {
    pub fn third_order_coefficient(&self, support_size: usize) -> f64 {
        match self {
            RateVariant::Optimal => -0.5,
            RateVariant::TypeSize => (support_size as f64 - 3.0) / 2.0,
            RateVariant::TwoStage => (support_size as f64 - 1.0) / 2.0,
        }
    }
}

/// The three-term rate expansion for one source law and code family.
#[derive(Debug, Clone, Copy)]
pub struct RatePrediction {
    pub h: f64,
    pub v: f64,
    pub c: f64,
}

impl RatePrediction {
    pub fn new(p: &Dist, variant: RateVariant) -> Self {
        Self {
            h: p.entropy(),
            v: p.varentropy(),
            c: variant.third_order_coefficient(p.support_size()),
        }
    }

    pub fn value(&self, n: u32, eps: f64) -> Result<f64> {
        let nf = n as f64;
        Ok(self.h + (self.v / nf).sqrt() * q_inv(eps)? + self.c * nf.log2() / nf)
    }
}

pub fn predicted_rate(p: &Dist, n: u32, eps: f64, variant: RateVariant) -> Result<f64> {
    RatePrediction::new(p, variant).value(n, eps)
}

/// Exact P[H(t_{X^n}) >= H(P) + sqrt(V(P)/n) delta] by summation of class
/// probabilities over all types crossing the threshold (closed inequality).
pub fn empirical_entropy_cdf(ts: &TypeSet, p: &Dist, delta: f64) -> f64 {
    let threshold = p.entropy() + (p.varentropy() / ts.n() as f64).sqrt() * delta;
    let mut acc = CompensatedSum::new();
    for id in 0..ts.len() {
        if ts.entropy(id) >= threshold {
            let lp = ts.seq_log2_prob(id, p);
            if lp != f64::NEG_INFINITY {
                acc.add((ts.log2_size(id) + lp).exp2());
            }
        }
    }
    acc.value()
}

/// The explicit Berry-Esseen-style constant of the empirical-entropy bound:
/// B = max(4/beta^2, 1 + m/beta + 400 m^3 / beta^(3/2) + 1/sqrt(2 pi beta)).
pub fn empirical_entropy_constant(m: usize, beta: f64) -> f64 {
    let mf = m as f64;
    let first = 4.0 / (beta * beta);
    let second = 1.0
        + mf / beta
        + 400.0 * mf.powi(3) / beta.powf(1.5)
        + 1.0 / (2.0 * std::f64::consts::PI * beta).sqrt();
    first.max(second)
}

/// Deviation of the exact empirical-entropy CDF from Q(delta), with the
/// explicit constant B; the bound deviation <= B/sqrt(n) requires
/// P(x) >= beta on the whole alphabet and V(P) >= beta.
pub fn empirical_entropy_deviation(
    ts: &TypeSet,
    p: &Dist,
    delta: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    if beta <= 0.0 {
        return Err(Error::Domain("beta must be positive".into()));
    }
    if p.len() != ts.m() {
        return Err(Error::Domain("distribution and table disagree on m".into()));
    }
    if p.probs().iter().any(|&x| x < beta) || p.varentropy() < beta {
        return Err(Error::Domain(format!(
            "needs P(x) >= beta and V(P) >= beta with beta = {beta}"
        )));
    }
    let cdf = empirical_entropy_cdf(ts, p, delta);
    let b = empirical_entropy_constant(ts.m(), beta);
    Ok(((cdf - q(delta)).abs(), b))
}

/// Exact P(log2 |T_t| > gamma) by summation over types.
pub fn log_type_size_cdf(ts: &TypeSet, p: &Dist, gamma: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for id in 0..ts.len() {
        if ts.log2_size(id) > gamma {
            let lp = ts.seq_log2_prob(id, p);
            if lp != f64::NEG_INFINITY {
                acc.add((ts.log2_size(id) + lp).exp2());
            }
        }
    }
    acc.value()
}

/// Deviation of the log-type-size tail from its Gaussian approximation
/// Q((gamma - (1-|supp|)/2 log2 n - n H)/sqrt(n V)); the matching constant is
/// existential, so callers track the deviation across an n-sweep.
pub fn log_type_size_deviation(ts: &TypeSet, p: &Dist, gamma: f64) -> Result<f64> {
    let v = p.varentropy();
    if v <= 0.0 {
        return Err(Error::Domain("V(P) must be positive".into()));
    }
    let nf = ts.n() as f64;
    let r = p.support_size() as f64;
    let arg = (gamma - (1.0 - r) / 2.0 * nf.log2() - nf * p.entropy()) / (nf * v).sqrt();
    Ok((log_type_size_cdf(ts, p, gamma) - q(arg)).abs())
}

/// Least-squares line fit; slope is the estimated third-order coefficient
/// when x = log2 n and y is the rate residual.
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::BadFit("need at least two points".into()));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 * n * sxx.max(1.0) {
        return Err(Error::BadFit("singular design matrix".into()));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let mse: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum::<f64>()
        / n;
    Ok(FitResult {
        slope,
        intercept,
        residual: mse.sqrt(),
    })
}

/// Regresses y(n) = nR_bits - n H - sqrt(n V) Qinv(eps) on log2 n. The slope
/// estimates the third-order coefficient of the measured code.
pub fn third_order_fit(points: &[(u32, u64)], p: &Dist, eps: f64) -> Result<FitResult> {
    if points.len() < 5 {
        return Err(Error::BadFit(format!(
            "need at least 5 points, got {}",
            points.len()
        )));
    }
    let n_min = points.iter().map(|&(n, _)| n).min().unwrap();
    let n_max = points.iter().map(|&(n, _)| n).max().unwrap();
    if (n_max as f64) < 8.0 * n_min as f64 {
        return Err(Error::BadFit(format!(
            "n values span {n_min}..{n_max}, less than a factor 8"
        )));
    }
    let h = p.entropy();
    let v = p.varentropy();
    let qi = q_inv(eps)?;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, bits)| {
            let nf = n as f64;
            (nf.log2(), bits as f64 - nf * h - (nf * v).sqrt() * qi)
        })
        .collect();
    fit_line(&xy)
}

/// Geometric blocklength grid from lo to hi with half-power-of-two steps,
/// deduplicated and clamped to the endpoints.
pub fn geometric_grid(lo: u32, hi: u32) -> Vec<u32> {
    assert!(lo >= 1 && hi >= lo);
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let v = (lo as f64 * 2f64.powf(i as f64 / 2.0)).round() as u32;
        if v >= hi {
            out.push(hi);
            break;
        }
        out.push(v);
        i += 1;
    }
    out.dedup();
    out
}
