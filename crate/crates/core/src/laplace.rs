//! Numeric verification of the Laplace approximation on a small catalog of
//! integrands: a pure Gaussian (exact), a quartic perturbation, and a
//! KL-divergence integrand along a constant-entropy curve in the ternary
//! simplex (the manifold case that drives the mixture bound).

use crate::converse::entropy_sphere_grid;
use crate::error::{Error, Result};
use crate::numeric::LN_2;
use crate::quadrature::adaptive_simpson_rel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceCase {
    /// f(x) = x^2/2 on the line; the approximation is exact.
    Gaussian,
    /// f(x) = x^2/2 + x^4 on the line; relative error decays like 1/n.
    Quartic,
    /// f(P) = ln2 * D(t || P) along the H(P) = 1.2 curve in the ternary
    /// simplex, with t a fixed point on the curve.
    SimplexCurve,
}

impl LaplaceCase {
    pub fn all() -> [LaplaceCase; 3] {
        [
            LaplaceCase::Gaussian,
            LaplaceCase::Quartic,
            LaplaceCase::SimplexCurve,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            LaplaceCase::Gaussian => "gaussian",
            LaplaceCase::Quartic => "quartic",
            LaplaceCase::SimplexCurve => "simplex-curve",
        }
    }

    /// Smallest n at which the 1/n error-order check is expected to hold.
    pub fn order_check_threshold(&self) -> Option<u32> {
        match self {
            LaplaceCase::Gaussian => None,
            _ => Some(64),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LaplaceResult {
    pub numeric: f64,
    pub asymptotic: f64,
    pub rel_err: f64,
}

const CURVE_GAMMA: f64 = 1.2;
const CURVE_THETA0: f64 = 0.3;

/// A point on the H(P) = gamma curve in the ternary simplex together with
/// its theta-derivative, by root-finding along the ray at angle theta from
/// the barycenter and implicit differentiation of the entropy constraint.
///
/// The derivative must be analytic: the quadrature drives the integrand to
/// near machine precision, and finite differences on a root-found curve are
/// too noisy for that.
fn curve_eval(theta: f64) -> Result<([f64; 3], [f64; 3])> {
    let u = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let v = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    let center = 1.0 / 3.0;
    let (sin, cos) = theta.sin_cos();
    let dir = [
        u[0] * cos + v[0] * sin,
        u[1] * cos + v[1] * sin,
        u[2] * cos + v[2] * sin,
    ];
    let dir_d = [
        -u[0] * sin + v[0] * cos,
        -u[1] * sin + v[1] * cos,
        -u[2] * sin + v[2] * cos,
    ];
    let mut r_max = f64::INFINITY;
    for &d in &dir {
        if d < 0.0 {
            r_max = r_max.min((1e-9 - center) / d);
        }
    }
    let at = |r: f64| -> [f64; 3] {
        [
            center + r * dir[0],
            center + r * dir[1],
            center + r * dir[2],
        ]
    };
    let entropy =
        |p: &[f64; 3]| -> f64 { p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum() };
    // entropy is strictly concave, so it decreases monotonically along the
    // ray from its maximum at the barycenter: a single root, bisected to ulp
    let g = |r: f64| entropy(&at(r)) - CURVE_GAMMA;
    let (mut a, mut b) = (0.0, r_max);
    if g(a) <= 0.0 || g(b) > 0.0 {
        return Err(Error::RootFinding(format!(
            "entropy curve does not cross gamma along theta={theta}"
        )));
    }
    loop {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if g(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let r = 0.5 * (a + b);
    let p = at(r);
    // dH/dP_x = -(log2 P_x + 1/ln 2); solve dH/dtheta = 0 for dr/dtheta
    let mut grad_dot_dir = 0.0;
    let mut grad_dot_dird = 0.0;
    for x in 0..3 {
        let dh = -(p[x].log2() + 1.0 / LN_2);
        grad_dot_dir += dh * dir[x];
        grad_dot_dird += dh * dir_d[x];
    }
    let r_d = -r * grad_dot_dird / grad_dot_dir;
    let dp = [
        r_d * dir[0] + r * dir_d[0],
        r_d * dir[1] + r * dir_d[1],
        r_d * dir[2] + r * dir_d[2],
    ];
    Ok((p, dp))
}

/// Evaluates the catalog case at blocklength n: the integral by adaptive
/// quadrature against the closed-form Laplace approximation.
pub fn laplace_check(case: LaplaceCase, n: u32) -> Result<LaplaceResult> {
    let nf = n as f64;
    let (numeric, asymptotic) = match case {
        LaplaceCase::Gaussian => {
            let half_width = (1700.0 / nf).sqrt();
            let numeric = adaptive_simpson_rel(
                |x| (-nf * 0.5 * x * x).exp(),
                -half_width,
                half_width,
                1e-12,
            )?;
            (numeric, (2.0 * std::f64::consts::PI / nf).sqrt())
        }
        LaplaceCase::Quartic => {
            let f = |x: f64| 0.5 * x * x + x.powi(4);
            let half_width = (1700.0 / nf).sqrt().max((900.0 / nf).powf(0.25));
            let numeric =
                adaptive_simpson_rel(|x| (-nf * f(x)).exp(), -half_width, half_width, 1e-12)?;
            // f''(0) = 1, g = 1
            (numeric, (2.0 * std::f64::consts::PI / nf).sqrt())
        }
        LaplaceCase::SimplexCurve => {
            let (t, tangent) = curve_eval(CURVE_THETA0)?;
            // f along the curve in nats: ln2 * D(t || P(theta))
            let integrand = |theta: f64| -> f64 {
                let (p, dp) = curve_eval(theta).expect("curve is smooth");
                let mut d = 0.0;
                for x in 0..3 {
                    if t[x] > 0.0 {
                        d += t[x] * (t[x].log2() - p[x].log2());
                    }
                }
                let speed = dp.iter().map(|v| v * v).sum::<f64>().sqrt();
                (-nf * LN_2 * d.max(0.0)).exp() * speed
            };
            let numeric = adaptive_simpson_rel(
                integrand,
                CURVE_THETA0 - std::f64::consts::PI,
                CURVE_THETA0 + std::f64::consts::PI,
                1e-12,
            )?;
            // Hessian of ln2 D(t||P) at P = t is diag(1/t_x); the curvature
            // seen along the unit tangent F is sum F_x^2 / t_x.
            let norm = tangent.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut ftaf = 0.0;
            for x in 0..3 {
                let fx = tangent[x] / norm;
                ftaf += fx * fx / t[x];
            }
            let asym = (2.0 * std::f64::consts::PI / nf).sqrt() / ftaf.sqrt();
            (numeric, asym)
        }
    };
    let rel_err = (numeric / asymptotic - 1.0).abs();
    Ok(LaplaceResult {
        numeric,
        asymptotic,
        rel_err,
    })
}

/// Convenience wrapper tying the catalog to the ternary grid used elsewhere:
/// the curve above is the eps = 0.5 constant-J manifold.
pub fn simplex_curve_grid(resolution: usize) -> Result<crate::converse::ManifoldGrid> {
    entropy_sphere_grid(3, &[0, 1, 2], CURVE_GAMMA, 0.5, 1, resolution, 1e-6)
}
