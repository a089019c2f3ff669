//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "recursion limit reached on [{a}, {b}]"
        )));
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Integrates f over [a, b] to the given absolute tolerance.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 64)
}

/// Integrates f over [a, b] to the given relative tolerance, using a coarse
/// pass to scale the absolute budget.
pub fn adaptive_simpson_rel(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let coarse = adaptive_simpson(&f, a, b, 1e-6)?;
    let scale = coarse.abs().max(1e-300);
    adaptive_simpson(&f, a, b, rel_tol * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn peaked_gaussian() {
        // int exp(-1000 x^2) over R = sqrt(pi/1000)
        let v = adaptive_simpson_rel(|x: f64| (-1000.0 * x * x).exp(), -2.0, 2.0, 1e-12).unwrap();
        let exact = (std::f64::consts::PI / 1000.0).sqrt();
        assert!(((v - exact) / exact).abs() < 1e-11);
    }
}
