//! Independent reference implementations used by the verification suite and
//! the test oracles. Everything here is deliberately slow and direct.

use crate::converse::KraftProfile;
use crate::quadrature::adaptive_simpson;

/// Gaussian upper tail by direct quadrature of the density. Oracle for the
/// fast erfc-based implementation. The absolute tolerance is scaled to the
/// tail magnitude so the oracle stays relatively accurate far out.
pub fn gaussian_tail_quadrature(x: f64) -> f64 {
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let hi = x + 45.0;
    let scale = (density(x.max(0.0)) / (x.abs() + 1.0)).max(1e-300);
    adaptive_simpson(density, x, hi, 1e-14 * scale).expect("gaussian density is smooth")
}

/// Solves the Kraft length-allocation linear program by vertex enumeration:
///
///   maximize t subject to
///     sum_{j<=i} 2^(k_j - k_i) alpha_j >= t   for every level i,
///     sum_i alpha_i <= 1,  alpha_i >= 0,  t >= 0.
///
/// Every choice of dim active constraints is solved as a linear system and
/// checked for feasibility; the best feasible vertex is returned. Intended
/// for small profiles (at most 6 levels).
pub fn kraft_lp_bruteforce(profile: &KraftProfile) -> f64 {
    let ks = profile.levels();
    let nvar = ks.len() + 1; // alphas then t
                             // constraints as rows (coeffs, rhs) meaning coeffs . v >= rhs
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..ks.len() {
        let mut c = vec![0.0; nvar];
        for j in 0..=i {
            c[j] = ((ks[j] as f64) - (ks[i] as f64)).exp2();
        }
        c[nvar - 1] = -1.0;
        rows.push((c, 0.0));
    }
    {
        let mut c = vec![-1.0; nvar];
        c[nvar - 1] = 0.0;
        rows.push((c, -1.0));
    }
    for j in 0..ks.len() {
        let mut c = vec![0.0; nvar];
        c[j] = 1.0;
        rows.push((c, 0.0));
    }
    {
        let mut c = vec![0.0; nvar];
        c[nvar - 1] = 1.0;
        rows.push((c, 0.0));
    }

    let mut best = f64::NEG_INFINITY;
    let mut chosen: Vec<usize> = (0..nvar).collect();
    loop {
        if let Some(v) = solve_square(&rows, &chosen, nvar) {
            let feasible = rows.iter().all(|(c, rhs)| {
                let lhs: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                lhs >= rhs - 1e-9
            });
            if feasible {
                best = best.max(v[nvar - 1]);
            }
        }
        if !next_combination(&mut chosen, rows.len()) {
            break;
        }
    }
    best
}

fn solve_square(rows: &[(Vec<f64>, f64)], chosen: &[usize], nvar: usize) -> Option<Vec<f64>> {
    let mut a = vec![vec![0.0; nvar + 1]; nvar];
    for (r, &idx) in chosen.iter().enumerate() {
        a[r][..nvar].copy_from_slice(&rows[idx].0);
        a[r][nvar] = rows[idx].1;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..nvar {
        let pivot = (col..nvar).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite")
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col {
                let factor = row[col] / pivot_row[col];
                for (dst, src) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *dst -= factor * src;
                }
            }
        }
    }
    Some((0..nvar).map(|r| a[r][nvar] / a[r][r]).collect())
}

/// Deterministic family of strictly increasing length profiles spanning 1 to
/// 6 levels (ladder index up to 5) with per-step gaps of 1..3 and top levels
/// below 21, truncated to `limit` with an even spread across lengths.
pub fn kraft_test_profiles(limit: usize) -> Vec<Vec<u32>> {
    let mut profiles: Vec<Vec<u32>> = Vec::new();
    // short ladders exhaust early (3 one-level, 9 two-level profiles), so
    // the quota leans on the longer ones
    let per_length = limit.div_ceil(4);
    for len in 1..=6usize {
        let mut gaps = vec![1u32; len];
        let mut taken = 0usize;
        loop {
            let mut ks = Vec::with_capacity(len);
            let mut acc = 0u32;
            for (i, &g) in gaps.iter().enumerate() {
                acc = if i == 0 { g - 1 } else { acc + g };
                ks.push(acc);
            }
            debug_assert!(*ks.last().unwrap() <= 20);
            profiles.push(ks);
            taken += 1;
            if taken >= per_length {
                break;
            }
            let mut pos = len;
            let mut advanced = false;
            while pos > 0 {
                pos -= 1;
                if gaps[pos] < 3 {
                    gaps[pos] += 1;
                    for g in gaps.iter_mut().skip(pos + 1) {
                        *g = 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    profiles.truncate(limit);
    profiles
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        if idx[i] < n - (k - i) {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
}
