//! Converse machinery: mixtures of i.i.d. sources over a discretized
//! constant-J manifold, the finite-blocklength mixture lower bound on
//! epsilon, the mixture value bound, and the closed-form Kraft length
//! allocation.

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::gaussian::q_inv;
use crate::numeric::{log2_sum_exp, CompensatedSum};
use crate::typeset::TypeSet;

/// The dispersion-adjusted entropy J(P) = H(P) + sqrt(V(P)/n) Qinv(eps).
pub fn j_functional(p: &Dist, eps: f64, n: u32) -> Result<f64> {
    Ok(p.entropy() + (p.varentropy() / n as f64).sqrt() * q_inv(eps)?)
}

/// A discretized set of distributions sharing the same J value, used as the
/// mixture support of the converse bound.
#[derive(Debug, Clone)]
pub struct ManifoldGrid {
    pub points: Vec<Dist>,
    pub gamma: f64,
    pub eps: f64,
    pub n: u32,
    pub beta_floor: f64,
    /// Ambient-alphabet indices the grid lives on.
    pub support: Vec<usize>,
    /// Rays that exited the beta floor before crossing gamma.
    pub dropped_rays: usize,
}

impl ManifoldGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Discrete surrogate for the manifold volume: point count times the
    /// mean nearest-neighbor spacing raised to the manifold dimension.
    pub fn volume_surrogate(&self, dim: usize) -> f64 {
        if dim == 0 {
            return self.points.len() as f64;
        }
        let spacing = self.mean_nn_spacing();
        self.points.len() as f64 * spacing.powi(dim as i32)
    }

    fn mean_nn_spacing(&self) -> f64 {
        let pts = &self.points;
        if pts.len() < 2 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (i, a) in pts.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, b) in pts.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d: f64 = a
                    .probs()
                    .iter()
                    .zip(b.probs())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
            acc += best;
        }
        acc / pts.len() as f64
    }
}

fn embed(ambient_m: usize, support: &[usize], local: &[f64]) -> Result<Dist> {
    let mut probs = vec![0.0; ambient_m];
    for (slot, &x) in support.iter().enumerate() {
        probs[x] = local[slot];
    }
    Dist::normalized(probs)
}

/// Discretizes {P : supp P = support, J(P) = gamma, P(x) >= beta_floor}.
///
/// Two-symbol supports give a finite set (at most two points), returned
/// exactly from root-finding on the one-parameter family. Three-symbol
/// supports are swept by rays from the barycenter with Brent-style bisection
/// along each ray; rays that exit the beta floor before crossing gamma are
/// dropped and counted. Larger supports are not implemented.
pub fn entropy_sphere_grid(
    ambient_m: usize,
    support: &[usize],
    gamma: f64,
    eps: f64,
    n: u32,
    resolution: usize,
    beta_floor: f64,
) -> Result<ManifoldGrid> {
    if support.len() < 2 || support.iter().any(|&x| x >= ambient_m) {
        return Err(Error::Domain(format!(
            "support {support:?} invalid for ambient alphabet of {ambient_m}"
        )));
    }
    let max_gamma = (support.len() as f64).log2();
    if !(gamma > 0.0 && gamma < max_gamma) {
        return Err(Error::Domain(format!(
            "gamma {gamma} outside (0, log2 {})",
            support.len()
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let j_local = |local: &[f64]| -> f64 {
        let mut h = 0.0;
        let mut second = 0.0;
        for &p in local {
            if p > 0.0 {
                let info = -p.log2();
                h += p * info;
                second += p * info * info;
            }
        }
        let v = (second - h * h).max(0.0);
        h + (v / n as f64).sqrt() * q_inv(eps).expect("eps validated")
    };

    let mut points: Vec<Dist> = Vec::new();
    let mut dropped = 0usize;

    match support.len() {
        2 => {
            // scan + bisect the scalar family (p, 1-p)
            let f = |p: f64| j_local(&[p, 1.0 - p]) - gamma;
            let steps = 40_000usize;
            let lo = beta_floor.max(1e-9);
            let hi = 0.5;
            let mut roots: Vec<f64> = Vec::new();
            let mut prev = lo;
            let mut fprev = f(prev);
            for s in 1..=steps {
                let x = lo + (hi - lo) * s as f64 / steps as f64;
                let fx = f(x);
                if fprev == 0.0 {
                    roots.push(prev);
                } else if fprev * fx < 0.0 {
                    let (mut a, mut b) = (prev, x);
                    for _ in 0..200 {
                        let mid = 0.5 * (a + b);
                        if f(a) * f(mid) <= 0.0 {
                            b = mid;
                        } else {
                            a = mid;
                        }
                        if (b - a).abs() < 1e-15 {
                            break;
                        }
                    }
                    roots.push(0.5 * (a + b));
                }
                prev = x;
                fprev = fx;
            }
            if f(0.5).abs() < 1e-12 {
                roots.push(0.5);
            }
            roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            for r in roots {
                points.push(embed(ambient_m, support, &[r, 1.0 - r])?);
                if (r - 0.5).abs() > 1e-9 {
                    points.push(embed(ambient_m, support, &[1.0 - r, r])?);
                }
            }
            points.sort_by(|a, b| {
                a.probs()
                    .partial_cmp(b.probs())
                    .expect("probabilities are finite")
            });
            points.dedup_by(|a, b| {
                a.probs()
                    .iter()
                    .zip(b.probs())
                    .all(|(x, y)| (x - y).abs() < 1e-9)
            });
        }
        3 => {
            // rays from the barycenter in the plane of the local simplex
            let u = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
            let v = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
            let center = 1.0 / 3.0;
            for i in 0..resolution {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
                let dir = [
                    u[0] * theta.cos() + v[0] * theta.sin(),
                    u[1] * theta.cos() + v[1] * theta.sin(),
                    u[2] * theta.cos() + v[2] * theta.sin(),
                ];
                // largest r keeping all coordinates >= beta_floor
                let mut r_max = f64::INFINITY;
                for &d in &dir {
                    if d < 0.0 {
                        r_max = r_max.min((beta_floor - center) / d);
                    }
                }
                let local_at = |r: f64| -> [f64; 3] {
                    [
                        center + r * dir[0],
                        center + r * dir[1],
                        center + r * dir[2],
                    ]
                };
                let g = |r: f64| j_local(&local_at(r)) - gamma;
                // J at the barycenter is log2(3) > gamma; find a sign change
                let steps = 64;
                let mut found = None;
                let mut prev_r = 1e-7;
                let mut prev_g = g(prev_r);
                for s in 1..=steps {
                    let r = r_max * s as f64 / steps as f64;
                    let gr = g(r);
                    if prev_g * gr <= 0.0 {
                        let (mut a, mut b) = (prev_r, r);
                        for _ in 0..200 {
                            let mid = 0.5 * (a + b);
                            if g(a) * g(mid) <= 0.0 {
                                b = mid;
                            } else {
                                a = mid;
                            }
                            if (b - a).abs() < 1e-16 * r_max.max(1.0) {
                                break;
                            }
                        }
                        found = Some(0.5 * (a + b));
                        break;
                    }
                    prev_r = r;
                    prev_g = gr;
                }
                match found {
                    Some(r) => {
                        let local = local_at(r);
                        let d = embed(ambient_m, support, &local)?;
                        // degenerate-dispersion points are useless in the mixture
                        if d.varentropy() >= 1e-6 && local.iter().all(|&x| x >= beta_floor * 0.999)
                        {
                            points.push(d);
                        } else {
                            dropped += 1;
                        }
                    }
                    None => dropped += 1,
                }
            }
        }
        _ => {
            return Err(Error::Unsupported(
                "constant-J grids are implemented for supports of 2 and 3 symbols".into(),
            ));
        }
    }

    let grid = ManifoldGrid {
        points,
        gamma,
        eps,
        n,
        beta_floor,
        support: support.to_vec(),
        dropped_rays: dropped,
    };
    for p in &grid.points {
        let j = j_functional(p, eps, n)?;
        if (j - gamma).abs() > 1e-10 {
            return Err(Error::RootFinding(format!(
                "grid point off the manifold: |J - gamma| = {}",
                (j - gamma).abs()
            )));
        }
    }
    Ok(grid)
}

/// log2 of the uniform-mixture probability of one sequence of the given
/// type: log-sum-exp of the per-point sequence log probabilities minus
/// log2(number of points). -inf when the type leaves the grid support.
pub fn mixture_type_log2_prob(counts: &[u32], grid: &ManifoldGrid) -> f64 {
    let terms: Vec<f64> = grid
        .points
        .iter()
        .map(|p| {
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
        })
        .collect();
    log2_sum_exp(&terms) - (grid.points.len() as f64).log2()
}

/// Batch version over a whole type table.
pub fn mixture_log2_probs(ts: &TypeSet, grid: &ManifoldGrid) -> Vec<f64> {
    (0..ts.len())
        .map(|id| mixture_type_log2_prob(ts.counts(id), grid))
        .collect()
}

/// The mixture converse at one tau: P-bar(-log2 P-bar(X^n) >= k + tau)
/// - 2^(-tau), clamped to [0, 1]. Exact summation over all types.
pub fn converse_epsilon_lower(ts: &TypeSet, grid: &ManifoldGrid, k_bits: u64, tau: f64) -> f64 {
    let mix = mixture_log2_probs(ts, grid);
    converse_epsilon_lower_with(ts, &mix, k_bits, tau)
}

/// Same bound reusing precomputed mixture log probabilities.
pub fn converse_epsilon_lower_with(
    ts: &TypeSet,
    mixture_log2: &[f64],
    k_bits: u64,
    tau: f64,
) -> f64 {
    debug_assert!(tau > 0.0);
    let threshold = k_bits as f64 + tau;
    let mut acc = CompensatedSum::new();
    for (id, &lp) in mixture_log2.iter().enumerate() {
        if lp != f64::NEG_INFINITY && -lp >= threshold {
            acc.add((ts.log2_size(id) + lp).exp2());
        }
    }
    (acc.value() - (-tau).exp2()).clamp(0.0, 1.0)
}

/// The tau grid used when maximizing the bound: the proof's half-log-n point
/// plus a geometric sweep of [1, 2 log2 n].
pub fn tau_grid(n: u32) -> Vec<f64> {
    let log2n = (n as f64).log2();
    let mut taus = vec![0.5 * log2n];
    let hi = 2.0 * log2n;
    let steps = 24;
    for i in 0..=steps {
        taus.push(hi.powf(i as f64 / steps as f64));
    }
    taus.sort_by(|a, b| a.partial_cmp(b).expect("taus are finite"));
    taus.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    taus
}

/// Maximizes the converse bound over the tau grid; returns (bound, tau*).
pub fn converse_epsilon_lower_max(ts: &TypeSet, grid: &ManifoldGrid, k_bits: u64) -> (f64, f64) {
    let mix = mixture_log2_probs(ts, grid);
    let mut best = (f64::NEG_INFINITY, 1.0);
    for tau in tau_grid(ts.n()) {
        let b = converse_epsilon_lower_with(ts, &mix, k_bits, tau);
        if b > best.0 {
            best = (b, tau);
        }
    }
    best
}

/// Excess of the mixture log probability of a type over the Laplace-style
/// upper bound -n H(t) - log2 Vol + (dim/2) log2(2 pi/(p_min n)).
///
/// Errors when the KL projection onto the grid is ambiguous (two grid points
/// within tolerance of the minimum divergence); callers count such types.
pub fn mixture_bound_check(counts: &[u32], n: u32, grid: &ManifoldGrid, dim: usize) -> Result<f64> {
    let t_total: u64 = counts.iter().map(|&c| c as u64).sum();
    debug_assert_eq!(t_total, n as u64);
    let grid_mask: u64 = grid.support.iter().fold(0, |m, &x| m | (1 << x));
    let type_mask: u64 = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .fold(0, |m, (x, _)| m | (1 << x));
    if type_mask & !grid_mask != 0 {
        return Err(Error::Domain("type support leaves the grid support".into()));
    }
    // p_min over the grid support of the empirical frequencies
    let p_min = grid
        .support
        .iter()
        .map(|&x| counts[x] as f64 / n as f64)
        .fold(f64::INFINITY, f64::min);
    if p_min <= 0.0 {
        return Err(Error::Domain(
            "type misses a grid-support symbol; the bound degenerates".into(),
        ));
    }
    // unique KL projection onto the discrete grid
    let mut best = f64::INFINITY;
    let mut second = f64::INFINITY;
    for p in &grid.points {
        let mut d = 0.0;
        for (x, &c) in counts.iter().enumerate() {
            if c > 0 {
                let f = c as f64 / n as f64;
                d += f * (f.log2() - p.log2_prob(x));
            }
        }
        if d < best {
            second = best;
            best = d;
        } else if d < second {
            second = d;
        }
    }
    if (second - best).abs() < 1e-12 {
        return Err(Error::Domain(
            "ambiguous KL projection onto the grid".into(),
        ));
    }
    let h = crate::typeset::entropy_of_counts(counts, n);
    let vol = grid.volume_surrogate(dim);
    let rhs = -(n as f64) * h - vol.log2()
        + (dim as f64 / 2.0) * (2.0 * std::f64::consts::PI / (p_min * n as f64)).log2();
    Ok(mixture_type_log2_prob(counts, grid) - rhs)
}

/// A strictly increasing ladder of codeword lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KraftProfile {
    levels: Vec<u32>,
}

impl KraftProfile {
    pub fn new(levels: Vec<u32>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Domain("profile needs at least one level".into()));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("levels must be strictly increasing".into()));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }
}

/// Closed form of the Kraft length-allocation linear program:
/// t = 1 / sum_i (1 - 2^(k_(i-1) - k_i)), with the i = 0 term equal to 1.
pub fn kraft_lp_optimal(profile: &KraftProfile) -> f64 {
    let ks = profile.levels();
    let mut denom = 1.0; // k_{-1} = -infinity
    for w in ks.windows(2) {
        denom += 1.0 - ((w[0] as f64) - (w[1] as f64)).exp2();
    }
    1.0 / denom
}

/// Mixture normalization: sum over all types of class size times mixture
/// per-sequence probability; should be 1.
pub fn mixture_total_mass(ts: &TypeSet, grid: &ManifoldGrid) -> f64 {
    let mix = mixture_log2_probs(ts, grid);
    let mut acc = CompensatedSum::new();
    for (id, &lp) in mix.iter().enumerate() {
        if lp != f64::NEG_INFINITY {
            acc.add((ts.log2_size(id) + lp).exp2());
        }
    }
    acc.value()
}

/// Worst-case Type Size bit count over the grid points, the k entering the
/// mixture converse.
pub fn worst_case_type_size_bits(ts: &TypeSet, grid: &ManifoldGrid, eps: f64) -> Result<u64> {
    let mut worst = 0u64;
    for p in &grid.points {
        worst = worst.max(crate::universal::type_size_bits(ts, p, eps)?);
    }
    Ok(worst)
}
