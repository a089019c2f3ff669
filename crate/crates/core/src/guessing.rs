//! Guessing functions and their equivalence with fixed-to-variable codes:
//! a guesser is an ordering of all sequences; codes induce guessers by
//! sorting codewords by length, and any guesser induces a code by feeding
//! its order into the shortest-string-first assignment.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::coding::{Block, BlockKind, Partition, PartitionKey, RankedCode, EPS_SLACK};
use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::numeric::floor_log2;
use crate::tails::ExactTails;
use crate::typeset::TypeSet;

/// A bijection from sequences to guess ranks, stored at type granularity as
/// an ordered list of (type, run length) pieces over a single rank space.
#[derive(Debug, Clone)]
pub struct GuessingFunction {
    n: u32,
    m: usize,
    pieces: Vec<(u32, BigUint)>,
}

impl GuessingFunction {
    pub fn new(n: u32, m: usize, pieces: Vec<(u32, BigUint)>) -> Self {
        Self { n, m, pieces }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn pieces(&self) -> &[(u32, BigUint)] {
        &self.pieces
    }

    pub fn total(&self) -> BigUint {
        self.pieces.iter().map(|(_, c)| c).sum()
    }

    fn tails(&self) -> ExactTails {
        let ids: Vec<u32> = self.pieces.iter().map(|&(id, _)| id).collect();
        let sizes: Vec<BigUint> = self.pieces.iter().map(|(_, c)| c.clone()).collect();
        ExactTails::new(ids, sizes)
    }
}

/// Splits every block of a code into (codeword length, type, count) pieces.
fn length_pieces(code: &RankedCode) -> Vec<(u64, PartitionKey, usize, u32, BigUint)> {
    let mut out = Vec::new();
    for part in &code.partitions {
        for (bi, b) in part.blocks.iter().enumerate() {
            match &b.kind {
                BlockKind::Fixed { len, count } => {
                    out.push((
                        code.header_bits + len,
                        part.key,
                        bi,
                        b.type_id,
                        count.clone(),
                    ));
                }
                BlockKind::Ranked {
                    first,
                    stride,
                    count,
                } => {
                    if count.is_zero() {
                        continue;
                    }
                    let last = first + (count - 1u32) * *stride;
                    for len in floor_log2(first)..=floor_log2(&last) {
                        let c = crate::coding::progression_in_dyadic(first, *stride, count, len);
                        if !c.is_zero() {
                            out.push((code.header_bits + len, part.key, bi, b.type_id, c));
                        }
                    }
                }
            }
        }
    }
    out
}

fn guesser_from_pieces(
    code: &RankedCode,
    mut pieces: Vec<(u64, PartitionKey, usize, u32, BigUint)>,
) -> GuessingFunction {
    pieces.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    GuessingFunction::new(
        code.n,
        code.m,
        pieces.into_iter().map(|(_, _, _, id, c)| (id, c)).collect(),
    )
}

/// The guesser induced by a plain code (single rank space, no header):
/// guesses follow ascending codeword length, stable within a length.
pub fn code_to_guesser(code: &RankedCode) -> Result<GuessingFunction> {
    if code.partitions.len() != 1 || code.header_bits != 0 {
        return Err(Error::Unsupported(
            "code has partitions or a header; flatten it first".into(),
        ));
    }
    Ok(guesser_from_pieces(code, length_pieces(code)))
}

/// Flattens any code (headers, multiple partitions) into a guesser by
/// ordering all codeword groups by total length, with ties resolved in
/// canonical partition order (support size then mask, or type index).
pub fn flatten_to_guesser(code: &RankedCode) -> GuessingFunction {
    guesser_from_pieces(code, length_pieces(code))
}

/// The code induced by a guesser: its order fed to the shortest-first string
/// assignment, so codeword lengths are exactly floor(log2 guess rank).
pub fn guesser_to_code(g: &GuessingFunction) -> RankedCode {
    let mut blocks = Vec::with_capacity(g.pieces.len());
    let mut next = BigUint::one();
    for (id, count) in &g.pieces {
        blocks.push(Block {
            type_id: *id,
            kind: BlockKind::Ranked {
                first: next.clone(),
                stride: 1,
                count: count.clone(),
            },
        });
        next += count;
    }
    RankedCode {
        n: g.n,
        m: g.m,
        header_bits: 0,
        partitions: vec![Partition {
            key: PartitionKey::Whole,
            blocks,
        }],
    }
}

/// The guessing tail quantile M(G; eps, P): the least m such that the
/// probability of needing more than m guesses is at most eps.
///
/// The tail within the boundary piece is linear in m with the piece's
/// per-sequence probability as slope; the minimal integer is pinned down by
/// exact bisection on the rank, so the result is the exact quantile.
pub fn guessing_tail(g: &GuessingFunction, ts: &TypeSet, p: &Dist, eps: f64) -> Result<BigUint> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let threshold = eps + EPS_SLACK;
    let tails = g.tails();
    let probs = tails.probs(ts, p);
    let tail_at = |m: &BigUint| tails.tail_beyond(&probs, m);

    // first piece whose full consumption brings the tail under eps
    let idx = probs.suffix[1..].partition_point(|&s| s > threshold);
    if idx >= tails.cum.len() {
        return Ok(BigUint::one().max(tails.total()));
    }
    // tail(lower) > threshold by minimality of idx; tail(upper) <= threshold
    let mut lo = if idx == 0 {
        BigUint::zero()
    } else {
        tails.cum[idx - 1].clone()
    };
    let mut hi = tails.cum[idx].clone();
    while &hi - &lo > BigUint::one() {
        let mid = (&lo + &hi) >> 1;
        if tail_at(&mid) <= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(BigUint::one()))
}

/// Bit count of the epsilon-rate induced by a guesser: floor(log2 M) of its
/// tail quantile, which the induced code achieves exactly.
pub fn guesser_rate_bits(g: &GuessingFunction, ts: &TypeSet, p: &Dist, eps: f64) -> Result<u64> {
    Ok(floor_log2(&guessing_tail(g, ts, p, eps)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{epsilon_rate, length_distribution, optimal_code};
    use crate::universal::{type_size_ranked_code, type_size_solution};

    fn identity_guesser(ts: &TypeSet) -> GuessingFunction {
        let sizes = ts.exact_sizes();
        GuessingFunction::new(
            ts.n(),
            ts.m(),
            (0..ts.len())
                .map(|id| (id as u32, sizes[id].clone()))
                .collect(),
        )
    }

    #[test]
    fn identity_guesser_code_lengths() {
        // 4 sequences in enumeration order -> lengths 0,1,1,2
        let ts = TypeSet::enumerate(2, 2).unwrap();
        let g = identity_guesser(&ts);
        let code = guesser_to_code(&g);
        let p = Dist::uniform(2).unwrap();
        let ld = length_distribution(&code, &ts, &p).unwrap();
        let lens: Vec<u64> = ld.mass().iter().map(|&(l, _)| l).collect();
        assert_eq!(lens, vec![0, 1, 2]);
        assert!((ld.tail(0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn uniform_tail_example() {
        // uniform P, n=2: M(G; 0.3) = 3 and floor(log2 3) = 1 = nR
        let ts = TypeSet::enumerate(2, 2).unwrap();
        let p = Dist::uniform(2).unwrap();
        let g = identity_guesser(&ts);
        let m = guessing_tail(&g, &ts, &p, 0.3).unwrap();
        assert_eq!(m, BigUint::from(3u32));
        let code = guesser_to_code(&g);
        let ld = length_distribution(&code, &ts, &p).unwrap();
        assert_eq!(epsilon_rate(&ld, 0.3, 2).unwrap().bits, 1);
    }

    #[test]
    fn point_mass_first_guess() {
        let ts = TypeSet::enumerate(4, 2).unwrap();
        let p = Dist::new(vec![1.0, 0.0]).unwrap();
        // enumeration order starts at the all-first-symbol type
        let g = identity_guesser(&ts);
        for eps in [0.01, 0.5, 0.9] {
            assert_eq!(guessing_tail(&g, &ts, &p, eps).unwrap(), BigUint::one());
        }
    }

    #[test]
    fn tiny_eps_covers_support() {
        let ts = TypeSet::enumerate(3, 2).unwrap();
        let p = Dist::new(vec![0.5, 0.5]).unwrap();
        let g = identity_guesser(&ts);
        let m = guessing_tail(&g, &ts, &p, 1e-9).unwrap();
        assert_eq!(m, BigUint::from(8u32));
    }

    #[test]
    fn optimal_guesser_is_minimal() {
        let ts = TypeSet::enumerate(5, 2).unwrap();
        let p = Dist::new(vec![0.75, 0.25]).unwrap();
        let opt = code_to_guesser(&optimal_code(&ts, &p)).unwrap();
        let idg = identity_guesser(&ts);
        let rev =
            GuessingFunction::new(ts.n(), ts.m(), idg.pieces().iter().rev().cloned().collect());
        for eps in [0.05, 0.2, 0.5] {
            let m_opt = guessing_tail(&opt, &ts, &p, eps).unwrap();
            for g in [&idg, &rev] {
                let m = guessing_tail(g, &ts, &p, eps).unwrap();
                assert!(m_opt <= m, "optimal guesser beaten at eps={eps}");
            }
        }
    }

    #[test]
    fn round_trip_preserves_lengths() {
        let ts = TypeSet::enumerate(4, 2).unwrap();
        let p = Dist::new(vec![0.6, 0.4]).unwrap();
        let code = optimal_code(&ts, &p);
        let g = code_to_guesser(&code).unwrap();
        let code2 = guesser_to_code(&g);
        let ld1 = length_distribution(&code, &ts, &p).unwrap();
        let ld2 = length_distribution(&code2, &ts, &p).unwrap();
        assert!(ld1.tv_distance(&ld2) <= 1e-12);
    }

    #[test]
    fn induced_code_identity_exact() {
        // floor(log2 M(G)) = nR of the induced code, over a grid
        let ts = TypeSet::enumerate(6, 2).unwrap();
        for d in [vec![0.5, 0.5], vec![0.8, 0.2], vec![0.33, 0.67]] {
            let p = Dist::new(d).unwrap();
            let g = code_to_guesser(&optimal_code(&ts, &p)).unwrap();
            let code = guesser_to_code(&g);
            let ld = length_distribution(&code, &ts, &p).unwrap();
            for eps in [0.02, 0.1, 0.3, 0.5, 0.77] {
                let lhs = guesser_rate_bits(&g, &ts, &p, eps).unwrap();
                let rhs = epsilon_rate(&ld, eps, ts.n()).unwrap().bits;
                assert_eq!(lhs, rhs, "eps={eps}");
            }
        }
    }

    #[test]
    fn code_guesser_inequality() {
        // from any code, the induced guesser satisfies
        // floor(log2 M) <= nR of that code
        let ts = TypeSet::enumerate(5, 2).unwrap();
        let p = Dist::new(vec![0.7, 0.3]).unwrap();
        let code = optimal_code(&ts, &p);
        let ld = length_distribution(&code, &ts, &p).unwrap();
        let g = code_to_guesser(&code).unwrap();
        for eps in [0.01, 0.15, 0.4, 0.8] {
            let m = guessing_tail(&g, &ts, &p, eps).unwrap();
            let nr = epsilon_rate(&ld, eps, ts.n()).unwrap().bits;
            assert!(floor_log2(&m) <= nr);
        }
    }

    #[test]
    fn flattened_type_size_guesser_bound() {
        // M of the flattened Type Size guesser is at most 2^m times M*
        for (n, m, d) in [
            (6u32, 2usize, vec![0.7, 0.3]),
            (5, 3, vec![0.5, 0.3, 0.2]),
            (8, 2, vec![0.45, 0.55]),
        ] {
            let ts = TypeSet::enumerate(n, m).unwrap();
            let p = Dist::new(d).unwrap();
            let code = type_size_ranked_code(&ts);
            let g = flatten_to_guesser(&code);
            for eps in [0.05, 0.2, 0.5] {
                let big_m = guessing_tail(&g, &ts, &p, eps).unwrap();
                let sol = type_size_solution(&ts, &p, eps).unwrap();
                let bound = sol.m_star << m;
                assert!(big_m <= bound, "n={n} m={m} eps={eps}");
            }
        }
    }

    #[test]
    fn rejects_headered_codes() {
        let ts = TypeSet::enumerate(3, 2).unwrap();
        let code = type_size_ranked_code(&ts);
        assert!(code_to_guesser(&code).is_err());
    }
}
