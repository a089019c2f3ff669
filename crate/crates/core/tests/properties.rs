//! Property tests for the structural invariants: partition identities,
//! optimality of the probability-sorted code, monotonicity in epsilon, and
//! the asymptotic orderings between code families.

use num_bigint::BigUint;
use proptest::prelude::*;

use fvlab::coding::{epsilon_rate, length_distribution, optimal_code};
use fvlab::converse::{entropy_sphere_grid, mixture_bound_check};
use fvlab::numeric::CompensatedSum;
use fvlab::typeset::{count_types, TypeSet, TypeVector};
use fvlab::universal::{
    binary_interleave_code, two_stage_ranked_code, two_stage_rate, type_size_bits,
    type_size_ranked_code, TwoStageVariant,
};
use fvlab::{CodeKind, Dist};

fn arb_dist(m: usize) -> impl Strategy<Value = Dist> {
    prop::collection::vec(1u32..1000, m).prop_map(|ws| {
        let total: u32 = ws.iter().sum();
        Dist::normalized(ws.iter().map(|&w| w as f64 / total as f64).collect())
            .expect("positive weights normalize")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_identity_holds(n in 1u32..=40, m in 2usize..=4) {
        let ts = TypeSet::enumerate(n, m).unwrap();
        prop_assert_eq!(ts.len(), count_types(n, m).unwrap());
        let total: BigUint = ts.exact_sizes().iter().sum();
        prop_assert_eq!(total, BigUint::from(m as u64).pow(n));
    }

    #[test]
    fn class_probabilities_normalize(n in 1u32..=30, p in arb_dist(3)) {
        let ts = TypeSet::enumerate(n, 3).unwrap();
        let mut acc = CompensatedSum::new();
        for w in ts.class_probs(&p) {
            acc.add(w);
        }
        prop_assert!((acc.value() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kl_nonnegative_entropy_bounded(n in 1u32..=25, p in arb_dist(3)) {
        let ts = TypeSet::enumerate(n, 3).unwrap();
        for id in 0..ts.len() {
            let t = ts.type_vector(id);
            prop_assert!(t.kl(&p) >= 0.0);
            let support = t.counts().iter().filter(|&&c| c > 0).count();
            prop_assert!(t.entropy() <= (support as f64).log2() + 1e-12);
        }
    }

    #[test]
    fn optimal_code_dominates(n in 2u32..=7, p in arb_dist(2), eps in 0.02f64..0.9) {
        let ts = TypeSet::enumerate(n, 2).unwrap();
        let opt = epsilon_rate(
            &length_distribution(&optimal_code(&ts, &p), &ts, &p).unwrap(),
            eps,
            n,
        )
        .unwrap()
        .bits;
        let competitors = [
            type_size_ranked_code(&ts),
            two_stage_ranked_code(TwoStageVariant::FixedVariable, &ts),
            two_stage_ranked_code(TwoStageVariant::FixedFixed, &ts),
            binary_interleave_code(&ts).unwrap(),
        ];
        for code in competitors {
            let bits = epsilon_rate(&length_distribution(&code, &ts, &p).unwrap(), eps, n)
                .unwrap()
                .bits;
            prop_assert!(opt <= bits, "optimal {} beaten by {}", opt, bits);
        }
    }

    #[test]
    fn rates_monotone_in_eps(n in 2u32..=7, p in arb_dist(2), lo in 0.02f64..0.4) {
        let hi = lo * 2.0;
        let ts = TypeSet::enumerate(n, 2).unwrap();
        for kind in CodeKind::all() {
            let a = fvlab::code_rate_bits(kind, &ts, &p, lo).unwrap().bits;
            let b = fvlab::code_rate_bits(kind, &ts, &p, hi).unwrap().bits;
            prop_assert!(a >= b, "{}: bits increased with eps", kind.name());
        }
    }

    #[test]
    fn tail_nonincreasing_and_lengths_bounded(n in 1u32..=7, p in arb_dist(3), eps in 0.05f64..0.5) {
        let ts = TypeSet::enumerate(n, 3).unwrap();
        let code = type_size_ranked_code(&ts);
        let ld = length_distribution(&code, &ts, &p).unwrap();
        prop_assert!((ld.total() - 1.0).abs() < 1e-9);
        let cap = code.header_bits + (n as f64 * 3f64.log2()).ceil() as u64 + 1;
        prop_assert!(ld.max_length() <= cap);
        let mut prev = f64::INFINITY;
        for k in 0..=ld.max_length() {
            let t = ld.tail(k);
            prop_assert!(t <= prev + 1e-15);
            prev = t;
        }
        let _ = epsilon_rate(&ld, eps, n).unwrap();
    }

    #[test]
    fn rank_conservation(n in 1u32..=7, m in 2usize..=3) {
        // block counts per partition must add up to the sequence count of
        // that partition's support population
        let ts = TypeSet::enumerate(n, m).unwrap();
        let sizes = ts.exact_sizes();
        let code = type_size_ranked_code(&ts);
        for part in &code.partitions {
            let mut expect = BigUint::from(0u32);
            if let fvlab::coding::PartitionKey::Support(_, mask) = part.key {
                for (id, size) in sizes.iter().enumerate() {
                    if ts.support_mask(id) == mask {
                        expect += size;
                    }
                }
            }
            prop_assert_eq!(part.total(), expect);
        }
    }
}

#[test]
fn type_size_beats_two_stage_asymptotically() {
    // the bit gap n(R_2S-FV - R_TS) grows with n and is positive from some
    // n0 at most 200
    let p = Dist::new(vec![0.5, 0.3, 0.2]).unwrap();
    let eps = 0.1;
    let gap_at = |n: u32| -> i64 {
        let ts = TypeSet::enumerate(n, 3).unwrap();
        let fv = two_stage_rate(TwoStageVariant::FixedVariable, &ts, &p, eps)
            .unwrap()
            .bits() as i64;
        let ts_bits = type_size_bits(&ts, &p, eps).unwrap() as i64;
        fv - ts_bits
    };
    for n in [200u32, 256, 320, 400, 512] {
        assert!(gap_at(n) > 0, "gap not positive at n={n}");
    }
    let early = gap_at(64);
    let late = gap_at(512);
    assert!(
        late > early,
        "gap failed to grow: {early} bits at n=64 vs {late} at n=512"
    );
}

#[test]
fn log_type_size_gaussian_deviation_bounded() {
    // the matching constant is existential: the deviation scaled by sqrt(n)
    // must stay within a factor 3 of its value at n=100 across the sweep
    let p = Dist::new(vec![0.3, 0.7]).unwrap();
    let pilot = {
        let ts = TypeSet::enumerate(100, 2).unwrap();
        let gamma = 100.0 * p.entropy() - 0.5 * 100f64.log2();
        fvlab::asymptotics::log_type_size_deviation(&ts, &p, gamma).unwrap() * 10.0
    };
    for n in [100u32, 200, 400, 800, 1600] {
        let ts = TypeSet::enumerate(n, 2).unwrap();
        let nf = n as f64;
        let gamma = nf * p.entropy() + (1.0 - 2.0) / 2.0 * nf.log2();
        let dev = fvlab::asymptotics::log_type_size_deviation(&ts, &p, gamma).unwrap();
        let scaled = dev * nf.sqrt();
        assert!(
            scaled <= 3.0 * pilot,
            "scaled deviation {scaled} at n={n} leaves the pilot band {pilot}"
        );
    }
}

#[test]
fn log_type_size_cdf_extreme_gammas() {
    let p = Dist::new(vec![0.3, 0.7]).unwrap();
    let ts = TypeSet::enumerate(60, 2).unwrap();
    assert!((fvlab::asymptotics::log_type_size_cdf(&ts, &p, -0.5) - 1.0).abs() < 1e-12);
    assert_eq!(
        fvlab::asymptotics::log_type_size_cdf(&ts, &p, 60.0 * 2f64.log2()),
        0.0
    );
}

#[test]
fn mixture_bound_excess_sweep() {
    // Laplace-style upper bound on the mixture value. The volume surrogate
    // and the p_min relaxation leave a constant (negative) offset in the
    // excess, so the testable content of the (1 + O(1/n)) factor is the
    // rate at which the excess settles: (excess(n) - excess(800)) * n must
    // stay within a factor 3 of its n=100 value, and the excess itself must
    // stay below the bound.
    let eps = 0.5; // J = H: the grid is n-independent, so the sweep is clean
    let gamma = 1.2;
    let grid = entropy_sphere_grid(3, &[0, 1, 2], gamma, eps, 100, 96, 0.02).unwrap();
    let excess_at = |n: u32| -> f64 {
        // nearest lattice type to the first grid point
        let target = &grid.points[0];
        let mut counts: Vec<u32> = target
            .probs()
            .iter()
            .map(|&x| (x * n as f64).round() as u32)
            .collect();
        let total: u32 = counts.iter().sum();
        counts[0] = (counts[0] as i64 + n as i64 - total as i64) as u32;
        mixture_bound_check(&counts, n, &grid, 1).expect("projection is unique")
    };
    let settled = excess_at(800);
    assert!(
        settled < 0.5,
        "bound must hold up to the convention constant"
    );
    let pilot = ((excess_at(100) - settled) * 100.0).abs().max(1e-6);
    for n in [200u32, 400] {
        let e = excess_at(n);
        assert!(e < 0.5, "bound violated at n={n}: excess {e}");
        let scaled = ((e - settled) * n as f64).abs();
        assert!(
            scaled <= 3.0 * pilot,
            "settling rate {scaled} at n={n} leaves the pilot band {pilot}"
        );
    }
}

#[test]
fn mixture_bound_rejects_ambiguous_projection() {
    // a type equidistant between the two points of a symmetric binary grid
    let grid = entropy_sphere_grid(2, &[0, 1], 0.8812908992306927, 0.5, 100, 0, 1e-3).unwrap();
    assert_eq!(grid.len(), 2);
    let err = mixture_bound_check(&[5, 5], 10, &grid, 0);
    assert!(err.is_err(), "symmetric type must be skipped");
}

#[test]
fn single_point_mixture_bound_sign() {
    // one-point grid: the type at the grid point has excess <= 0 up to the
    // volume convention (a single point has zero spacing, so volume is 1)
    let p = Dist::new(vec![0.25, 0.35, 0.4]).unwrap();
    let grid = fvlab::converse::ManifoldGrid {
        points: vec![p],
        gamma: 0.0,
        eps: 0.5,
        n: 20,
        beta_floor: 0.0,
        support: vec![0, 1, 2],
        dropped_rays: 0,
    };
    let excess = mixture_bound_check(&[5, 7, 8], 20, &grid, 0).unwrap();
    assert!(excess <= 1e-9, "excess {excess}");
}

#[test]
fn enumerate_types_examples() {
    assert_eq!(count_types(2, 2), Some(3));
    assert_eq!(count_types(1, 3), Some(3));
    assert_eq!(count_types(10, 3), Some(66));
    let t = TypeVector::new(vec![3, 2]).unwrap();
    assert_eq!(fvlab::typeset::type_class_size(&t), BigUint::from(10u32));
}

#[test]
fn rank_spaces_are_exact_bijections() {
    // materialize every partition's rank multiset and demand it covers
    // 1..=total exactly, for all five codes at small blocklengths
    use fvlab::coding::BlockKind;
    for m in 2..=3usize {
        for n in 1..=6u32 {
            let ts = TypeSet::enumerate(n, m).unwrap();
            let p = Dist::normalized(vec![1.0; m]).unwrap();
            let mut codes = vec![
                optimal_code(&ts, &p),
                type_size_ranked_code(&ts),
                two_stage_ranked_code(TwoStageVariant::FixedVariable, &ts),
                two_stage_ranked_code(TwoStageVariant::FixedFixed, &ts),
            ];
            if m == 2 {
                codes.push(binary_interleave_code(&ts).unwrap());
            }
            for code in codes {
                for part in &code.partitions {
                    let total: u64 = (&part.total()).try_into().unwrap();
                    let mut seen = vec![false; total as usize + 1];
                    let mut ranked_any = false;
                    for b in &part.blocks {
                        if let BlockKind::Ranked {
                            first,
                            stride,
                            count,
                        } = &b.kind
                        {
                            ranked_any = true;
                            let f: u64 = first.try_into().unwrap();
                            let c: u64 = count.try_into().unwrap();
                            for i in 0..c {
                                let r = (f + i * *stride as u64) as usize;
                                assert!(r >= 1 && r <= total as usize, "rank {r} out of range");
                                assert!(!seen[r], "rank {r} assigned twice");
                                seen[r] = true;
                            }
                        }
                    }
                    if ranked_any {
                        assert!(
                            seen[1..].iter().all(|&s| s),
                            "rank space has holes (m={m} n={n})"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn rate_ordering_at_large_blocklengths() {
    // optimal <= type-size <= 2s-fv <= 2s-ff once n is moderately large
    for (m, d) in [(2usize, vec![0.3, 0.7]), (3, vec![0.5, 0.3, 0.2])] {
        let p = Dist::new(d).unwrap();
        for n in [256u32, 512, 1024] {
            let ts = TypeSet::enumerate(n, m).unwrap();
            for eps in [0.05, 0.1, 0.3] {
                let opt = fvlab::code_rate_bits(CodeKind::Optimal, &ts, &p, eps)
                    .unwrap()
                    .bits;
                let tsz = fvlab::code_rate_bits(CodeKind::TypeSize, &ts, &p, eps)
                    .unwrap()
                    .bits;
                let fv = fvlab::code_rate_bits(CodeKind::TwoStageFv, &ts, &p, eps)
                    .unwrap()
                    .bits;
                let ff = fvlab::code_rate_bits(CodeKind::TwoStageFf, &ts, &p, eps)
                    .unwrap()
                    .bits;
                assert!(
                    opt <= tsz && tsz <= fv && fv <= ff,
                    "ordering broken at m={m} n={n} eps={eps}: {opt} {tsz} {fv} {ff}"
                );
            }
        }
    }
}

#[test]
fn binary_third_order_slopes() {
    // on a binary alphabet the Type Size code matches the non-universal
    // third order (-1/2) while the Two-Stage codes sit a full log-term higher
    let p = Dist::new(vec![0.3, 0.7]).unwrap();
    let eps = 0.1;
    let ns = fvlab::asymptotics::geometric_grid(512, 8192);
    let slope = |kind: CodeKind| -> f64 {
        let pts: Vec<(u32, u64)> = ns
            .iter()
            .map(|&n| {
                let ts = TypeSet::enumerate(n, 2).unwrap();
                (n, fvlab::code_rate_bits(kind, &ts, &p, eps).unwrap().bits)
            })
            .collect();
        fvlab::asymptotics::third_order_fit(&pts, &p, eps)
            .unwrap()
            .slope
    };
    for kind in [CodeKind::TypeSize, CodeKind::Optimal] {
        let s = slope(kind);
        assert!(
            (-0.85..=-0.15).contains(&s),
            "{} slope {s} off target -1/2",
            kind.name()
        );
    }
    for kind in [CodeKind::TwoStageFv, CodeKind::TwoStageFf] {
        let s = slope(kind);
        assert!(
            (0.15..=0.85).contains(&s),
            "{} slope {s} off target 1/2",
            kind.name()
        );
    }
}

#[test]
fn entropy_deviation_bound_far_out() {
    // the explicit-constant bound keeps holding out to n = 2000
    let p = Dist::new(vec![0.3, 0.7]).unwrap();
    let beta = 0.3f64.min(p.varentropy());
    let ts = TypeSet::enumerate(2000, 2).unwrap();
    for delta in [-3.0, -1.5, 0.0, 1.5, 3.0] {
        let (dev, b) =
            fvlab::asymptotics::empirical_entropy_deviation(&ts, &p, delta, beta).unwrap();
        assert!(dev <= b / 2000f64.sqrt());
    }
}
