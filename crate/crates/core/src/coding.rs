//! Fixed-to-variable codes at type granularity: ranked assignment of
//! sequences to the universal string order (empty string, 0, 1, 00, ...),
//! exact length distributions, and epsilon-rates.
//!
//! A [`RankedCode`] never stores sequences. It stores, per rank partition, an
//! ordered list of blocks; a block is one type class occupying either an
//! arithmetic progression of ranks (stride 1 for plain codes, stride 2 for
//! the binary interleaved code) or a fixed payload length. Rank arithmetic is
//! exact big-natural arithmetic; probability mass is accumulated in log
//! domain with compensation.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::numeric::{floor_log2, log2_biguint, CompensatedSum};
use crate::typeset::TypeSet;

/// Slack applied uniformly to every `<= eps` threshold test, so that rates
/// are stable across platforms when a tail lands exactly on epsilon.
pub const EPS_SLACK: f64 = 1e-12;

/// Number of payload bits of the rank-th string in the shortest-first
/// enumeration of {0,1}*: rank 1 -> 0 bits, ranks 2-3 -> 1 bit, and so on.
pub fn string_length_of_rank(rank: &BigUint) -> Result<u64> {
    if rank.is_zero() {
        return Err(Error::ZeroRank);
    }
    Ok(floor_log2(rank))
}

/// Grouping label for a rank partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PartitionKey {
    /// Single shared rank space.
    Whole,
    /// One rank space per empirical support set; ordering is by support size
    /// then mask value.
    Support(u32, u64),
    /// One rank space per type (two-stage second stage).
    Type(u32),
}

impl PartitionKey {
    pub fn support(mask: u64) -> Self {
        PartitionKey::Support(mask.count_ones(), mask)
    }
}

#[derive(Debug, Clone)]
pub enum BlockKind {
    /// Occupies ranks first, first+stride, ..., count ranks in total.
    Ranked {
        first: BigUint,
        stride: u32,
        count: BigUint,
    },
    /// Every member gets exactly `len` payload bits.
    Fixed { len: u64, count: BigUint },
}

impl BlockKind {
    pub fn count(&self) -> &BigUint {
        match self {
            BlockKind::Ranked { count, .. } => count,
            BlockKind::Fixed { count, .. } => count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Block {
    pub type_id: u32,
    pub kind: BlockKind,
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub key: PartitionKey,
    pub blocks: Vec<Block>,
}

impl Partition {
    /// Total number of sequences ranked in this partition.
    pub fn total(&self) -> BigUint {
        self.blocks.iter().map(|b| b.kind.count()).sum()
    }
}

/// A fixed-to-variable code described at type granularity.
#[derive(Debug, Clone)]
pub struct RankedCode {
    pub n: u32,
    pub m: usize,
    /// Bits prepended to every codeword (the support header of the Type Size
    /// code, the first stage of a Two-Stage code); 0 for plain codes.
    pub header_bits: u64,
    pub partitions: Vec<Partition>,
}

impl RankedCode {
    /// Sum of block counts per partition, for the rank-conservation checks.
    pub fn partition_totals(&self) -> Vec<(PartitionKey, BigUint)> {
        self.partitions.iter().map(|p| (p.key, p.total())).collect()
    }
}

/// Exact probability mass of codeword lengths under a given source law.
#[derive(Debug, Clone)]
pub struct LengthDistribution {
    n: u32,
    /// (length, mass) with lengths strictly ascending and masses nonzero.
    mass: Vec<(u64, f64)>,
    /// suffix[i] = total mass at lengths >= mass[i].0; one trailing 0.
    suffix: Vec<f64>,
}

impl LengthDistribution {
    fn from_accumulated(n: u32, acc: Vec<CompensatedSum>) -> Self {
        let mass: Vec<(u64, f64)> = acc
            .into_iter()
            .enumerate()
            .filter_map(|(len, s)| {
                let v = s.value();
                (v > 0.0).then_some((len as u64, v))
            })
            .collect();
        let mut suffix = vec![0.0; mass.len() + 1];
        let mut tail = CompensatedSum::new();
        for i in (0..mass.len()).rev() {
            tail.add(mass[i].1);
            suffix[i] = tail.value();
        }
        Self { n, mass, suffix }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// (length, probability) pairs, lengths ascending.
    pub fn mass(&self) -> &[(u64, f64)] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.suffix.first().copied().unwrap_or(0.0)
    }

    pub fn min_length(&self) -> u64 {
        self.mass.first().map(|&(l, _)| l).unwrap_or(0)
    }

    pub fn max_length(&self) -> u64 {
        self.mass.last().map(|&(l, _)| l).unwrap_or(0)
    }

    /// P(length > k).
    pub fn tail(&self, k: u64) -> f64 {
        let idx = self.mass.partition_point(|&(l, _)| l <= k);
        self.suffix[idx]
    }

    /// Total variation distance to another length distribution.
    pub fn tv_distance(&self, other: &LengthDistribution) -> f64 {
        let mut i = 0;
        let mut j = 0;
        let mut acc = CompensatedSum::new();
        while i < self.mass.len() || j < other.mass.len() {
            let li = self.mass.get(i).map(|&(l, _)| l);
            let lj = other.mass.get(j).map(|&(l, _)| l);
            match (li, lj) {
                (Some(a), Some(b)) if a == b => {
                    acc.add((self.mass[i].1 - other.mass[j].1).abs());
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a < b => {
                    acc.add(self.mass[i].1);
                    i += 1;
                }
                (Some(_), Some(_)) => {
                    acc.add(other.mass[j].1);
                    j += 1;
                }
                (Some(_), None) => {
                    acc.add(self.mass[i].1);
                    i += 1;
                }
                (None, Some(_)) => {
                    acc.add(other.mass[j].1);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        acc.value() / 2.0
    }

    /// JSON form {"n":..., "mass":[[len, p], ...]} with lengths ascending.
    pub fn to_json(&self) -> serde_json::Value {
        let mass: Vec<serde_json::Value> = self
            .mass
            .iter()
            .map(|&(l, p)| {
                let rounded: f64 = crate::numeric::fmt_sig(p).parse().unwrap_or(p);
                serde_json::json!([l, rounded])
            })
            .collect();
        serde_json::json!({ "n": self.n, "mass": mass })
    }
}

/// Number of members of the progression {first + stride*i : 0 <= i < count}
/// that fall in [2^len, 2^(len+1)).
pub(crate) fn progression_in_dyadic(
    first: &BigUint,
    stride: u32,
    count: &BigUint,
    len: u64,
) -> BigUint {
    debug_assert!(stride >= 1);
    let last = first + (count - 1u32) * stride;
    let lo_int = BigUint::one() << len;
    let hi_int = (BigUint::one() << (len + 1)) - 1u32;
    let lo = if first > &lo_int {
        first.clone()
    } else {
        lo_int
    };
    let hi = if last < hi_int { last } else { hi_int };
    if hi < lo {
        return BigUint::zero();
    }
    // First progression member >= lo.
    let a = if &lo <= first {
        first.clone()
    } else {
        let delta = &lo - first;
        let rem = (&delta % stride).try_into().unwrap_or(0u32);
        if rem == 0 {
            lo
        } else {
            lo + (stride - rem)
        }
    };
    if a > hi {
        return BigUint::zero();
    }
    (hi - a) / stride + 1u32
}

/// Exact type-granular length distribution of a ranked code under P.
///
/// Every type with nonzero probability under P must be covered by the code;
/// a gap is a hard error naming the missing type.
pub fn length_distribution(
    code: &RankedCode,
    ts: &TypeSet,
    p: &Dist,
) -> Result<LengthDistribution> {
    assert_eq!(ts.n(), code.n, "type table and code disagree on n");
    assert_eq!(ts.m(), code.m, "type table and code disagree on m");
    let mut covered = vec![false; ts.len()];
    let max_payload: u64 = code
        .partitions
        .iter()
        .map(|part| {
            let total = part.total();
            if total.is_zero() {
                0
            } else {
                floor_log2(&total) + 1
            }
        })
        .max()
        .unwrap_or(0);
    let mut acc = vec![CompensatedSum::new(); (code.header_bits + max_payload + 2) as usize];

    for part in &code.partitions {
        for block in &part.blocks {
            covered[block.type_id as usize] = true;
            let seq_lp = ts.seq_log2_prob(block.type_id as usize, p);
            if seq_lp == f64::NEG_INFINITY {
                continue;
            }
            match &block.kind {
                BlockKind::Fixed { len, count } => {
                    let w = (log2_biguint(count) + seq_lp).exp2();
                    acc[(code.header_bits + len) as usize].add(w);
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
                    let lo_len = floor_log2(first);
                    let hi_len = floor_log2(&last);
                    for len in lo_len..=hi_len {
                        let c = progression_in_dyadic(first, *stride, count, len);
                        if c.is_zero() {
                            continue;
                        }
                        let w = (log2_biguint(&c) + seq_lp).exp2();
                        acc[(code.header_bits + len) as usize].add(w);
                    }
                }
            }
        }
    }

    for (id, seen) in covered.iter().enumerate() {
        if !seen && ts.seq_log2_prob(id, p) != f64::NEG_INFINITY {
            return Err(Error::MissingType(format!("{:?}", ts.counts(id))));
        }
    }
    Ok(LengthDistribution::from_accumulated(ts.n(), acc))
}

/// The epsilon-rate of a length distribution: minimum k/n such that
/// codeword lengths exceed k with probability at most eps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonRate {
    pub bits: u64,
    pub rate: f64,
}

pub fn epsilon_rate(ld: &LengthDistribution, eps: f64, n: u32) -> Result<EpsilonRate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let threshold = eps + EPS_SLACK;
    let mut bits = 0u64;
    if ld.tail(0) > threshold {
        // Tail only steps down at lengths present in the distribution.
        bits = ld
            .mass()
            .iter()
            .map(|&(l, _)| l)
            .find(|&l| ld.tail(l) <= threshold)
            .expect("tail reaches zero at the maximum length");
    }
    Ok(EpsilonRate {
        bits,
        rate: bits as f64 / n as f64,
    })
}

/// The optimal code for a known source law: all types sorted by descending
/// per-sequence probability (ties in enumeration order), one shared rank
/// space, no header.
pub fn optimal_code(ts: &TypeSet, p: &Dist) -> RankedCode {
    let mut ids: Vec<u32> = (0..ts.len() as u32).collect();
    let probs: Vec<f64> = (0..ts.len()).map(|id| ts.seq_log2_prob(id, p)).collect();
    ids.sort_by(|&a, &b| {
        probs[b as usize]
            .partial_cmp(&probs[a as usize])
            .expect("log probs are never NaN")
            .then(a.cmp(&b))
    });
    let sizes = ts.exact_sizes();
    let mut blocks = Vec::with_capacity(ids.len());
    let mut next_rank = BigUint::one();
    for id in ids {
        let count = sizes[id as usize].clone();
        blocks.push(Block {
            type_id: id,
            kind: BlockKind::Ranked {
                first: next_rank.clone(),
                stride: 1,
                count: count.clone(),
            },
        });
        next_rank += &count;
    }
    RankedCode {
        n: ts.n(),
        m: ts.m(),
        header_bits: 0,
        partitions: vec![Partition {
            key: PartitionKey::Whole,
            blocks,
        }],
    }
}

/// Sequence-level oracle: materializes every sequence, assigns it an explicit
/// rank (or fixed length) from the code description, and accumulates the
/// length distribution in compensated linear arithmetic. Rejects instances
/// with more than 10^6 sequences.
pub fn brute_force_eval(code: &RankedCode, ts: &TypeSet, p: &Dist) -> Result<LengthDistribution> {
    let n = ts.n() as usize;
    let m = ts.m();
    let total_seqs = (m as f64).powi(n as i32);
    if total_seqs > 1e6 {
        return Err(Error::TooLarge(format!(
            "{m}^{n} sequences exceed the brute-force cap"
        )));
    }

    // type id lookup by counts
    let mut id_of: std::collections::BTreeMap<Vec<u32>, u32> = Default::default();
    for id in 0..ts.len() {
        id_of.insert(ts.counts(id).to_vec(), id as u32);
    }

    // per type: ordered list of (block start, stride, count) or fixed length
    #[derive(Clone)]
    enum Piece {
        Ranked(BigUint, u32, BigUint),
        Fixed(u64),
    }
    let mut pieces: Vec<Vec<Piece>> = vec![Vec::new(); ts.len()];
    for part in &code.partitions {
        for b in &part.blocks {
            let piece = match &b.kind {
                BlockKind::Ranked {
                    first,
                    stride,
                    count,
                } => Piece::Ranked(first.clone(), *stride, count.clone()),
                BlockKind::Fixed { len, .. } => Piece::Fixed(*len),
            };
            pieces[b.type_id as usize].push(piece);
        }
    }

    let mut next_member: Vec<u64> = vec![0; ts.len()];
    let mut acc: Vec<CompensatedSum> = Vec::new();

    // odometer over sequences in lexicographic order
    let mut seq = vec![0usize; n];
    loop {
        let mut counts = vec![0u32; m];
        for &s in &seq {
            counts[s] += 1;
        }
        let id = id_of[&counts] as usize;
        let member = next_member[id];
        next_member[id] += 1;

        let mut prob = 1.0f64;
        for &s in &seq {
            prob *= p.prob(s);
        }

        // locate the member-th rank of this type across its pieces
        let mut remaining = BigUint::from(member);
        let mut length: Option<u64> = None;
        for piece in &pieces[id] {
            match piece {
                Piece::Fixed(l) => {
                    length = Some(code.header_bits + l);
                    break;
                }
                Piece::Ranked(first, stride, count) => {
                    if &remaining < count {
                        let rank = first + &remaining * *stride;
                        length = Some(code.header_bits + string_length_of_rank(&rank)?);
                        break;
                    }
                    remaining -= count;
                }
            }
        }
        let length =
            length.ok_or_else(|| Error::MissingType(format!("{:?}", ts.counts(id))))? as usize;
        if acc.len() <= length {
            acc.resize(length + 1, CompensatedSum::new());
        }
        if prob > 0.0 {
            acc[length].add(prob);
        }

        // advance odometer
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(LengthDistribution::from_accumulated(ts.n(), acc));
            }
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] < m {
                break;
            }
            seq[pos] = 0;
        }
    }
}
