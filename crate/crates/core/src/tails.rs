//! Rank-tail queries over an ordered list of type blocks: given a rank
//! threshold M, the probability that a sequence lands beyond rank M in its
//! partition.
//!
//! Two backends share one interface shape. The exact backend keeps big-natural
//! cumulative counts and answers threshold comparisons exactly; the fast
//! backend keeps base-2 logs of the cumulative counts and is used at sweep
//! scale, where callers re-check that every threshold decision clears an
//! ambiguity margin.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::dist::Dist;
use crate::numeric::{log2_add, log2_biguint, log2_one_minus_exp2, CompensatedSum};
use crate::typeset::TypeSet;

/// Per-position probability data attached to an ordered block list.
pub(crate) struct TailProbs {
    /// log2 per-sequence probability, by position in the order.
    pub seq_log2: Vec<f64>,
    /// suffix[i] = total class probability of positions >= i; one trailing 0.
    pub suffix: Vec<f64>,
}

fn build_probs(ids: &[u32], log2_sizes_by_pos: &[f64], ts: &TypeSet, p: &Dist) -> TailProbs {
    let seq_log2: Vec<f64> = ids
        .iter()
        .map(|&id| ts.seq_log2_prob(id as usize, p))
        .collect();
    let mut suffix = vec![0.0; ids.len() + 1];
    let mut acc = CompensatedSum::new();
    for i in (0..ids.len()).rev() {
        let w = (log2_sizes_by_pos[i] + seq_log2[i]).exp2();
        acc.add(w);
        suffix[i] = acc.value();
    }
    TailProbs { seq_log2, suffix }
}

/// Ordered blocks with exact cumulative sequence counts.
pub(crate) struct ExactTails {
    pub ids: Vec<u32>,
    pub sizes: Vec<BigUint>,
    /// Inclusive cumulative counts: cum[i] = sizes[0] + ... + sizes[i].
    pub cum: Vec<BigUint>,
    log2_sizes: Vec<f64>,
}

impl ExactTails {
    /// `sizes_by_pos[i]` is the class size of type `ids[i]`.
    pub fn new(ids: Vec<u32>, sizes_by_pos: Vec<BigUint>) -> Self {
        let mut cum = Vec::with_capacity(sizes_by_pos.len());
        let mut running = BigUint::zero();
        for s in &sizes_by_pos {
            running += s;
            cum.push(running.clone());
        }
        let log2_sizes = sizes_by_pos.iter().map(log2_biguint).collect();
        Self {
            ids,
            sizes: sizes_by_pos,
            cum,
            log2_sizes,
        }
    }

    pub fn total(&self) -> BigUint {
        self.cum.last().cloned().unwrap_or_else(BigUint::zero)
    }

    pub fn probs(&self, ts: &TypeSet, p: &Dist) -> TailProbs {
        build_probs(&self.ids, &self.log2_sizes, ts, p)
    }

    /// P(rank > m) for ranks 1..=total assigned along the order.
    pub fn tail_beyond(&self, probs: &TailProbs, m: &BigUint) -> f64 {
        let len = self.cum.len();
        if len == 0 || m >= &self.cum[len - 1] {
            return 0.0;
        }
        let idx = self.cum.partition_point(|c| c <= m);
        let boundary = &self.cum[idx] - m;
        probs.suffix[idx + 1] + (probs.seq_log2[idx] + log2_biguint(&boundary)).exp2()
    }
}

/// Ordered blocks with log-domain cumulative sequence counts.
pub(crate) struct FastTails {
    pub ids: Vec<u32>,
    pub log2_sizes: Vec<f64>,
    /// log2 of the inclusive cumulative counts.
    pub log2_cum: Vec<f64>,
}

impl FastTails {
    pub fn new(ids: Vec<u32>, log2_sizes_by_pos: Vec<f64>) -> Self {
        let mut log2_cum = Vec::with_capacity(log2_sizes_by_pos.len());
        let mut running = f64::NEG_INFINITY;
        for &s in &log2_sizes_by_pos {
            running = log2_add(running, s);
            log2_cum.push(running);
        }
        Self {
            ids,
            log2_sizes: log2_sizes_by_pos,
            log2_cum,
        }
    }

    pub fn probs(&self, ts: &TypeSet, p: &Dist) -> TailProbs {
        build_probs(&self.ids, &self.log2_sizes, ts, p)
    }

    /// P(rank > m) with the threshold given as log2 m.
    pub fn tail_beyond(&self, probs: &TailProbs, log2_m: f64) -> f64 {
        let len = self.log2_cum.len();
        if len == 0 || log2_m >= self.log2_cum[len - 1] {
            return 0.0;
        }
        let idx = self.log2_cum.partition_point(|&c| c <= log2_m);
        let gap = log2_m - self.log2_cum[idx];
        let boundary = if gap >= 0.0 {
            0.0
        } else {
            (probs.seq_log2[idx] + self.log2_cum[idx] + log2_one_minus_exp2(gap)).exp2()
        };
        probs.suffix[idx + 1] + boundary
    }
}
