//! One entry point for "the epsilon-rate of code X at (n, P, eps)", choosing
//! the cheapest evaluation strategy that is still exact for the instance.

use std::str::FromStr;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::typeset::TypeSet;
use crate::universal::{
    interleave_bits, optimal_bits, two_stage_rate, type_size_bits, TwoStageVariant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CodeKind {
    Optimal,
    TypeSize,
    TwoStageFv,
    TwoStageFf,
    Interleave,
}

impl CodeKind {
    pub fn all() -> [CodeKind; 5] {
        [
            CodeKind::Optimal,
            CodeKind::TypeSize,
            CodeKind::TwoStageFv,
            CodeKind::TwoStageFf,
            CodeKind::Interleave,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            CodeKind::Optimal => "optimal",
            CodeKind::TypeSize => "type-size",
            CodeKind::TwoStageFv => "2s-fv",
            CodeKind::TwoStageFf => "2s-ff",
            CodeKind::Interleave => "interleave",
        }
    }
}

impl FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(CodeKind::Optimal),
            "type-size" => Ok(CodeKind::TypeSize),
            "2s-fv" => Ok(CodeKind::TwoStageFv),
            "2s-ff" => Ok(CodeKind::TwoStageFf),
            "interleave" => Ok(CodeKind::Interleave),
            other => Err(Error::Unsupported(format!(
                "unknown code {other:?}; expected optimal|type-size|2s-fv|2s-ff|interleave"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub bits: u64,
    pub rate: f64,
}

/// Exact bit count and rate of the chosen code at one operating point.
pub fn code_rate_bits(kind: CodeKind, ts: &TypeSet, p: &Dist, eps: f64) -> Result<RateReport> {
    if p.len() != ts.m() {
        return Err(Error::InvalidDistribution(format!(
            "distribution has {} entries, alphabet has {}",
            p.len(),
            ts.m()
        )));
    }
    let bits = match kind {
        CodeKind::Optimal => optimal_bits(ts, p, eps)?,
        CodeKind::TypeSize => type_size_bits(ts, p, eps)?,
        CodeKind::TwoStageFv => two_stage_rate(TwoStageVariant::FixedVariable, ts, p, eps)?.bits(),
        CodeKind::TwoStageFf => two_stage_rate(TwoStageVariant::FixedFixed, ts, p, eps)?.bits(),
        CodeKind::Interleave => interleave_bits(ts, p, eps)?,
    };
    Ok(RateReport {
        bits,
        rate: bits as f64 / ts.n() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{epsilon_rate, length_distribution, optimal_code};
    use crate::universal::{binary_interleave_code, two_stage_ranked_code, type_size_ranked_code};

    #[test]
    fn names_round_trip() {
        for k in CodeKind::all() {
            assert_eq!(CodeKind::from_str(k.name()).unwrap(), k);
        }
        assert!(CodeKind::from_str("huffman").is_err());
    }

    #[test]
    fn dispatch_matches_ranked_codes() {
        // every evaluator must equal the generic ranked-code path
        for (n, m, d) in [
            (6u32, 2usize, vec![0.8, 0.2]),
            (5, 2, vec![0.5, 0.5]),
            (5, 3, vec![0.5, 0.3, 0.2]),
        ] {
            let ts = TypeSet::enumerate(n, m).unwrap();
            let p = Dist::new(d).unwrap();
            for eps in [0.05, 0.2, 0.5] {
                for kind in CodeKind::all() {
                    if kind == CodeKind::Interleave && m != 2 {
                        assert!(code_rate_bits(kind, &ts, &p, eps).is_err());
                        continue;
                    }
                    let code = match kind {
                        CodeKind::Optimal => optimal_code(&ts, &p),
                        CodeKind::TypeSize => type_size_ranked_code(&ts),
                        CodeKind::TwoStageFv => two_stage_ranked_code(
                            crate::universal::TwoStageVariant::FixedVariable,
                            &ts,
                        ),
                        CodeKind::TwoStageFf => two_stage_ranked_code(
                            crate::universal::TwoStageVariant::FixedFixed,
                            &ts,
                        ),
                        CodeKind::Interleave => binary_interleave_code(&ts).unwrap(),
                    };
                    let ld = length_distribution(&code, &ts, &p).unwrap();
                    let via_code = epsilon_rate(&ld, eps, n).unwrap().bits;
                    let via_dispatch = code_rate_bits(kind, &ts, &p, eps).unwrap().bits;
                    assert_eq!(
                        via_code,
                        via_dispatch,
                        "{} n={n} m={m} eps={eps}",
                        kind.name()
                    );
                }
            }
        }
    }
}
