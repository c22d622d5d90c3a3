use serde::{Deserialize, Serialize};

use crate::corpus::ErrorOp;
use crate::phoneme::{FeatureWeights, PhonemeInventory, TokenId};

pub const INDEL_COST: f64 = 1.0;
const TIE_EPS: f64 = 1e-9;

/// Substitution cost `0.5 + 0.5 * feature_distance`, in [0.5, 1.0]: never
/// cheaper than half an indel, so alignments do not drift into chains of
/// near-free substitutions. Identical phonemes cost 0.
pub fn substitution_cost(inventory: &PhonemeInventory, a: TokenId, b: TokenId, weights: &FeatureWeights) -> f64 {
    if a == b {
        0.0
    } else {
        0.5 + 0.5 * inventory.distance(a, b, weights)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignKind {
    Match,
    Substitution,
    Insertion,
    Deletion,
}

/// One alignment column. Indices are phoneme positions (markers excluded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentOp {
    pub kind: AlignKind,
    pub canonical_index: Option<usize>,
    pub predicted_index: Option<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub ops: Vec<AlignmentOp>,
    pub total_cost: f64,
}

impl Alignment {
    /// Canonical position preceding each op (-1 before the first), which is
    /// where an insertion is anchored.
    pub fn anchors(&self) -> Vec<i64> {
        let mut last = -1i64;
        self.ops
            .iter()
            .map(|op| {
                if let Some(c) = op.canonical_index {
                    last = c as i64;
                }
                if op.kind == AlignKind::Insertion {
                    last
                } else {
                    op.canonical_index.map_or(last, |c| c as i64)
                }
            })
            .collect()
    }

    /// Non-match columns as error ops, comparable with injected ones.
    pub fn edit_script(&self, predicted: &[TokenId]) -> Vec<ErrorOp> {
        self.ops
            .iter()
            .zip(self.anchors())
            .filter_map(|(op, anchor)| match op.kind {
                AlignKind::Match => None,
                AlignKind::Substitution => {
                    Some(ErrorOp::substitution(op.canonical_index?, predicted[op.predicted_index?]))
                }
                AlignKind::Deletion => Some(ErrorOp::deletion(op.canonical_index?)),
                AlignKind::Insertion => Some(ErrorOp::addition(anchor, predicted[op.predicted_index?])),
            })
            .collect()
    }
}

/// Minimum-cost global alignment (indel cost 1, [`substitution_cost`]).
/// Among optimal alignments the backtrace prefers a diagonal step, then a
/// deletion, then an insertion, so the result is deterministic.
pub fn align(
    inventory: &PhonemeInventory,
    canonical: &[TokenId],
    predicted: &[TokenId],
    weights: &FeatureWeights,
) -> Alignment {
    let (n, m) = (canonical.len(), predicted.len());
    let w = m + 1;
    let sub = |i: usize, j: usize| substitution_cost(inventory, canonical[i], predicted[j], weights);
    let mut dp = vec![0.0f64; (n + 1) * w];
    for i in 1..=n {
        dp[i * w] = i as f64 * INDEL_COST;
    }
    for j in 1..=m {
        dp[j] = j as f64 * INDEL_COST;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = dp[(i - 1) * w + j - 1] + sub(i - 1, j - 1);
            let del = dp[(i - 1) * w + j] + INDEL_COST;
            let ins = dp[i * w + j - 1] + INDEL_COST;
            dp[i * w + j] = diag.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * w + j];
        if i > 0 && j > 0 {
            let c = sub(i - 1, j - 1);
            if (dp[(i - 1) * w + j - 1] + c - here).abs() < TIE_EPS {
                let kind = if c == 0.0 { AlignKind::Match } else { AlignKind::Substitution };
                ops.push(AlignmentOp { kind, canonical_index: Some(i - 1), predicted_index: Some(j - 1), cost: c });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && (dp[(i - 1) * w + j] + INDEL_COST - here).abs() < TIE_EPS {
            ops.push(AlignmentOp {
                kind: AlignKind::Deletion,
                canonical_index: Some(i - 1),
                predicted_index: None,
                cost: INDEL_COST,
            });
            i -= 1;
        } else {
            ops.push(AlignmentOp {
                kind: AlignKind::Insertion,
                canonical_index: None,
                predicted_index: Some(j - 1),
                cost: INDEL_COST,
            });
            j -= 1;
        }
    }
    ops.reverse();
    // Summing the chosen columns keeps total_cost == sum(op.cost) exactly.
    let total_cost = ops.iter().map(|o| o.cost).sum();
    Alignment { ops, total_cost }
}
