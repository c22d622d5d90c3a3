use serde::{Deserialize, Serialize};

use crate::detect::{AlignKind, Alignment};

use super::StatsError;

/// Word-level detection counts; "positive" means mispronounced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn from_flags(gold: &[bool], predicted: &[bool]) -> Result<Self, StatsError> {
        if gold.len() != predicted.len() {
            return Err(StatsError::InconsistentInput(format!(
                "{} gold flags vs {} predicted",
                gold.len(),
                predicted.len()
            )));
        }
        let mut c = ConfusionCounts::default();
        for (&g, &p) in gold.iter().zip(predicted) {
            match (g, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn add(&mut self, other: ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// 0/0 is 0.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Phoneme error rate, when alignments were supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per: Option<f64>,
}

impl From<ConfusionCounts> for DetectionMetrics {
    fn from(counts: ConfusionCounts) -> Self {
        DetectionMetrics { counts, precision: counts.precision(), recall: counts.recall(), f1: counts.f1(), per: None }
    }
}

/// Precision, recall and F1 of word flags aligned by word index.
pub fn compute_metrics(gold: &[bool], predicted: &[bool]) -> Result<DetectionMetrics, StatsError> {
    Ok(ConfusionCounts::from_flags(gold, predicted)?.into())
}

/// (S + D + I) / N over a batch of alignments, N being the total number of
/// canonical phonemes. An empty reference gives 0.
pub fn phoneme_error_rate<'a>(alignments: impl IntoIterator<Item = &'a Alignment>) -> f64 {
    let (mut errors, mut reference) = (0u64, 0u64);
    for a in alignments {
        for op in &a.ops {
            if op.canonical_index.is_some() {
                reference += 1;
            }
            if op.kind != AlignKind::Match {
                errors += 1;
            }
        }
    }
    ratio(errors, reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula() {
        let m = compute_metrics(&[true, true, true, false], &[true, true, false, true]).unwrap();
        assert_eq!((m.counts.tp, m.counts.fp, m.counts.fn_, m.counts.tn), (2, 1, 1, 0));
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_conventions() {
        let m = compute_metrics(&[true, false], &[false, false]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert!(compute_metrics(&[true], &[]).is_err());
        assert_eq!(phoneme_error_rate(&[]), 0.0);
    }
}
