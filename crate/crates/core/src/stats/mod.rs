//! Detection metrics and the self-rating analysis: Wilcoxon signed-rank
//! with Pratt's zero handling and Likert summaries.

mod likert;
mod metrics;
mod wilcoxon;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use likert::{parse_survey_csv, read_survey_csv, summarize_likert, summarize_scores, GroupStats, LikertSummary, PhonemeDelta};
pub use metrics::{compute_metrics, phoneme_error_rate, ConfusionCounts, DetectionMetrics};
pub use wilcoxon::{
    pratt_ranks, wilcoxon_pratt, wilcoxon_pratt_differences, Alternative, Method, WilcoxonResult, EXACT_MAX_N,
};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("empty sample")]
    EmptySample,
    /// Every difference is zero; the p-value is 1 by convention.
    #[error("all differences are zero (p = 1)")]
    DegenerateSample,
    #[error("score {0} outside 1-5")]
    ScoreOutOfRange(u8),
    #[error("malformed survey row at line {line}: {reason}")]
    MalformedSurvey { line: usize, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One learner's before/after self-rating of one phoneme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedSample {
    pub participant_id: String,
    /// IPA symbol.
    pub phoneme: String,
    pub pre: u8,
    pub post: u8,
}

impl PairedSample {
    pub fn validate(&self) -> Result<(), StatsError> {
        for s in [self.pre, self.post] {
            if !(1..=5).contains(&s) {
                return Err(StatsError::ScoreOutOfRange(s));
            }
        }
        Ok(())
    }
}
