//! Mispronunciation detection: phoneme alignment against the canonical
//! sequence and word-level error reports graded by recognizer confidence.

mod align;
mod recognizer;
mod report;

use thiserror::Error;

pub use align::{align, substitution_cost, AlignKind, Alignment, AlignmentOp, INDEL_COST};
pub use recognizer::{
    mock_recognize, HttpRecognizer, Recognizer, RecognizerOutput, StubAudioRecognizer, POSTERIOR_DECIMALS,
};
pub use report::{
    analyze_pronunciation, detect_word_errors, DetectionReport, PhonemePair, SeverityBin, SeverityBins,
    WordErrorReport,
};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("invalid posteriors: {0}")]
    InvalidPosteriors(String),
    #[error("fidelity {0} outside [0, 1]")]
    InvalidFidelity(f64),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("recognizer failed: {0}")]
    Recognizer(String),
}
