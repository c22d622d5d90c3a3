//! Articulatory knowledge base, contrastive feedback messages and
//! side-view tongue diagrams.

mod compose;
mod diagram;
mod kb;

use thiserror::Error;

use crate::phoneme::TokenId;

pub use compose::{compose_feedback, ContrastPoint, FeedbackMessage};
pub use diagram::{render_tongue_diagram, DiagramParams, LipShape, Point, MIN_DIAGRAM_SIZE};
pub use kb::{descriptors_for, ArticulationText, ArticulatoryEntry, CommonError, KnowledgeBase, Locale};

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("knowledge base lacks entries for phoneme ids {0:?}")]
    IncompleteKnowledgeBase(Vec<TokenId>),
    #[error("malformed knowledge base entry at line {line}: {reason}")]
    MalformedEntry { line: usize, reason: String },
    #[error("no phoneme with id {0}")]
    UnknownPhoneme(TokenId),
    #[error("diagram size {0} is below the minimum of 64")]
    DiagramTooSmall(u32),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
