//! Hindi computer-assisted pronunciation training engine.
//!
//! The crate covers the whole offline pipeline:
//!
//! - [`phoneme`]: the 64-phoneme inventory and 67-token encoding space
//! - [`g2p`]: Devanagari akshara parsing and grapheme-to-phoneme conversion
//! - [`audio`]: 8 kHz / 16-bit WAV I/O, gain and speed augmentation, mel features
//! - [`corpus`]: seeded phoneme-error injection and paired-corpus manifests
//! - [`detect`]: canonical/predicted phoneme alignment and word-level grading
//! - [`feedback`]: articulatory knowledge base, contrastive feedback, tongue diagrams
//! - [`stats`]: detection metrics, Wilcoxon signed-rank (Pratt), Likert summaries
//! - [`analysis`]: the attempt-analysis pipeline shared by the CLI and HTTP service

pub mod analysis;
pub mod audio;
pub mod corpus;
pub mod detect;
pub mod feedback;
pub mod g2p;
pub mod phoneme;
pub mod stats;
