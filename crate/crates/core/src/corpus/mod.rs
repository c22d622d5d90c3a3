//! Synthetic mispronunciation corpus: error injection over canonical
//! phoneme sequences, paired TTS rendering, manifests and augmentation.

mod augment;
mod inject;
mod manifest;
pub mod rng;
mod tts;

use std::path::Path;

use thiserror::Error;

use crate::audio::AudioError;
use crate::phoneme::PhonemeError;

pub use augment::{augment_corpus, AugmentOutcome, AugmentRequest, SkippedEntry};
pub use inject::{
    apply_ops, inject_errors, inject_errors_with, is_sparse, word_flags_from_vector, ConfusionPolicy,
    ConfusionTable, ErrorKind, ErrorOp, ErrorVector, Injection, CONFUSABLE_DISTANCE, MAX_ERROR_PROBABILITY,
};
pub use manifest::{
    build_corpus, load_sentences, metadata_path, parse_sentences, AudioPaths, AudioSink, CorpusBuild,
    CorpusConfig, CorpusManifest, CorpusMetadata, Sentence, UtterancePair,
};
pub use tts::{stub_transcribe, HttpTtsClient, StubTtsClient, TtsClient, TtsError, TtsRequest};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("error probability {0} outside [0, 0.5]")]
    InvalidProbability(f64),
    #[error("canonical sequence has no phonemes")]
    EmptyCanonical,
    #[error("invalid error ops: {0}")]
    InvalidOps(String),
    #[error("invalid corpus configuration: {0}")]
    InvalidConfig(String),
    #[error("no usable sentences")]
    NoUsableSentences,
    #[error("{requested} pairs requested but only {available} distinct (sentence, speaker) pairs exist")]
    TooManyPairs { requested: usize, available: usize },
    #[error("manifest line {line}: {reason}")]
    MalformedManifest { line: usize, reason: String },
    #[error(transparent)]
    Phoneme(#[from] PhonemeError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Tts(#[from] TtsError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io { path: path.display().to_string(), source }
    }
}
