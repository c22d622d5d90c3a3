//! One learner attempt end to end: recognize (for audio), align against the
//! canonical phonemes, grade words and compose feedback. Shared by the CLI
//! and the HTTP service so both produce identical results.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{read_wav, resample, AudioBuffer, CANONICAL_SAMPLE_RATE};
use crate::corpus::rng::derive_seed;
use crate::corpus::{is_sparse, word_flags_from_vector, CorpusManifest};
use crate::detect::{
    analyze_pronunciation, mock_recognize, AlignKind, Alignment, DetectError, DetectionReport, Recognizer,
    RecognizerOutput, SeverityBins, WordErrorReport,
};
use crate::stats::{phoneme_error_rate, ConfusionCounts, DetectionMetrics};
use crate::feedback::{compose_feedback, FeedbackError, FeedbackMessage, KnowledgeBase, Locale};
use crate::phoneme::{FeatureWeights, PhonemeInventory, PhonemeSequence, TokenId};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown phoneme symbol {0:?}")]
    UnknownPhoneme(String),
    #[error("attempt contains no phonemes")]
    EmptyAttempt,
    #[error("recognizer unavailable: {0}")]
    RecognizerUnavailable(String),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error("invalid corpus input: {0}")]
    Corpus(String),
}

pub enum AttemptInput<'a> {
    /// IPA symbols; `|` separates words.
    Phonemes(&'a [String]),
    Audio { audio: &'a AudioBuffer, recognizer: &'a dyn Recognizer },
    /// Output of an external recognizer run.
    Recognized(&'a RecognizerOutput),
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisConfig<'a> {
    pub inventory: &'a PhonemeInventory,
    pub knowledge_base: &'a KnowledgeBase,
    pub weights: FeatureWeights,
    pub bins: SeverityBins,
    pub locale: Locale,
}

impl Default for AnalysisConfig<'static> {
    fn default() -> Self {
        AnalysisConfig {
            inventory: PhonemeInventory::builtin(),
            knowledge_base: KnowledgeBase::builtin(),
            weights: FeatureWeights::default(),
            bins: SeverityBins::default(),
            locale: Locale::En,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptAnalysis {
    pub predicted: PhonemeSequence,
    pub alignment: Alignment,
    /// One per canonical word.
    pub reports: Vec<WordErrorReport>,
    /// One per substituted or deleted canonical phoneme, in word order.
    pub feedback: Vec<FeedbackMessage>,
}

/// Parses IPA symbols into a sequence; `|` tokens split words and empty
/// words are dropped.
pub fn parse_ipa_attempt(inventory: &PhonemeInventory, symbols: &[String]) -> Result<PhonemeSequence, AnalysisError> {
    let mut words: Vec<Vec<TokenId>> = vec![Vec::new()];
    for s in symbols.iter().flat_map(|s| s.split_whitespace()) {
        if s == "|" {
            words.push(Vec::new());
            continue;
        }
        let id = inventory.id_of(s).ok_or_else(|| AnalysisError::UnknownPhoneme(s.to_string()))?;
        words.last_mut().expect("non-empty").push(id);
    }
    words.retain(|w| !w.is_empty());
    if words.is_empty() {
        return Err(AnalysisError::EmptyAttempt);
    }
    PhonemeSequence::from_word_ids(&words).map_err(|e| AnalysisError::UnknownPhoneme(e.to_string()))
}

pub fn analyze_attempt(
    canonical: &PhonemeSequence,
    input: AttemptInput<'_>,
    cfg: &AnalysisConfig<'_>,
) -> Result<AttemptAnalysis, AnalysisError> {
    let recognized;
    let (predicted, rec) = match input {
        AttemptInput::Phonemes(symbols) => (parse_ipa_attempt(cfg.inventory, symbols)?, None),
        AttemptInput::Audio { audio, recognizer } => {
            let audio = if audio.sample_rate == CANONICAL_SAMPLE_RATE {
                audio.clone()
            } else {
                resample(audio, CANONICAL_SAMPLE_RATE)
            };
            recognized = recognizer.recognize(&audio).map_err(|e| match e {
                DetectError::Recognizer(m) => AnalysisError::RecognizerUnavailable(m),
                other => AnalysisError::Detect(other),
            })?;
            (recognized.predicted().clone(), Some(&recognized))
        }
        AttemptInput::Recognized(out) => (out.predicted().clone(), Some(out)),
    };
    let report = analyze_pronunciation(cfg.inventory, canonical, &predicted, rec, &cfg.weights, &cfg.bins)?;
    let mut feedback = Vec::new();
    for w in &report.words {
        for (op, pair) in w.offending_ops.iter().zip(&w.pairs) {
            if op.kind == AlignKind::Insertion {
                continue;
            }
            let expected = pair.expected.expect("substitutions and deletions have a canonical phoneme");
            feedback.push(compose_feedback(expected, pair.produced, cfg.knowledge_base, cfg.inventory, cfg.locale)?);
        }
    }
    Ok(AttemptAnalysis { predicted: report.predicted, alignment: report.alignment, reports: report.words, feedback })
}

/// Where batch evaluation gets its recognizer output.
pub enum UtteranceRecognizer<'a> {
    /// Simulated recognition of the manifest's phonemes; no audio needed.
    Mock { fidelity: f64, seed: u64 },
    /// Recognition of the manifest's audio files.
    Audio { recognizer: &'a dyn Recognizer, manifest_dir: &'a Path },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Correct,
    Mispronounced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceResult {
    pub pair_index: usize,
    pub sentence_id: String,
    pub variant: Variant,
    /// Injected ops are far enough apart to be recoverable one by one.
    pub sparse: bool,
    pub gold_flags: Vec<bool>,
    pub predicted_flags: Vec<bool>,
    pub report: DetectionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEvaluation {
    pub utterances: Vec<UtteranceResult>,
    pub metrics: DetectionMetrics,
}

/// Pooled word-level metrics plus phoneme error rate.
pub fn metrics_for<'a>(utterances: impl IntoIterator<Item = &'a UtteranceResult> + Clone) -> DetectionMetrics {
    let mut counts = ConfusionCounts::default();
    for u in utterances.clone() {
        counts.add(ConfusionCounts::from_flags(&u.gold_flags, &u.predicted_flags).expect("one flag per word"));
    }
    let mut m = DetectionMetrics::from(counts);
    m.per = Some(phoneme_error_rate(utterances.into_iter().map(|u| &u.report.alignment)));
    m
}

/// Runs detection on both recordings of every manifest entry and scores the
/// word flags against the injected errors. Results keep manifest order
/// whatever `jobs` is (0 = all cores).
pub fn evaluate_corpus(
    manifest: &CorpusManifest,
    recognizer: &UtteranceRecognizer<'_>,
    cfg: &AnalysisConfig<'_>,
    jobs: usize,
) -> Result<CorpusEvaluation, AnalysisError> {
    if manifest.entries.is_empty() {
        return Err(AnalysisError::Corpus("manifest has no entries".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AnalysisError::Corpus(e.to_string()))?;
    let work: Vec<(usize, Variant)> = (0..manifest.entries.len())
        .flat_map(|i| [(i, Variant::Correct), (i, Variant::Mispronounced)])
        .collect();
    let utterances: Vec<UtteranceResult> = pool.install(|| {
        work.par_iter()
            .map(|&(i, variant)| {
                let e = &manifest.entries[i];
                let (spoken, gold) = match variant {
                    Variant::Correct => (&e.canonical, vec![false; e.canonical.word_count()]),
                    Variant::Mispronounced => (&e.corrupted, word_flags_from_vector(&e.canonical, &e.error_vector)),
                };
                let out = match recognizer {
                    UtteranceRecognizer::Mock { fidelity, seed } => {
                        mock_recognize(spoken, *fidelity, derive_seed(*seed, &[i as u64, variant as u64]))?
                    }
                    UtteranceRecognizer::Audio { recognizer, manifest_dir } => {
                        let paths = e.audio_paths.as_ref().ok_or_else(|| {
                            AnalysisError::Corpus(format!("entry {i} ({}) has no audio", e.sentence_id))
                        })?;
                        let rel = match variant {
                            Variant::Correct => &paths.correct,
                            Variant::Mispronounced => &paths.mispronounced,
                        };
                        let audio = read_wav(&manifest_dir.join(rel))
                            .map_err(|err| AnalysisError::Corpus(format!("{rel}: {err}")))?;
                        recognizer.recognize(&audio).map_err(|err| match err {
                            DetectError::Recognizer(m) => AnalysisError::RecognizerUnavailable(m),
                            other => AnalysisError::Detect(other),
                        })?
                    }
                };
                let report = analyze_pronunciation(
                    cfg.inventory,
                    &e.canonical,
                    out.predicted(),
                    Some(&out),
                    &cfg.weights,
                    &cfg.bins,
                )?;
                Ok(UtteranceResult {
                    pair_index: i,
                    sentence_id: e.sentence_id.clone(),
                    variant,
                    sparse: is_sparse(&e.ops),
                    gold_flags: gold,
                    predicted_flags: report.word_flags(),
                    report,
                })
            })
            .collect::<Result<Vec<_>, AnalysisError>>()
    })?;
    let metrics = metrics_for(&utterances);
    Ok(CorpusEvaluation { utterances, metrics })
}
