use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, write_wav, AugmentSpec};

use super::manifest::{AudioPaths, CorpusManifest, UtterancePair};
use super::rng::substream;
use super::CorpusError;

/// How one augmented variant is parameterized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentRequest {
    Fixed(AugmentSpec),
    /// Drawn per entry from the augmentation ranges.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub index: usize,
    pub sentence_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentOutcome {
    /// Each original entry followed by its variants.
    pub manifest: CorpusManifest,
    pub skipped: Vec<SkippedEntry>,
    pub clipped_samples: usize,
}

/// Adds one augmented entry per request for every original entry with audio.
/// Both recordings of a pair get the same spec. Entries without audio, or
/// whose audio cannot be read, are kept unchanged and reported as skipped.
/// Already-augmented entries are carried over without new variants.
pub fn augment_corpus(
    manifest: &CorpusManifest,
    manifest_dir: &Path,
    requests: &[AugmentRequest],
    seed: u64,
) -> Result<AugmentOutcome, CorpusError> {
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    let mut clipped_samples = 0;
    for (index, entry) in manifest.entries.iter().enumerate() {
        entries.push(entry.clone());
        if entry.augmentation.is_some() || requests.is_empty() {
            continue;
        }
        let skip = |reason: String| SkippedEntry { index, sentence_id: entry.sentence_id.clone(), reason };
        let Some(paths) = &entry.audio_paths else {
            skipped.push(skip("no audio".into()));
            continue;
        };
        let sources = match (read_wav(&manifest_dir.join(&paths.correct)), read_wav(&manifest_dir.join(&paths.mispronounced))) {
            (Ok(c), Ok(m)) => (c, m),
            (Err(e), _) | (_, Err(e)) => {
                skipped.push(skip(e.to_string()));
                continue;
            }
        };
        for (v, request) in requests.iter().enumerate() {
            let spec = match request {
                AugmentRequest::Fixed(spec) => *spec,
                AugmentRequest::Random => AugmentSpec::sample(&mut substream(seed, &[index as u64, v as u64])),
            };
            let mut variant_path = |rel: &str, buf| -> Result<String, CorpusError> {
                let (out, clipped) = spec.apply(buf);
                clipped_samples += clipped;
                let stem = rel.strip_suffix(".wav").unwrap_or(rel);
                let new_rel = format!("{stem}_aug{v}.wav");
                write_wav(&manifest_dir.join(&new_rel), &out)?;
                Ok(new_rel)
            };
            let correct = variant_path(&paths.correct, &sources.0)?;
            let mispronounced = variant_path(&paths.mispronounced, &sources.1)?;
            entries.push(UtterancePair {
                audio_paths: Some(AudioPaths { correct, mispronounced }),
                augmentation: Some(spec),
                ..entry.clone()
            });
        }
    }
    for s in &skipped {
        log::warn!("augmentation skipped entry {} ({}): {}", s.index, s.sentence_id, s.reason);
    }
    let mut metadata = manifest.metadata.clone();
    metadata.n_pairs = entries.len();
    metadata.augmentations_per_entry = requests.len();
    Ok(AugmentOutcome { manifest: CorpusManifest { metadata, entries }, skipped, clipped_samples })
}
