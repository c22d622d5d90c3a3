use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{fit_corpus_duration, resample, write_wav, AudioBuffer, AugmentSpec, CANONICAL_SAMPLE_RATE};
use crate::g2p::{to_phonemes, G2pOptions};
use crate::phoneme::{format_ipa, FeatureWeights, PhonemeInventory, PhonemeSequence};

use super::inject::{inject_errors_with, ConfusionPolicy, ConfusionTable, ErrorOp, ErrorVector};
use super::rng::{derive_seed, substream};
use super::tts::{TtsClient, TtsError, TtsRequest};
use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub text: String,
}

/// Reads one sentence per line; `id<TAB>text` lines keep their id, bare
/// lines get `s0001`, `s0002`, ... by line number. Blank lines and `#`
/// comments are ignored.
pub fn load_sentences(path: &Path) -> Result<Vec<Sentence>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(parse_sentences(&text))
}

pub fn parse_sentences(text: &str) -> Vec<Sentence> {
    text.lines()
        .enumerate()
        .filter_map(|(n, line)| {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                return None;
            }
            Some(match line.split_once('\t') {
                Some((id, t)) => Sentence { id: id.trim().to_string(), text: t.trim().to_string() },
                None => Sentence { id: format!("s{:04}", n + 1), text: line.to_string() },
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudioPaths {
    /// Relative to the manifest's directory.
    pub correct: String,
    pub mispronounced: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtterancePair {
    pub sentence_id: String,
    pub text: String,
    pub canonical: PhonemeSequence,
    pub corrupted: PhonemeSequence,
    pub ops: Vec<ErrorOp>,
    pub error_vector: ErrorVector,
    pub speaker_id: u8,
    /// Seed that reproduces `ops` via [`super::inject_errors`].
    pub seed: u64,
    pub audio_paths: Option<AudioPaths>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<AugmentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMetadata {
    pub p_error: f64,
    pub n_pairs: usize,
    pub seed: u64,
    pub speaker_count: u8,
    pub sample_rate: u32,
    pub confusion_policy: ConfusionPolicy,
    #[serde(default)]
    pub augmentations_per_entry: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub metadata: CorpusMetadata,
    pub entries: Vec<UtterancePair>,
}

/// `manifest.jsonl` -> `manifest.meta.json`.
pub fn metadata_path(manifest_path: &Path) -> PathBuf {
    manifest_path.with_extension("meta.json")
}

impl CorpusManifest {
    /// Writes one JSON object per line plus the metadata sidecar.
    pub fn write(&self, path: &Path) -> Result<(), CorpusError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
        }
        let file = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
        let mut out = BufWriter::new(file);
        for entry in &self.entries {
            let line = serde_json::to_string(entry).expect("manifest entries serialize");
            writeln!(out, "{line}").map_err(|e| CorpusError::io(path, e))?;
        }
        out.flush().map_err(|e| CorpusError::io(path, e))?;
        let meta_path = metadata_path(path);
        let meta = serde_json::to_string_pretty(&self.metadata).expect("metadata serializes");
        fs::write(&meta_path, meta + "\n").map_err(|e| CorpusError::io(&meta_path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CorpusError> {
        let meta_path = metadata_path(path);
        let meta_text = fs::read_to_string(&meta_path).map_err(|e| CorpusError::io(&meta_path, e))?;
        let metadata = serde_json::from_str(&meta_text)
            .map_err(|e| CorpusError::MalformedManifest { line: 0, reason: e.to_string() })?;
        let file = fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
        let mut entries = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| CorpusError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line)
                .map_err(|e| CorpusError::MalformedManifest { line: n + 1, reason: e.to_string() })?;
            entries.push(entry);
        }
        Ok(CorpusManifest { metadata, entries })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub n_pairs: usize,
    pub p_error: f64,
    pub seed: u64,
    pub speaker_count: u8,
    pub confusion_policy: ConfusionPolicy,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            n_pairs: 1000,
            p_error: 0.05,
            seed: 0,
            speaker_count: 10,
            confusion_policy: ConfusionPolicy::Confusable,
            jobs: 0,
        }
    }
}

/// Where synthesized audio goes.
pub struct AudioSink<'a> {
    pub tts: &'a dyn TtsClient,
    /// Directory of the manifest; files are written to `<dir>/audio/`.
    pub dir: &'a Path,
}

#[derive(Debug)]
pub struct CorpusBuild {
    pub manifest: CorpusManifest,
    /// Human-readable notes about skipped sentences and failed synthesis.
    pub warnings: Vec<String>,
}

pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CorpusError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CorpusError::Internal(e.to_string()))
}

/// Builds `n_pairs` (sentence, speaker) pairs. Pair `k = a*S + b` (with `S`
/// usable sentences) uses sentence `b` and speaker `(a + b) mod speakers`, so
/// pairs are unique while `n_pairs <= S * speakers`.
///
/// Every pair draws from its own random stream keyed by `k`, so the output
/// does not depend on `jobs`.
pub fn build_corpus(
    sentences: &[Sentence],
    config: &CorpusConfig,
    audio: Option<AudioSink<'_>>,
) -> Result<CorpusBuild, CorpusError> {
    if !(0.0..=super::MAX_ERROR_PROBABILITY).contains(&config.p_error) {
        return Err(CorpusError::InvalidProbability(config.p_error));
    }
    if config.speaker_count == 0 {
        return Err(CorpusError::InvalidConfig("speaker_count must be positive".into()));
    }
    let inventory = PhonemeInventory::builtin();
    let opts = G2pOptions::new(inventory);
    let mut warnings = Vec::new();
    let mut usable = Vec::new();
    for s in sentences {
        match to_phonemes(&s.text, &opts) {
            Ok(r) if r.sequence.phoneme_count() > 0 => usable.push((s, r.sequence)),
            Ok(_) => warnings.push(format!("sentence {}: no phonemes, skipped", s.id)),
            Err(e) => warnings.push(format!("sentence {}: {e}, skipped", s.id)),
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    if usable.is_empty() {
        return Err(CorpusError::NoUsableSentences);
    }
    let available = usable.len() * usize::from(config.speaker_count);
    if config.n_pairs > available {
        return Err(CorpusError::TooManyPairs { requested: config.n_pairs, available });
    }

    let table = ConfusionTable::new(inventory, &FeatureWeights::default());
    let pool = thread_pool(config.jobs)?;
    let results: Vec<Result<(UtterancePair, Option<String>), CorpusError>> = pool.install(|| {
        (0..config.n_pairs)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (k / usable.len(), k % usable.len());
                let (sentence, canonical) = &usable[b];
                let speaker_id = ((a + b) % usize::from(config.speaker_count)) as u8;
                let seed = derive_seed(config.seed, &[k as u64]);
                let inj = inject_errors_with(
                    canonical,
                    config.p_error,
                    &mut substream(seed, &[]),
                    &table,
                    config.confusion_policy,
                )?;
                let mut pair = UtterancePair {
                    sentence_id: sentence.id.clone(),
                    text: sentence.text.clone(),
                    canonical: canonical.clone(),
                    corrupted: inj.corrupted,
                    ops: inj.ops,
                    error_vector: inj.error_vector,
                    speaker_id,
                    seed,
                    audio_paths: None,
                    augmentation: None,
                };
                let mut warning = None;
                if let Some(sink) = &audio {
                    match synthesize_pair(&pair, inventory, sink) {
                        Ok(paths) => pair.audio_paths = Some(paths),
                        Err(e) => {
                            let w = format!("pair {k} ({}, speaker {speaker_id}): {e}", pair.sentence_id);
                            log::warn!("{w}");
                            warning = Some(w);
                        }
                    }
                }
                Ok((pair, warning))
            })
            .collect()
    });

    let mut entries = Vec::with_capacity(results.len());
    for r in results {
        let (pair, warning) = r?;
        warnings.extend(warning);
        entries.push(pair);
    }
    Ok(CorpusBuild {
        manifest: CorpusManifest {
            metadata: CorpusMetadata {
                p_error: config.p_error,
                n_pairs: entries.len(),
                seed: config.seed,
                speaker_count: config.speaker_count,
                sample_rate: CANONICAL_SAMPLE_RATE,
                confusion_policy: config.confusion_policy,
                augmentations_per_entry: 0,
            },
            entries,
        },
        warnings,
    })
}

fn synthesize_once(tts: &dyn TtsClient, req: &TtsRequest) -> Result<AudioBuffer, TtsError> {
    let raw = match tts.synthesize(req) {
        Ok(buf) => buf,
        Err(first) => {
            log::debug!("TTS failed ({first}), retrying once");
            tts.synthesize(req)?
        }
    };
    Ok(fit_corpus_duration(resample(&raw, CANONICAL_SAMPLE_RATE))?)
}

fn synthesize_pair(
    pair: &UtterancePair,
    inventory: &PhonemeInventory,
    sink: &AudioSink<'_>,
) -> Result<AudioPaths, CorpusError> {
    let stem = format!("{}_spk{:02}", pair.sentence_id, pair.speaker_id);
    let render = |seq: &PhonemeSequence, suffix: &str| -> Result<String, CorpusError> {
        let req = TtsRequest { text: pair.text.clone(), phonemes: format_ipa(inventory, seq), speaker_id: pair.speaker_id };
        let buf = synthesize_once(sink.tts, &req)?;
        let rel = format!("audio/{stem}_{suffix}.wav");
        let path = sink.dir.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CorpusError::io(parent, e))?;
        }
        write_wav(&path, &buf)?;
        Ok(rel)
    };
    let correct = render(&pair.canonical, "correct")?;
    let mispronounced = render(&pair.corrupted, "mispronounced")?;
    Ok(AudioPaths { correct, mispronounced })
}
