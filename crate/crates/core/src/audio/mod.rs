//! Audio at the corpus format (8 kHz, 16-bit mono): WAV I/O, augmentation
//! transforms and log-mel features.

mod mel;
mod transform;
mod wav;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mel::{
    hz_to_mel, mel_center_frequencies, mel_filterbank, mel_spectrogram, mel_to_hz, MelConfig,
    MelSpectrogram, LOG_EPSILON,
};
pub use transform::{
    apply_gain_db, change_speed, fit_corpus_duration, resample, AugmentSpec, MAX_AUGMENT_GAIN_DB,
    MAX_AUGMENT_SPEED, MAX_CORPUS_SECONDS, MIN_AUGMENT_SPEED, MIN_CORPUS_SECONDS,
};
pub use wav::{decode_wav, encode_wav, read_wav, write_wav};

pub const CANONICAL_SAMPLE_RATE: u32 = 8000;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("unsupported WAV: {0}")]
    UnsupportedWav(String),
    #[error("malformed WAV: {0}")]
    MalformedWav(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("invalid mel configuration: {0}")]
    InvalidMelConfig(String),
    #[error("utterance too short ({0:.2} s)")]
    TooShort(f64),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Mono 16-bit PCM samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudioBuffer {
    pub samples: Vec<i16>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::OutOfRange("sample rate must be positive".into()));
        }
        Ok(AudioBuffer { samples, sample_rate })
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}
