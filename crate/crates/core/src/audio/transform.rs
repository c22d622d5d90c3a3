use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AudioBuffer, AudioError};

pub const MAX_AUGMENT_GAIN_DB: f64 = 5.0;
pub const MIN_AUGMENT_SPEED: f64 = 0.9;
pub const MAX_AUGMENT_SPEED: f64 = 1.1;

/// One augmentation: energy change in dB plus a varispeed factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAugmentSpec")]
pub struct AugmentSpec {
    gain_db: f64,
    speed_factor: f64,
}

#[derive(Deserialize)]
struct RawAugmentSpec {
    gain_db: f64,
    speed_factor: f64,
}

impl TryFrom<RawAugmentSpec> for AugmentSpec {
    type Error = AudioError;

    fn try_from(raw: RawAugmentSpec) -> Result<Self, Self::Error> {
        AugmentSpec::new(raw.gain_db, raw.speed_factor)
    }
}

impl AugmentSpec {
    pub fn new(gain_db: f64, speed_factor: f64) -> Result<Self, AudioError> {
        if !(-MAX_AUGMENT_GAIN_DB..=MAX_AUGMENT_GAIN_DB).contains(&gain_db) {
            return Err(AudioError::OutOfRange(format!("gain {gain_db} dB outside [-5, 5]")));
        }
        if !(MIN_AUGMENT_SPEED..=MAX_AUGMENT_SPEED).contains(&speed_factor) {
            return Err(AudioError::OutOfRange(format!(
                "speed factor {speed_factor} outside [0.9, 1.1]"
            )));
        }
        Ok(AugmentSpec { gain_db, speed_factor })
    }

    /// Draws gain uniformly from [-5, 5] dB and speed uniformly from [0.9, 1.1].
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        AugmentSpec {
            gain_db: rng.random_range(-MAX_AUGMENT_GAIN_DB..=MAX_AUGMENT_GAIN_DB),
            speed_factor: rng.random_range(MIN_AUGMENT_SPEED..=MAX_AUGMENT_SPEED),
        }
    }

    pub fn gain_db(&self) -> f64 {
        self.gain_db
    }

    pub fn speed_factor(&self) -> f64 {
        self.speed_factor
    }

    /// Gain followed by speed change. Returns the clipped-sample count of the gain step.
    pub fn apply(&self, buffer: &AudioBuffer) -> (AudioBuffer, usize) {
        let (gained, clipped) = apply_gain_db(buffer, self.gain_db);
        (change_speed(&gained, self.speed_factor), clipped)
    }
}

/// Scales every sample by `10^(gain_db / 20)`, rounding to nearest and
/// saturating at the i16 bounds. Returns the buffer and the clipped count.
pub fn apply_gain_db(buffer: &AudioBuffer, gain_db: f64) -> (AudioBuffer, usize) {
    let factor = 10f64.powf(gain_db / 20.0);
    let mut clipped = 0;
    let samples = buffer
        .samples
        .iter()
        .map(|&s| {
            let v = (f64::from(s) * factor).round();
            if v > f64::from(i16::MAX) {
                clipped += 1;
                i16::MAX
            } else if v < f64::from(i16::MIN) {
                clipped += 1;
                i16::MIN
            } else {
                v as i16
            }
        })
        .collect();
    (AudioBuffer { samples, sample_rate: buffer.sample_rate }, clipped)
}

fn interpolate(samples: &[i16], position: f64) -> f64 {
    let last = samples.len() - 1;
    if position >= last as f64 {
        return f64::from(samples[last]);
    }
    let base = position.floor() as usize;
    let frac = position - base as f64;
    let a = f64::from(samples[base]);
    let b = f64::from(samples[base + 1]);
    a + (b - a) * frac
}

/// Varispeed resampling by linear interpolation: output sample `i` is read
/// at input position `i * factor`, and the output has `round(len / factor)`
/// samples. Duration and pitch shift together.
pub fn change_speed(buffer: &AudioBuffer, factor: f64) -> AudioBuffer {
    assert!((0.5..=2.0).contains(&factor), "speed factor {factor} outside [0.5, 2.0]");
    if buffer.samples.is_empty() || factor == 1.0 {
        return buffer.clone();
    }
    let out_len = (buffer.samples.len() as f64 / factor).round() as usize;
    let samples = (0..out_len)
        .map(|i| interpolate(&buffer.samples, i as f64 * factor).round() as i16)
        .collect();
    AudioBuffer { samples, sample_rate: buffer.sample_rate }
}

/// Linear-interpolation sample-rate conversion.
pub fn resample(buffer: &AudioBuffer, target_rate: u32) -> AudioBuffer {
    if buffer.sample_rate == target_rate || buffer.samples.is_empty() {
        return AudioBuffer { samples: buffer.samples.clone(), sample_rate: target_rate };
    }
    let step = f64::from(buffer.sample_rate) / f64::from(target_rate);
    let out_len = (buffer.samples.len() as f64 / step).round() as usize;
    let samples = (0..out_len)
        .map(|i| interpolate(&buffer.samples, i as f64 * step).round() as i16)
        .collect();
    AudioBuffer { samples, sample_rate: target_rate }
}

pub const MAX_CORPUS_SECONDS: f64 = 8.0;
pub const MIN_CORPUS_SECONDS: f64 = 0.5;

/// Corpus length policy: hard cut at 8 s (logged), rejection below 0.5 s.
pub fn fit_corpus_duration(buffer: AudioBuffer) -> Result<AudioBuffer, AudioError> {
    let seconds = buffer.duration_seconds();
    if seconds < MIN_CORPUS_SECONDS {
        return Err(AudioError::TooShort(seconds));
    }
    let max_len = (MAX_CORPUS_SECONDS * f64::from(buffer.sample_rate)) as usize;
    if buffer.samples.len() > max_len {
        log::warn!("truncating {seconds:.2} s utterance to {MAX_CORPUS_SECONDS} s");
        let mut samples = buffer.samples;
        samples.truncate(max_len);
        return Ok(AudioBuffer { samples, sample_rate: buffer.sample_rate });
    }
    Ok(buffer)
}
