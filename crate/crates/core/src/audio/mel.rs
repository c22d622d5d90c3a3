use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{AudioBuffer, AudioError, CANONICAL_SAMPLE_RATE};

/// Floor added to mel power before the log.
pub const LOG_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelConfig {
    pub win_length: usize,
    pub hop_length: usize,
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
}

impl Default for MelConfig {
    /// 25 ms window, 10 ms hop, 64 bands over 0-4000 Hz at 8 kHz.
    fn default() -> Self {
        MelConfig { win_length: 200, hop_length: 80, n_mels: 64, fmin: 0.0, fmax: 4000.0 }
    }
}

impl MelConfig {
    pub fn n_fft(&self) -> usize {
        self.win_length.next_power_of_two()
    }

    pub fn frame_count(&self, n_samples: usize) -> usize {
        if n_samples < self.win_length {
            0
        } else {
            1 + (n_samples - self.win_length) / self.hop_length
        }
    }

    fn validate(&self, sample_rate: u32) -> Result<(), AudioError> {
        let bad = |m: String| Err(AudioError::InvalidMelConfig(m));
        if sample_rate != CANONICAL_SAMPLE_RATE {
            return bad(format!("sample rate {sample_rate} Hz, need 8000 Hz"));
        }
        if self.win_length == 0 || self.hop_length == 0 || self.hop_length > self.win_length {
            return bad("need 0 < hop_length <= win_length".into());
        }
        if self.n_mels == 0 {
            return bad("n_mels must be positive".into());
        }
        if !(self.fmin >= 0.0 && self.fmin < self.fmax && self.fmax <= f64::from(sample_rate) / 2.0) {
            return bad(format!("need 0 <= fmin < fmax <= 4000, got {}..{}", self.fmin, self.fmax));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelSpectrogram {
    /// `n_frames` rows of `n_mels` natural-log mel energies.
    pub frames: Vec<Vec<f64>>,
    pub frame_hop_seconds: f64,
    pub n_mels: usize,
}

impl MelSpectrogram {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    /// True when the input was shorter than one analysis window.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Center frequencies of the triangular filters, in Hz.
pub fn mel_center_frequencies(cfg: &MelConfig) -> Vec<f64> {
    let points = mel_points(cfg);
    points[1..=cfg.n_mels].to_vec()
}

fn mel_points(cfg: &MelConfig) -> Vec<f64> {
    let lo = hz_to_mel(cfg.fmin);
    let hi = hz_to_mel(cfg.fmax);
    (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect()
}

/// Peak-normalized triangular filters over the `n_fft / 2 + 1` FFT bins.
pub fn mel_filterbank(cfg: &MelConfig, sample_rate: u32) -> Vec<Vec<f64>> {
    let n_bins = cfg.n_fft() / 2 + 1;
    let bin_hz = f64::from(sample_rate) / cfg.n_fft() as f64;
    let points = mel_points(cfg);
    (0..cfg.n_mels)
        .map(|m| {
            let (left, center, right) = (points[m], points[m + 1], points[m + 2]);
            (0..n_bins)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    if f <= left || f >= right {
                        0.0
                    } else if f <= center {
                        (f - left) / (center - left)
                    } else {
                        (right - f) / (right - center)
                    }
                })
                .collect()
        })
        .collect()
}

fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Log-mel spectrogram: Hann-windowed frames (no padding), power spectrum,
/// triangular mel filters, `ln(power + 1e-10)`.
pub fn mel_spectrogram(buffer: &AudioBuffer, cfg: &MelConfig) -> Result<MelSpectrogram, AudioError> {
    cfg.validate(buffer.sample_rate)?;
    let n_frames = cfg.frame_count(buffer.samples.len());
    let frame_hop_seconds = cfg.hop_length as f64 / f64::from(buffer.sample_rate);
    if n_frames == 0 {
        return Ok(MelSpectrogram { frames: Vec::new(), frame_hop_seconds, n_mels: cfg.n_mels });
    }

    let n_fft = cfg.n_fft();
    let window = hann(cfg.win_length);
    let bank = mel_filterbank(cfg, buffer.sample_rate);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let mut scratch = vec![Complex::new(0.0, 0.0); n_fft];

    let frames = (0..n_frames)
        .map(|t| {
            let start = t * cfg.hop_length;
            for (i, slot) in scratch.iter_mut().enumerate() {
                *slot = if i < cfg.win_length {
                    let s = f64::from(buffer.samples[start + i]) / 32768.0;
                    Complex::new(s * window[i], 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                };
            }
            fft.process(&mut scratch);
            let power: Vec<f64> = scratch[..n_fft / 2 + 1].iter().map(|c| c.norm_sqr()).collect();
            bank.iter()
                .map(|filter| {
                    let e: f64 = filter.iter().zip(&power).map(|(w, p)| w * p).sum();
                    (e + LOG_EPSILON).ln()
                })
                .collect()
        })
        .collect();
    Ok(MelSpectrogram { frames, frame_hop_seconds, n_mels: cfg.n_mels })
}
