use std::f64::consts::PI;
use std::time::Duration;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{decode_wav, AudioBuffer, AudioError, CANONICAL_SAMPLE_RATE};
use crate::phoneme::{PhonemeInventory, PhonemeSequence, TokenId, EOW};

#[derive(Debug, Error)]
pub enum TtsError {
    #[error("TTS request failed: {0}")]
    Transport(String),
    #[error("TTS returned unusable audio: {0}")]
    BadAudio(#[from] AudioError),
    #[error("TTS request rejected: {0}")]
    Rejected(String),
}

/// Body posted to a synthesis endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TtsRequest {
    pub text: String,
    /// Space-separated IPA with `|` between words; synthesizers that honour
    /// it render the (possibly corrupted) pronunciation instead of `text`.
    pub phonemes: String,
    pub speaker_id: u8,
}

pub trait TtsClient: Send + Sync {
    fn synthesize(&self, request: &TtsRequest) -> Result<AudioBuffer, TtsError>;
}

/// Client for an HTTP endpoint that answers a JSON [`TtsRequest`] with WAV bytes.
pub struct HttpTtsClient {
    url: String,
    agent: ureq::Agent,
}

impl HttpTtsClient {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).build();
        HttpTtsClient { url: url.into(), agent: ureq::Agent::new_with_config(config) }
    }
}

impl TtsClient for HttpTtsClient {
    fn synthesize(&self, request: &TtsRequest) -> Result<AudioBuffer, TtsError> {
        let body = serde_json::to_vec(request).map_err(|e| TtsError::Transport(e.to_string()))?;
        let mut response = self
            .agent
            .post(&self.url)
            .header("Content-Type", "application/json")
            .send(&body[..])
            .map_err(|e| TtsError::Transport(e.to_string()))?;
        let bytes = response
            .body_mut()
            .read_to_vec()
            .map_err(|e| TtsError::Transport(e.to_string()))?;
        Ok(decode_wav(&bytes)?)
    }
}

/// Offline synthesizer: each phoneme becomes a 120 ms two-partial tone whose
/// pitch encodes the phoneme id (plus a small speaker shift), words are separated by 40 ms
/// of silence and the utterance is padded with 150 ms on both sides.
/// Deterministic, so corpora built with it are reproducible byte for byte.
#[derive(Debug, Clone, Default)]
pub struct StubTtsClient;

pub(crate) const STUB_PHONEME_MS: usize = 120;
pub(crate) const STUB_GAP_MS: usize = 40;
pub(crate) const STUB_PAD_MS: usize = 150;
pub(crate) const STUB_BASE_HZ: f64 = 180.0;
pub(crate) const STUB_STEP_HZ: f64 = 35.0;

/// Fundamental of phoneme `id`; speakers shift it by at most 13.5 Hz, less
/// than half the spacing between phonemes, so the id stays recoverable.
pub(crate) fn stub_frequency(id: TokenId, speaker_id: u8) -> f64 {
    STUB_BASE_HZ + STUB_STEP_HZ * f64::from(id) + 1.5 * f64::from(speaker_id % 10)
}

impl TtsClient for StubTtsClient {
    fn synthesize(&self, request: &TtsRequest) -> Result<AudioBuffer, TtsError> {
        let inv = PhonemeInventory::builtin();
        let symbols: Vec<&str> = request.phonemes.split_whitespace().collect();
        let seq = crate::phoneme::encode_flat(inv, &symbols)
            .map_err(|e| TtsError::Rejected(e.to_string()))?;
        Ok(stub_render(&seq, request.speaker_id))
    }
}

fn stub_render(seq: &PhonemeSequence, speaker_id: u8) -> AudioBuffer {
    let rate = CANONICAL_SAMPLE_RATE as usize;
    let ms = |n: usize| n * rate / 1000;
    let mut samples = vec![0i16; ms(STUB_PAD_MS)];
    let tokens = seq.tokens();
    for (k, &t) in tokens.iter().enumerate() {
        if t == EOW {
            samples.extend(std::iter::repeat_n(0, ms(STUB_GAP_MS)));
            continue;
        }
        if usize::from(t) >= crate::phoneme::PHONEME_COUNT {
            continue;
        }
        let f0 = stub_frequency(t, speaker_id);
        let n = ms(STUB_PHONEME_MS);
        samples.extend((0..n).map(|i| {
            let x = i as f64 / rate as f64;
            // Short linear ramps avoid clicks at phoneme boundaries.
            let ramp = (i.min(n - 1 - i) as f64 / 40.0).min(1.0);
            let s = (2.0 * PI * f0 * x).sin() + 0.4 * (2.0 * PI * 2.0 * f0 * x + k as f64).sin();
            (6000.0 * ramp * s).round() as i16
        }));
    }
    samples.extend(std::iter::repeat_n(0, ms(STUB_PAD_MS)));
    AudioBuffer { samples, sample_rate: CANONICAL_SAMPLE_RATE }
}

/// Inverse of [`StubTtsClient`]: recovers the phoneme sequence from audio
/// it rendered (at 8 kHz, unaugmented). Each tone segment's dominant
/// frequency is located with a zero-padded FFT and mapped back to an id.
pub fn stub_transcribe(buffer: &AudioBuffer) -> Result<PhonemeSequence, TtsError> {
    let bad = |m: &str| TtsError::Rejected(format!("not stub-synthesized audio: {m}"));
    if buffer.sample_rate != CANONICAL_SAMPLE_RATE {
        return Err(bad("sample rate"));
    }
    let rate = CANONICAL_SAMPLE_RATE as usize;
    let ms = |n: usize| n * rate / 1000;
    let (pad, gap, seg) = (ms(STUB_PAD_MS), ms(STUB_GAP_MS), ms(STUB_PHONEME_MS));
    let s = &buffer.samples;
    if s.len() < 2 * pad + seg {
        return Err(bad("too short"));
    }
    const N_FFT: usize = 8192;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(N_FFT);
    let mut scratch = vec![Complex::new(0.0, 0.0); N_FFT];

    let mut words: Vec<Vec<TokenId>> = vec![Vec::new()];
    let mut pos = pad;
    while s.len() - pos > pad {
        if pos + gap <= s.len() && s[pos..pos + gap].iter().all(|&x| x == 0) {
            words.push(Vec::new());
            pos += gap;
            continue;
        }
        if pos + seg > s.len() {
            return Err(bad("truncated segment"));
        }
        for (i, slot) in scratch.iter_mut().enumerate() {
            *slot = Complex::new(if i < seg { f64::from(s[pos + i]) } else { 0.0 }, 0.0);
        }
        fft.process(&mut scratch);
        let peak = (1..N_FFT / 2)
            .max_by(|&a, &b| scratch[a].norm_sqr().total_cmp(&scratch[b].norm_sqr()))
            .expect("non-empty range");
        let freq = peak as f64 * rate as f64 / N_FFT as f64;
        // Speaker shifts lie in [0, 13.5] Hz; center them before rounding.
        let id = ((freq - STUB_BASE_HZ - 6.75) / STUB_STEP_HZ).round();
        if !(0.0..crate::phoneme::PHONEME_COUNT as f64).contains(&id) {
            return Err(bad("tone outside the phoneme range"));
        }
        words.last_mut().expect("non-empty").push(id as TokenId);
        pos += seg;
    }
    if s.len() - pos != pad || s[pos..].iter().any(|&x| x != 0) {
        return Err(bad("unexpected trailer"));
    }
    PhonemeSequence::from_word_ids(&words).map_err(|e| bad(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stub_is_deterministic_and_sized() {
        let req = TtsRequest { text: "कमल".into(), phonemes: "k ə | m ə l".into(), speaker_id: 3 };
        let a = StubTtsClient.synthesize(&req).unwrap();
        let b = StubTtsClient.synthesize(&req).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sample_rate, 8000);
        // pad + 5 phonemes + one word gap + pad (no gap after the last word)
        assert_eq!(a.samples.len(), 1200 + 5 * 960 + 320 + 1200);
    }

    #[test]
    fn stub_audio_transcribes_back() {
        let inv = PhonemeInventory::builtin();
        let all: Vec<String> = (0..64u8).map(|i| inv.symbol(i).to_string()).collect();
        let text = format!("{} | {} | {}", all[..20].join(" "), all[20..40].join(" "), all[40..].join(" "));
        for speaker in [0, 9] {
            let req = TtsRequest { text: String::new(), phonemes: text.clone(), speaker_id: speaker };
            let audio = StubTtsClient.synthesize(&req).unwrap();
            let back = stub_transcribe(&audio).unwrap();
            assert_eq!(crate::phoneme::format_ipa(inv, &back), text);
        }
        let silence = AudioBuffer { samples: vec![0; 8000], sample_rate: 8000 };
        assert!(stub_transcribe(&silence).is_err());
    }

    #[test]
    fn stub_rejects_unknown_symbols() {
        let req = TtsRequest { text: String::new(), phonemes: "k θ".into(), speaker_id: 0 };
        assert!(matches!(StubTtsClient.synthesize(&req), Err(TtsError::Rejected(_))));
    }

    #[test]
    fn http_client_reports_transport_failure() {
        let c = HttpTtsClient::new("http://127.0.0.1:9/tts", Duration::from_millis(300));
        let req = TtsRequest { text: "क".into(), phonemes: "k ə".into(), speaker_id: 0 };
        assert!(matches!(c.synthesize(&req), Err(TtsError::Transport(_))));
    }
}
