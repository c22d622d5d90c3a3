use std::time::Duration;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{encode_wav, AudioBuffer};
use crate::corpus::rng::substream;
use crate::corpus::{stub_transcribe, ConfusionTable};
use crate::phoneme::{PhonemeSequence, TokenId, PHONEME_COUNT, TOKEN_COUNT};

use super::DetectError;

/// Posterior rows are stored with this many decimals.
pub const POSTERIOR_DECIMALS: i32 = 4;
const UNITS: u32 = 10_000;
/// Rows read from the 4-decimal wire format may be off by the rounding of
/// every entry; they are renormalized on load.
const WIRE_SUM_TOLERANCE: f64 = TOKEN_COUNT as f64 * 0.5e-4 + 1e-9;

/// Predicted tokens with one distribution over the 67-token vocabulary each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOutput")]
pub struct RecognizerOutput {
    predicted: PhonemeSequence,
    #[serde(serialize_with = "serialize_rows")]
    posteriors: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawOutput {
    predicted: PhonemeSequence,
    posteriors: Vec<Vec<f64>>,
}

impl TryFrom<RawOutput> for RecognizerOutput {
    type Error = DetectError;
    fn try_from(raw: RawOutput) -> Result<Self, Self::Error> {
        RecognizerOutput::new(raw.predicted, raw.posteriors)
    }
}

fn serialize_rows<S: serde::Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
    let scale = 10f64.powi(POSTERIOR_DECIMALS);
    let rounded: Vec<Vec<f64>> =
        rows.iter().map(|r| r.iter().map(|v| (v * scale).round() / scale).collect()).collect();
    serde::Serialize::serialize(&rounded, s)
}

impl RecognizerOutput {
    /// Validates shape, values and argmax agreement; rows are renormalized
    /// so each sums to 1 within 1e-6.
    pub fn new(predicted: PhonemeSequence, mut posteriors: Vec<Vec<f64>>) -> Result<Self, DetectError> {
        if posteriors.len() != predicted.tokens().len() {
            return Err(DetectError::InvalidPosteriors(format!(
                "{} rows for {} predicted tokens",
                posteriors.len(),
                predicted.tokens().len()
            )));
        }
        for (t, (row, &token)) in posteriors.iter_mut().zip(predicted.tokens()).enumerate() {
            let bad = |m: String| DetectError::InvalidPosteriors(format!("row {t}: {m}"));
            if row.len() != TOKEN_COUNT {
                return Err(bad(format!("{} entries, need {TOKEN_COUNT}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(bad("negative or non-finite probability".into()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > WIRE_SUM_TOLERANCE {
                return Err(bad(format!("sums to {sum}")));
            }
            row.iter_mut().for_each(|v| *v /= sum);
            if argmax(row) != token {
                return Err(bad(format!("argmax {} but emitted token {token}", argmax(row))));
            }
        }
        Ok(RecognizerOutput { predicted, posteriors })
    }

    pub fn predicted(&self) -> &PhonemeSequence {
        &self.predicted
    }

    pub fn posteriors(&self) -> &[Vec<f64>] {
        &self.posteriors
    }

    /// Posterior row of the `p`-th predicted phoneme (markers skipped).
    pub fn phoneme_row(&self, p: usize) -> Option<&[f64]> {
        let idx = *self.predicted.phoneme_token_indices().get(p)?;
        Some(&self.posteriors[idx])
    }
}

/// Lowest id among the maxima.
fn argmax(row: &[f64]) -> TokenId {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best as TokenId
}

pub trait Recognizer: Send + Sync {
    fn recognize(&self, audio: &AudioBuffer) -> Result<RecognizerOutput, DetectError>;
}

/// POSTs 8 kHz WAV bytes and expects a JSON [`RecognizerOutput`].
pub struct HttpRecognizer {
    url: String,
    agent: ureq::Agent,
}

impl HttpRecognizer {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).build();
        HttpRecognizer { url: url.into(), agent: ureq::Agent::new_with_config(config) }
    }
}

impl Recognizer for HttpRecognizer {
    fn recognize(&self, audio: &AudioBuffer) -> Result<RecognizerOutput, DetectError> {
        let wav = encode_wav(audio);
        let mut resp = self
            .agent
            .post(&self.url)
            .header("Content-Type", "audio/wav")
            .send(&wav[..])
            .map_err(|e| DetectError::Recognizer(e.to_string()))?;
        let body = resp.body_mut().read_to_vec().map_err(|e| DetectError::Recognizer(e.to_string()))?;
        serde_json::from_slice(&body).map_err(|e| DetectError::Recognizer(format!("bad response: {e}")))
    }
}

/// Offline recognizer for audio rendered by the stub synthesizer: recovers
/// the spoken phonemes exactly, then applies [`mock_recognize`].
#[derive(Debug, Clone)]
pub struct StubAudioRecognizer {
    pub fidelity: f64,
    pub seed: u64,
}

impl Recognizer for StubAudioRecognizer {
    fn recognize(&self, audio: &AudioBuffer) -> Result<RecognizerOutput, DetectError> {
        let spoken = stub_transcribe(audio).map_err(|e| DetectError::Recognizer(e.to_string()))?;
        mock_recognize(&spoken, self.fidelity, self.seed)
    }
}

/// Simulated recognizer for what the learner actually said.
///
/// Each token of `spoken` yields one row. With probability `1 - fidelity` a
/// phoneme is misheard as a confusable neighbor. The emitted token gets mass
/// drawn from [0.75, 0.99]; the rest is spread randomly over the other
/// tokens. Rows are exact multiples of 1e-4, so they survive the 4-decimal
/// wire format unchanged.
pub fn mock_recognize(spoken: &PhonemeSequence, fidelity: f64, seed: u64) -> Result<RecognizerOutput, DetectError> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(DetectError::InvalidFidelity(fidelity));
    }
    let table = ConfusionTable::builtin();
    let mut rng = substream(seed, &[]);
    let mut emitted_tokens = Vec::with_capacity(spoken.tokens().len());
    let mut posteriors = Vec::with_capacity(spoken.tokens().len());
    for &t in spoken.tokens() {
        let mut emitted = t;
        if usize::from(t) < PHONEME_COUNT && !rng.random_bool(fidelity) {
            if let Some(&n) = table.neighbors(t).choose(&mut rng) {
                emitted = n;
            }
        }
        posteriors.push(mock_row(emitted, &mut rng));
        emitted_tokens.push(emitted);
    }
    let predicted = PhonemeSequence::new(emitted_tokens).expect("substitutions keep the sequence shape");
    Ok(RecognizerOutput { predicted, posteriors })
}

fn mock_row<R: Rng + ?Sized>(emitted: TokenId, rng: &mut R) -> Vec<f64> {
    let top = rng.random_range(7_500..=9_900u32);
    let rest = UNITS - top;
    let weights: Vec<f64> = (0..TOKEN_COUNT - 1).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    // Largest-remainder apportionment of `rest` units.
    let exact: Vec<f64> = weights.iter().map(|w| w / total * f64::from(rest)).collect();
    let mut units: Vec<u32> = exact.iter().map(|x| x.floor() as u32).collect();
    let mut short = rest - units.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &k in &order {
        if short == 0 {
            break;
        }
        units[k] += 1;
        short -= 1;
    }
    let mut others = units.into_iter();
    (0..TOKEN_COUNT)
        .map(|k| {
            let u = if k == usize::from(emitted) { top } else { others.next().expect("66 others") };
            f64::from(u) / f64::from(UNITS)
        })
        .collect()
}
