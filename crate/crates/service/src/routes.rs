use std::sync::Arc;
use std::time::Instant;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine as _;
use capt_core::analysis::{analyze_attempt, AnalysisError, AttemptInput};
use capt_core::audio::{decode_wav, CANONICAL_SAMPLE_RATE};
use capt_core::feedback::{descriptors_for, render_tongue_diagram, MIN_DIAGRAM_SIZE};
use capt_core::phoneme::{TokenId, PHONEME_COUNT};
use capt_core::stats::{
    summarize_likert, wilcoxon_pratt, Alternative, LikertSummary, PairedSample, StatsError, WilcoxonResult,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::store::{now_ms, valid_session_id, AttemptRecord, InputKind, RatingRecord};
use crate::AppState;

type Shared = Arc<AppState>;

pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn internal(message: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/api/sentences", get(sentences))
        .route("/api/phonemes", get(phonemes))
        .route("/api/phonemes/{id}/diagram.svg", get(diagram))
        .route("/api/attempts", post(attempt))
        .route("/api/ratings", post(rating))
        .route("/api/stats", get(stats))
        .route("/api/sessions/{id}", get(session))
        .layer(middleware::from_fn(log_request))
        .with_state(state)
}

async fn log_request(req: Request, next: Next) -> Response {
    let (method, uri) = (req.method().clone(), req.uri().path().to_string());
    let start = Instant::now();
    let resp = next.run(req).await;
    tracing::info!(%method, path = %uri, status = resp.status().as_u16(), ms = start.elapsed().as_millis() as u64, "request");
    resp
}

async fn sentences(State(s): State<Shared>) -> Result<Response, ApiError> {
    match &s.catalog {
        Ok(c) => Ok(Json(json!({ "sentences": c.sentences() })).into_response()),
        Err(e) => Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, format!("sentence catalog unavailable: {e}"))),
    }
}

#[derive(Serialize)]
struct PhonemeInfo<'a> {
    id: TokenId,
    ipa: &'a str,
    descriptors: Vec<String>,
}

async fn phonemes(State(s): State<Shared>) -> Json<serde_json::Value> {
    let list: Vec<PhonemeInfo> = s
        .inventory
        .phonemes()
        .iter()
        .map(|p| PhonemeInfo { id: p.id, ipa: &p.ipa, descriptors: descriptors_for(&p.features) })
        .collect();
    Json(json!({ "phonemes": list }))
}

#[derive(Deserialize)]
struct DiagramQuery {
    size: Option<u32>,
}

async fn diagram(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<DiagramQuery>,
) -> Result<Response, ApiError> {
    let not_found = || ApiError::new(StatusCode::NOT_FOUND, format!("no phoneme with id {id:?}"));
    let pid: usize = id.parse().map_err(|_| not_found())?;
    if pid >= PHONEME_COUNT {
        return Err(not_found());
    }
    let size = q.size.unwrap_or(256);
    if !(MIN_DIAGRAM_SIZE..=4096).contains(&size) {
        return Err(ApiError::unprocessable(format!("size must be between {MIN_DIAGRAM_SIZE} and 4096")));
    }
    let entry = s.knowledge_base.get_entry(pid as TokenId).map_err(|_| not_found())?;
    let svg = render_tongue_diagram(entry, size).map_err(ApiError::internal)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptRequest {
    pub session_id: String,
    pub sentence_id: String,
    /// IPA symbols, `|` between words.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phonemes: Option<Vec<String>>,
    /// Base64 of an 8 kHz 16-bit mono WAV file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio: Option<String>,
}

fn check_session(id: &str) -> Result<(), ApiError> {
    if valid_session_id(id) {
        Ok(())
    } else {
        Err(ApiError::unprocessable("session_id must be 1-64 characters of [A-Za-z0-9_-]"))
    }
}

async fn attempt(State(s): State<Shared>, Json(req): Json<AttemptRequest>) -> Result<Json<AttemptRecord>, ApiError> {
    check_session(&req.session_id)?;
    let catalog = s
        .catalog
        .as_ref()
        .map_err(|e| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, format!("sentence catalog unavailable: {e}")))?;
    let sentence = catalog
        .get(&req.sentence_id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown sentence {:?}", req.sentence_id)))?
        .clone();
    let audio = match (&req.phonemes, &req.audio) {
        (Some(_), None) => None,
        (None, Some(b64)) => {
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(b64.trim())
                .map_err(|e| ApiError::unprocessable(format!("audio is not valid base64: {e}")))?;
            let buf = decode_wav(&bytes).map_err(|e| ApiError::unprocessable(format!("audio: {e}")))?;
            if buf.sample_rate != CANONICAL_SAMPLE_RATE {
                return Err(ApiError::unprocessable(format!(
                    "audio must be sampled at {CANONICAL_SAMPLE_RATE} Hz, got {}",
                    buf.sample_rate
                )));
            }
            Some(buf)
        }
        _ => return Err(ApiError::unprocessable("provide exactly one of `phonemes` or `audio`")),
    };
    let input_kind = if audio.is_some() { InputKind::Audio } else { InputKind::Phonemes };
    let state = s.clone();
    let phonemes = req.phonemes.clone().unwrap_or_default();
    // Recognition may block on the network; keep it off the async workers.
    let analysis = tokio::task::spawn_blocking(move || {
        let cfg = state.analysis_config();
        let input = match &audio {
            Some(a) => AttemptInput::Audio { audio: a, recognizer: state.recognizer.as_ref() },
            None => AttemptInput::Phonemes(&phonemes),
        };
        analyze_attempt(&sentence.canonical, input, &cfg)
    })
    .await
    .map_err(ApiError::internal)?
    .map_err(|e| match e {
        AnalysisError::UnknownPhoneme(sym) => ApiError::unprocessable(format!("unknown phoneme symbol {sym:?}")),
        AnalysisError::EmptyAttempt => ApiError::unprocessable(e.to_string()),
        AnalysisError::RecognizerUnavailable(_) => ApiError::new(StatusCode::BAD_GATEWAY, e.to_string()),
        other => ApiError::internal(other),
    })?;
    let record = AttemptRecord { sentence_id: req.sentence_id, input_kind, analysis, created_at: now_ms() };
    let stored = s.store.add_attempt(&req.session_id, record).map_err(ApiError::internal)?;
    Ok(Json(stored))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingRequest {
    pub session_id: String,
    /// Defaults to the session id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant_id: Option<String>,
    /// IPA symbol.
    pub phoneme: String,
    pub pre: i64,
    pub post: i64,
}

async fn rating(State(s): State<Shared>, Json(req): Json<RatingRequest>) -> Result<Json<RatingRecord>, ApiError> {
    check_session(&req.session_id)?;
    if s.inventory.id_of(&req.phoneme).is_none() {
        return Err(ApiError::unprocessable(format!("unknown phoneme symbol {:?}", req.phoneme)));
    }
    let score = |v: i64| {
        u8::try_from(v)
            .ok()
            .filter(|x| (1..=5).contains(x))
            .ok_or_else(|| ApiError::unprocessable(format!("score {v} outside 1-5")))
    };
    let sample = PairedSample {
        participant_id: req.participant_id.unwrap_or_else(|| req.session_id.clone()),
        phoneme: req.phoneme,
        pre: score(req.pre)?,
        post: score(req.post)?,
    };
    let stored =
        s.store.add_rating(&req.session_id, RatingRecord { sample, created_at: now_ms() }).map_err(ApiError::internal)?;
    Ok(Json(stored))
}

/// Signed-rank outcome; all-zero differences are reported with p = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub degenerate: bool,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<WilcoxonResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhonemeTest {
    pub phoneme: String,
    pub n: usize,
    pub two_sided: TestOutcome,
    pub greater: TestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsResponse {
    pub n_ratings: usize,
    /// Absent when there are no ratings.
    pub two_sided: Option<TestOutcome>,
    pub greater: Option<TestOutcome>,
    pub likert: LikertSummary,
    pub per_phoneme: Vec<PhonemeTest>,
}

fn outcome(samples: &[PairedSample], alt: Alternative) -> Result<TestOutcome, StatsError> {
    match wilcoxon_pratt(samples, alt) {
        Ok(r) => Ok(TestOutcome { degenerate: false, p_value: r.p_value, result: Some(r) }),
        Err(StatsError::DegenerateSample) => Ok(TestOutcome { degenerate: true, p_value: 1.0, result: None }),
        Err(e) => Err(e),
    }
}

async fn stats(State(s): State<Shared>) -> Result<Json<StatsResponse>, ApiError> {
    let ratings = s.store.all_ratings();
    let likert = summarize_likert(&ratings).map_err(ApiError::internal)?;
    let (two_sided, greater) = if ratings.is_empty() {
        (None, None)
    } else {
        (
            Some(outcome(&ratings, Alternative::TwoSided).map_err(ApiError::internal)?),
            Some(outcome(&ratings, Alternative::Greater).map_err(ApiError::internal)?),
        )
    };
    let mut per_phoneme = Vec::new();
    for d in &likert.per_phoneme {
        let group: Vec<PairedSample> = ratings.iter().filter(|r| r.phoneme == d.phoneme).cloned().collect();
        per_phoneme.push(PhonemeTest {
            phoneme: d.phoneme.clone(),
            n: group.len(),
            two_sided: outcome(&group, Alternative::TwoSided).map_err(ApiError::internal)?,
            greater: outcome(&group, Alternative::Greater).map_err(ApiError::internal)?,
        });
    }
    Ok(Json(StatsResponse { n_ratings: ratings.len(), two_sided, greater, likert, per_phoneme }))
}

async fn session(State(s): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    match s.store.session(&id) {
        Some(sess) => Ok(Json(sess).into_response()),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown session {id:?}"))),
    }
}
