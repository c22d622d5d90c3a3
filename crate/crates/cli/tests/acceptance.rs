//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion that every line passed. Run with
//! `cargo test -p capt-cli --test acceptance -- --nocapture` to see the table.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use base64::Engine as _;
use capt_core::analysis::{analyze_attempt, evaluate_corpus, metrics_for, AnalysisConfig, AttemptInput, UtteranceRecognizer};
use capt_core::audio::{apply_gain_db, change_speed, encode_wav, mel_spectrogram, AudioBuffer, MelConfig};
use capt_core::corpus::{
    apply_ops, build_corpus, load_sentences, CorpusConfig, CorpusManifest, ErrorOp, StubTtsClient,
    TtsClient, TtsRequest,
};
use capt_core::detect::{align, StubAudioRecognizer};
use capt_core::feedback::{render_tongue_diagram, KnowledgeBase};
use capt_core::g2p::{to_phonemes, G2pOptions};
use capt_core::phoneme::{FeatureWeights, PhonemeInventory, TokenId, PHONEME_COUNT};
use capt_core::stats::{wilcoxon_pratt_differences, Alternative, Method, StatsError};
use capt_service::{router, AppState, AttemptRecord, InputKind, ServiceConfig, Session};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

const SENTENCES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sentences.tsv");
const G2P_GOLDEN: &str = include_str!("../../core/tests/data/g2p_golden.tsv");

/// F1 of the fidelity-0.8 mock recognizer on the seed-7 1000-pair corpus,
/// measured once (0.2512) and frozen with a +-0.005 band; other recognizer
/// seeds land within about 0.002 of it.
const GOLDEN_F1: (f64, f64) = (0.2462, 0.2562);
const INJECTION_RATE: (f64, f64) = (0.045, 0.055);
const P_TOLERANCE: f64 = 1e-9;
const SUITE_BUDGET: Duration = Duration::from_secs(120);

struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Criteria that cannot be met as worded; they print FAIL and must fail in
/// exactly the documented way.
const DOCUMENTED_FAILURES: [&str; 1] = ["edit-script recovery, literal non-adjacent reading (errors >= 2 apart)"];

fn check(lines: &mut Vec<Line>, name: &'static str, f: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let detail = format!("{detail} [{:.2}s]", start.elapsed().as_secs_f64());
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    lines.push(Line { name, pass, detail });
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn inv() -> &'static PhonemeInventory {
    PhonemeInventory::builtin()
}

fn corpus(n_pairs: usize, seed: u64) -> CorpusManifest {
    let sentences = load_sentences(Path::new(SENTENCES)).unwrap();
    let cfg = CorpusConfig { n_pairs, p_error: 0.05, seed, ..Default::default() };
    build_corpus(&sentences, &cfg, None).unwrap().manifest
}

fn sorted(mut ops: Vec<ErrorOp>) -> Vec<ErrorOp> {
    ops.sort_by_key(|o| (o.canonical_index, o.kind as u8));
    ops
}

/// Smallest distance between two marked positions (None with < 2 ops).
fn min_gap(ops: &[ErrorOp]) -> Option<usize> {
    let mut m: Vec<usize> = ops.iter().map(ErrorOp::marked_position).collect();
    m.sort_unstable();
    m.windows(2).map(|w| w[1] - w[0]).min()
}

/// (eligible, recovered, first miss) over entries whose errors are at least
/// `gap` positions apart.
fn recovery(m: &CorpusManifest, gap: usize) -> (usize, usize, Option<String>) {
    let (mut eligible, mut recovered, mut first_miss) = (0, 0, None);
    for e in m.entries.iter().filter(|e| min_gap(&e.ops).is_none_or(|g| g >= gap)) {
        eligible += 1;
        let predicted = e.corrupted.phonemes();
        let script = align(inv(), &e.canonical.phonemes(), &predicted, &FeatureWeights::default()).edit_script(&predicted);
        if sorted(script) == sorted(e.ops.clone()) {
            recovered += 1;
        } else if first_miss.is_none() {
            first_miss = Some(e.sentence_id.clone());
        }
    }
    (eligible, recovered, first_miss)
}

fn injection_rate() -> Result<String, String> {
    let start = Instant::now();
    let (mut marked, mut total) = (0usize, 0usize);
    let mut seed = 0;
    while total < 100_000 {
        for e in corpus(1000, seed).entries {
            marked += e.error_vector.count();
            total += e.canonical.phoneme_count();
        }
        seed += 1;
    }
    let rate = marked as f64 / total as f64;
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("rate {rate:.4} over {total} positions ({seed} seeds) in {secs:.2}s");
    ensure((INJECTION_RATE.0..=INJECTION_RATE.1).contains(&rate) && secs < 10.0, || detail.clone())?;
    Ok(detail)
}

fn corpus_replay() -> Result<String, String> {
    let m = corpus(1000, 7);
    ensure(m.entries.len() == 1000 && m.metadata.n_pairs == 1000, || "corpus is not 1000 pairs".into())?;
    let replayed = m.entries.iter().filter(|e| apply_ops(&e.canonical, &e.ops).ok().as_ref() == Some(&e.corrupted)).count();
    let (eligible, recovered, miss) = recovery(&m, 3);
    let detail = format!("replayed {replayed}/1000; edit script recovered {recovered}/{eligible} entries with errors >= 3 apart");
    ensure(replayed == 1000 && recovered == eligible, || format!("{detail}; first miss {miss:?}"))?;
    Ok(detail)
}

/// Errors exactly two apart are "non-adjacent" too, but an addition after
/// position i plus a deletion of i+2 is always explained at least as cheaply
/// by two substitutions, so no minimum-cost aligner returns the injected
/// script for them. Expected to fail; the miss count is pinned.
const LITERAL_MISSES: usize = 2;

fn literal_non_adjacent_recovery() -> Result<String, String> {
    let (eligible, recovered, miss) = recovery(&corpus(1000, 7), 2);
    let detail = format!(
        "recovered {recovered}/{eligible} entries with errors >= 2 apart; first miss {miss:?} (add+delete two apart)"
    );
    if eligible - recovered == LITERAL_MISSES {
        Err(detail)
    } else {
        Err(format!("{detail}; UNEXPECTED: pinned miss count is {LITERAL_MISSES}"))
    }
}

fn detection_oracle() -> Result<String, String> {
    let m = corpus(1000, 7);
    let cfg = AnalysisConfig::default();
    let perfect = evaluate_corpus(&m, &UtteranceRecognizer::Mock { fidelity: 1.0, seed: 7 }, &cfg, 0).map_err(|e| e.to_string())?;
    let sparse = metrics_for(perfect.utterances.iter().filter(|u| u.sparse));
    let noisy = evaluate_corpus(&m, &UtteranceRecognizer::Mock { fidelity: 0.8, seed: 7 }, &cfg, 0).map_err(|e| e.to_string())?;
    let f1 = noisy.metrics.f1;
    let detail = format!(
        "fidelity 1.0 sparse P/R/F1 {:.3}/{:.3}/{:.3}; fidelity 0.8 F1 {f1:.4} in [{}, {}]",
        sparse.precision, sparse.recall, sparse.f1, GOLDEN_F1.0, GOLDEN_F1.1
    );
    ensure(
        sparse.precision == 1.0 && sparse.recall == 1.0 && sparse.f1 == 1.0 && (GOLDEN_F1.0..=GOLDEN_F1.1).contains(&f1),
        || detail.clone(),
    )?;
    Ok(detail)
}

/// Exhaustive search over alignment paths; abandons a path only when it
/// provably cannot beat the best complete one.
fn brute_force_cost(a: &[TokenId], b: &[TokenId], w: &FeatureWeights) -> f64 {
    fn go(a: &[TokenId], b: &[TokenId], w: &FeatureWeights, spent: f64, best: &mut f64) {
        if spent + a.len().abs_diff(b.len()) as f64 >= *best + 1e-12 {
            return;
        }
        match (a.split_first(), b.split_first()) {
            (None, _) | (_, None) => *best = best.min(spent + (a.len() + b.len()) as f64),
            (Some((&x, ra)), Some((&y, rb))) => {
                let sub = if x == y { 0.0 } else { 0.5 + 0.5 * inv().distance(x, y, w) };
                go(ra, rb, w, spent + sub, best);
                go(ra, b, w, spent + 1.0, best);
                go(a, rb, w, spent + 1.0, best);
            }
        }
    }
    let mut best = (a.len() + b.len()) as f64 + 1.0;
    go(a, b, w, 0.0, &mut best);
    best
}

fn alignment_optimality() -> Result<String, String> {
    let w = FeatureWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let close: Vec<TokenId> = ["t̪", "ʈ", "d̪", "ɖ", "ə", "aː"].iter().map(|s| inv().id_of(s).unwrap()).collect();
    let mut mismatches = 0;
    const PAIRS: usize = 10_000;
    for k in 0..PAIRS {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<TokenId> {
            let n = rng.random_range(0..=8);
            (0..n)
                .map(|_| if k % 2 == 0 { rng.random_range(0..PHONEME_COUNT as TokenId) } else { close[rng.random_range(0..close.len())] })
                .collect()
        };
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        if (align(inv(), &a, &b, &w).total_cost - brute_force_cost(&a, &b, &w)).abs() > 1e-9 {
            mismatches += 1;
        }
    }
    let detail = format!("{mismatches} mismatches over {PAIRS} pairs (lengths 0-8)");
    ensure(mismatches == 0, || detail.clone())?;
    Ok(detail)
}

fn audio_transforms() -> Result<String, String> {
    let buf = |s: Vec<i16>| AudioBuffer::new(s, 8000).unwrap();
    let (up, _) = apply_gain_db(&buf(vec![1000]), 5.0);
    ensure(up.samples == [1778], || format!("+5 dB on 1000 gave {:?}", up.samples))?;
    let all: Vec<i16> = (-18_000..=18_000).collect();
    let (loud, _) = apply_gain_db(&buf(all.clone()), 5.0);
    let (back, _) = apply_gain_db(&loud, -5.0);
    let worst = all.iter().zip(&back.samples).map(|(a, b)| (i32::from(*a) - i32::from(*b)).abs()).max().unwrap();
    ensure(worst <= 1, || format!("+5/-5 dB worst error {worst} LSB"))?;
    let sped = change_speed(&buf(vec![0; 8000]), 1.1).samples.len();
    ensure(sped == 7273, || format!("speed 1.1 gave {sped} samples"))?;
    let tone: Vec<i16> = (0..8000).map(|n| ((n * 37 % 200) as i16 - 100) * 20).collect();
    let frames = mel_spectrogram(&buf(tone), &MelConfig::default()).map_err(|e| e.to_string())?.n_frames();
    ensure(frames == 98, || format!("mel frames {frames}"))?;
    Ok(format!("1000 -> {}, +5/-5 dB max error {worst} LSB, 8000 -> {sped} samples, {frames} mel frames", up.samples[0]))
}

fn g2p_golden() -> Result<String, String> {
    let opts = G2pOptions::new(inv());
    let mut total = 0;
    let mut misses = Vec::new();
    for line in G2P_GOLDEN.lines().filter(|l| !l.trim().is_empty()) {
        let (word, ipa) = line.split_once('\t').ok_or("bad golden line")?;
        total += 1;
        let want: Option<Vec<TokenId>> = ipa.split_whitespace().map(|s| inv().id_of(s)).collect();
        let got = to_phonemes(word, &opts).ok().map(|r| r.sequence.phonemes());
        if want.is_none() || got != want {
            misses.push(word.to_string());
        }
    }
    let detail = format!("{}/{total} words agree", total - misses.len());
    ensure(total == 50 && misses.is_empty(), || format!("{detail}; misses {misses:?}"))?;
    Ok(detail)
}

/// Average ranks of |d| with zeros included.
fn ranks(d: &[f64]) -> Vec<f64> {
    d.iter()
        .map(|x| {
            let below = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let tied = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect()
}

/// p-value by enumerating every sign assignment of the nonzero ranks.
fn sign_enumeration(d: &[f64], alt: Alternative) -> f64 {
    let r = ranks(d);
    let nz: Vec<f64> = d.iter().zip(&r).filter(|(x, _)| **x != 0.0).map(|(_, r)| *r).collect();
    let w: f64 = d.iter().zip(&r).filter(|(x, _)| **x > 0.0).map(|(_, r)| *r).sum();
    let total = 1u64 << nz.len();
    let (mut ge, mut le) = (0u64, 0u64);
    for mask in 0..total {
        let s: f64 = nz.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r).sum();
        ge += u64::from(s >= w - 1e-9);
        le += u64::from(s <= w + 1e-9);
    }
    let (ge, le) = (ge as f64 / total as f64, le as f64 / total as f64);
    match alt {
        Alternative::Greater => ge,
        Alternative::TwoSided => (2.0 * ge.min(le)).min(1.0),
    }
}

fn wilcoxon() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    let mut worst = 0.0f64;
    for n in 1..=12 {
        for _ in 0..150 {
            let d: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(-4i32..=4))).collect();
            for alt in [Alternative::TwoSided, Alternative::Greater] {
                match wilcoxon_pratt_differences(&d, alt, Method::Exact) {
                    Ok(r) => {
                        worst = worst.max((r.p_value - sign_enumeration(&d, alt)).abs());
                        cases += 1;
                    }
                    Err(StatsError::DegenerateSample) if d.iter().all(|x| *x == 0.0) => {}
                    Err(e) => return Err(format!("{d:?}: {e}")),
                }
            }
        }
    }
    ensure(worst <= P_TOLERANCE, || format!("max |p - oracle| {worst:e} over {cases} cases"))?;
    let five = wilcoxon_pratt_differences(&[1.0; 5], Alternative::TwoSided, Method::Exact).map_err(|e| e.to_string())?;
    ensure((five.p_value - 0.0625).abs() < 1e-12, || format!("five +1 gave p {}", five.p_value))?;
    let zeros = wilcoxon_pratt_differences(&[0.0; 4], Alternative::TwoSided, Method::Exact);
    ensure(matches!(zeros, Err(StatsError::DegenerateSample)), || format!("all-zero gave {zeros:?}"))?;
    Ok(format!("max |p - oracle| {worst:.1e} over {cases} cases (n <= 12); five +1 -> p {}; zeros -> DegenerateSample", five.p_value))
}

fn feedback_coverage() -> Result<String, String> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/articulation.tsv");
    let kb = KnowledgeBase::load(Path::new(path), inv()).map_err(|e| e.to_string())?;
    ensure(kb.len() == 64, || format!("{} entries", kb.len()))?;
    let chh = kb.get_entry(inv().id_of("tʃʰ").unwrap()).map_err(|e| e.to_string())?;
    ensure(chh.descriptors == ["unvoiced", "palatal", "aspirated", "affricate"], || format!("tʃʰ: {:?}", chh.descriptors))?;
    for e in kb.entries() {
        let svg = render_tongue_diagram(e, 256).map_err(|err| err.to_string())?;
        roxmltree::Document::parse(&svg).map_err(|err| format!("phoneme {}: {err}", e.phoneme_id))?;
        ensure(render_tongue_diagram(e, 256).ok().as_ref() == Some(&svg), || format!("phoneme {} not deterministic", e.phoneme_id))?;
    }
    Ok(format!("64 complete entries; tʃʰ = {}; 64 diagrams parse and repeat", chh.descriptors.join(" ")))
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn service_parity() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = ServiceConfig { data_dir: dir.path().to_path_buf(), ..ServiceConfig::default() };
    let state: Arc<AppState> = AppState::from_config(cfg.clone()).map_err(|e| e.to_string())?;
    let app = router(state.clone());
    let catalog = state.catalog.as_ref().map_err(Clone::clone)?;
    let mut compared = 0;
    for sentence in catalog.sentences() {
        // Canonical input, then the first phoneme swapped for a neighbour.
        let canonical: Vec<String> = sentence.canonical_ipa.split(' ').map(String::from).collect();
        let mut wrong = canonical.clone();
        wrong[0] = if wrong[0] == "ʈ" { "t̪".into() } else { "ʈ".into() };
        for phonemes in [canonical, wrong] {
            let body = json!({"session_id": "parity", "sentence_id": sentence.sentence_id, "phonemes": phonemes});
            let (status, bytes) = call(&app, "POST", "/api/attempts", Some(body)).await;
            ensure(status == StatusCode::OK, || format!("{}: {status}", sentence.sentence_id))?;
            let created_at = serde_json::from_slice::<Value>(&bytes).map_err(|e| e.to_string())?["created_at"].as_u64().unwrap();
            let direct = analyze_attempt(&sentence.canonical, AttemptInput::Phonemes(&phonemes), &AnalysisConfig::default())
                .map_err(|e| e.to_string())?;
            let want = AttemptRecord { sentence_id: sentence.sentence_id.clone(), input_kind: InputKind::Phonemes, analysis: direct, created_at };
            ensure(serde_json::to_vec(&want).unwrap() == bytes, || format!("{} differs from library", sentence.sentence_id))?;
            compared += 1;
        }
    }
    // Audio through the stub recognizer.
    let s = &catalog.sentences()[0];
    let wav = StubTtsClient
        .synthesize(&TtsRequest { text: s.text.clone(), speaker_id: 0, phonemes: s.canonical_ipa.clone() })
        .map_err(|e| e.to_string())?;
    let body = json!({"session_id": "parity", "sentence_id": s.sentence_id, "audio": base64::engine::general_purpose::STANDARD.encode(encode_wav(&wav))});
    let (status, bytes) = call(&app, "POST", "/api/attempts", Some(body)).await;
    ensure(status == StatusCode::OK, || format!("audio attempt: {status}"))?;
    let created_at = serde_json::from_slice::<Value>(&bytes).unwrap()["created_at"].as_u64().unwrap();
    let stub = StubAudioRecognizer { fidelity: 1.0, seed: 0 };
    let direct = analyze_attempt(&s.canonical, AttemptInput::Audio { audio: &wav, recognizer: &stub }, &AnalysisConfig::default())
        .map_err(|e| e.to_string())?;
    let want = AttemptRecord { sentence_id: s.sentence_id.clone(), input_kind: InputKind::Audio, analysis: direct, created_at };
    ensure(serde_json::to_vec(&want).unwrap() == bytes, || "audio attempt differs from library".into())?;
    compared += 1;

    call(&app, "POST", "/api/ratings", Some(json!({"session_id": "parity", "phoneme": "ʈ", "pre": 2, "post": 4}))).await;
    let (_, before) = call(&app, "GET", "/api/sessions/parity", None).await;
    drop(app);
    drop(state);
    let reopened = router(AppState::from_config(cfg).map_err(|e| e.to_string())?);
    let (status, after) = call(&reopened, "GET", "/api/sessions/parity", None).await;
    ensure(status == StatusCode::OK && before == after, || "session changed across restart".into())?;
    let session: Session = serde_json::from_slice(&after).map_err(|e| e.to_string())?;
    Ok(format!(
        "{compared} responses byte-identical to library; {} attempts + {} rating survive restart",
        session.attempts.len(),
        session.ratings.len()
    ))
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut lines = Vec::new();
    check(&mut lines, "injection rate at p=0.05", injection_rate);
    check(&mut lines, "corpus replay and edit-script recovery (1000 pairs)", corpus_replay);
    check(&mut lines, DOCUMENTED_FAILURES[0], literal_non_adjacent_recovery);
    check(&mut lines, "end-to-end detection oracle", detection_oracle);
    check(&mut lines, "alignment optimality vs brute force", alignment_optimality);
    check(&mut lines, "audio transforms", audio_transforms);
    check(&mut lines, "G2P golden list", g2p_golden);
    check(&mut lines, "Wilcoxon signed-rank (Pratt)", wilcoxon);
    check(&mut lines, "feedback coverage", feedback_coverage);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    check(&mut lines, "service parity and restart durability", || rt.block_on(service_parity()));
    let elapsed = start.elapsed();
    let within = elapsed < SUITE_BUDGET;
    println!(
        "{} whole suite within {}s: {:.1}s",
        if within { "PASS" } else { "FAIL" },
        SUITE_BUDGET.as_secs(),
        elapsed.as_secs_f64()
    );
    let failed: Vec<String> = lines
        .iter()
        .filter(|l| !l.pass && !(DOCUMENTED_FAILURES.contains(&l.name) && !l.detail.contains("UNEXPECTED")))
        .map(|l| format!("{}: {}", l.name, l.detail))
        .collect();
    assert!(failed.is_empty() && within, "failed criteria: {failed:#?}");
}
