//! `capt`: command-line driver for every pipeline stage.
//!
//! Exit codes: 0 success, 1 bad input (arguments, files, data), 2 internal
//! failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use capt_core::analysis::{
    evaluate_corpus, metrics_for, AnalysisConfig, AnalysisError, UtteranceRecognizer, UtteranceResult,
};
use capt_core::audio::AugmentSpec;
use capt_core::corpus::{
    augment_corpus, build_corpus, load_sentences, AudioSink, AugmentRequest, ConfusionPolicy, CorpusConfig,
    CorpusError, CorpusManifest, HttpTtsClient, StubTtsClient, TtsClient,
};
use capt_core::detect::{HttpRecognizer, Recognizer, SeverityBins, StubAudioRecognizer};
use capt_core::feedback::{compose_feedback, render_tongue_diagram, KnowledgeBase, Locale};
use capt_core::g2p::{to_phonemes, G2pOptions};
use capt_core::phoneme::{format_ipa, PhonemeInventory};
use capt_core::stats::{
    read_survey_csv, summarize_likert, wilcoxon_pratt, wilcoxon_pratt_differences, Alternative, DetectionMetrics,
    Method, PairedSample, StatsError, WilcoxonResult,
};
use capt_service::ServiceConfig;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "capt", version, about = "Hindi pronunciation training pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Devanagari text to canonical phonemes.
    G2p(G2pArgs),
    /// Build a paired correct/mispronounced corpus manifest.
    Synth(SynthArgs),
    /// Add gain/speed variants of every corpus recording.
    Augment(AugmentArgs),
    /// Detect mispronounced words across a manifest and score them.
    Detect(DetectArgs),
    /// Articulatory feedback for one expected/produced phoneme pair.
    Feedback(FeedbackArgs),
    /// Recompute detection metrics from a detect report.
    EvalMetrics(EvalMetricsArgs),
    /// Wilcoxon signed-rank test (Pratt zeros) and Likert summary of a survey.
    EvalWilcoxon(EvalWilcoxonArgs),
    /// Run the HTTP practice service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct G2pArgs {
    #[arg(long)]
    text: String,
    #[arg(long)]
    no_schwa_deletion: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Confusable,
    Uniform,
}

#[derive(Args)]
struct SynthArgs {
    /// `id<TAB>text` or bare text lines.
    #[arg(long)]
    sentences: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    #[arg(long = "p", default_value_t = 0.05)]
    p_error: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    speakers: u8,
    #[arg(long, value_enum, default_value_t = PolicyArg::Confusable)]
    policy: PolicyArg,
    /// External TTS endpoint; without it (and without --stub-tts) no audio is written.
    #[arg(long, conflicts_with = "stub_tts")]
    tts_url: Option<String>,
    /// Render audio with the built-in offline tone synthesizer.
    #[arg(long)]
    stub_tts: bool,
    #[arg(long, default_value_t = 30_000)]
    tts_timeout_ms: u64,
    /// Output directory; the manifest is `<out>/manifest.jsonl`.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Variants per entry.
    #[arg(long, default_value_t = 1)]
    variants: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed gain in dB for every variant (requires --speed); random otherwise.
    #[arg(long, requires = "speed", allow_hyphen_values = true)]
    gain_db: Option<f64>,
    #[arg(long, requires = "gain_db")]
    speed: Option<f64>,
    /// Output manifest, in the same directory as the input; defaults to `<stem>.augmented.jsonl`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// `mock` (phoneme-level simulation), `stub-audio` (offline audio
    /// recognizer) or an http(s) URL of a recognizer service.
    #[arg(long, default_value = "mock")]
    recognizer: String,
    #[arg(long, default_value_t = 1.0)]
    fidelity: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-utterance JSON-lines report.
    #[arg(long)]
    report: PathBuf,
    /// Aggregate metrics JSON.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Score only entries whose injected errors are isolated.
    #[arg(long)]
    sparse_only: bool,
    #[arg(long, default_value_t = 0.4)]
    moderate: f64,
    #[arg(long, default_value_t = 0.75)]
    severe: f64,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct FeedbackArgs {
    /// Expected phoneme (IPA).
    #[arg(long)]
    expected: String,
    /// Produced phoneme (IPA); omit for a skipped sound.
    #[arg(long)]
    produced: Option<String>,
    #[arg(long, default_value = "en")]
    locale: Locale,
    /// Write the FeedbackMessage JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the expected phoneme's tongue diagram here.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    size: u32,
}

#[derive(Args)]
struct EvalMetricsArgs {
    /// Report written by `detect`.
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    sparse_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AltArg {
    TwoSided,
    Greater,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    Normal,
}

#[derive(Args)]
struct EvalWilcoxonArgs {
    /// `participant_id,phoneme,pre,post` CSV.
    #[arg(long)]
    survey: PathBuf,
    #[arg(long, value_enum, default_value_t = AltArg::TwoSided)]
    alternative: AltArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bind: Option<std::net::SocketAddr>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Internal(String),
}

type CmdResult = Result<(), Failure>;

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn corpus_failure(e: CorpusError) -> Failure {
    match e {
        CorpusError::Internal(_) | CorpusError::Audio(_) | CorpusError::Tts(_) => internal(e),
        _ => input(e),
    }
}

fn analysis_failure(e: AnalysisError) -> Failure {
    match e {
        AnalysisError::Corpus(_) | AnalysisError::UnknownPhoneme(_) | AnalysisError::EmptyAttempt => input(e),
        AnalysisError::Detect(capt_core::detect::DetectError::InvalidFidelity(_)) => input(e),
        _ => internal(e),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| internal(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(internal)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::G2p(a) => g2p(a),
        Command::Synth(a) => synth(a),
        Command::Augment(a) => augment(a),
        Command::Detect(a) => detect(a),
        Command::Feedback(a) => feedback(a),
        Command::EvalMetrics(a) => eval_metrics(a),
        Command::EvalWilcoxon(a) => eval_wilcoxon(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(2)
        }
    }
}

fn g2p(a: G2pArgs) -> CmdResult {
    let inv = PhonemeInventory::builtin();
    let mut opts = G2pOptions::new(inv);
    opts.schwa_deletion = !a.no_schwa_deletion;
    let r = to_phonemes(&a.text, &opts).map_err(input)?;
    println!("{}", format_ipa(inv, &r.sequence));
    Ok(())
}

fn synth(a: SynthArgs) -> CmdResult {
    let sentences = load_sentences(&a.sentences).map_err(corpus_failure)?;
    let cfg = CorpusConfig {
        n_pairs: a.pairs,
        p_error: a.p_error,
        seed: a.seed,
        speaker_count: a.speakers,
        confusion_policy: match a.policy {
            PolicyArg::Confusable => ConfusionPolicy::Confusable,
            PolicyArg::Uniform => ConfusionPolicy::Uniform,
        },
        jobs: a.jobs,
    };
    let http;
    let tts: Option<&dyn TtsClient> = match (&a.tts_url, a.stub_tts) {
        (Some(url), _) => {
            http = HttpTtsClient::new(url.clone(), Duration::from_millis(a.tts_timeout_ms));
            Some(&http)
        }
        (None, true) => Some(&StubTtsClient),
        (None, false) => None,
    };
    fs::create_dir_all(&a.out).map_err(|e| internal(format!("{}: {e}", a.out.display())))?;
    let sink = tts.map(|tts| AudioSink { tts, dir: &a.out });
    let build = build_corpus(&sentences, &cfg, sink).map_err(corpus_failure)?;
    let path = a.out.join("manifest.jsonl");
    build.manifest.write(&path).map_err(corpus_failure)?;
    let entries = &build.manifest.entries;
    let marked: usize = entries.iter().map(|e| e.error_vector.count()).sum();
    let positions: usize = entries.iter().map(|e| e.canonical.phoneme_count()).sum();
    let with_audio = entries.iter().filter(|e| e.audio_paths.is_some()).count();
    println!("wrote {} pairs to {}", entries.len(), path.display());
    println!("marked positions: {marked} / {positions}");
    if tts.is_some() {
        println!("pairs with audio: {with_audio}");
    }
    for w in &build.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn augment(a: AugmentArgs) -> CmdResult {
    let manifest = CorpusManifest::read(&a.manifest).map_err(corpus_failure)?;
    let dir = a.manifest.parent().unwrap_or(Path::new("."));
    let request = match (a.gain_db, a.speed) {
        (Some(g), Some(s)) => AugmentRequest::Fixed(AugmentSpec::new(g, s).map_err(input)?),
        _ => AugmentRequest::Random,
    };
    let requests = vec![request; a.variants];
    let outcome = augment_corpus(&manifest, dir, &requests, a.seed).map_err(corpus_failure)?;
    let out = a.out.unwrap_or_else(|| {
        let stem = a.manifest.file_stem().and_then(|s| s.to_str()).unwrap_or("manifest");
        dir.join(format!("{stem}.augmented.jsonl"))
    });
    outcome.manifest.write(&out).map_err(corpus_failure)?;
    let audio_rows = outcome.manifest.entries.iter().filter(|e| e.audio_paths.is_some()).count();
    println!("wrote {} entries ({audio_rows} with audio) to {}", outcome.manifest.entries.len(), out.display());
    println!("skipped entries: {}; clipped samples: {}", outcome.skipped.len(), outcome.clipped_samples);
    for s in &outcome.skipped {
        eprintln!("warning: entry {} ({}): {}", s.index, s.sentence_id, s.reason);
    }
    Ok(())
}

fn print_metrics(label: &str, n: usize, m: &DetectionMetrics) {
    println!(
        "{label}: utterances {n}  tp {} fp {} fn {} tn {}",
        m.counts.tp, m.counts.fp, m.counts.fn_, m.counts.tn
    );
    println!(
        "precision {:.4}  recall {:.4}  F1 {:.2} ({:.4})  PER {:.4}",
        m.precision,
        m.recall,
        m.f1,
        m.f1,
        m.per.unwrap_or(0.0)
    );
}

fn detect(a: DetectArgs) -> CmdResult {
    let manifest = CorpusManifest::read(&a.manifest).map_err(corpus_failure)?;
    let bins = SeverityBins { moderate: a.moderate, severe: a.severe };
    bins.validate().map_err(input)?;
    if !(0.0..=1.0).contains(&a.fidelity) {
        return Err(input(format!("fidelity {} outside [0, 1]", a.fidelity)));
    }
    let cfg = AnalysisConfig { bins, ..AnalysisConfig::default() };
    let dir = a.manifest.parent().unwrap_or(Path::new("."));
    let boxed: Box<dyn Recognizer>;
    let rec = match a.recognizer.as_str() {
        "mock" => UtteranceRecognizer::Mock { fidelity: a.fidelity, seed: a.seed },
        "stub-audio" => {
            boxed = Box::new(StubAudioRecognizer { fidelity: a.fidelity, seed: a.seed });
            UtteranceRecognizer::Audio { recognizer: boxed.as_ref(), manifest_dir: dir }
        }
        url if url.starts_with("http://") || url.starts_with("https://") => {
            boxed = Box::new(HttpRecognizer::new(url, Duration::from_secs(30)));
            UtteranceRecognizer::Audio { recognizer: boxed.as_ref(), manifest_dir: dir }
        }
        other => return Err(input(format!("unknown recognizer {other:?} (mock, stub-audio or a URL)"))),
    };
    let eval = evaluate_corpus(&manifest, &rec, &cfg, a.jobs).map_err(analysis_failure)?;
    let mut out = Vec::new();
    for u in &eval.utterances {
        serde_json::to_writer(&mut out, u).map_err(internal)?;
        out.push(b'\n');
    }
    write_file(&a.report, &out)?;
    let scored: Vec<&UtteranceResult> = eval.utterances.iter().filter(|u| !a.sparse_only || u.sparse).collect();
    let metrics = if a.sparse_only { metrics_for(scored.iter().copied()) } else { eval.metrics };
    if let Some(p) = &a.metrics {
        write_json(p, &metrics)?;
    }
    print_metrics(if a.sparse_only { "sparse entries" } else { "all entries" }, scored.len(), &metrics);
    Ok(())
}

fn feedback(a: FeedbackArgs) -> CmdResult {
    let inv = PhonemeInventory::builtin();
    let kb = KnowledgeBase::builtin();
    let id = |s: &str| inv.id_of(s).ok_or_else(|| input(format!("unknown phoneme symbol {s:?}")));
    let expected = id(&a.expected)?;
    let produced = a.produced.as_deref().map(id).transpose()?;
    let msg = compose_feedback(expected, produced, kb, inv, a.locale).map_err(internal)?;
    println!("{}", msg.headline);
    for c in &msg.contrast_points {
        println!("- {}: {} (you: {}) — {}", c.feature, c.expected_value, c.produced_value, c.instruction);
    }
    if msg.contrast_points.is_empty() && msg.headline != "correct" {
        for line in &msg.articulation {
            println!("- {line}");
        }
    }
    if let Some(h) = &msg.hint {
        println!("hint: {h}");
    }
    if let Some(p) = &a.out {
        write_json(p, &msg)?;
    }
    if let Some(p) = &a.svg {
        let entry = kb.get_entry(expected).map_err(internal)?;
        let svg = render_tongue_diagram(entry, a.size).map_err(input)?;
        write_file(p, svg.as_bytes())?;
    }
    Ok(())
}

fn eval_metrics(a: EvalMetricsArgs) -> CmdResult {
    let text = fs::read_to_string(&a.report).map_err(|e| input(format!("{}: {e}", a.report.display())))?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let u: UtteranceResult =
            serde_json::from_str(line).map_err(|e| input(format!("{} line {}: {e}", a.report.display(), n + 1)))?;
        rows.push(u);
    }
    if rows.is_empty() {
        return Err(input("report has no utterances"));
    }
    let scored: Vec<&UtteranceResult> = rows.iter().filter(|u| !a.sparse_only || u.sparse).collect();
    let m = metrics_for(scored.iter().copied());
    print_metrics(if a.sparse_only { "sparse entries" } else { "all entries" }, scored.len(), &m);
    if let Some(p) = &a.out {
        write_json(p, &m)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct WilcoxonReport {
    overall: Option<WilcoxonResult>,
    degenerate: bool,
    per_phoneme: Vec<PhonemeWilcoxon>,
    likert: capt_core::stats::LikertSummary,
}

#[derive(Serialize)]
struct PhonemeWilcoxon {
    phoneme: String,
    /// None when every difference is zero (p = 1).
    result: Option<WilcoxonResult>,
}

fn run_test(samples: &[PairedSample], alt: Alternative, method: MethodArg) -> Result<Option<WilcoxonResult>, Failure> {
    let r = match method {
        MethodArg::Auto => wilcoxon_pratt(samples, alt),
        MethodArg::Exact | MethodArg::Normal => {
            let d: Vec<f64> = samples.iter().map(|s| f64::from(s.post) - f64::from(s.pre)).collect();
            let m = if matches!(method, MethodArg::Exact) { Method::Exact } else { Method::NormalApprox };
            wilcoxon_pratt_differences(&d, alt, m)
        }
    };
    match r {
        Ok(r) => Ok(Some(r)),
        Err(StatsError::DegenerateSample) => Ok(None),
        Err(e) => Err(input(e)),
    }
}

fn eval_wilcoxon(a: EvalWilcoxonArgs) -> CmdResult {
    let samples = read_survey_csv(&a.survey).map_err(input)?;
    if samples.is_empty() {
        return Err(input("survey has no rows"));
    }
    let alt = match a.alternative {
        AltArg::TwoSided => Alternative::TwoSided,
        AltArg::Greater => Alternative::Greater,
    };
    let overall = run_test(&samples, alt, a.method)?;
    let likert = summarize_likert(&samples).map_err(input)?;
    let mut per_phoneme = Vec::new();
    for d in &likert.per_phoneme {
        let group: Vec<PairedSample> = samples.iter().filter(|s| s.phoneme == d.phoneme).cloned().collect();
        per_phoneme.push(PhonemeWilcoxon { phoneme: d.phoneme.clone(), result: run_test(&group, alt, a.method)? });
    }
    let stdout = std::io::stdout();
    let mut o = stdout.lock();
    let show = |r: &Option<WilcoxonResult>| match r {
        Some(r) => format!("W = {:.1}, n = {} ({} nonzero), p = {:.4} [{:?}]", r.w_statistic, r.n_total, r.n_nonzero, r.p_value, r.method),
        None => "all differences zero, p = 1".to_string(),
    };
    let _ = writeln!(o, "overall: {}", show(&overall));
    if let (Some(pre), Some(post)) = (&likert.pre, &likert.post) {
        let _ = writeln!(o, "pre {}   post {}", pre.formatted(), post.formatted());
    }
    let _ = writeln!(o, "{:<8} {:>3} {:>13} {:>13} {:>7}  p", "phoneme", "n", "pre", "post", "delta");
    for (d, t) in likert.per_phoneme.iter().zip(&per_phoneme) {
        let p = t.result.map_or("1.0000".to_string(), |r| format!("{:.4}", r.p_value));
        let _ = writeln!(
            o,
            "{:<8} {:>3} {:>13} {:>13} {:>+7.2}  {p}",
            d.phoneme,
            d.pre.n,
            d.pre.formatted(),
            d.post.formatted(),
            d.mean_delta
        );
    }
    if let Some(p) = &a.out {
        write_json(p, &WilcoxonReport { degenerate: overall.is_none(), overall, per_phoneme, likert })?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> CmdResult {
    let mut cfg = match &a.config {
        Some(p) => ServiceConfig::load(p).map_err(input)?,
        None => ServiceConfig::default(),
    };
    if let Some(b) = a.bind {
        cfg.bind = b;
    }
    if let Some(d) = a.data_dir {
        cfg.data_dir = d;
    }
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .init();
    let rt = tokio::runtime::Runtime::new().map_err(internal)?;
    rt.block_on(capt_service::serve(cfg)).map_err(internal)
}
