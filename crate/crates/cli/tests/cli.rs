use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use capt_core::analysis::{evaluate_corpus, AnalysisConfig, UtteranceRecognizer};
use capt_core::corpus::CorpusManifest;
use capt_core::feedback::{compose_feedback, render_tongue_diagram, KnowledgeBase, Locale};
use capt_core::phoneme::PhonemeInventory;

const SENTENCES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sentences.tsv");

fn capt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, pairs: usize, seed: u64, extra: &[&str]) -> PathBuf {
    let (n, s) = (pairs.to_string(), seed.to_string());
    let mut args = vec!["synth", "--sentences", SENTENCES, "--pairs", &n, "--p", "0.05", "--seed", &s, "--out", p(dir)];
    args.extend_from_slice(extra);
    let o = capt(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join("manifest.jsonl")
}

#[test]
fn g2p_prints_ipa() {
    let o = capt(&["g2p", "--text", "कमल"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "k ə m ə l");
    let o = capt(&["g2p", "--text", "कमल घर"]);
    assert_eq!(stdout(&o).trim(), "k ə m ə l | gʱ ə r");
    let o = capt(&["g2p", "--text", "कमल", "--no-schwa-deletion"]);
    assert_eq!(stdout(&o).trim(), "k ə m ə l ə");
}

#[test]
fn g2p_rejects_latin_with_offset() {
    let o = capt(&["g2p", "--text", "कम x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("byte offset 7"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(capt(&["synth", "--bogus"]).status.code(), Some(1));
    assert_eq!(capt(&[]).status.code(), Some(1));
    assert_eq!(capt(&["--help"]).status.code(), Some(0));
    assert_eq!(capt(&["detect", "--help"]).status.code(), Some(0));
    assert_eq!(capt(&["--version"]).status.code(), Some(0));
}

#[test]
fn synth_is_deterministic_and_records_metadata() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = synth(a.path(), 1000, 7, &[]);
    let mb = synth(b.path(), 1000, 7, &["--jobs", "3"]);
    assert_eq!(std::fs::read(&ma).unwrap(), std::fs::read(&mb).unwrap());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("manifest.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["n_pairs"], 1000);
    assert_eq!(meta["speaker_count"], 10);
    assert_eq!(CorpusManifest::read(&ma).unwrap().entries.len(), 1000);
}

#[test]
fn synth_rejects_bad_probability_and_missing_input() {
    let d = tempfile::tempdir().unwrap();
    let o = capt(&["synth", "--sentences", SENTENCES, "--pairs", "10", "--p", "0.9", "--out", p(d.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("0.9"));
    let o = capt(&["synth", "--sentences", "/nonexistent/s.tsv", "--out", p(d.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn detect_perfect_recognizer_prints_f1_one_and_matches_library() {
    let d = tempfile::tempdir().unwrap();
    let manifest = synth(d.path(), 200, 3, &[]);
    let (report, metrics) = (d.path().join("report.jsonl"), d.path().join("metrics.json"));
    let o = capt(&[
        "detect", "--manifest", p(&manifest), "--fidelity", "1.0", "--sparse-only", "--report", p(&report),
        "--metrics", p(&metrics),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("F1 1.00"), "{}", stdout(&o));

    let o = capt(&["detect", "--manifest", p(&manifest), "--fidelity", "0.8", "--seed", "4", "--report", p(&report), "--metrics", p(&metrics)]);
    assert!(o.status.success());
    let lib = evaluate_corpus(
        &CorpusManifest::read(&manifest).unwrap(),
        &UtteranceRecognizer::Mock { fidelity: 0.8, seed: 4 },
        &AnalysisConfig::default(),
        1,
    )
    .unwrap();
    // Byte equality: parsing floats back would not round-trip exactly.
    let mut want = serde_json::to_vec_pretty(&lib.metrics).unwrap();
    want.push(b'\n');
    assert_eq!(std::fs::read(&metrics).unwrap(), want);
    let want: String = lib.utterances.iter().map(|u| serde_json::to_string(u).unwrap() + "\n").collect();
    assert_eq!(std::fs::read_to_string(&report).unwrap(), want);

    // Metrics recomputed from the report agree.
    let again = d.path().join("again.json");
    assert!(capt(&["eval-metrics", "--report", p(&report), "--out", p(&again)]).status.success());
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(&metrics).unwrap());
}

#[test]
fn detect_rejects_empty_and_malformed_manifests() {
    let d = tempfile::tempdir().unwrap();
    let manifest = synth(d.path(), 5, 1, &[]);
    let report = d.path().join("r.jsonl");
    std::fs::write(&manifest, "").unwrap();
    let o = capt(&["detect", "--manifest", p(&manifest), "--report", p(&report)]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(&manifest, "{not json\n").unwrap();
    let o = capt(&["detect", "--manifest", p(&manifest), "--report", p(&report)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"));
    let o = capt(&["detect", "--manifest", p(&manifest), "--recognizer", "bogus", "--report", p(&report)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stub_audio_pipeline_with_augmentation() {
    let d = tempfile::tempdir().unwrap();
    let manifest = synth(d.path(), 6, 2, &["--stub-tts"]);
    let aug = d.path().join("aug.jsonl");
    let o = capt(&["augment", "--manifest", p(&manifest), "--variants", "2", "--seed", "1", "--out", p(&aug)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = CorpusManifest::read(&aug).unwrap();
    assert_eq!(m.entries.len(), 18);
    assert_eq!(m.entries.iter().filter(|e| e.augmentation.is_some()).count(), 12);
    for e in &m.entries {
        let paths = e.audio_paths.as_ref().unwrap();
        assert!(d.path().join(&paths.correct).exists() && d.path().join(&paths.mispronounced).exists());
    }
    let o = capt(&[
        "detect", "--manifest", p(&manifest), "--recognizer", "stub-audio", "--report", p(&d.path().join("r.jsonl")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    // Fixed gain/speed outside the allowed ranges is an input error.
    let o = capt(&["augment", "--manifest", p(&manifest), "--gain-db", "9", "--speed", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn feedback_json_and_svg_match_library() {
    let d = tempfile::tempdir().unwrap();
    let (json, svg) = (d.path().join("f.json"), d.path().join("d.svg"));
    let o = capt(&["feedback", "--expected", "ʈ", "--produced", "t̪", "--out", p(&json), "--svg", p(&svg), "--size", "128"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("curl the tongue tip back"));
    let inv = PhonemeInventory::builtin();
    let kb = KnowledgeBase::builtin();
    let (e, pr) = (inv.id_of("ʈ").unwrap(), inv.id_of("t̪").unwrap());
    let lib = compose_feedback(e, Some(pr), kb, inv, Locale::En).unwrap();
    let mut want = serde_json::to_vec_pretty(&lib).unwrap();
    want.push(b'\n');
    assert_eq!(std::fs::read(&json).unwrap(), want);
    let want = render_tongue_diagram(kb.get_entry(e).unwrap(), 128).unwrap();
    assert_eq!(std::fs::read_to_string(&svg).unwrap(), want);

    assert_eq!(capt(&["feedback", "--expected", "zz"]).status.code(), Some(1));
    assert_eq!(capt(&["feedback", "--expected", "k", "--svg", p(&svg), "--size", "8"]).status.code(), Some(1));
}

#[test]
fn wilcoxon_on_five_improvements() {
    let d = tempfile::tempdir().unwrap();
    let csv = d.path().join("s.csv");
    let mut text = String::from("participant_id,phoneme,pre,post\n");
    for i in 0..5 {
        text.push_str(&format!("p{i},ʈ,2,3\n"));
    }
    std::fs::write(&csv, text).unwrap();
    let out = d.path().join("w.json");
    let o = capt(&["eval-wilcoxon", "--survey", p(&csv), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("p = 0.0625"), "{}", stdout(&o));
    assert!(stdout(&o).contains("2.00 ± 0.00"));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["overall"]["p_value"], 0.0625);

    std::fs::write(&csv, "participant_id,phoneme,pre,post\np1,ʈ,3,3\n").unwrap();
    let o = capt(&["eval-wilcoxon", "--survey", p(&csv)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("p = 1"));

    std::fs::write(&csv, "participant_id,phoneme,pre,post\np1,ʈ,3,9\n").unwrap();
    assert_eq!(capt(&["eval-wilcoxon", "--survey", p(&csv)]).status.code(), Some(1));
}

#[test]
fn serve_rejects_bad_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.toml");
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(capt(&["serve", "--config", p(&cfg)]).status.code(), Some(1));
}
