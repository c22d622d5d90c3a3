use capt_core::feedback::{compose_feedback, render_tongue_diagram, KnowledgeBase, Locale};
use capt_core::phoneme::{FeatureKind, PhonemeInventory, TokenId};
use proptest::prelude::*;

fn inv() -> &'static PhonemeInventory {
    PhonemeInventory::builtin()
}

fn id(ipa: &str) -> TokenId {
    inv().id_of(ipa).unwrap()
}

#[test]
fn retroflex_vs_dental_contrasts_place_only() {
    let m = compose_feedback(id("ʈ"), Some(id("t̪")), KnowledgeBase::builtin(), inv(), Locale::En).unwrap();
    assert_eq!(m.contrast_points.len(), 1);
    let c = &m.contrast_points[0];
    assert_eq!(c.feature, FeatureKind::Place);
    assert_eq!((c.expected_value.as_str(), c.produced_value.as_str()), ("retroflex", "dental"));
    assert!(c.instruction.contains("curl the tongue tip back"), "{}", c.instruction);
    assert_eq!(m.diagram_refs, vec![id("ʈ"), id("t̪")]);
}

#[test]
fn aspiration_contrast_uses_airflow_text() {
    let kb = KnowledgeBase::builtin();
    let m = compose_feedback(id("pʰ"), Some(id("p")), kb, inv(), Locale::En).unwrap();
    assert_eq!(m.contrast_points.len(), 1);
    assert_eq!(m.contrast_points[0].feature, FeatureKind::Aspirated);
    assert_eq!(m.contrast_points[0].instruction, kb.get_entry(id("pʰ")).unwrap().en.airflow_text);
    assert!(m.contrast_points[0].instruction.contains("puff"));
}

#[test]
fn every_diagram_is_well_formed_and_deterministic() {
    let kb = KnowledgeBase::builtin();
    for e in kb.entries() {
        let svg = render_tongue_diagram(e, 256).unwrap();
        assert_eq!(svg, render_tongue_diagram(e, 256).unwrap());
        let doc = roxmltree::Document::parse(&svg).unwrap_or_else(|err| panic!("/{}/: {err}", e.ipa));
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        assert_eq!(root.attribute("viewBox"), Some("0 0 256 256"));
        let tongues: Vec<_> =
            doc.descendants().filter(|n| n.tag_name().name() == "path" && n.attribute("id") == Some("tongue")).collect();
        assert_eq!(tongues.len(), 1, "/{}/", e.ipa);
        for path in doc.descendants().filter(|n| n.tag_name().name() == "path") {
            assert!(path.attribute("d").unwrap().trim_end().ends_with('Z'));
        }
        for required in ["head", "palate", "velum"] {
            assert!(doc.descendants().any(|n| n.attribute("id") == Some(required)));
        }
    }
}

#[test]
fn diagrams_differ_between_places() {
    let kb = KnowledgeBase::builtin();
    let dental = render_tongue_diagram(kb.get_entry(id("t̪")).unwrap(), 128).unwrap();
    let velar = render_tongue_diagram(kb.get_entry(id("k")).unwrap(), 128).unwrap();
    assert_ne!(dental, velar);
    let d = kb.get_entry(id("t̪")).unwrap().diagram.tongue_spline[0].x;
    let v = kb.get_entry(id("k")).unwrap().diagram.tongue_spline[0].x;
    assert!(d < v);
}

#[test]
fn every_entry_has_hindi_text() {
    for e in KnowledgeBase::builtin().entries() {
        for t in e.hi.all() {
            assert!(t.chars().any(|c| ('\u{0900}'..='\u{097F}').contains(&c)), "/{}/: {t}", e.ipa);
        }
    }
}

proptest! {
    #[test]
    fn contrast_features_equal_feature_diff(a in 0u16..64, b in 0u16..64, hi in any::<bool>()) {
        let (a, b) = (a as TokenId, b as TokenId);
        let locale = if hi { Locale::Hi } else { Locale::En };
        let m = compose_feedback(a, Some(b), KnowledgeBase::builtin(), inv(), locale).unwrap();
        let got: Vec<FeatureKind> = m.contrast_points.iter().map(|c| c.feature).collect();
        prop_assert_eq!(got, inv().phoneme(a).features.diff(&inv().phoneme(b).features));
        prop_assert_eq!(m.headline == "correct", a == b);
        prop_assert!(m.contrast_points.iter().all(|c| !c.instruction.is_empty() && c.expected_value != c.produced_value));
    }
}
