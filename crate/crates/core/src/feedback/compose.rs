use serde::{Deserialize, Serialize};

use crate::phoneme::{FeatureKind, PhonemeFeatures, PhonemeInventory, TokenId};

use super::kb::{ArticulatoryEntry, KnowledgeBase, Locale};
use super::FeedbackError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastPoint {
    pub feature: FeatureKind,
    pub expected_value: String,
    pub produced_value: String,
    /// Articulation text of the expected phoneme for this feature.
    pub instruction: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackMessage {
    pub expected: TokenId,
    /// `None` when the expected phoneme was skipped.
    pub produced: Option<TokenId>,
    pub headline: String,
    pub contrast_points: Vec<ContrastPoint>,
    /// Full articulation description of the expected phoneme.
    pub articulation: Vec<String>,
    pub hint: Option<String>,
    /// Phonemes to draw next to the message, expected first.
    pub diagram_refs: Vec<TokenId>,
}

/// Readable value; booleans get the usual phonetic labels.
fn label(kind: FeatureKind, f: &PhonemeFeatures) -> String {
    let pick = |b: bool, yes: &str, no: &str| if b { yes } else { no }.to_string();
    match kind {
        FeatureKind::Voiced => pick(f.voiced, "voiced", "voiceless"),
        FeatureKind::Aspirated => pick(f.aspirated, "aspirated", "unaspirated"),
        FeatureKind::Nasalized => pick(f.nasalized, "nasalized", "oral"),
        FeatureKind::Rounded => pick(f.rounded, "rounded", "unrounded"),
        other => other.value_of(f),
    }
}

fn instruction(kind: FeatureKind, entry: &ArticulatoryEntry, locale: Locale) -> &str {
    let t = entry.text(locale);
    match kind {
        FeatureKind::Place | FeatureKind::Category | FeatureKind::Height | FeatureKind::Backness => &t.tongue_text,
        FeatureKind::Manner | FeatureKind::Aspirated | FeatureKind::Nasalized => &t.airflow_text,
        FeatureKind::Voiced | FeatureKind::Length => &t.voicing_text,
        FeatureKind::Rounded => &t.lips_text,
    }
}

fn headline(locale: Locale, exp: &ArticulatoryEntry, prod: Option<&ArticulatoryEntry>) -> String {
    let desc = exp.descriptors.join(" ");
    match (locale, prod) {
        (_, Some(p)) if p.phoneme_id == exp.phoneme_id => "correct".to_string(),
        (Locale::En, Some(p)) => format!("Say /{}/ ({desc}), not /{}/", exp.ipa, p.ipa),
        (Locale::En, None) => format!("The sound /{}/ ({desc}) was left out", exp.ipa),
        (Locale::Hi, Some(p)) => format!("/{}/ नहीं, /{}/ ({desc}) बोलिए", p.ipa, exp.ipa),
        (Locale::Hi, None) => format!("ध्वनि /{}/ ({desc}) छूट गई", exp.ipa),
    }
}

/// Contrastive feedback for `expected` pronounced as `produced` (`None` for a
/// deletion). One contrast point per differing feature, in feature order.
pub fn compose_feedback(
    expected: TokenId,
    produced: Option<TokenId>,
    kb: &KnowledgeBase,
    inventory: &PhonemeInventory,
    locale: Locale,
) -> Result<FeedbackMessage, FeedbackError> {
    let exp = kb.get_entry(expected)?;
    let prod = produced.map(|p| kb.get_entry(p)).transpose()?;
    let ef = inventory.get(expected).ok_or(FeedbackError::UnknownPhoneme(expected))?.features;
    let contrast_points = match prod {
        Some(p) => {
            let pf = inventory.get(p.phoneme_id).ok_or(FeedbackError::UnknownPhoneme(p.phoneme_id))?.features;
            ef.diff(&pf)
                .into_iter()
                .map(|kind| ContrastPoint {
                    feature: kind,
                    expected_value: label(kind, &ef),
                    produced_value: label(kind, &pf),
                    instruction: instruction(kind, exp, locale).to_string(),
                })
                .collect()
        }
        None => Vec::new(),
    };
    let hint = produced.and_then(|p| {
        exp.common_errors(locale).iter().find(|c| c.phoneme_id == p).map(|c| c.hint.clone())
    });
    let mut diagram_refs = vec![expected];
    if let Some(p) = produced.filter(|&p| p != expected) {
        diagram_refs.push(p);
    }
    Ok(FeedbackMessage {
        expected,
        produced,
        headline: headline(locale, exp, prod),
        contrast_points,
        articulation: exp.text(locale).all().iter().map(|s| s.to_string()).collect(),
        hint,
        diagram_refs,
    })
}
