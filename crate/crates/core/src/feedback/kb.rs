use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::phoneme::{Category, Manner, PhonemeFeatures, PhonemeInventory, TokenId, PHONEME_COUNT};

use super::diagram::DiagramParams;
use super::FeedbackError;

const BUILTIN_KB: &str = include_str!("../../data/articulation.tsv");
const COLUMNS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locale {
    #[default]
    En,
    Hi,
}

impl std::str::FromStr for Locale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Locale::En),
            "hi" => Ok(Locale::Hi),
            other => Err(format!("unknown locale {other:?} (expected en or hi)")),
        }
    }
}

/// The five articulation instructions in one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticulationText {
    pub tongue_text: String,
    pub lips_text: String,
    pub teeth_text: String,
    pub airflow_text: String,
    pub voicing_text: String,
}

impl ArticulationText {
    pub fn all(&self) -> [&str; 5] {
        [&self.tongue_text, &self.lips_text, &self.teeth_text, &self.airflow_text, &self.voicing_text]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonError {
    pub phoneme_id: TokenId,
    pub hint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticulatoryEntry {
    pub phoneme_id: TokenId,
    pub ipa: String,
    pub descriptors: Vec<String>,
    pub en: ArticulationText,
    pub hi: ArticulationText,
    pub common_errors_en: Vec<CommonError>,
    pub common_errors_hi: Vec<CommonError>,
    pub diagram: DiagramParams,
}

impl ArticulatoryEntry {
    pub fn text(&self, locale: Locale) -> &ArticulationText {
        match locale {
            Locale::En => &self.en,
            Locale::Hi => &self.hi,
        }
    }

    pub fn common_errors(&self, locale: Locale) -> &[CommonError] {
        match locale {
            Locale::En => &self.common_errors_en,
            Locale::Hi => &self.common_errors_hi,
        }
    }
}

/// Descriptor tags implied by a feature bundle, in display order.
///
/// Consonants: voicing, place, aspiration (only for manners where Hindi
/// contrasts it: plosives, affricates, flaps), manner. Vowels: height,
/// backness, rounding, length, nasalization if present, category.
pub fn descriptors_for(f: &PhonemeFeatures) -> Vec<String> {
    let mut d = Vec::with_capacity(6);
    if f.category == Category::Consonant {
        d.push(if f.voiced { "voiced" } else { "unvoiced" }.to_string());
        d.push(f.place.to_string());
        if matches!(f.manner, Manner::Plosive | Manner::Affricate | Manner::Flap) {
            d.push(if f.aspirated { "aspirated" } else { "unaspirated" }.to_string());
        }
        d.push(f.manner.to_string());
    } else {
        d.push(f.height.to_string());
        d.push(f.backness.to_string());
        d.push(if f.rounded { "rounded" } else { "unrounded" }.to_string());
        d.push(f.length.to_string());
        if f.nasalized {
            d.push("nasalized".to_string());
        }
        d.push(f.category.to_string());
    }
    d
}

/// Articulation entries for every phoneme of an inventory.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    entries: Vec<ArticulatoryEntry>,
}

impl KnowledgeBase {
    pub fn builtin() -> &'static KnowledgeBase {
        static KB: OnceLock<KnowledgeBase> = OnceLock::new();
        KB.get_or_init(|| {
            KnowledgeBase::parse(BUILTIN_KB, PhonemeInventory::builtin()).expect("built-in knowledge base is valid")
        })
    }

    /// The bundled entries checked against a custom inventory.
    pub fn builtin_for(inventory: &PhonemeInventory) -> Result<Self, FeedbackError> {
        Self::parse(BUILTIN_KB, inventory)
    }

    pub fn load(path: &Path, inventory: &PhonemeInventory) -> Result<Self, FeedbackError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| FeedbackError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text, inventory)
    }

    /// Parses the tab-separated file and checks it against `inventory`:
    /// one complete entry per phoneme, descriptors matching the features.
    pub fn parse(text: &str, inventory: &PhonemeInventory) -> Result<Self, FeedbackError> {
        let mut slots: Vec<Option<ArticulatoryEntry>> = vec![None; PHONEME_COUNT];
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: String| FeedbackError::MalformedEntry { line: line_no, reason };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != COLUMNS {
                return Err(bad(format!("{} columns, expected {COLUMNS}", f.len())));
            }
            let id: TokenId = f[0].parse().map_err(|_| bad(format!("bad id {:?}", f[0])))?;
            let phoneme = inventory.get(id).ok_or_else(|| bad(format!("id {id} is not a phoneme")))?;
            if phoneme.ipa != f[1] {
                return Err(bad(format!("id {id} is /{}/ in the inventory, not /{}/", phoneme.ipa, f[1])));
            }
            let descriptors: Vec<String> = f[2].split(',').map(|s| s.trim().to_string()).collect();
            let expected = descriptors_for(&phoneme.features);
            if descriptors != expected {
                return Err(bad(format!("descriptors {descriptors:?} do not match features {expected:?}")));
            }
            let text_at = |i: usize| -> Result<String, FeedbackError> {
                let t = f[i].trim();
                if t.is_empty() {
                    Err(bad(format!("empty text in column {}", i + 1)))
                } else {
                    Ok(t.to_string())
                }
            };
            let en = ArticulationText {
                tongue_text: text_at(3)?,
                lips_text: text_at(4)?,
                teeth_text: text_at(5)?,
                airflow_text: text_at(6)?,
                voicing_text: text_at(7)?,
            };
            let hi = ArticulationText {
                tongue_text: text_at(8)?,
                lips_text: text_at(9)?,
                teeth_text: text_at(10)?,
                airflow_text: text_at(11)?,
                voicing_text: text_at(12)?,
            };
            let common = |col: usize| -> Result<Vec<CommonError>, FeedbackError> {
                f[col]
                    .split(" | ")
                    .filter(|s| !s.trim().is_empty())
                    .map(|item| {
                        let (ipa, hint) = item
                            .split_once('=')
                            .ok_or_else(|| bad(format!("common error {item:?} lacks `=`")))?;
                        let pid = inventory
                            .id_of(ipa.trim())
                            .ok_or_else(|| bad(format!("unknown phoneme {ipa:?} in common errors")))?;
                        Ok(CommonError { phoneme_id: pid, hint: hint.trim().to_string() })
                    })
                    .collect()
            };
            let slot = &mut slots[usize::from(id)];
            if slot.is_some() {
                return Err(bad(format!("duplicate entry for id {id}")));
            }
            *slot = Some(ArticulatoryEntry {
                phoneme_id: id,
                ipa: phoneme.ipa.clone(),
                descriptors,
                en,
                hi,
                common_errors_en: common(13)?,
                common_errors_hi: common(14)?,
                diagram: DiagramParams::for_features(&phoneme.features),
            });
        }
        let missing: BTreeSet<TokenId> =
            slots.iter().enumerate().filter(|(_, s)| s.is_none()).map(|(i, _)| i as TokenId).collect();
        if !missing.is_empty() {
            return Err(FeedbackError::IncompleteKnowledgeBase(missing.into_iter().collect()));
        }
        Ok(KnowledgeBase { entries: slots.into_iter().map(|s| s.expect("checked")).collect() })
    }

    pub fn entries(&self) -> &[ArticulatoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get_entry(&self, id: TokenId) -> Result<&ArticulatoryEntry, FeedbackError> {
        self.entries.get(usize::from(id)).ok_or(FeedbackError::UnknownPhoneme(id))
    }
}
