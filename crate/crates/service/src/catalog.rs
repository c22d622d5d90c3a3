use std::path::Path;

use capt_core::g2p::{to_phonemes, G2pOptions};
use capt_core::phoneme::{format_ipa, PhonemeInventory, PhonemeSequence};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

const BUILTIN_CATALOG: &str = include_str!("../data/sentences.tsv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogSentence {
    pub sentence_id: String,
    pub text: String,
    pub canonical: PhonemeSequence,
    /// Space-separated IPA with `|` between words.
    pub canonical_ipa: String,
    pub difficulty: String,
}

/// Practice sentences in file order, canonicalized by G2P at load.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    sentences: Vec<CatalogSentence>,
}

impl Catalog {
    pub fn builtin(inventory: &PhonemeInventory) -> Result<Self, ServiceError> {
        Self::parse(BUILTIN_CATALOG, inventory)
    }

    pub fn load(path: &Path, inventory: &PhonemeInventory) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Catalog(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, inventory)
    }

    /// Lines are `sentence_id<TAB>difficulty<TAB>text`; `#` starts a comment.
    pub fn parse(text: &str, inventory: &PhonemeInventory) -> Result<Self, ServiceError> {
        let opts = G2pOptions::new(inventory);
        let mut sentences: Vec<CatalogSentence> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| ServiceError::Catalog(format!("line {}: {m}", n + 1));
            let cols: Vec<&str> = line.split('\t').collect();
            let [id, difficulty, text] = cols[..] else {
                return Err(bad(format!("{} columns, expected 3", cols.len())));
            };
            if sentences.iter().any(|s| s.sentence_id == id) {
                return Err(bad(format!("duplicate sentence id {id:?}")));
            }
            let g2p = to_phonemes(text, &opts).map_err(|e| bad(e.to_string()))?;
            if g2p.sequence.phoneme_count() == 0 {
                return Err(bad("sentence has no phonemes".into()));
            }
            sentences.push(CatalogSentence {
                sentence_id: id.trim().to_string(),
                text: text.trim().to_string(),
                canonical_ipa: format_ipa(inventory, &g2p.sequence),
                canonical: g2p.sequence,
                difficulty: difficulty.trim().to_string(),
            });
        }
        Ok(Catalog { sentences })
    }

    pub fn sentences(&self) -> &[CatalogSentence] {
        &self.sentences
    }

    pub fn get(&self, id: &str) -> Option<&CatalogSentence> {
        self.sentences.iter().find(|s| s.sentence_id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Sounds the default catalog is built around: dental/retroflex pairs,
/// aspirates, palatal affricates, the retroflex flap and nasal, nasalization.
pub const FOCUS_PHONEMES: [&str; 13] =
    ["t̪", "t̪ʰ", "d̪", "d̪ʱ", "ʈ", "ʈʰ", "ɖ", "ɖʱ", "ɽ", "tʃʰ", "dʒʱ", "ɳ", "ãː"];
