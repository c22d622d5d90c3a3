use std::collections::HashMap;
use std::path::Path;

use crate::phoneme::{PhonemeInventory, TokenId};

use super::G2pError;

/// Exceptions lexicon: whole-word pronunciations consulted before the rules.
///
/// File format: one `word<TAB>space-separated ipa` entry per line, `#` comments.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, Vec<TokenId>>,
}

impl Lexicon {
    pub fn parse(text: &str, inventory: &PhonemeInventory) -> Result<Self, G2pError> {
        let mut entries = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let malformed = |reason: String| G2pError::MalformedLexicon { line: idx + 1, reason };
            let (word, ipa) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected word<TAB>ipa".into()))?;
            let ids = ipa
                .split_whitespace()
                .map(|sym| {
                    inventory
                        .id_of(sym)
                        .ok_or_else(|| malformed(format!("unknown phoneme {sym:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if ids.is_empty() {
                return Err(malformed("empty pronunciation".into()));
            }
            entries.insert(word.trim().to_string(), ids);
        }
        Ok(Lexicon { entries })
    }

    pub fn load(path: &Path, inventory: &PhonemeInventory) -> Result<Self, G2pError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| G2pError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text, inventory)
    }

    pub fn lookup(&self, word: &str) -> Option<&[TokenId]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
