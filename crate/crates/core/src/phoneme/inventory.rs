use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::features::{
    weighted_feature_distance, Backness, Category, FeatureWeights, Height, Length, Manner, Place,
    PhonemeFeatures,
};
use super::PhonemeError;

/// Token id in the 67-symbol output space.
pub type TokenId = u8;

/// Number of phoneme tokens (ids `0..PHONEME_COUNT`).
pub const PHONEME_COUNT: usize = 64;
/// End-of-word marker.
pub const EOW: TokenId = 64;
/// End-of-sentence marker.
pub const EOS: TokenId = 65;
/// Padding marker. Never appears inside a [`PhonemeSequence`](super::PhonemeSequence).
pub const PAD: TokenId = 66;
/// Total size of the token space.
pub const TOKEN_COUNT: usize = 67;

const DEFAULT_INVENTORY: &str = include_str!("../../data/inventory.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialTokens {
    pub eow: TokenId,
    pub eos: TokenId,
    pub pad: TokenId,
}

impl Default for SpecialTokens {
    fn default() -> Self {
        SpecialTokens { eow: EOW, eos: EOS, pad: PAD }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phoneme {
    pub id: TokenId,
    pub ipa: String,
    pub devanagari_forms: Vec<String>,
    pub features: PhonemeFeatures,
}

/// Where to load an inventory from.
#[derive(Debug, Clone)]
pub enum InventorySource<'a> {
    BuiltIn,
    File(&'a Path),
    Text(&'a str),
}

/// The validated 64-phoneme inventory plus the three special tokens.
///
/// Immutable once loaded.
#[derive(Debug, Clone)]
pub struct PhonemeInventory {
    phonemes: Vec<Phoneme>,
    special: SpecialTokens,
    by_ipa: HashMap<String, TokenId>,
    by_form: HashMap<String, TokenId>,
}

pub fn load_inventory(source: InventorySource<'_>) -> Result<PhonemeInventory, PhonemeError> {
    match source {
        InventorySource::BuiltIn => PhonemeInventory::parse(DEFAULT_INVENTORY),
        InventorySource::Text(text) => PhonemeInventory::parse(text),
        InventorySource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| PhonemeError::Io {
                path: path.display().to_string(),
                source,
            })?;
            PhonemeInventory::parse(&text)
        }
    }
}

fn parse_bool(field: &str) -> Result<bool, String> {
    match field {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true/false, got {other:?}")),
    }
}

fn parse_line(line: &str) -> Result<Phoneme, String> {
    let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
    if cols.len() != 11 && cols.len() != 13 {
        return Err(format!("expected 11 or 13 tab-separated fields, found {}", cols.len()));
    }
    let id: TokenId = cols[0]
        .parse()
        .map_err(|_| format!("invalid id {:?}", cols[0]))?;
    if usize::from(id) >= PHONEME_COUNT {
        return Err(format!("phoneme id {id} outside 0-63"));
    }
    let ipa = cols[1].to_string();
    if ipa.is_empty() {
        return Err("empty ipa".into());
    }
    let devanagari_forms = cols[2]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty() && *s != "-")
        .map(String::from)
        .collect();
    let (height, backness) = if cols.len() == 13 {
        (cols[11].parse::<Height>()?, cols[12].parse::<Backness>()?)
    } else {
        (Height::None, Backness::None)
    };
    let features = PhonemeFeatures {
        category: cols[3].parse::<Category>()?,
        place: cols[4].parse::<Place>()?,
        manner: cols[5].parse::<Manner>()?,
        voiced: parse_bool(cols[6])?,
        aspirated: parse_bool(cols[7])?,
        length: cols[8].parse::<Length>()?,
        nasalized: parse_bool(cols[9])?,
        rounded: parse_bool(cols[10])?,
        height,
        backness,
    };
    features.validate()?;
    Ok(Phoneme { id, ipa, devanagari_forms, features })
}

impl PhonemeInventory {
    /// The built-in inventory, parsed once per process.
    pub fn builtin() -> &'static PhonemeInventory {
        static INVENTORY: OnceLock<PhonemeInventory> = OnceLock::new();
        INVENTORY.get_or_init(|| {
            PhonemeInventory::parse(DEFAULT_INVENTORY).expect("built-in inventory is valid")
        })
    }

    pub fn parse(text: &str) -> Result<Self, PhonemeError> {
        let mut phonemes = Vec::with_capacity(PHONEME_COUNT);
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let phoneme = parse_line(line).map_err(|reason| PhonemeError::MalformedEntry {
                line: idx + 1,
                reason,
            })?;
            phonemes.push(phoneme);
        }
        Self::from_phonemes(phonemes)
    }

    pub fn from_phonemes(mut phonemes: Vec<Phoneme>) -> Result<Self, PhonemeError> {
        let mut by_ipa = HashMap::new();
        let mut seen_ids = [false; PHONEME_COUNT];
        for p in &phonemes {
            if usize::from(p.id) >= PHONEME_COUNT {
                return Err(PhonemeError::MalformedEntry {
                    line: 0,
                    reason: format!("phoneme id {} outside 0-63", p.id),
                });
            }
            if std::mem::replace(&mut seen_ids[usize::from(p.id)], true) {
                return Err(PhonemeError::DuplicateToken(format!("id {}", p.id)));
            }
            if by_ipa.insert(p.ipa.clone(), p.id).is_some() {
                return Err(PhonemeError::DuplicateToken(format!("ipa {}", p.ipa)));
            }
        }
        if phonemes.len() != PHONEME_COUNT {
            return Err(PhonemeError::InventorySize(phonemes.len()));
        }
        let mut by_form = HashMap::new();
        for p in &phonemes {
            for form in &p.devanagari_forms {
                if by_form.insert(form.clone(), p.id).is_some() {
                    return Err(PhonemeError::DuplicateToken(format!("grapheme {form}")));
                }
            }
        }
        phonemes.sort_by_key(|p| p.id);
        Ok(PhonemeInventory { phonemes, special: SpecialTokens::default(), by_ipa, by_form })
    }

    pub fn phonemes(&self) -> &[Phoneme] {
        &self.phonemes
    }

    pub fn special_tokens(&self) -> SpecialTokens {
        self.special
    }

    pub fn token_count(&self) -> usize {
        TOKEN_COUNT
    }

    pub fn get(&self, id: TokenId) -> Option<&Phoneme> {
        self.phonemes.get(usize::from(id))
    }

    /// Looks up a phoneme id. Panics on ids outside `0..64`; use [`get`](Self::get)
    /// for untrusted input.
    pub fn phoneme(&self, id: TokenId) -> &Phoneme {
        &self.phonemes[usize::from(id)]
    }

    /// Accepts both precomposed (`ã`) and decomposed (`a` + U+0303) nasal vowels.
    pub fn id_of(&self, ipa: &str) -> Option<TokenId> {
        if let Some(&id) = self.by_ipa.get(ipa) {
            return Some(id);
        }
        self.by_ipa.get(&decompose_tilde(ipa)).copied()
    }

    pub fn by_ipa(&self, ipa: &str) -> Option<&Phoneme> {
        self.id_of(ipa).map(|id| self.phoneme(id))
    }

    /// Phoneme whose Devanagari form list contains `grapheme`.
    pub fn by_grapheme(&self, grapheme: &str) -> Option<&Phoneme> {
        self.by_form.get(grapheme).map(|&id| self.phoneme(id))
    }

    pub fn find_by_features(&self, features: &PhonemeFeatures) -> Option<&Phoneme> {
        self.phonemes.iter().find(|p| &p.features == features)
    }

    /// Display symbol for any token id, including the special markers.
    pub fn symbol(&self, id: TokenId) -> &str {
        match id {
            EOW => "<eow>",
            EOS => "<eos>",
            PAD => "<pad>",
            _ => self.get(id).map_or("<unk>", |p| p.ipa.as_str()),
        }
    }

    /// Weighted feature distance between two inventory members.
    pub fn distance(&self, a: TokenId, b: TokenId, weights: &FeatureWeights) -> f64 {
        if a == b {
            return 0.0;
        }
        feature_distance(self.phoneme(a), self.phoneme(b), weights)
    }

    /// Serializes back to the tab-separated inventory format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "# id\tipa\tdevanagari_forms\tcategory\tplace\tmanner\tvoiced\taspirated\tlength\tnasalized\trounded\theight\tbackness\n",
        );
        for p in &self.phonemes {
            let f = &p.features;
            let forms = if p.devanagari_forms.is_empty() {
                "-".to_string()
            } else {
                p.devanagari_forms.join(",")
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                p.id,
                p.ipa,
                forms,
                f.category,
                f.place,
                f.manner,
                f.voiced,
                f.aspirated,
                f.length,
                f.nasalized,
                f.rounded,
                f.height,
                f.backness
            );
        }
        out
    }
}

fn decompose_tilde(ipa: &str) -> String {
    let mut out = String::with_capacity(ipa.len() + 2);
    for c in ipa.chars() {
        let base = match c {
            'ã' => 'a',
            'ẽ' => 'e',
            'ĩ' => 'i',
            'õ' => 'o',
            'ũ' => 'u',
            other => {
                out.push(other);
                continue;
            }
        };
        out.push(base);
        out.push('\u{0303}');
    }
    out
}

/// Weighted Hamming distance over articulatory features, in `[0, 1]`.
///
/// Symmetric, zero only for the same phoneme (given an inventory whose feature
/// bundles are pairwise distinct, which the default one is).
pub fn feature_distance(a: &Phoneme, b: &Phoneme, weights: &FeatureWeights) -> f64 {
    if a.id == b.id {
        return 0.0;
    }
    weighted_feature_distance(&a.features, &b.features, weights)
}
