//! Devanagari grapheme-to-phoneme conversion.
//!
//! Text is segmented into aksharas, each akshara is mapped to phonemes
//! (consonants, matra or inherent schwa, nasal modifiers, visarga), and the
//! per-word lattice then goes through schwa deletion.

mod akshara;
mod lexicon;
mod schwa;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phoneme::{Manner, Place, PhonemeInventory, PhonemeSequence, TokenId};

pub use akshara::{
    tokenize_aksharas, AksharaKind, AksharaToken, ConsonantGrapheme, Modifier, VowelMark,
};
pub use lexicon::Lexicon;
pub use schwa::{
    apply_schwa_deletion, delete_schwas_in_word, lattice_from_ipa, G2pRule, LatticeSlot,
    TraceRecord,
};

#[derive(Debug, Error)]
pub enum G2pError {
    #[error("unsupported character {ch:?} at byte offset {offset}")]
    UnsupportedCharacter { ch: char, offset: usize },
    #[error("grapheme {grapheme:?} at byte offset {offset} is not in the inventory")]
    UnknownGrapheme { grapheme: String, offset: usize },
    #[error("malformed lexicon line {line}: {reason}")]
    MalformedLexicon { line: usize, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct G2pOptions<'a> {
    pub schwa_deletion: bool,
    pub inventory: &'a PhonemeInventory,
    pub lexicon: Option<&'a Lexicon>,
}

impl<'a> G2pOptions<'a> {
    pub fn new(inventory: &'a PhonemeInventory) -> Self {
        G2pOptions { schwa_deletion: true, inventory, lexicon: None }
    }
}

impl Default for G2pOptions<'static> {
    fn default() -> Self {
        G2pOptions::new(PhonemeInventory::builtin())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct G2pResult {
    pub sequence: PhonemeSequence,
    /// One record per phoneme of `sequence`, in order.
    pub trace: Vec<TraceRecord>,
}

/// Converts Devanagari text to its canonical phoneme sequence.
///
/// Whitespace, danda, digits and punctuation separate words.
pub fn to_phonemes(text: &str, opts: &G2pOptions<'_>) -> Result<G2pResult, G2pError> {
    let tokens = tokenize_aksharas(text)?;
    let inv = opts.inventory;

    let mut words: Vec<Vec<LatticeSlot>> = Vec::new();
    let mut lexical: Vec<bool> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !tokens[i].is_syllabic() {
            i += 1;
            continue;
        }
        let start = i;
        while i < tokens.len() && tokens[i].is_syllabic() {
            i += 1;
        }
        let word_tokens = &tokens[start..i];
        let surface = &text[word_tokens[0].source_span.0..word_tokens[word_tokens.len() - 1].source_span.1];
        if let Some(ids) = opts.lexicon.and_then(|lex| lex.lookup(surface)) {
            words.push(
                ids.iter()
                    .map(|&phoneme| LatticeSlot { phoneme, akshara: start, rule: G2pRule::Direct })
                    .collect(),
            );
            lexical.push(true);
        } else {
            words.push(word_lattice(inv, word_tokens, start)?);
            lexical.push(false);
        }
    }

    let words: Vec<Vec<LatticeSlot>> = if opts.schwa_deletion {
        words
            .iter()
            .zip(&lexical)
            .map(|(w, &lex)| if lex { w.clone() } else { delete_schwas_in_word(inv, w) })
            .collect()
    } else {
        words
    };
    let (sequence, trace) = schwa::assemble(&words);
    Ok(G2pResult { sequence, trace })
}

fn lookup(
    inv: &PhonemeInventory,
    grapheme: &str,
    offset: usize,
) -> Result<TokenId, G2pError> {
    inv.by_grapheme(grapheme).map(|p| p.id).ok_or_else(|| G2pError::UnknownGrapheme {
        grapheme: grapheme.to_string(),
        offset,
    })
}

fn lookup_ipa(inv: &PhonemeInventory, ipa: &str, grapheme: char, offset: usize) -> Result<TokenId, G2pError> {
    inv.id_of(ipa).ok_or_else(|| G2pError::UnknownGrapheme { grapheme: grapheme.to_string(), offset })
}

/// Vowel-sign graphemes that spell more than one phoneme.
fn multi_phoneme_vowel(c: char) -> Option<&'static [&'static str]> {
    match c {
        '\u{090B}' | '\u{0943}' => Some(&["r", "ɪ"]),
        _ => None,
    }
}

/// Nasalized counterpart of a vowel, if the inventory has one.
fn nasalize(inv: &PhonemeInventory, id: TokenId) -> Option<TokenId> {
    let f = inv.phoneme(id).features;
    if !f.is_vocalic() || f.nasalized {
        return None;
    }
    let mut nasal = f;
    nasal.nasalized = true;
    inv.find_by_features(&nasal).map(|p| p.id)
}

/// Homorganic nasal for a following stop or nasal.
fn homorganic_nasal(inv: &PhonemeInventory, next: TokenId) -> Option<TokenId> {
    let f = inv.phoneme(next).features;
    if !matches!(f.manner, Manner::Plosive | Manner::Affricate | Manner::Nasal) {
        return None;
    }
    if !matches!(
        f.place,
        Place::Velar | Place::Palatal | Place::Retroflex | Place::Dental | Place::Labial
    ) {
        return None;
    }
    inv.phonemes()
        .iter()
        .find(|p| p.features.is_consonant() && p.features.manner == Manner::Nasal && p.features.place == f.place)
        .map(|p| p.id)
}

struct PendingAnusvara {
    /// Index of the nasal-bearing vowel slot within the word lattice.
    vowel_slot: usize,
    /// Number of slots the akshara occupied when the anusvara was seen.
    insert_at: usize,
    akshara: usize,
}

fn word_lattice(
    inv: &PhonemeInventory,
    tokens: &[AksharaToken],
    first_index: usize,
) -> Result<Vec<LatticeSlot>, G2pError> {
    let schwa = inv.id_of("ə").expect("inventory defines ə");
    let visarga = inv.by_grapheme("\u{0903}").map(|p| p.id);
    let mut slots: Vec<LatticeSlot> = Vec::new();
    let mut anusvaras: Vec<PendingAnusvara> = Vec::new();

    for (k, tok) in tokens.iter().enumerate() {
        let akshara = first_index + k;
        let offset = tok.source_span.0;
        let cluster = tok.consonants.len();
        for c in &tok.consonants {
            let id = lookup(inv, &c.grapheme(), offset)?;
            let rule = if c.nukta {
                G2pRule::Nukta
            } else if cluster > 1 {
                G2pRule::Conjunct
            } else {
                G2pRule::Direct
            };
            slots.push(LatticeSlot { phoneme: id, akshara, rule });
        }

        let (vowel_rule, vowel_char) = match tok.vowel {
            VowelMark::Inherent => {
                slots.push(LatticeSlot { phoneme: schwa, akshara, rule: G2pRule::InherentSchwa });
                (None, None)
            }
            VowelMark::Matra(c) => (Some(G2pRule::Matra), Some(c)),
            VowelMark::Letter(c) => (Some(G2pRule::Direct), Some(c)),
            VowelMark::None => (None, None),
        };
        if let (Some(rule), Some(c)) = (vowel_rule, vowel_char) {
            if let Some(parts) = multi_phoneme_vowel(c) {
                for ipa in parts {
                    let id = lookup_ipa(inv, ipa, c, offset)?;
                    slots.push(LatticeSlot { phoneme: id, akshara, rule });
                }
            } else {
                let id = lookup(inv, &c.to_string(), offset)?;
                slots.push(LatticeSlot { phoneme: id, akshara, rule });
            }
        }

        let vowel_slot = slots
            .len()
            .checked_sub(1)
            .filter(|&i| slots[i].akshara == akshara && inv.phoneme(slots[i].phoneme).features.is_vocalic());
        match tok.modifier {
            Modifier::None => {}
            Modifier::Chandrabindu => {
                if let Some(v) = vowel_slot {
                    if let Some(n) = nasalize(inv, slots[v].phoneme) {
                        slots[v].phoneme = n;
                        slots[v].rule = G2pRule::NasalAssimilation;
                    }
                }
            }
            Modifier::Anusvara => {
                if let Some(v) = vowel_slot {
                    anusvaras.push(PendingAnusvara { vowel_slot: v, insert_at: slots.len(), akshara });
                }
            }
            Modifier::Visarga => {
                let id = visarga.ok_or_else(|| G2pError::UnknownGrapheme {
                    grapheme: "\u{0903}".into(),
                    offset,
                })?;
                slots.push(LatticeSlot { phoneme: id, akshara, rule: G2pRule::Direct });
            }
        }
    }

    // Resolve anusvaras right to left so earlier insertion points stay valid.
    for pending in anusvaras.into_iter().rev() {
        let next = slots.get(pending.insert_at).map(|s| s.phoneme);
        match next.and_then(|n| homorganic_nasal(inv, n)) {
            Some(nasal) => slots.insert(
                pending.insert_at,
                LatticeSlot { phoneme: nasal, akshara: pending.akshara, rule: G2pRule::NasalAssimilation },
            ),
            None => {
                let v = pending.vowel_slot;
                if let Some(n) = nasalize(inv, slots[v].phoneme) {
                    slots[v].phoneme = n;
                    slots[v].rule = G2pRule::NasalAssimilation;
                }
            }
        }
    }
    Ok(slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phoneme::format_ipa;

    fn g2p(text: &str) -> String {
        let r = to_phonemes(text, &G2pOptions::default()).unwrap();
        format_ipa(PhonemeInventory::builtin(), &r.sequence)
    }

    #[test]
    fn independent_vowel_maps_directly() {
        assert_eq!(g2p("अ"), "ə");
    }

    #[test]
    fn kamal() {
        assert_eq!(g2p("कमल"), "k ə m ə l");
    }

    #[test]
    fn chandrabindu_nasalizes() {
        assert_eq!(g2p("माँ"), "m a\u{303}ː");
    }

    #[test]
    fn anusvara_is_homorganic_before_stops() {
        assert_eq!(g2p("हिंदी"), "ɦ ɪ n d̪ iː");
        assert_eq!(g2p("ठंडा"), "ʈʰ ə ɳ ɖ aː");
        assert_eq!(g2p("पंखा"), "p ə ŋ kʰ aː");
        assert_eq!(g2p("चंपा"), "tʃ ə m p aː");
    }

    #[test]
    fn anusvara_nasalizes_word_finally_and_before_fricatives() {
        assert_eq!(g2p("में"), "m e\u{303}ː");
        assert_eq!(g2p("हंस"), "ɦ ə̃ s");
    }

    #[test]
    fn visarga_is_h() {
        assert_eq!(g2p("दुःख"), "d̪ ʊ h kʰ");
    }

    #[test]
    fn danda_and_digits_split_words() {
        assert_eq!(g2p("घर।पानी १२ फल"), "gʱ ə r | p aː n iː | pʰ ə l");
    }

    #[test]
    fn no_schwa_deletion_inserts_every_schwa() {
        let opts = G2pOptions { schwa_deletion: false, ..G2pOptions::default() };
        let r = to_phonemes("कमल", &opts).unwrap();
        assert_eq!(format_ipa(PhonemeInventory::builtin(), &r.sequence), "k ə m ə l ə");
    }

    #[test]
    fn unknown_grapheme_reported() {
        // य़ (precomposed nukta-ya) has no inventory entry.
        assert!(matches!(
            to_phonemes("\u{095F}", &G2pOptions::default()),
            Err(G2pError::UnknownGrapheme { offset: 0, .. })
        ));
    }

    #[test]
    fn trace_is_one_per_phoneme_and_monotone() {
        let r = to_phonemes("नमस्ते दोस्त, क्या हाल हैं?", &G2pOptions::default()).unwrap();
        assert_eq!(r.trace.len(), r.sequence.phoneme_count());
        assert!(r.trace.windows(2).all(|w| w[0].akshara <= w[1].akshara));
    }

    #[test]
    fn lexicon_overrides_rules() {
        let lex = Lexicon::parse("कमल\tk ə m ə l ə\n", PhonemeInventory::builtin()).unwrap();
        let opts = G2pOptions { lexicon: Some(&lex), ..G2pOptions::default() };
        let r = to_phonemes("कमल घर", &opts).unwrap();
        assert_eq!(format_ipa(PhonemeInventory::builtin(), &r.sequence), "k ə m ə l ə | gʱ ə r");
    }
}
