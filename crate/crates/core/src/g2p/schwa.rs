use serde::{Deserialize, Serialize};

use crate::phoneme::{PhonemeInventory, PhonemeSequence, TokenId};

/// Which conversion rule produced a phoneme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G2pRule {
    InherentSchwa,
    Matra,
    /// A consonant whose following inherent schwa was deleted.
    SchwaDeleted,
    NasalAssimilation,
    Conjunct,
    Nukta,
    Direct,
}

/// One phoneme of the per-word lattice built by the grapheme pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSlot {
    pub phoneme: TokenId,
    pub akshara: usize,
    pub rule: G2pRule,
}

impl LatticeSlot {
    fn is_inherent_schwa(&self) -> bool {
        self.rule == G2pRule::InherentSchwa
    }
}

/// Per-phoneme provenance in a [`G2pResult`](super::G2pResult).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub akshara: usize,
    pub rule: G2pRule,
}

/// Builds a lattice from IPA symbols, treating every `ə` as an inherent schwa
/// and each consonant-plus-schwa as one akshara.
pub fn lattice_from_ipa(inventory: &PhonemeInventory, symbols: &[&str]) -> Option<Vec<LatticeSlot>> {
    let schwa = inventory.id_of("ə")?;
    let mut akshara = 0;
    let mut out = Vec::with_capacity(symbols.len());
    for (i, sym) in symbols.iter().enumerate() {
        let id = inventory.id_of(sym)?;
        let rule = if id == schwa && i > 0 { G2pRule::InherentSchwa } else { G2pRule::Direct };
        out.push(LatticeSlot { phoneme: id, akshara, rule });
        if inventory.phoneme(id).features.is_vocalic() {
            akshara += 1;
        }
    }
    Some(out)
}

/// Deletes inherent schwas in one word.
///
/// Rules, in order:
/// - words with at most one vowel are left untouched;
/// - a word-final inherent schwa after a consonant is deleted;
/// - scanning right to left, an inherent schwa in `V C _ C V` is deleted.
///   Both flanking consonants must be singletons, so a deletion never leaves a
///   run of three or more consonants.
///
/// The consonant before each deleted schwa is re-tagged [`G2pRule::SchwaDeleted`].
pub fn delete_schwas_in_word(inventory: &PhonemeInventory, word: &[LatticeSlot]) -> Vec<LatticeSlot> {
    let vocalic = |slot: &LatticeSlot| inventory.phoneme(slot.phoneme).features.is_vocalic();
    let mut out = word.to_vec();
    if out.iter().filter(|s| vocalic(s)).count() <= 1 {
        return out;
    }

    let n = out.len();
    if n >= 2 && out[n - 1].is_inherent_schwa() && !vocalic(&out[n - 2]) {
        out.pop();
        out[n - 2].rule = G2pRule::SchwaDeleted;
    }

    let mut i = out.len().saturating_sub(2);
    while i >= 2 {
        let deletable = out[i].is_inherent_schwa()
            && i + 2 < out.len()
            && !vocalic(&out[i - 1])
            && vocalic(&out[i - 2])
            && !vocalic(&out[i + 1])
            && vocalic(&out[i + 2]);
        if deletable {
            out.remove(i);
            out[i - 1].rule = G2pRule::SchwaDeleted;
        }
        i -= 1;
    }
    out
}

/// Applies schwa deletion to every word of a lattice and assembles the
/// resulting sequence together with its trace.
pub fn apply_schwa_deletion(
    inventory: &PhonemeInventory,
    words: &[Vec<LatticeSlot>],
) -> (PhonemeSequence, Vec<TraceRecord>) {
    let deleted: Vec<Vec<LatticeSlot>> =
        words.iter().map(|w| delete_schwas_in_word(inventory, w)).collect();
    assemble(&deleted)
}

pub(crate) fn assemble(words: &[Vec<LatticeSlot>]) -> (PhonemeSequence, Vec<TraceRecord>) {
    let words: Vec<&Vec<LatticeSlot>> = words.iter().filter(|w| !w.is_empty()).collect();
    let ids: Vec<Vec<TokenId>> =
        words.iter().map(|w| w.iter().map(|s| s.phoneme).collect()).collect();
    let trace = words
        .iter()
        .flat_map(|w| w.iter().map(|s| TraceRecord { akshara: s.akshara, rule: s.rule }))
        .collect();
    let seq = PhonemeSequence::from_word_ids(&ids).expect("non-empty words with phoneme ids");
    (seq, trace)
}
