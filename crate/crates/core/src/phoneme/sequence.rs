use serde::{Deserialize, Serialize};

use super::inventory::{PhonemeInventory, TokenId, EOS, EOW, PAD, PHONEME_COUNT, TOKEN_COUNT};
use super::PhonemeError;

/// A token sequence: phonemes interleaved with end-of-word marks and a single
/// trailing end-of-sentence mark.
///
/// Serialized as the bare token id array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<TokenId>", into = "Vec<TokenId>")]
pub struct PhonemeSequence {
    tokens: Vec<TokenId>,
}

/// Half-open range of phoneme positions belonging to one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordSpan {
    pub start: usize,
    pub end: usize,
}

impl WordSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, position: usize) -> bool {
        (self.start..self.end).contains(&position)
    }
}

impl PhonemeSequence {
    pub fn new(tokens: Vec<TokenId>) -> Result<Self, PhonemeError> {
        validate_tokens(&tokens)?;
        Ok(PhonemeSequence { tokens })
    }

    /// Builds a sequence from per-word phoneme ids.
    pub fn from_word_ids<W: AsRef<[TokenId]>>(words: &[W]) -> Result<Self, PhonemeError> {
        let mut tokens = Vec::new();
        for (i, word) in words.iter().enumerate() {
            if i > 0 {
                tokens.push(EOW);
            }
            tokens.extend_from_slice(word.as_ref());
        }
        tokens.push(EOS);
        Self::new(tokens)
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<TokenId> {
        self.tokens
    }

    /// Phoneme ids with the markers stripped.
    pub fn phonemes(&self) -> Vec<TokenId> {
        self.tokens.iter().copied().filter(|&t| usize::from(t) < PHONEME_COUNT).collect()
    }

    pub fn phoneme_count(&self) -> usize {
        self.tokens.iter().filter(|&&t| usize::from(t) < PHONEME_COUNT).count()
    }

    /// For each phoneme position, the index of its token in [`tokens`](Self::tokens).
    pub fn phoneme_token_indices(&self) -> Vec<usize> {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, &t)| usize::from(t) < PHONEME_COUNT)
            .map(|(i, _)| i)
            .collect()
    }

    /// Word spans over phoneme positions. They partition `0..phoneme_count()`.
    pub fn word_spans(&self) -> Vec<WordSpan> {
        let mut spans = Vec::new();
        let mut start = 0;
        let mut pos = 0;
        for &t in &self.tokens {
            if t == EOW || t == EOS {
                if pos > start {
                    spans.push(WordSpan { start, end: pos });
                }
                start = pos;
            } else {
                pos += 1;
            }
        }
        spans
    }

    pub fn word_count(&self) -> usize {
        self.word_spans().len()
    }

    /// Phoneme ids grouped by word.
    pub fn words(&self) -> Vec<Vec<TokenId>> {
        self.tokens[..self.tokens.len() - 1]
            .split(|&t| t == EOW)
            .filter(|w| !w.is_empty())
            .map(<[TokenId]>::to_vec)
            .collect()
    }

    /// Word index containing each phoneme position.
    pub fn word_of_position(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.phoneme_count());
        for (w, span) in self.word_spans().iter().enumerate() {
            out.extend(std::iter::repeat_n(w, span.len()));
        }
        out
    }
}

impl TryFrom<Vec<TokenId>> for PhonemeSequence {
    type Error = PhonemeError;

    fn try_from(tokens: Vec<TokenId>) -> Result<Self, Self::Error> {
        PhonemeSequence::new(tokens)
    }
}

impl From<PhonemeSequence> for Vec<TokenId> {
    fn from(seq: PhonemeSequence) -> Self {
        seq.tokens
    }
}

fn validate_tokens(tokens: &[TokenId]) -> Result<(), PhonemeError> {
    let bad = |reason: &str| Err(PhonemeError::InvalidSequence(reason.to_string()));
    match tokens.last() {
        Some(&EOS) => {}
        _ => return bad("sequence must end with EOS"),
    }
    let body = &tokens[..tokens.len() - 1];
    let mut prev_boundary = true;
    for &t in body {
        match t {
            EOS => return bad("EOS must appear exactly once, last"),
            PAD => return bad("PAD is not allowed inside a sequence"),
            EOW => {
                if prev_boundary {
                    return bad("empty word");
                }
                prev_boundary = true;
            }
            t if usize::from(t) < TOKEN_COUNT => prev_boundary = false,
            _ => return bad("token id out of range"),
        }
    }
    if !body.is_empty() && prev_boundary {
        return bad("empty word before EOS");
    }
    Ok(())
}

/// Encodes words given as IPA strings.
pub fn encode<W, S>(inventory: &PhonemeInventory, words: &[W]) -> Result<PhonemeSequence, PhonemeError>
where
    W: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut ids = Vec::with_capacity(words.len());
    for word in words {
        let word = word.as_ref();
        if word.is_empty() {
            return Err(PhonemeError::InvalidSequence("empty word".into()));
        }
        let mut out = Vec::with_capacity(word.len());
        for ipa in word {
            let ipa = ipa.as_ref();
            let id = inventory
                .id_of(ipa)
                .ok_or_else(|| PhonemeError::UnknownPhoneme(ipa.to_string()))?;
            out.push(id);
        }
        ids.push(out);
    }
    PhonemeSequence::from_word_ids(&ids)
}

pub fn decode(inventory: &PhonemeInventory, seq: &PhonemeSequence) -> Vec<Vec<String>> {
    seq.words()
        .into_iter()
        .map(|w| w.into_iter().map(|id| inventory.phoneme(id).ipa.clone()).collect())
        .collect()
}

/// Parses a flat IPA token list where `|` separates words.
pub fn encode_flat<S: AsRef<str>>(
    inventory: &PhonemeInventory,
    symbols: &[S],
) -> Result<PhonemeSequence, PhonemeError> {
    let mut words: Vec<Vec<&str>> = vec![Vec::new()];
    for s in symbols {
        let s = s.as_ref().trim();
        if s == "|" {
            if words.last().is_some_and(|w| !w.is_empty()) {
                words.push(Vec::new());
            }
        } else if !s.is_empty() {
            words.last_mut().expect("non-empty").push(s);
        }
    }
    words.retain(|w| !w.is_empty());
    encode(inventory, &words)
}

/// Renders as `k ə m ə l | ...`.
pub fn format_ipa(inventory: &PhonemeInventory, seq: &PhonemeSequence) -> String {
    decode(inventory, seq)
        .iter()
        .map(|w| w.join(" "))
        .collect::<Vec<_>>()
        .join(" | ")
}
