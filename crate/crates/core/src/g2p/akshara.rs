use serde::{Deserialize, Serialize};

use super::G2pError;

pub(crate) const NUKTA: char = '\u{093C}';
pub(crate) const HALANT: char = '\u{094D}';
pub(crate) const ANUSVARA: char = '\u{0902}';
pub(crate) const CHANDRABINDU: char = '\u{0901}';
pub(crate) const VISARGA: char = '\u{0903}';

const PUNCTUATION: &[char] = &[
    '\u{0964}', '\u{0965}', '.', ',', '?', '!', ';', ':', '"', '\'', '-', '(', ')',
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AksharaKind {
    ConsonantCluster,
    IndependentVowel,
    Digit,
    Punctuation,
    Space,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsonantGrapheme {
    pub letter: char,
    pub nukta: bool,
}

impl ConsonantGrapheme {
    /// Decomposed grapheme string (base letter plus nukta when present).
    pub fn grapheme(&self) -> String {
        let mut s = String::from(self.letter);
        if self.nukta {
            s.push(NUKTA);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "char")]
pub enum VowelMark {
    /// Consonant cluster with no vowel sign: carries the inherent schwa.
    Inherent,
    /// Dependent vowel sign (matra).
    Matra(char),
    /// Independent vowel letter.
    Letter(char),
    /// No vowel: explicit halant, or a non-syllabic token.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modifier {
    None,
    Anusvara,
    Chandrabindu,
    Visarga,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AksharaToken {
    pub kind: AksharaKind,
    pub consonants: Vec<ConsonantGrapheme>,
    pub vowel: VowelMark,
    pub modifier: Modifier,
    /// Byte range `(start, end)` in the source text.
    pub source_span: (usize, usize),
}

impl AksharaToken {
    pub fn is_syllabic(&self) -> bool {
        matches!(self.kind, AksharaKind::ConsonantCluster | AksharaKind::IndependentVowel)
    }
}

fn is_consonant(c: char) -> bool {
    ('\u{0915}'..='\u{0939}').contains(&c) || ('\u{0958}'..='\u{095F}').contains(&c)
}

/// Splits a precomposed nukta letter into its base consonant.
fn decompose_consonant(c: char) -> ConsonantGrapheme {
    let base = match c {
        '\u{0958}' => '\u{0915}',
        '\u{0959}' => '\u{0916}',
        '\u{095A}' => '\u{0917}',
        '\u{095B}' => '\u{091C}',
        '\u{095C}' => '\u{0921}',
        '\u{095D}' => '\u{0922}',
        '\u{095E}' => '\u{092B}',
        '\u{095F}' => '\u{092F}',
        other => return ConsonantGrapheme { letter: other, nukta: false },
    };
    ConsonantGrapheme { letter: base, nukta: true }
}

fn is_independent_vowel(c: char) -> bool {
    ('\u{0904}'..='\u{0914}').contains(&c) || c == '\u{0960}' || c == '\u{0961}'
}

fn is_matra(c: char) -> bool {
    ('\u{093E}'..='\u{094C}').contains(&c)
        || c == '\u{093A}'
        || c == '\u{093B}'
        || c == '\u{094E}'
        || c == '\u{094F}'
        || c == '\u{0962}'
        || c == '\u{0963}'
}

fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || ('\u{0966}'..='\u{096F}').contains(&c)
}

fn modifier_of(c: char) -> Option<Modifier> {
    match c {
        ANUSVARA => Some(Modifier::Anusvara),
        CHANDRABINDU => Some(Modifier::Chandrabindu),
        VISARGA => Some(Modifier::Visarga),
        _ => None,
    }
}

/// Segments Devanagari text into akshara tokens.
///
/// Spans of the returned tokens tile the input exactly. A halant between two
/// consonants joins them into one cluster, and a nukta attaches to the
/// consonant before it.
pub fn tokenize_aksharas(text: &str) -> Result<Vec<AksharaToken>, G2pError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |&(o, _)| o);
    let unsupported = |i: usize| {
        let (offset, ch) = chars[i];
        G2pError::UnsupportedCharacter { ch, offset }
    };

    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() || is_digit(c) {
            let digit = is_digit(c);
            let mut j = i + 1;
            while j < chars.len()
                && (if digit { is_digit(chars[j].1) } else { chars[j].1.is_whitespace() })
            {
                j += 1;
            }
            tokens.push(AksharaToken {
                kind: if digit { AksharaKind::Digit } else { AksharaKind::Space },
                consonants: Vec::new(),
                vowel: VowelMark::None,
                modifier: Modifier::None,
                source_span: (start, end_of(j)),
            });
            i = j;
        } else if PUNCTUATION.contains(&c) {
            tokens.push(AksharaToken {
                kind: AksharaKind::Punctuation,
                consonants: Vec::new(),
                vowel: VowelMark::None,
                modifier: Modifier::None,
                source_span: (start, end_of(i + 1)),
            });
            i += 1;
        } else if is_consonant(c) {
            let mut consonants = vec![decompose_consonant(c)];
            let mut j = i + 1;
            let mut vowel = VowelMark::Inherent;
            loop {
                match chars.get(j).map(|&(_, c)| c) {
                    Some(NUKTA) => {
                        let last = consonants.last_mut().expect("cluster is non-empty");
                        if last.nukta {
                            return Err(unsupported(j));
                        }
                        last.nukta = true;
                        j += 1;
                    }
                    Some(HALANT) => {
                        match chars.get(j + 1).map(|&(_, c)| c) {
                            Some(next) if is_consonant(next) => {
                                consonants.push(decompose_consonant(next));
                                j += 2;
                            }
                            _ => {
                                vowel = VowelMark::None;
                                j += 1;
                                break;
                            }
                        }
                    }
                    Some(m) if is_matra(m) => {
                        vowel = VowelMark::Matra(m);
                        j += 1;
                        break;
                    }
                    _ => break,
                }
            }
            let mut modifier = Modifier::None;
            if let Some(m) = chars.get(j).and_then(|&(_, c)| modifier_of(c)) {
                modifier = m;
                j += 1;
            }
            tokens.push(AksharaToken {
                kind: AksharaKind::ConsonantCluster,
                consonants,
                vowel,
                modifier,
                source_span: (start, end_of(j)),
            });
            i = j;
        } else if is_independent_vowel(c) {
            let mut j = i + 1;
            let mut modifier = Modifier::None;
            if let Some(m) = chars.get(j).and_then(|&(_, c)| modifier_of(c)) {
                modifier = m;
                j += 1;
            }
            tokens.push(AksharaToken {
                kind: AksharaKind::IndependentVowel,
                consonants: Vec::new(),
                vowel: VowelMark::Letter(c),
                modifier,
                source_span: (start, end_of(j)),
            });
            i = j;
        } else {
            return Err(unsupported(i));
        }
    }
    Ok(tokens)
}
