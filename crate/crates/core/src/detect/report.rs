use serde::{Deserialize, Serialize};

use crate::phoneme::{FeatureWeights, PhonemeInventory, PhonemeSequence, TokenId};

use super::align::{align, AlignKind, Alignment, AlignmentOp, INDEL_COST};
use super::recognizer::RecognizerOutput;
use super::DetectError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeverityBin {
    None,
    Minor,
    Moderate,
    Severe,
}

/// Lower edges of the moderate and severe bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityBins {
    pub moderate: f64,
    pub severe: f64,
}

impl Default for SeverityBins {
    fn default() -> Self {
        SeverityBins { moderate: 0.4, severe: 0.75 }
    }
}

impl SeverityBins {
    /// Bin of a mispronounced word; clean words are always `None`, even a
    /// flagged word with severity 0 is `Minor`.
    pub fn bin(&self, severity: f64, mispronounced: bool) -> SeverityBin {
        if !mispronounced {
            SeverityBin::None
        } else if severity >= self.severe {
            SeverityBin::Severe
        } else if severity >= self.moderate {
            SeverityBin::Moderate
        } else {
            SeverityBin::Minor
        }
    }

    pub fn validate(&self) -> Result<(), DetectError> {
        if 0.0 < self.moderate && self.moderate < self.severe && self.severe <= 1.0 {
            Ok(())
        } else {
            Err(DetectError::InconsistentInput(format!("bad severity bins {self:?}")))
        }
    }
}

/// Expected/produced phonemes of one offending op, for feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhonemePair {
    pub expected: Option<TokenId>,
    pub produced: Option<TokenId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordErrorReport {
    pub word_index: usize,
    pub mispronounced: bool,
    pub severity: f64,
    pub severity_bin: SeverityBin,
    pub offending_ops: Vec<AlignmentOp>,
    /// Parallel to `offending_ops`.
    pub pairs: Vec<PhonemePair>,
}

fn check_alignment(alignment: &Alignment, n: usize, m: usize) -> Result<(), DetectError> {
    let bad = |m: &str| Err(DetectError::InconsistentInput(m.to_string()));
    let (mut next_c, mut next_p) = (0, 0);
    for op in &alignment.ops {
        let want = match op.kind {
            AlignKind::Match | AlignKind::Substitution => (true, true),
            AlignKind::Deletion => (true, false),
            AlignKind::Insertion => (false, true),
        };
        if (op.canonical_index.is_some(), op.predicted_index.is_some()) != want {
            return bad("op indices do not match its kind");
        }
        if let Some(c) = op.canonical_index {
            if c != next_c {
                return bad("canonical indices must cover the sequence in order");
            }
            next_c += 1;
        }
        if let Some(p) = op.predicted_index {
            if p != next_p {
                return bad("predicted indices must cover the sequence in order");
            }
            next_p += 1;
        }
    }
    if next_c != n || next_p != m {
        return bad("alignment length differs from the sequences");
    }
    Ok(())
}

/// Word-level reports for an alignment of `canonical` against `predicted`
/// phonemes (markers stripped).
///
/// A word is mispronounced iff a non-match op touches it. Insertions go to
/// the word of the nearest canonical op in alignment order, ties to the left.
/// Severity per op: with recognizer output, `1 - P(canonical)` for
/// substitutions and `P(inserted)` for insertions; otherwise, and for
/// deletions, the op cost over the indel cost. A word takes the max.
pub fn detect_word_errors(
    alignment: &Alignment,
    canonical: &PhonemeSequence,
    predicted: &[TokenId],
    rec: Option<&RecognizerOutput>,
    bins: &SeverityBins,
) -> Result<Vec<WordErrorReport>, DetectError> {
    let can = canonical.phonemes();
    check_alignment(alignment, can.len(), predicted.len())?;
    if let Some(r) = rec {
        if r.predicted().phonemes() != predicted {
            return Err(DetectError::InconsistentInput("recognizer output differs from predicted phonemes".into()));
        }
    }
    let word_of = canonical.word_of_position();
    let mut words: Vec<WordErrorReport> = (0..canonical.word_count())
        .map(|i| WordErrorReport {
            word_index: i,
            mispronounced: false,
            severity: 0.0,
            severity_bin: SeverityBin::None,
            offending_ops: Vec::new(),
            pairs: Vec::new(),
        })
        .collect();

    let canonical_at: Vec<Option<usize>> = alignment.ops.iter().map(|o| o.canonical_index).collect();
    for (k, op) in alignment.ops.iter().enumerate() {
        let word = match op.kind {
            AlignKind::Match => continue,
            AlignKind::Substitution | AlignKind::Deletion => op.canonical_index.map(|c| word_of[c]),
            AlignKind::Insertion => {
                let left = canonical_at[..k].iter().enumerate().rev().find_map(|(i, c)| c.map(|c| (k - i, c)));
                let right = canonical_at[k + 1..].iter().enumerate().find_map(|(i, c)| c.map(|c| (i + 1, c)));
                match (left, right) {
                    (Some((dl, l)), Some((dr, r))) => Some(word_of[if dl <= dr { l } else { r }]),
                    (Some((_, c)), None) | (None, Some((_, c))) => Some(word_of[c]),
                    (None, None) => None,
                }
            }
        };
        let Some(word) = word else { continue };
        let expected = op.canonical_index.map(|c| can[c]);
        let produced = op.predicted_index.map(|p| predicted[p]);
        let row = rec.zip(op.predicted_index).and_then(|(r, p)| r.phoneme_row(p));
        let severity = match (op.kind, row) {
            (AlignKind::Substitution, Some(row)) => 1.0 - row[usize::from(expected.expect("substitution"))],
            (AlignKind::Insertion, Some(row)) => row[usize::from(produced.expect("insertion"))],
            _ => op.cost / INDEL_COST,
        }
        .clamp(0.0, 1.0);
        let w = &mut words[word];
        w.mispronounced = true;
        w.severity = w.severity.max(severity);
        w.offending_ops.push(*op);
        w.pairs.push(PhonemePair { expected, produced });
    }
    for w in &mut words {
        w.severity_bin = bins.bin(w.severity, w.mispronounced);
    }
    Ok(words)
}

/// Alignment plus word reports for one attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub predicted: PhonemeSequence,
    pub alignment: Alignment,
    pub words: Vec<WordErrorReport>,
}

impl DetectionReport {
    pub fn word_flags(&self) -> Vec<bool> {
        self.words.iter().map(|w| w.mispronounced).collect()
    }
}

/// Aligns `predicted` to `canonical` and reports per word. `rec`, when
/// given, must be the output that produced `predicted`.
pub fn analyze_pronunciation(
    inventory: &PhonemeInventory,
    canonical: &PhonemeSequence,
    predicted: &PhonemeSequence,
    rec: Option<&RecognizerOutput>,
    weights: &FeatureWeights,
    bins: &SeverityBins,
) -> Result<DetectionReport, DetectError> {
    let pred = predicted.phonemes();
    let alignment = align(inventory, &canonical.phonemes(), &pred, weights);
    let words = detect_word_errors(&alignment, canonical, &pred, rec, bins)?;
    Ok(DetectionReport { predicted: predicted.clone(), alignment, words })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{apply_ops, ErrorOp};
    use crate::detect::mock_recognize;
    use crate::phoneme::encode;

    fn inv() -> &'static PhonemeInventory {
        PhonemeInventory::builtin()
    }

    fn three_words() -> PhonemeSequence {
        encode(inv(), &[vec!["k", "ə", "m", "ə", "l"], vec!["gʱ", "ə", "r"], vec!["p", "aː"]]).unwrap()
    }

    fn run(c: &PhonemeSequence, p: &PhonemeSequence, rec: Option<&RecognizerOutput>) -> DetectionReport {
        analyze_pronunciation(inv(), c, p, rec, &FeatureWeights::default(), &SeverityBins::default()).unwrap()
    }

    #[test]
    fn bins() {
        let b = SeverityBins::default();
        assert_eq!(b.bin(0.0, false), SeverityBin::None);
        assert_eq!(b.bin(0.0, true), SeverityBin::Minor);
        assert_eq!(b.bin(0.399, true), SeverityBin::Minor);
        assert_eq!(b.bin(0.4, true), SeverityBin::Moderate);
        assert_eq!(b.bin(0.75, true), SeverityBin::Severe);
        assert!(SeverityBins { moderate: 0.8, severe: 0.5 }.validate().is_err());
    }

    #[test]
    fn deletion_in_middle_word_flags_only_it() {
        let c = three_words();
        let p = apply_ops(&c, &[ErrorOp::deletion(6)]).unwrap();
        let rep = run(&c, &p, None);
        assert_eq!(rep.word_flags(), vec![false, true, false]);
        assert_eq!(rep.words[1].severity, 1.0);
        assert_eq!(rep.words[1].severity_bin, SeverityBin::Severe);
        assert_eq!(rep.words[1].pairs, vec![PhonemePair { expected: Some(c.phonemes()[6]), produced: None }]);
    }

    #[test]
    fn clean_attempt() {
        let c = three_words();
        let rep = run(&c, &c, None);
        assert!(rep.words.iter().all(|w| !w.mispronounced && w.severity == 0.0 && w.severity_bin == SeverityBin::None));
        assert_eq!(rep.words.len(), 3);
    }

    #[test]
    fn substitution_severity_from_posterior() {
        let c = encode(inv(), &[vec!["t̪", "aː"]]).unwrap();
        let p = encode(inv(), &[vec!["ʈ", "aː"]]).unwrap();
        let al = align(inv(), &c.phonemes(), &p.phonemes(), &FeatureWeights::default());
        let mut rows = vec![vec![0.0; 67]; 3];
        rows[0][usize::from(p.tokens()[0])] = 0.9;
        rows[0][usize::from(c.tokens()[0])] = 0.1;
        rows[1][usize::from(p.tokens()[1])] = 1.0;
        rows[2][65] = 1.0;
        let rec = RecognizerOutput::new(p.clone(), rows).unwrap();
        let words = detect_word_errors(&al, &c, &p.phonemes(), Some(&rec), &SeverityBins::default()).unwrap();
        assert!((words[0].severity - 0.9).abs() < 1e-12);
        assert_eq!(words[0].severity_bin, SeverityBin::Severe);
        // without posteriors the normalized cost is used: 0.5 + 0.5 * place weight
        let words = detect_word_errors(&al, &c, &p.phonemes(), None, &SeverityBins::default()).unwrap();
        assert!((words[0].severity - 0.625).abs() < 1e-12);
    }

    #[test]
    fn insertion_between_words_goes_left() {
        let c = three_words();
        let s = inv().id_of("s").unwrap();
        let p = apply_ops(&c, &[ErrorOp::addition(4, s), ErrorOp::deletion(7)]).unwrap();
        let out = mock_recognize(&p, 1.0, 3).unwrap();
        let rep = run(&c, out.predicted(), Some(&out));
        assert_eq!(rep.word_flags(), vec![true, true, false]);
        assert_eq!(rep.words[0].offending_ops[0].kind, AlignKind::Insertion);
        assert!((0.75..=0.99).contains(&rep.words[0].severity));
    }

    #[test]
    fn inconsistent_alignment_rejected() {
        let c = three_words();
        let al = align(inv(), &c.phonemes(), &c.phonemes(), &FeatureWeights::default());
        let short = &c.phonemes()[1..];
        assert!(matches!(
            detect_word_errors(&al, &c, short, None, &SeverityBins::default()),
            Err(DetectError::InconsistentInput(_))
        ));
    }
}
