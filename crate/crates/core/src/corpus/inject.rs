use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::phoneme::{FeatureWeights, PhonemeInventory, PhonemeSequence, TokenId, PHONEME_COUNT};

use super::{rng::substream, CorpusError};

/// Largest feature distance at which two phonemes count as confusable.
pub const CONFUSABLE_DISTANCE: f64 = 0.35;
pub const MAX_ERROR_PROBABILITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Addition,
    Deletion,
    Substitution,
}

/// One injected phoneme error, indexed by canonical phoneme position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorOp {
    pub kind: ErrorKind,
    /// Position acted on; for additions, the position after which the new
    /// phoneme is inserted (`-1` inserts before the first phoneme).
    pub canonical_index: i64,
    pub inserted_or_replacement: Option<TokenId>,
}

impl ErrorOp {
    pub fn deletion(index: usize) -> Self {
        ErrorOp { kind: ErrorKind::Deletion, canonical_index: index as i64, inserted_or_replacement: None }
    }

    pub fn substitution(index: usize, replacement: TokenId) -> Self {
        ErrorOp {
            kind: ErrorKind::Substitution,
            canonical_index: index as i64,
            inserted_or_replacement: Some(replacement),
        }
    }

    pub fn addition(after: i64, inserted: TokenId) -> Self {
        ErrorOp { kind: ErrorKind::Addition, canonical_index: after, inserted_or_replacement: Some(inserted) }
    }

    /// Error-vector position this op marks. Prefix additions mark position 0.
    pub fn marked_position(&self) -> usize {
        self.canonical_index.max(0) as usize
    }
}

/// Per-canonical-phoneme binary error marks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorVector {
    pub bits: Vec<u8>,
}

impl ErrorVector {
    pub fn from_ops(len: usize, ops: &[ErrorOp]) -> Self {
        let mut bits = vec![0u8; len];
        for op in ops {
            if let Some(b) = bits.get_mut(op.marked_position()) {
                *b = 1;
            }
        }
        ErrorVector { bits }
    }

    pub fn is_set(&self, position: usize) -> bool {
        self.bits.get(position).is_some_and(|&b| b != 0)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfusionPolicy {
    /// Replacement and inserted phonemes come from the feature neighborhood
    /// (distance <= 0.35) of a phoneme in the word, falling back to uniform.
    #[default]
    Confusable,
    /// Any other phoneme, uniformly.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    pub corrupted: PhonemeSequence,
    pub ops: Vec<ErrorOp>,
    pub error_vector: ErrorVector,
}

/// Precomputed confusion neighborhoods.
#[derive(Debug, Clone)]
pub struct ConfusionTable {
    neighbors: Vec<Vec<TokenId>>,
}

impl ConfusionTable {
    pub fn new(inventory: &PhonemeInventory, weights: &FeatureWeights) -> Self {
        let neighbors = (0..PHONEME_COUNT as TokenId)
            .map(|a| {
                (0..PHONEME_COUNT as TokenId)
                    .filter(|&b| b != a && inventory.distance(a, b, weights) <= CONFUSABLE_DISTANCE)
                    .collect()
            })
            .collect();
        ConfusionTable { neighbors }
    }

    pub fn builtin() -> &'static ConfusionTable {
        static TABLE: std::sync::OnceLock<ConfusionTable> = std::sync::OnceLock::new();
        TABLE.get_or_init(|| ConfusionTable::new(PhonemeInventory::builtin(), &FeatureWeights::default()))
    }

    pub fn neighbors(&self, id: TokenId) -> &[TokenId] {
        &self.neighbors[usize::from(id)]
    }

    /// Candidates for replacing/inserting near `source`, excluding `excluded`.
    fn candidates(&self, source: TokenId, policy: ConfusionPolicy, excluded: &[TokenId]) -> Vec<TokenId> {
        let pick = |ids: &mut dyn Iterator<Item = TokenId>| -> Vec<TokenId> {
            ids.filter(|id| !excluded.contains(id)).collect()
        };
        let mut out = match policy {
            ConfusionPolicy::Confusable => pick(&mut self.neighbors(source).iter().copied()),
            ConfusionPolicy::Uniform => Vec::new(),
        };
        if out.is_empty() {
            out = pick(&mut (0..PHONEME_COUNT as TokenId));
        }
        out
    }
}

/// Injects errors with a generator derived from `seed`.
pub fn inject_errors(
    canonical: &PhonemeSequence,
    p: f64,
    seed: u64,
    inventory: &PhonemeInventory,
    policy: ConfusionPolicy,
) -> Result<Injection, CorpusError> {
    let custom;
    let table = if std::ptr::eq(inventory, PhonemeInventory::builtin()) {
        ConfusionTable::builtin()
    } else {
        custom = ConfusionTable::new(inventory, &FeatureWeights::default());
        &custom
    };
    inject_errors_with(canonical, p, &mut substream(seed, &[]), table, policy)
}

/// Visits every canonical phoneme once; with probability `p` it receives one
/// error whose kind is uniform over the kinds eligible at that position.
///
/// Eligibility keeps every edit recoverable by alignment:
/// - a deletion never empties a word and never removes a phoneme equal to
///   one of its neighbors (which one was deleted would be ambiguous);
/// - an addition never inserts a copy of the phonemes on either side.
///
/// Marker tokens are never touched.
pub fn inject_errors_with<R: Rng + ?Sized>(
    canonical: &PhonemeSequence,
    p: f64,
    rng: &mut R,
    table: &ConfusionTable,
    policy: ConfusionPolicy,
) -> Result<Injection, CorpusError> {
    if !(0.0..=MAX_ERROR_PROBABILITY).contains(&p) {
        return Err(CorpusError::InvalidProbability(p));
    }
    let phonemes = canonical.phonemes();
    if phonemes.is_empty() {
        return Err(CorpusError::EmptyCanonical);
    }
    let spans = canonical.word_spans();
    let word_of = canonical.word_of_position();

    let mut remaining: Vec<usize> = spans.iter().map(|s| s.len()).collect();
    let mut ops = Vec::new();
    for (i, &ph) in phonemes.iter().enumerate() {
        if !rng.random_bool(p) {
            continue;
        }
        let span = spans[word_of[i]];
        let prev = i.checked_sub(1).map(|j| phonemes[j]);
        let next = phonemes.get(i + 1).copied();
        let deletable = remaining[word_of[i]] > 1 && prev != Some(ph) && next != Some(ph);
        let kinds: &[ErrorKind] = if deletable {
            &[ErrorKind::Addition, ErrorKind::Deletion, ErrorKind::Substitution]
        } else {
            &[ErrorKind::Addition, ErrorKind::Substitution]
        };
        let op = match *kinds.choose(rng).expect("non-empty") {
            ErrorKind::Deletion => {
                remaining[word_of[i]] -= 1;
                ErrorOp::deletion(i)
            }
            ErrorKind::Substitution => {
                let pool = table.candidates(ph, policy, &[ph]);
                ErrorOp::substitution(i, *pool.choose(rng).expect("non-empty pool"))
            }
            ErrorKind::Addition => {
                let source = phonemes[span.start + rng.random_range(0..span.len())];
                let mut excluded = vec![ph];
                excluded.extend(next);
                let pool = table.candidates(source, policy, &excluded);
                ErrorOp::addition(i as i64, *pool.choose(rng).expect("non-empty pool"))
            }
        };
        ops.push(op);
    }
    let corrupted = apply_ops(canonical, &ops)?;
    let error_vector = ErrorVector::from_ops(phonemes.len(), &ops);
    Ok(Injection { corrupted, ops, error_vector })
}

/// Replays error ops on a canonical sequence. At most one op per position.
///
/// Insertions stay in the word of their anchor; a word emptied by deletions
/// disappears.
pub fn apply_ops(canonical: &PhonemeSequence, ops: &[ErrorOp]) -> Result<PhonemeSequence, CorpusError> {
    let phonemes = canonical.phonemes();
    let n = phonemes.len() as i64;
    let mut at: Vec<Option<&ErrorOp>> = vec![None; phonemes.len()];
    let mut prefix: Option<TokenId> = None;
    for op in ops {
        let bad = |m: &str| CorpusError::InvalidOps(format!("{m}: {op:?}"));
        let idx = op.canonical_index;
        match op.kind {
            ErrorKind::Addition if idx == -1 => {
                if prefix.is_some() {
                    return Err(bad("two prefix additions"));
                }
                prefix = Some(op.inserted_or_replacement.ok_or_else(|| bad("addition without phoneme"))?);
                continue;
            }
            _ if idx < 0 || idx >= n => return Err(bad("index out of range")),
            ErrorKind::Substitution => {
                let r = op.inserted_or_replacement.ok_or_else(|| bad("substitution without phoneme"))?;
                if r == phonemes[idx as usize] {
                    return Err(bad("substitution replaces a phoneme with itself"));
                }
            }
            ErrorKind::Addition => {
                op.inserted_or_replacement.ok_or_else(|| bad("addition without phoneme"))?;
            }
            ErrorKind::Deletion => {}
        }
        if usize::from(op.inserted_or_replacement.unwrap_or(0)) >= PHONEME_COUNT {
            return Err(bad("phoneme id out of range"));
        }
        let slot = &mut at[idx as usize];
        if slot.is_some() {
            return Err(bad("more than one op at a position"));
        }
        *slot = Some(op);
    }

    let mut words: Vec<Vec<TokenId>> = Vec::new();
    for (w, span) in canonical.word_spans().iter().enumerate() {
        let mut word = Vec::with_capacity(span.len() + 1);
        if w == 0 {
            word.extend(prefix);
        }
        for i in span.start..span.end {
            match at[i] {
                None => word.push(phonemes[i]),
                Some(op) => match op.kind {
                    ErrorKind::Deletion => {}
                    ErrorKind::Substitution => word.extend(op.inserted_or_replacement),
                    ErrorKind::Addition => {
                        word.push(phonemes[i]);
                        word.extend(op.inserted_or_replacement);
                    }
                },
            }
        }
        if !word.is_empty() {
            words.push(word);
        }
    }
    Ok(PhonemeSequence::from_word_ids(&words)?)
}

/// True when no two ops mark positions within 2 of each other.
pub fn is_sparse(ops: &[ErrorOp]) -> bool {
    let mut marks: Vec<usize> = ops.iter().map(ErrorOp::marked_position).collect();
    marks.sort_unstable();
    marks.windows(2).all(|w| w[1] - w[0] > 2)
}

/// Ground-truth word flags: a word is mispronounced iff any bit in its span is set.
pub fn word_flags_from_vector(canonical: &PhonemeSequence, ev: &ErrorVector) -> Vec<bool> {
    canonical
        .word_spans()
        .iter()
        .map(|span| (span.start..span.end).any(|i| ev.is_set(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phoneme::encode;

    fn seq(words: &[&[&str]]) -> PhonemeSequence {
        encode(PhonemeInventory::builtin(), words).unwrap()
    }

    fn ten() -> PhonemeSequence {
        seq(&[&["k", "ə", "m", "ə", "l"], &["gʱ", "ə", "r"], &["p", "aː"]])
    }

    #[test]
    fn zero_probability_is_identity() {
        let c = ten();
        let inj = inject_errors(&c, 0.0, 1, PhonemeInventory::builtin(), ConfusionPolicy::Confusable).unwrap();
        assert_eq!(inj.corrupted, c);
        assert!(inj.ops.is_empty());
        assert_eq!(inj.error_vector.bits, vec![0; 10]);
    }

    #[test]
    fn probability_range_checked() {
        let inv = PhonemeInventory::builtin();
        for p in [-0.1, 0.51, 0.9, f64::NAN] {
            assert!(matches!(
                inject_errors(&ten(), p, 1, inv, ConfusionPolicy::Confusable),
                Err(CorpusError::InvalidProbability(_))
            ));
        }
    }

    #[test]
    fn replay_and_vector_are_consistent() {
        let inv = PhonemeInventory::builtin();
        let c = ten();
        for seed in 0..300 {
            let inj = inject_errors(&c, 0.5, seed, inv, ConfusionPolicy::Confusable).unwrap();
            assert_eq!(apply_ops(&c, &inj.ops).unwrap(), inj.corrupted);
            assert_eq!(inj.error_vector.bits.len(), c.phoneme_count());
            for i in 0..c.phoneme_count() {
                let touched = inj.ops.iter().any(|op| op.marked_position() == i);
                assert_eq!(inj.error_vector.is_set(i), touched);
            }
            assert_eq!(inj.corrupted.tokens().last(), Some(&crate::phoneme::EOS));
            assert_eq!(inj.corrupted.word_count(), c.word_count());
        }
    }

    #[test]
    fn confusable_substitutions_stay_close() {
        let inv = PhonemeInventory::builtin();
        let w = FeatureWeights::default();
        let c = ten();
        let phon = c.phonemes();
        for seed in 0..200 {
            let inj = inject_errors(&c, 0.5, seed, inv, ConfusionPolicy::Confusable).unwrap();
            for op in inj.ops.iter().filter(|o| o.kind == ErrorKind::Substitution) {
                let orig = phon[op.canonical_index as usize];
                let rep = op.inserted_or_replacement.unwrap();
                assert!(inv.distance(orig, rep, &w) <= CONFUSABLE_DISTANCE);
            }
        }
    }

    #[test]
    fn single_phoneme_words_never_deleted() {
        let inv = PhonemeInventory::builtin();
        let c = seq(&[&["ə"], &["k", "ə"], &["ə"]]);
        for seed in 0..500 {
            let inj = inject_errors(&c, 0.5, seed, inv, ConfusionPolicy::Uniform).unwrap();
            for op in &inj.ops {
                if op.kind == ErrorKind::Deletion {
                    assert_eq!(op.canonical_index, 1);
                }
            }
        }
    }

    #[test]
    fn apply_ops_validates() {
        let c = ten();
        assert!(apply_ops(&c, &[ErrorOp::deletion(10)]).is_err());
        assert!(apply_ops(&c, &[ErrorOp::substitution(0, 22)]).is_err());
        assert!(apply_ops(&c, &[ErrorOp::deletion(1), ErrorOp::addition(1, 3)]).is_err());
        let pre = apply_ops(&c, &[ErrorOp::addition(-1, 1)]).unwrap();
        assert_eq!(pre.phonemes()[0], 1);
    }

    #[test]
    fn sparsity() {
        assert!(is_sparse(&[ErrorOp::deletion(0), ErrorOp::deletion(3)]));
        assert!(!is_sparse(&[ErrorOp::deletion(0), ErrorOp::addition(2, 4)]));
        assert!(is_sparse(&[]));
    }

    #[test]
    fn injection_rate_concentrates() {
        let inv = PhonemeInventory::builtin();
        let table = ConfusionTable::new(inv, &FeatureWeights::default());
        let c = ten();
        let (mut marked, mut total) = (0usize, 0usize);
        for seed in 0..5000u64 {
            let inj = inject_errors_with(&c, 0.05, &mut substream(seed, &[9]), &table, ConfusionPolicy::Confusable)
                .unwrap();
            marked += inj.error_vector.count();
            total += c.phoneme_count();
        }
        let rate = marked as f64 / total as f64;
        let bound = 4.0 * (0.05f64 * 0.95 / total as f64).sqrt();
        assert!((rate - 0.05).abs() < bound, "rate {rate} bound {bound}");
    }
}
