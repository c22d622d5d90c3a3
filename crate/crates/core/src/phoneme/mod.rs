//! Hindi phoneme inventory, the 67-token encoding space and articulatory
//! features.

mod features;
mod inventory;
mod sequence;

use thiserror::Error;

pub use features::{
    weighted_feature_distance, Backness, Category, FeatureKind, FeatureWeights, Height, Length,
    Manner, PhonemeFeatures, Place,
};
pub use inventory::{
    feature_distance, load_inventory, InventorySource, Phoneme, PhonemeInventory, SpecialTokens,
    TokenId, EOS, EOW, PAD, PHONEME_COUNT, TOKEN_COUNT,
};
pub use sequence::{decode, encode, encode_flat, format_ipa, PhonemeSequence, WordSpan};

#[derive(Debug, Error)]
pub enum PhonemeError {
    #[error("duplicate token: {0}")]
    DuplicateToken(String),
    #[error("inventory must contain exactly 64 phonemes, found {0}")]
    InventorySize(usize),
    #[error("malformed inventory entry at line {line}: {reason}")]
    MalformedEntry { line: usize, reason: String },
    #[error("unknown phoneme {0:?}")]
    UnknownPhoneme(String),
    #[error("invalid phoneme sequence: {0}")]
    InvalidSequence(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
