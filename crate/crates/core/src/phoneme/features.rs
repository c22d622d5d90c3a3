use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! feature_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!(
                        "unknown {} value {:?}",
                        stringify!($name).to_lowercase(),
                        other
                    )),
                }
            }
        }
    };
}

feature_enum!(
    /// Broad phoneme class.
    Category {
        Vowel => "vowel",
        Diphthong => "diphthong",
        Consonant => "consonant",
    }
);

feature_enum!(
    /// Place of articulation. Vowels always carry `None`.
    Place {
        Labial => "labial",
        Labiodental => "labiodental",
        Dental => "dental",
        Alveolar => "alveolar",
        Retroflex => "retroflex",
        Palatal => "palatal",
        Velar => "velar",
        Uvular => "uvular",
        Glottal => "glottal",
        None => "none",
    }
);

feature_enum!(
    /// Manner of articulation.
    Manner {
        Plosive => "plosive",
        Affricate => "affricate",
        Fricative => "fricative",
        Nasal => "nasal",
        Approximant => "approximant",
        Flap => "flap",
        Vowel => "vowel",
    }
);

feature_enum!(
    Length {
        Short => "short",
        Long => "long",
        None => "none",
    }
);

feature_enum!(
    /// Tongue height for vowels; `None` for consonants.
    Height {
        High => "high",
        Mid => "mid",
        Low => "low",
        None => "none",
    }
);

feature_enum!(
    /// Tongue backness for vowels; `None` for consonants.
    Backness {
        Front => "front",
        Central => "central",
        Back => "back",
        None => "none",
    }
);

/// Articulatory feature bundle of a single phoneme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhonemeFeatures {
    pub category: Category,
    pub place: Place,
    pub manner: Manner,
    pub voiced: bool,
    pub aspirated: bool,
    pub length: Length,
    pub nasalized: bool,
    pub rounded: bool,
    pub height: Height,
    pub backness: Backness,
}

impl PhonemeFeatures {
    pub fn is_vocalic(&self) -> bool {
        matches!(self.category, Category::Vowel | Category::Diphthong)
    }

    pub fn is_consonant(&self) -> bool {
        self.category == Category::Consonant
    }

    /// Checks the structural invariants of a feature bundle.
    pub fn validate(&self) -> Result<(), String> {
        if self.is_vocalic() {
            if self.place != Place::None || self.manner != Manner::Vowel || self.aspirated {
                return Err("vowels must have place=none, manner=vowel, aspirated=false".into());
            }
            if self.height == Height::None || self.backness == Backness::None {
                return Err("vowels must carry height and backness".into());
            }
        } else {
            if self.manner == Manner::Vowel || self.place == Place::None {
                return Err("consonants need a place and a non-vowel manner".into());
            }
            if self.height != Height::None || self.backness != Backness::None {
                return Err("consonants must have height=none and backness=none".into());
            }
        }
        if self.aspirated
            && !matches!(self.manner, Manner::Plosive | Manner::Affricate | Manner::Flap)
        {
            return Err("aspiration is only allowed on plosives, affricates and flaps".into());
        }
        Ok(())
    }

    /// The features on which `self` and `other` disagree, in declaration order.
    pub fn diff(&self, other: &PhonemeFeatures) -> Vec<FeatureKind> {
        FeatureKind::ALL
            .iter()
            .copied()
            .filter(|kind| kind.value_of(self) != kind.value_of(other))
            .collect()
    }
}

/// Names one field of [`PhonemeFeatures`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Category,
    Place,
    Manner,
    Voiced,
    Aspirated,
    Length,
    Nasalized,
    Rounded,
    Height,
    Backness,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 10] = [
        FeatureKind::Category,
        FeatureKind::Place,
        FeatureKind::Manner,
        FeatureKind::Voiced,
        FeatureKind::Aspirated,
        FeatureKind::Length,
        FeatureKind::Nasalized,
        FeatureKind::Rounded,
        FeatureKind::Height,
        FeatureKind::Backness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Category => "category",
            FeatureKind::Place => "place",
            FeatureKind::Manner => "manner",
            FeatureKind::Voiced => "voiced",
            FeatureKind::Aspirated => "aspirated",
            FeatureKind::Length => "length",
            FeatureKind::Nasalized => "nasalized",
            FeatureKind::Rounded => "rounded",
            FeatureKind::Height => "height",
            FeatureKind::Backness => "backness",
        }
    }

    /// Human-readable value of this feature in `features`.
    pub fn value_of(self, features: &PhonemeFeatures) -> String {
        match self {
            FeatureKind::Category => features.category.to_string(),
            FeatureKind::Place => features.place.to_string(),
            FeatureKind::Manner => features.manner.to_string(),
            FeatureKind::Voiced => features.voiced.to_string(),
            FeatureKind::Aspirated => features.aspirated.to_string(),
            FeatureKind::Length => features.length.to_string(),
            FeatureKind::Nasalized => features.nasalized.to_string(),
            FeatureKind::Rounded => features.rounded.to_string(),
            FeatureKind::Height => features.height.to_string(),
            FeatureKind::Backness => features.backness.to_string(),
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-feature weights for the weighted Hamming distance between phonemes.
///
/// Weights must be non-negative and sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights {
    pub category: f64,
    pub place: f64,
    pub manner: f64,
    pub voiced: f64,
    pub aspirated: f64,
    pub length: f64,
    pub nasalized: f64,
    pub rounded: f64,
    pub height: f64,
    pub backness: f64,
}

impl Default for FeatureWeights {
    fn default() -> Self {
        FeatureWeights {
            category: 0.30,
            place: 0.25,
            manner: 0.20,
            voiced: 0.10,
            aspirated: 0.10,
            length: 0.01,
            nasalized: 0.01,
            rounded: 0.01,
            height: 0.01,
            backness: 0.01,
        }
    }
}

impl FeatureWeights {
    pub fn weight(&self, kind: FeatureKind) -> f64 {
        match kind {
            FeatureKind::Category => self.category,
            FeatureKind::Place => self.place,
            FeatureKind::Manner => self.manner,
            FeatureKind::Voiced => self.voiced,
            FeatureKind::Aspirated => self.aspirated,
            FeatureKind::Length => self.length,
            FeatureKind::Nasalized => self.nasalized,
            FeatureKind::Rounded => self.rounded,
            FeatureKind::Height => self.height,
            FeatureKind::Backness => self.backness,
        }
    }

    pub fn total(&self) -> f64 {
        FeatureKind::ALL.iter().map(|&k| self.weight(k)).sum()
    }

    pub fn validate(&self) -> Result<(), String> {
        if FeatureKind::ALL.iter().any(|&k| !(self.weight(k) >= 0.0)) {
            return Err("feature weights must be non-negative".into());
        }
        if (self.total() - 1.0).abs() > 1e-9 {
            return Err(format!("feature weights must sum to 1, got {}", self.total()));
        }
        Ok(())
    }
}

/// Weighted Hamming distance between two feature bundles, in `[0, 1]`.
pub fn weighted_feature_distance(
    a: &PhonemeFeatures,
    b: &PhonemeFeatures,
    weights: &FeatureWeights,
) -> f64 {
    let d: f64 = a.diff(b).into_iter().map(|k| weights.weight(k)).sum();
    d.clamp(0.0, 1.0)
}
