use capt_core::detect::{align, AlignKind, INDEL_COST};
use capt_core::phoneme::{FeatureWeights, PhonemeInventory, TokenId, PHONEME_COUNT};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn inv() -> &'static PhonemeInventory {
    PhonemeInventory::builtin()
}

/// Minimum cost over every monotone alignment path, enumerated without
/// memoization. A path is abandoned only once its cost plus the indels it
/// still must pay (the length difference of what remains) cannot beat the
/// best complete path found so far.
fn brute_force(a: &[TokenId], b: &[TokenId], w: &FeatureWeights) -> f64 {
    fn go(a: &[TokenId], b: &[TokenId], w: &FeatureWeights, spent: f64, best: &mut f64) {
        if spent + a.len().abs_diff(b.len()) as f64 >= *best + 1e-12 {
            return;
        }
        match (a.split_first(), b.split_first()) {
            (None, _) | (_, None) => *best = best.min(spent + (a.len() + b.len()) as f64),
            (Some((&x, ra)), Some((&y, rb))) => {
                let sub = if x == y { 0.0 } else { 0.5 + 0.5 * inv().distance(x, y, w) };
                go(ra, rb, w, spent + sub, best);
                go(ra, b, w, spent + 1.0, best);
                go(a, rb, w, spent + 1.0, best);
            }
        }
    }
    let mut best = (a.len() + b.len()) as f64 + 1.0;
    go(a, b, w, 0.0, &mut best);
    best
}

fn random_seq(rng: &mut ChaCha8Rng, alphabet: &[TokenId]) -> Vec<TokenId> {
    let n = rng.random_range(0..=8);
    (0..n).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

#[test]
fn dp_cost_equals_enumeration_on_ten_thousand_pairs() {
    let w = FeatureWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let all: Vec<TokenId> = (0..PHONEME_COUNT as TokenId).collect();
    // A small alphabet of near neighbours forces many ties and matches.
    let small: Vec<TokenId> = ["t̪", "ʈ", "d̪", "ɖ", "ə", "aː"].iter().map(|s| inv().id_of(s).unwrap()).collect();
    let mut mismatches = 0;
    for k in 0..10_000 {
        let alphabet = if k % 2 == 0 { &all } else { &small };
        let a = random_seq(&mut rng, alphabet);
        let b = random_seq(&mut rng, alphabet);
        let got = align(inv(), &a, &b, &w).total_cost;
        if (got - brute_force(&a, &b, &w)).abs() > 1e-9 {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}

proptest! {
    #[test]
    fn columns_cover_both_sides_in_order(
        a in prop::collection::vec(0..PHONEME_COUNT as TokenId, 0..12),
        b in prop::collection::vec(0..PHONEME_COUNT as TokenId, 0..12),
    ) {
        let al = align(inv(), &a, &b, &FeatureWeights::default());
        let ci: Vec<usize> = al.ops.iter().filter_map(|o| o.canonical_index).collect();
        let pi: Vec<usize> = al.ops.iter().filter_map(|o| o.predicted_index).collect();
        prop_assert_eq!(ci, (0..a.len()).collect::<Vec<_>>());
        prop_assert_eq!(pi, (0..b.len()).collect::<Vec<_>>());
        let sum: f64 = al.ops.iter().map(|o| o.cost).sum();
        prop_assert!((sum - al.total_cost).abs() < 1e-12);
        for op in &al.ops {
            match op.kind {
                AlignKind::Match => prop_assert_eq!(a[op.canonical_index.unwrap()], b[op.predicted_index.unwrap()]),
                AlignKind::Substitution => prop_assert!((0.5..=1.0).contains(&op.cost)),
                AlignKind::Insertion | AlignKind::Deletion => prop_assert_eq!(op.cost, INDEL_COST),
            }
        }
        // Symmetric costs give a symmetric optimum.
        let back = align(inv(), &b, &a, &FeatureWeights::default());
        prop_assert!((back.total_cost - al.total_cost).abs() < 1e-9);
        prop_assert!(al.total_cost <= (a.len() + b.len()) as f64);
    }
}
