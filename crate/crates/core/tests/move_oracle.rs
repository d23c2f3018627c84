mod support;

use std::collections::BTreeSet;

use guandan_core::cards::{parse_cards, CardCounts, Level, Rank};
use guandan_core::combos::{classify, legal_moves, ComboKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::oracle;

fn keys(moves: &[guandan_core::combos::Combo]) -> BTreeSet<oracle::Key> {
    moves.iter().map(oracle::key).collect()
}

#[test]
fn leading_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for level in [Level::TWO, Level::new(Rank::Nine).unwrap(), Level::ACE] {
        for _ in 0..150 {
            let hand = oracle::random_hand(&mut rng, 8);
            let got = keys(&legal_moves(&hand, None, level));
            assert_eq!(got, oracle::brute_legal(&hand, None, level), "hand {hand:?} level {level}");
        }
    }
}

#[test]
fn following_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let level = Level::new(Rank::Five).unwrap();
    for _ in 0..150 {
        let other = oracle::random_hand(&mut rng, 8);
        let leads = legal_moves(&other, None, level);
        let inc = &leads[rand::Rng::random_range(&mut rng, 0..leads.len())];
        let hand = oracle::random_hand(&mut rng, 8);
        let got = keys(&legal_moves(&hand, Some(inc), level));
        assert_eq!(got, oracle::brute_legal(&hand, Some(inc), level), "hand {hand:?} vs {inc}");
    }
}

#[test]
fn wild_straight_interpretations_match_enumeration() {
    let cards = parse_cards("H2 S5 S6 S7 S8").unwrap();
    let got: BTreeSet<_> = classify(&cards, Level::TWO).unwrap().iter().map(|c| (c.kind(), c.rank())).collect();
    let want = oracle::interpretations(&cards, Level::TWO);
    assert_eq!(got, want);
    assert!(want.contains(&(ComboKind::StraightFlush, 9)));
    assert!(want.contains(&(ComboKind::StraightFlush, 8)));
}

#[test]
fn single_follow_of_four_matches_filter() {
    let level = Level::TWO;
    let inc = classify(&parse_cards("S4").unwrap(), level).unwrap().remove(0);
    let hand: CardCounts = parse_cards("H3 D6 S9 SK C2 LJ D4 H2").unwrap().into_iter().collect();
    let got = keys(&legal_moves(&hand, Some(&inc), level));
    assert_eq!(got, oracle::brute_legal(&hand, Some(&inc), level));
}
