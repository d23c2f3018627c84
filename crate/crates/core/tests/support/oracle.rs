//! Brute-force move oracle, independent of the slot-based generator.
//!
//! Enumerates every sub-multiset of a hand, every identity each wild card can
//! take, and classifies the resulting plain cards with a from-scratch
//! classifier.

#![allow(dead_code)]

use std::collections::BTreeSet;

use guandan_core::cards::{effective_order, is_wild, Card, CardCounts, Level, Rank, Suit};
use guandan_core::combos::{Combo, ComboKind};

pub type Key = (ComboKind, u8, Vec<usize>);

pub fn key(c: &Combo) -> Key {
    (c.kind(), c.rank(), c.cards().iter().map(|x| x.index()).collect())
}

fn tier(kind: ComboKind) -> u8 {
    match kind {
        ComboKind::FourJokers => 5,
        ComboKind::Bomb(n) if n >= 6 => 4,
        ComboKind::StraightFlush => 3,
        ComboKind::Bomb(5) => 2,
        ComboKind::Bomb(4) => 1,
        _ => 0,
    }
}

pub fn oracle_beats(a: (ComboKind, u8), b: (ComboKind, u8)) -> bool {
    let (ta, tb) = (tier(a.0), tier(b.0));
    if ta != tb {
        return ta > tb;
    }
    match (a.0, b.0) {
        (ComboKind::FourJokers, _) => false,
        (ComboKind::Bomb(x), ComboKind::Bomb(y)) => x > y || (x == y && a.1 > b.1),
        (x, y) => x == y && a.1 > b.1,
    }
}

/// Natural top position of a run of distinct natural ranks, trying A high then A low.
fn run_top(values: &[u8]) -> Option<u8> {
    for ace in [14u8, 1] {
        let mut pos: Vec<u8> = values.iter().map(|&v| if v == 14 { ace } else { v }).collect();
        pos.sort_unstable();
        if pos.windows(2).all(|w| w[1] == w[0] + 1) {
            return pos.last().copied();
        }
    }
    None
}

/// Classifies plain cards (wilds already resolved to identities).
pub fn natural_kinds(ids: &[Card], level: Level) -> Vec<(ComboKind, u8)> {
    let n = ids.len();
    let mut out = Vec::new();
    let mut by_rank: Vec<(Rank, usize)> = Vec::new();
    for c in ids {
        match by_rank.iter_mut().find(|(r, _)| *r == c.rank()) {
            Some(e) => e.1 += 1,
            None => by_rank.push((c.rank(), 1)),
        }
    }
    let any_joker = ids.iter().any(|c| c.is_joker());
    if by_rank.len() == 1 {
        let r = by_rank[0].0;
        let e = effective_order(r, level);
        match n {
            1 => out.push((ComboKind::Single, e)),
            2 => out.push((ComboKind::Pair, e)),
            3 if !r.is_joker() => out.push((ComboKind::Triple, e)),
            n if n >= 4 && !r.is_joker() => out.push((ComboKind::Bomb(n as u8), e)),
            _ => {}
        }
    }
    if n == 4
        && ids.iter().filter(|c| c.rank() == Rank::SmallJoker).count() == 2
        && ids.iter().filter(|c| c.rank() == Rank::BigJoker).count() == 2
    {
        out.push((ComboKind::FourJokers, 0));
    }
    if n == 5 && by_rank.len() == 2 {
        let (a, b) = (by_rank[0], by_rank[1]);
        let (t, p) = if a.1 == 3 { (a, b) } else { (b, a) };
        if t.1 == 3 && p.1 == 2 && !t.0.is_joker() {
            out.push((ComboKind::FullHouse, effective_order(t.0, level)));
        }
    }
    if n == 5 && by_rank.len() == 5 && !any_joker {
        let values: Vec<u8> = by_rank.iter().map(|(r, _)| r.value()).collect();
        if let Some(top) = run_top(&values) {
            out.push((ComboKind::Straight, top));
            let s0 = ids[0].suit();
            if ids.iter().all(|c| c.suit() == s0) {
                out.push((ComboKind::StraightFlush, top));
            }
        }
    }
    if n == 6 && !any_joker {
        let values: Vec<u8> = by_rank.iter().map(|(r, _)| r.value()).collect();
        if by_rank.len() == 3 && by_rank.iter().all(|(_, k)| *k == 2) {
            if let Some(top) = run_top(&values) {
                out.push((ComboKind::Tube, top));
            }
        }
        if by_rank.len() == 2 && by_rank.iter().all(|(_, k)| *k == 3) {
            if let Some(top) = run_top(&values) {
                out.push((ComboKind::Plate, top));
            }
        }
    }
    out
}

fn natural_faces() -> Vec<Card> {
    Card::all().filter(|c| !c.is_joker()).collect()
}

/// Every (kind, rank) interpretation of exactly `cards`, by wild enumeration.
pub fn interpretations(cards: &[Card], level: Level) -> BTreeSet<(ComboKind, u8)> {
    let (wild, plain): (Vec<Card>, Vec<Card>) = cards.iter().partition(|c| is_wild(**c, level));
    let faces = natural_faces();
    let mut out = BTreeSet::new();
    match wild.len() {
        0 => out.extend(natural_kinds(&plain, level)),
        1 => {
            for &a in &faces {
                let mut ids = plain.clone();
                ids.push(a);
                out.extend(natural_kinds(&ids, level));
            }
        }
        2 => {
            for (i, &a) in faces.iter().enumerate() {
                for &b in &faces[i..] {
                    let mut ids = plain.clone();
                    ids.push(a);
                    ids.push(b);
                    out.extend(natural_kinds(&ids, level));
                }
            }
        }
        _ => unreachable!("at most two wilds exist"),
    }
    out
}

/// All non-empty sub-multisets of `hand`.
pub fn submultisets(hand: &CardCounts) -> Vec<Vec<Card>> {
    let faces: Vec<(Card, u8)> = hand.faces().collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(faces: &[(Card, u8)], i: usize, cur: &mut Vec<Card>, out: &mut Vec<Vec<Card>>) {
        if i == faces.len() {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        let (c, n) = faces[i];
        for take in 0..=n {
            for _ in 0..take {
                cur.push(c);
            }
            rec(faces, i + 1, cur, out);
            for _ in 0..take {
                cur.pop();
            }
        }
    }
    rec(&faces, 0, &mut cur, &mut out);
    out
}

/// Brute-force legal set as keys. Following adds `Pass`.
pub fn brute_legal(hand: &CardCounts, incumbent: Option<&Combo>, level: Level) -> BTreeSet<Key> {
    let mut out = BTreeSet::new();
    if incumbent.is_some() {
        out.insert((ComboKind::Pass, 0, Vec::new()));
    }
    for sub in submultisets(hand) {
        let mut idx: Vec<usize> = sub.iter().map(|c| c.index()).collect();
        idx.sort_unstable();
        for (kind, rank) in interpretations(&sub, level) {
            let ok = match incumbent {
                None => true,
                Some(inc) => oracle_beats((kind, rank), (inc.kind(), inc.rank())),
            };
            if ok {
                out.insert((kind, rank, idx.clone()));
            }
        }
    }
    out
}

/// Random hand of `n` cards drawn from the double deck.
pub fn random_hand(rng: &mut impl rand::Rng, n: usize) -> CardCounts {
    let mut deck: Vec<Card> = CardCounts::full_deck().to_vec();
    let mut hand = CardCounts::new();
    for _ in 0..n {
        let i = rng.random_range(0..deck.len());
        hand.add(deck.swap_remove(i));
    }
    hand
}

pub fn suits() -> [Suit; 4] {
    Suit::ALL
}
