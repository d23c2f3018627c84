//! Combination classification, the beat relation and legal-move enumeration.
//!
//! Moves are generated directly from rank/suit requirements ("slots") rather
//! than by scanning sub-multisets of the hand, so enumeration over a 27-card
//! hand stays cheap. Heart-of-level wild cards can fill any non-joker slot.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::cards::{effective_order, Card, CardCounts, CardError, Level, Rank, Suit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComboKind {
    Pass,
    Single,
    Pair,
    Triple,
    FullHouse,
    Straight,
    /// Three consecutive pairs.
    Tube,
    /// Two consecutive triples.
    Plate,
    /// `n >= 4` cards of one rank.
    Bomb(u8),
    StraightFlush,
    FourJokers,
}

impl ComboKind {
    /// Number of cards a combo of this kind holds.
    pub fn card_count(self) -> usize {
        match self {
            ComboKind::Pass => 0,
            ComboKind::Single => 1,
            ComboKind::Pair => 2,
            ComboKind::Triple => 3,
            ComboKind::FullHouse | ComboKind::Straight | ComboKind::StraightFlush => 5,
            ComboKind::Tube | ComboKind::Plate => 6,
            ComboKind::Bomb(n) => n as usize,
            ComboKind::FourJokers => 4,
        }
    }

    /// Position in the bomb hierarchy; 0 for basic kinds and pass.
    pub fn tier(self) -> u8 {
        match self {
            ComboKind::FourJokers => 5,
            ComboKind::Bomb(n) if n >= 6 => 4,
            ComboKind::StraightFlush => 3,
            ComboKind::Bomb(5) => 2,
            ComboKind::Bomb(_) => 1,
            _ => 0,
        }
    }

    pub fn is_bomb_class(self) -> bool {
        self.tier() > 0
    }

    /// Kinds compared by natural top position instead of level order.
    pub fn is_sequence(self) -> bool {
        matches!(self, ComboKind::Straight | ComboKind::StraightFlush | ComboKind::Tube | ComboKind::Plate)
    }

    /// Log/wire name.
    pub fn name(self) -> &'static str {
        match self {
            ComboKind::Pass => "pass",
            ComboKind::Single => "single",
            ComboKind::Pair => "pair",
            ComboKind::Triple => "triple",
            ComboKind::FullHouse => "full_house",
            ComboKind::Straight => "straight",
            ComboKind::Tube => "tube",
            ComboKind::Plate => "plate",
            ComboKind::Bomb(_) => "bomb",
            ComboKind::StraightFlush => "straight_flush",
            ComboKind::FourJokers => "four_jokers",
        }
    }

    pub fn from_name(name: &str, card_count: usize) -> Option<ComboKind> {
        Some(match name {
            "pass" => ComboKind::Pass,
            "single" => ComboKind::Single,
            "pair" => ComboKind::Pair,
            "triple" => ComboKind::Triple,
            "full_house" => ComboKind::FullHouse,
            "straight" => ComboKind::Straight,
            "tube" => ComboKind::Tube,
            "plate" => ComboKind::Plate,
            "bomb" if (4..=10).contains(&card_count) => ComboKind::Bomb(card_count as u8),
            "straight_flush" => ComboKind::StraightFlush,
            "four_jokers" => ComboKind::FourJokers,
            _ => return None,
        })
    }
}

/// A wild card together with the identity it stands in for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WildAssignment {
    pub wild: Card,
    pub as_card: Card,
}

/// A classified play.
///
/// Equality and ordering use `(kind, rank, cards)` only: the wild assignment
/// is one witness of the interpretation, not part of its identity.
#[derive(Debug, Clone)]
pub struct Combo {
    kind: ComboKind,
    rank: u8,
    cards: Vec<Card>,
    wilds: Vec<WildAssignment>,
}

impl Combo {
    pub fn pass() -> Combo {
        Combo { kind: ComboKind::Pass, rank: 0, cards: Vec::new(), wilds: Vec::new() }
    }

    /// Builds a combo from parts; callers are expected to have validated them
    /// (see [`classify`]).
    pub fn from_parts(kind: ComboKind, rank: u8, mut cards: Vec<Card>, wilds: Vec<WildAssignment>) -> Combo {
        cards.sort_by_key(|c| c.index());
        Combo { kind, rank, cards, wilds }
    }

    pub fn kind(&self) -> ComboKind {
        self.kind
    }

    /// Effective rank: natural top position for sequences, level order otherwise.
    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn cards(&self) -> &[Card] {
        &self.cards
    }

    pub fn wilds(&self) -> &[WildAssignment] {
        &self.wilds
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn is_pass(&self) -> bool {
        self.kind == ComboKind::Pass
    }

    pub fn counts(&self) -> CardCounts {
        self.cards.iter().copied().collect()
    }

    pub fn codes(&self) -> Vec<String> {
        self.cards.iter().map(|c| c.code()).collect()
    }

    fn key(&self) -> (ComboKind, u8, impl Iterator<Item = usize> + '_) {
        (self.kind, self.rank, self.cards.iter().map(|c| c.index()))
    }
}

impl PartialEq for Combo {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.rank == other.rank && self.cards == other.cards
    }
}

impl Eq for Combo {}

impl Hash for Combo {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.rank.hash(state);
        self.cards.hash(state);
    }
}

impl Ord for Combo {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ka, ra, ca) = self.key();
        let (kb, rb, cb) = other.key();
        ka.cmp(&kb).then(ra.cmp(&rb)).then_with(|| ca.cmp(cb))
    }
}

impl PartialOrd for Combo {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return f.write_str("pass");
        }
        write!(f, "{}[{}]", self.kind.name(), self.codes().join(" "))
    }
}

/// Whether `challenger` may be played over `incumbent`.
///
/// Hierarchy: four jokers > bombs of six or more > straight flush > five-card
/// bomb > four-card bomb > basic kinds. Bombs of six or more compare by card
/// count, then rank. Basic kinds only beat the same kind with a higher rank.
pub fn beats(challenger: &Combo, incumbent: &Combo) -> bool {
    if challenger.is_pass() || incumbent.is_pass() {
        return false;
    }
    let (tc, ti) = (challenger.kind.tier(), incumbent.kind.tier());
    if tc != ti {
        return tc > ti;
    }
    match (challenger.kind, incumbent.kind) {
        (ComboKind::FourJokers, _) => false,
        (ComboKind::Bomb(a), ComboKind::Bomb(b)) => (a, challenger.rank) > (b, incumbent.rank),
        (a, b) => a == b && challenger.rank > incumbent.rank,
    }
}

/// Every interpretation of exactly `cards` as a combo at `level`.
pub fn classify(cards: &[Card], level: Level) -> Result<Vec<Combo>, CardError> {
    let counts = CardCounts::from_cards(cards.iter().copied())?;
    let n = counts.len();
    if n == 0 || n > 10 {
        return Ok(Vec::new());
    }
    let mut gen = Generator::new(&counts, level);
    gen.generate(Filter::Size(n));
    Ok(gen.out.into_iter().filter(|c| c.len() == n).collect())
}

/// Legal plays from `hand`. When leading (`incumbent` is `None`) this is every
/// combo formable from the hand; when following it is `Pass` plus every combo
/// that beats the incumbent.
pub fn legal_moves(hand: &CardCounts, incumbent: Option<&Combo>, level: Level) -> Vec<Combo> {
    let mut gen = Generator::new(hand, level);
    match incumbent {
        None => {
            gen.generate(Filter::All);
            gen.out.into_iter().collect()
        }
        Some(inc) => {
            gen.generate(Filter::Beating(inc));
            let mut moves = vec![Combo::pass()];
            moves.extend(gen.out.into_iter().filter(|c| beats(c, inc)));
            moves
        }
    }
}

#[derive(Clone, Copy)]
enum Filter<'a> {
    All,
    Size(usize),
    Beating(&'a Combo),
}

impl Filter<'_> {
    fn wants(&self, kind: ComboKind) -> bool {
        match self {
            Filter::All => true,
            Filter::Size(n) => match kind {
                ComboKind::Bomb(_) => *n >= 4,
                k => k.card_count() == *n,
            },
            Filter::Beating(inc) => kind.is_bomb_class() || (!inc.kind.is_bomb_class() && kind == inc.kind),
        }
    }

    /// Minimum rank worth generating for basic kinds.
    fn min_rank(&self, kind: ComboKind) -> u8 {
        match self {
            Filter::Beating(inc) if inc.kind == kind && !kind.is_bomb_class() => inc.rank + 1,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy)]
struct Slot {
    rank: Rank,
    count: u8,
    suit: Option<Suit>,
}

struct Generator {
    level: Level,
    naturals: CardCounts,
    wild: Card,
    wilds: u8,
    out: BTreeSet<Combo>,
}

impl Generator {
    fn new(hand: &CardCounts, level: Level) -> Self {
        let wild = Card::new(Suit::Hearts, level.rank());
        let mut naturals = hand.clone();
        let wilds = hand.count(wild);
        for _ in 0..wilds {
            naturals.remove(wild);
        }
        Generator { level, naturals, wild, wilds, out: BTreeSet::new() }
    }

    fn generate(&mut self, filter: Filter<'_>) {
        let eff = |r: Rank, level| effective_order(r, level);

        if filter.wants(ComboKind::Single) {
            let min = filter.min_rank(ComboKind::Single);
            for r in Rank::NATURAL {
                if eff(r, self.level) >= min {
                    self.fill_kind(ComboKind::Single, eff(r, self.level), &[Slot { rank: r, count: 1, suit: None }]);
                }
            }
            for joker in [Card::SMALL_JOKER, Card::BIG_JOKER] {
                let r = eff(joker.rank(), self.level);
                if self.naturals.count(joker) >= 1 && r >= min {
                    self.emit(ComboKind::Single, r, vec![joker], Vec::new());
                }
            }
        }
        if filter.wants(ComboKind::Pair) {
            let min = filter.min_rank(ComboKind::Pair);
            for r in Rank::NATURAL {
                if eff(r, self.level) >= min {
                    self.fill_kind(ComboKind::Pair, eff(r, self.level), &[Slot { rank: r, count: 2, suit: None }]);
                }
            }
            for joker in [Card::SMALL_JOKER, Card::BIG_JOKER] {
                let r = eff(joker.rank(), self.level);
                if self.naturals.count(joker) == 2 && r >= min {
                    self.emit(ComboKind::Pair, r, vec![joker, joker], Vec::new());
                }
            }
        }
        if filter.wants(ComboKind::Triple) {
            let min = filter.min_rank(ComboKind::Triple);
            for r in Rank::NATURAL {
                if eff(r, self.level) >= min {
                    self.fill_kind(ComboKind::Triple, eff(r, self.level), &[Slot { rank: r, count: 3, suit: None }]);
                }
            }
        }
        if filter.wants(ComboKind::FullHouse) {
            let min = filter.min_rank(ComboKind::FullHouse);
            for t in Rank::NATURAL {
                let rank = eff(t, self.level);
                if rank < min {
                    continue;
                }
                let triple = Slot { rank: t, count: 3, suit: None };
                for p in Rank::NATURAL {
                    if p != t {
                        self.fill_kind(ComboKind::FullHouse, rank, &[triple, Slot { rank: p, count: 2, suit: None }]);
                    }
                }
                for joker in [Card::SMALL_JOKER, Card::BIG_JOKER] {
                    if self.naturals.count(joker) == 2 {
                        self.fill_with_extra(ComboKind::FullHouse, rank, &[triple], &[joker, joker]);
                    }
                }
            }
        }
        if filter.wants(ComboKind::Straight) {
            self.sequences(ComboKind::Straight, 5, 1, None, filter.min_rank(ComboKind::Straight));
        }
        if filter.wants(ComboKind::Tube) {
            self.sequences(ComboKind::Tube, 3, 2, None, filter.min_rank(ComboKind::Tube));
        }
        if filter.wants(ComboKind::Plate) {
            self.sequences(ComboKind::Plate, 2, 3, None, filter.min_rank(ComboKind::Plate));
        }
        if filter.wants(ComboKind::StraightFlush) {
            for s in Suit::ALL {
                self.sequences(ComboKind::StraightFlush, 5, 1, Some(s), 0);
            }
        }
        if filter.wants(ComboKind::Bomb(4)) {
            for r in Rank::NATURAL {
                let avail = self.naturals.rank_count(r) + self.wilds;
                for n in 4..=avail {
                    if let Filter::Size(size) = filter {
                        if size != n as usize {
                            continue;
                        }
                    }
                    self.fill_kind(ComboKind::Bomb(n), eff(r, self.level), &[Slot { rank: r, count: n, suit: None }]);
                }
            }
        }
        if filter.wants(ComboKind::FourJokers)
            && self.naturals.count(Card::SMALL_JOKER) == 2
            && self.naturals.count(Card::BIG_JOKER) == 2
        {
            let cards = vec![Card::SMALL_JOKER, Card::SMALL_JOKER, Card::BIG_JOKER, Card::BIG_JOKER];
            self.emit(ComboKind::FourJokers, 0, cards, Vec::new());
        }
    }

    /// `length` consecutive positions, each needing `width` cards; positions
    /// run from 1 (low ace) to 14 (high ace).
    fn sequences(&mut self, kind: ComboKind, length: u8, width: u8, suit: Option<Suit>, min_rank: u8) {
        for start in 1..=(15 - length) {
            let top = start + length - 1;
            if top < min_rank {
                continue;
            }
            let slots: Vec<Slot> = (start..=top)
                .map(|pos| Slot {
                    rank: Rank::from_sequence_position(pos).expect("position in range"),
                    count: width,
                    suit,
                })
                .collect();
            self.fill_kind(kind, top, &slots);
        }
    }

    fn fill_kind(&mut self, kind: ComboKind, rank: u8, slots: &[Slot]) {
        self.fill_with_extra(kind, rank, slots, &[]);
    }

    fn fill_with_extra(&mut self, kind: ComboKind, rank: u8, slots: &[Slot], extra: &[Card]) {
        // Quick feasibility check before recursing.
        let need: u8 = slots.iter().map(|s| s.count).sum();
        let have: u8 = slots
            .iter()
            .map(|s| match s.suit {
                Some(suit) => self.naturals.count(Card::new(suit, s.rank)).min(s.count),
                None => self.naturals.rank_count(s.rank).min(s.count),
            })
            .sum();
        if have + self.wilds < need {
            return;
        }
        let mut pool = self.naturals.clone();
        let mut chosen: Vec<Card> = extra.to_vec();
        let mut assigns = Vec::new();
        let mut found = Vec::new();
        fill_slots(slots, 0, &mut pool, self.wilds, self.wild, &mut chosen, &mut assigns, &mut found);
        for (cards, wilds) in found {
            self.emit(kind, rank, cards, wilds);
        }
    }

    fn emit(&mut self, kind: ComboKind, rank: u8, cards: Vec<Card>, wilds: Vec<WildAssignment>) {
        // First witness wins; later duplicates are dropped by the set.
        self.out.insert(Combo::from_parts(kind, rank, cards, wilds));
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_slots(
    slots: &[Slot],
    idx: usize,
    pool: &mut CardCounts,
    wilds_left: u8,
    wild: Card,
    chosen: &mut Vec<Card>,
    assigns: &mut Vec<WildAssignment>,
    found: &mut Vec<(Vec<Card>, Vec<WildAssignment>)>,
) {
    let Some(slot) = slots.get(idx) else {
        found.push((chosen.clone(), assigns.clone()));
        return;
    };
    let faces: Vec<Card> = match slot.suit {
        Some(s) => vec![Card::new(s, slot.rank)],
        None => Suit::ALL.iter().map(|&s| Card::new(s, slot.rank)).collect(),
    };
    let identity = Card::new(slot.suit.unwrap_or(Suit::Hearts), slot.rank);
    let min_naturals = slot.count.saturating_sub(wilds_left);
    for naturals in min_naturals..=slot.count {
        let wild_count = slot.count - naturals;
        let mut picks = Vec::new();
        submultisets(&faces, 0, naturals, pool, &mut Vec::new(), &mut picks);
        for pick in picks {
            for &c in &pick {
                pool.remove(c);
                chosen.push(c);
            }
            for _ in 0..wild_count {
                chosen.push(wild);
                if identity != wild {
                    assigns.push(WildAssignment { wild, as_card: identity });
                }
            }
            fill_slots(slots, idx + 1, pool, wilds_left - wild_count, wild, chosen, assigns, found);
            for _ in 0..wild_count {
                chosen.pop();
                if identity != wild {
                    assigns.pop();
                }
            }
            for &c in pick.iter().rev() {
                chosen.pop();
                pool.add(c);
            }
        }
    }
}

/// Distinct sub-multisets of size `k` drawn from `faces` with availability in `pool`.
fn submultisets(faces: &[Card], i: usize, k: u8, pool: &CardCounts, cur: &mut Vec<Card>, out: &mut Vec<Vec<Card>>) {
    if k == 0 {
        out.push(cur.clone());
        return;
    }
    if i >= faces.len() {
        return;
    }
    let face = faces[i];
    let avail = pool.count(face).min(k);
    for take in (0..=avail).rev() {
        for _ in 0..take {
            cur.push(face);
        }
        submultisets(faces, i + 1, k - take, pool, cur, out);
        for _ in 0..take {
            cur.pop();
        }
    }
}
