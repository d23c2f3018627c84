//! Physical cards, level-relative ordering and card multisets.
//!
//! A Guandan deck is two standard 54-card decks. The two copies of a card are
//! indistinguishable during play, so a [`Card`] is just a face (suit + rank)
//! and hands are [`CardCounts`] with at most two copies of each face.
//!
//! Text codes are `<suit><rank>` (`H7`, `S10`, `DQ`); the jokers are `LJ`
//! (small) and `BJ` (big), so `SJ` is always the jack of spades.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of distinct faces in one deck.
pub const FACES: usize = 54;
/// Number of cards in the two-deck game.
pub const DECK_SIZE: usize = 108;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CardError {
    #[error("invalid card code `{0}`")]
    BadCode(String),
    #[error("{0} is not a natural rank and cannot be a level")]
    BadLevel(String),
    #[error("invalid cards: {0} appears more than twice")]
    TooManyCopies(Card),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suit {
    Hearts,
    Diamonds,
    Clubs,
    Spades,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Hearts, Suit::Diamonds, Suit::Clubs, Suit::Spades];

    pub fn letter(self) -> char {
        match self {
            Suit::Hearts => 'H',
            Suit::Diamonds => 'D',
            Suit::Clubs => 'C',
            Suit::Spades => 'S',
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Rank {
    Two = 2,
    Three = 3,
    Four = 4,
    Five = 5,
    Six = 6,
    Seven = 7,
    Eight = 8,
    Nine = 9,
    Ten = 10,
    Jack = 11,
    Queen = 12,
    King = 13,
    Ace = 14,
    SmallJoker = 15,
    BigJoker = 16,
}

impl Rank {
    /// Natural ranks from 2 up to A.
    pub const NATURAL: [Rank; 13] = [
        Rank::Two,
        Rank::Three,
        Rank::Four,
        Rank::Five,
        Rank::Six,
        Rank::Seven,
        Rank::Eight,
        Rank::Nine,
        Rank::Ten,
        Rank::Jack,
        Rank::Queen,
        Rank::King,
        Rank::Ace,
    ];

    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn from_value(v: u8) -> Option<Rank> {
        match v {
            2..=14 => Some(Rank::NATURAL[(v - 2) as usize]),
            15 => Some(Rank::SmallJoker),
            16 => Some(Rank::BigJoker),
            _ => None,
        }
    }

    pub fn is_joker(self) -> bool {
        matches!(self, Rank::SmallJoker | Rank::BigJoker)
    }

    /// Rank for a position in a sequence, where position 1 is the low ace and
    /// 14 the high ace.
    pub fn from_sequence_position(pos: u8) -> Option<Rank> {
        match pos {
            1 | 14 => Some(Rank::Ace),
            2..=13 => Rank::from_value(pos),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Rank::Two => "2",
            Rank::Three => "3",
            Rank::Four => "4",
            Rank::Five => "5",
            Rank::Six => "6",
            Rank::Seven => "7",
            Rank::Eight => "8",
            Rank::Nine => "9",
            Rank::Ten => "10",
            Rank::Jack => "J",
            Rank::Queen => "Q",
            Rank::King => "K",
            Rank::Ace => "A",
            Rank::SmallJoker => "LJ",
            Rank::BigJoker => "BJ",
        }
    }

    fn parse_natural(s: &str) -> Option<Rank> {
        Some(match s {
            "2" => Rank::Two,
            "3" => Rank::Three,
            "4" => Rank::Four,
            "5" => Rank::Five,
            "6" => Rank::Six,
            "7" => Rank::Seven,
            "8" => Rank::Eight,
            "9" => Rank::Nine,
            "10" => Rank::Ten,
            "J" => Rank::Jack,
            "Q" => Rank::Queen,
            "K" => Rank::King,
            "A" => Rank::Ace,
            _ => return None,
        })
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Rank {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        match s.as_str() {
            "LJ" => Ok(Rank::SmallJoker),
            "BJ" => Ok(Rank::BigJoker),
            _ => Rank::parse_natural(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown rank `{s}`"))),
        }
    }
}

/// The current level (trump rank). Always a natural rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level(Rank);

impl Level {
    pub const TWO: Level = Level(Rank::Two);
    pub const ACE: Level = Level(Rank::Ace);

    pub fn new(rank: Rank) -> Result<Level, CardError> {
        if rank.is_joker() {
            return Err(CardError::BadLevel(rank.to_string()));
        }
        Ok(Level(rank))
    }

    pub fn rank(self) -> Rank {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Level> {
        Rank::NATURAL.into_iter().map(Level)
    }

    /// Raises the level by `steps`, stopping at A.
    pub fn raised(self, steps: u8) -> Level {
        let v = (self.0.value() + steps).min(Rank::Ace.value());
        Level(Rank::from_value(v).expect("natural rank"))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Level {
    type Err = CardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rank = Rank::parse_natural(s.trim()).ok_or_else(|| CardError::BadLevel(s.to_string()))?;
        Level::new(rank)
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.0.label())
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Position of `rank` in the level-relative order: natural ranks other than the
/// level occupy 0..=11, the level rank is 12, small joker 13, big joker 14.
pub fn effective_order(rank: Rank, level: Level) -> u8 {
    match rank {
        Rank::BigJoker => 14,
        Rank::SmallJoker => 13,
        r if r == level.rank() => 12,
        r if r < level.rank() => r.value() - 2,
        r => r.value() - 3,
    }
}

/// A card face. Jokers have no suit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Card {
    suit: Option<Suit>,
    rank: Rank,
}

impl Card {
    pub const SMALL_JOKER: Card = Card { suit: None, rank: Rank::SmallJoker };
    pub const BIG_JOKER: Card = Card { suit: None, rank: Rank::BigJoker };

    pub fn new(suit: Suit, rank: Rank) -> Card {
        assert!(!rank.is_joker(), "jokers have no suit");
        Card { suit: Some(suit), rank }
    }

    pub fn suit(self) -> Option<Suit> {
        self.suit
    }

    pub fn rank(self) -> Rank {
        self.rank
    }

    pub fn is_joker(self) -> bool {
        self.rank.is_joker()
    }

    /// Dense index in `0..54`: suit-major for natural cards, then LJ, BJ.
    pub fn index(self) -> usize {
        match (self.suit, self.rank) {
            (_, Rank::SmallJoker) => 52,
            (_, Rank::BigJoker) => 53,
            (Some(s), r) => s.index() * 13 + (r.value() - 2) as usize,
            (None, _) => unreachable!("natural card without suit"),
        }
    }

    pub fn from_index(i: usize) -> Card {
        match i {
            52 => Card::SMALL_JOKER,
            53 => Card::BIG_JOKER,
            i if i < 52 => Card::new(Suit::ALL[i / 13], Rank::NATURAL[i % 13]),
            _ => panic!("card index {i} out of range"),
        }
    }

    /// Every face once, in index order.
    pub fn all() -> impl Iterator<Item = Card> {
        (0..FACES).map(Card::from_index)
    }

    pub fn code(self) -> String {
        self.to_string()
    }
}

/// True iff `card` is the heart of the level rank.
pub fn is_wild(card: Card, level: Level) -> bool {
    card.suit == Some(Suit::Hearts) && card.rank == level.rank()
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.suit {
            Some(s) => write!(f, "{}{}", s.letter(), self.rank.label()),
            None => f.write_str(self.rank.label()),
        }
    }
}

impl FromStr for Card {
    type Err = CardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CardError::BadCode(s.to_string());
        match s {
            "LJ" => return Ok(Card::SMALL_JOKER),
            "BJ" => return Ok(Card::BIG_JOKER),
            _ => {}
        }
        let mut chars = s.chars();
        let suit = match chars.next().ok_or_else(bad)? {
            'H' => Suit::Hearts,
            'D' => Suit::Diamonds,
            'C' => Suit::Clubs,
            'S' => Suit::Spades,
            _ => return Err(bad()),
        };
        let rank = Rank::parse_natural(chars.as_str()).ok_or_else(bad)?;
        Ok(Card::new(suit, rank))
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a whitespace- or comma-separated list of card codes.
pub fn parse_cards(s: &str) -> Result<Vec<Card>, CardError> {
    s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(str::parse).collect()
}

/// A multiset of cards. Counts are not capped here; [`CardCounts::from_cards`]
/// enforces the two-copy limit for inputs that must come from a real deck.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CardCounts {
    counts: [u8; FACES],
    len: usize,
}

impl Default for CardCounts {
    fn default() -> Self {
        CardCounts { counts: [0; FACES], len: 0 }
    }
}

impl fmt::Debug for CardCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl CardCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// The full 108-card double deck.
    pub fn full_deck() -> Self {
        CardCounts { counts: [2; FACES], len: DECK_SIZE }
    }

    /// Builds a multiset, rejecting more than two copies of any face.
    pub fn from_cards<I: IntoIterator<Item = Card>>(cards: I) -> Result<Self, CardError> {
        let mut out = CardCounts::new();
        for c in cards {
            if out.count(c) >= 2 {
                return Err(CardError::TooManyCopies(c));
            }
            out.add(c);
        }
        Ok(out)
    }

    pub fn count(&self, card: Card) -> u8 {
        self.counts[card.index()]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn add(&mut self, card: Card) {
        self.counts[card.index()] += 1;
        self.len += 1;
    }

    /// Removes one copy; returns false if absent.
    pub fn remove(&mut self, card: Card) -> bool {
        let slot = &mut self.counts[card.index()];
        if *slot == 0 {
            return false;
        }
        *slot -= 1;
        self.len -= 1;
        true
    }

    pub fn contains_all(&self, other: &CardCounts) -> bool {
        self.counts.iter().zip(other.counts.iter()).all(|(a, b)| a >= b)
    }

    pub fn add_all(&mut self, other: &CardCounts) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        self.len += other.len;
    }

    /// Removes `other` from `self`; returns false (leaving `self` untouched)
    /// if `other` is not a sub-multiset.
    pub fn remove_all(&mut self, other: &CardCounts) -> bool {
        if !self.contains_all(other) {
            return false;
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a -= b;
        }
        self.len -= other.len;
        true
    }

    /// Cards in index order, repeated by multiplicity.
    pub fn iter(&self) -> impl Iterator<Item = Card> + '_ {
        self.counts.iter().enumerate().flat_map(|(i, &n)| std::iter::repeat_n(Card::from_index(i), n as usize))
    }

    /// Distinct faces present with their counts.
    pub fn faces(&self) -> impl Iterator<Item = (Card, u8)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &n)| n > 0).map(|(i, &n)| (Card::from_index(i), n))
    }

    pub fn to_vec(&self) -> Vec<Card> {
        self.iter().collect()
    }

    /// Number of cards of `rank` regardless of suit.
    pub fn rank_count(&self, rank: Rank) -> u8 {
        match rank {
            Rank::SmallJoker => self.counts[52],
            Rank::BigJoker => self.counts[53],
            r => Suit::ALL.iter().map(|&s| self.count(Card::new(s, r))).sum(),
        }
    }

    pub fn raw(&self) -> &[u8; FACES] {
        &self.counts
    }
}

impl FromIterator<Card> for CardCounts {
    fn from_iter<I: IntoIterator<Item = Card>>(iter: I) -> Self {
        let mut out = CardCounts::new();
        for c in iter {
            out.add(c);
        }
        out
    }
}

/// Sorts cards low to high at `level` (suit breaks ties).
pub fn sort_for_level(cards: &mut [Card], level: Level) {
    cards.sort_by_key(|c| (effective_order(c.rank(), level), c.suit().map(|s| s as u8)));
}
