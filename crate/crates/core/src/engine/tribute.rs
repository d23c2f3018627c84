//! Tribute planning and card selection between games.

use serde::{Deserialize, Serialize};

use super::event::Seat;
use crate::cards::{effective_order, is_wild, Card, CardCounts, Level};

/// Who pays whom when a game opens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TributeMode {
    /// Double-down: both losers pay. Otherwise only the last finisher pays the first.
    #[default]
    Standard,
    /// The two later finishers always pay the two earlier ones.
    Double,
}

impl std::str::FromStr for TributeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(TributeMode::Standard),
            "double" => Ok(TributeMode::Double),
            _ => Err(format!("unknown tribute mode `{s}` (expected standard or double)")),
        }
    }
}

/// Pending tribute for the current game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TributePlan {
    /// Paying seats with their forced tribute card, later finisher last.
    pub offers: Vec<(Seat, Card)>,
    /// Receiving seats, first finisher first.
    pub receivers: Vec<Seat>,
    /// Big jokers held by the paying side; two of them cancel the tribute.
    pub big_jokers: Vec<Seat>,
    /// First finisher of the previous game.
    pub previous_winner: Seat,
}

impl TributePlan {
    pub fn anti_tribute(&self) -> bool {
        self.big_jokers.len() >= 2
    }
}

/// Tribute decisions; missing entries take the defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TributeChoices {
    /// The offered card the first finisher takes when two are offered.
    pub pick: Option<Card>,
    /// Return card per receiving seat.
    pub returns: Vec<(Seat, Card)>,
}

/// A completed tribute movement, public to every seat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TributeRecord {
    Paid { from: Seat, to: Seat, card: Card },
    Returned { from: Seat, to: Seat, card: Card },
    Refused { seat: Seat, card: Card },
}

/// Highest card by level order, jokers and wilds excluded. Suit breaks ties
/// (spades highest) so the choice is deterministic.
pub fn tribute_card(hand: &CardCounts, level: Level) -> Option<Card> {
    hand.faces()
        .map(|(c, _)| c)
        .filter(|c| !c.is_joker() && !is_wild(*c, level))
        .max_by_key(|c| (effective_order(c.rank(), level), c.suit()))
}

pub fn is_small_return(card: Card) -> bool {
    !card.is_joker() && card.rank().value() <= 10
}

/// Smallest cards by level order (every copy face that ties).
fn smallest_order(hand: &CardCounts, level: Level) -> Option<u8> {
    hand.faces().map(|(c, _)| effective_order(c.rank(), level)).min()
}

/// Whether `card` is an acceptable return from `hand`.
pub fn valid_return(hand: &CardCounts, card: Card, level: Level) -> bool {
    if hand.count(card) == 0 {
        return false;
    }
    if hand.faces().any(|(c, _)| is_small_return(c)) {
        is_small_return(card)
    } else {
        Some(effective_order(card.rank(), level)) == smallest_order(hand, level)
    }
}

/// Lowest natural card of rank 10 or below, wilds kept; else the smallest card.
pub fn default_return(hand: &CardCounts, level: Level) -> Option<Card> {
    let small = hand
        .faces()
        .map(|(c, _)| c)
        .filter(|c| is_small_return(*c) && !is_wild(*c, level))
        .min_by_key(|c| (c.rank().value(), c.suit()));
    small
        .or_else(|| hand.faces().map(|(c, _)| c).find(|c| is_small_return(*c)))
        .or_else(|| hand.faces().map(|(c, _)| c).min_by_key(|c| (effective_order(c.rank(), level), c.suit())))
}
