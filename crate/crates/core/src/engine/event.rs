//! Match events and their replay-log encoding.
//!
//! One JSON object per line:
//!
//! ```text
//! {"game":1,"step":4,"seat":2,"phase":"Playing",
//!  "action":{"kind":"pair","cards":["H9","S9"],"wilds":[]},
//!  "level":"2","digest":"8c1f..."}
//! ```
//!
//! Besides plays (`kind` = combo name or `pass`) the log carries synthetic
//! actions: `deal` (the seat's dealt hand), `tribute`, `return`,
//! `anti_tribute` (the big jokers shown) and `declare` (with an extra
//! `count` field). Tribute lines are ordered so that the first one is the
//! tribute taken by the first finisher.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{Card, Level};
use crate::combos::{classify, Combo, ComboKind, WildAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seat(u8);

impl Seat {
    pub const ALL: [Seat; 4] = [Seat(0), Seat(1), Seat(2), Seat(3)];

    pub fn new(index: usize) -> Option<Seat> {
        (index < 4).then_some(Seat(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn team(self) -> Team {
        Team(self.0 % 2)
    }

    pub fn partner(self) -> Seat {
        Seat((self.0 + 2) % 4)
    }

    /// Next seat in ascending order, wrapping.
    pub fn next(self) -> Seat {
        Seat((self.0 + 1) % 4)
    }
}

impl fmt::Display for Seat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Team 0 holds seats {0, 2}; team 1 holds {1, 3}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Team(u8);

impl Team {
    pub const ALL: [Team; 2] = [Team(0), Team(1)];

    pub fn new(index: usize) -> Option<Team> {
        (index < 2).then_some(Team(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn other(self) -> Team {
        Team(1 - self.0)
    }

    pub fn seats(self) -> [Seat; 2] {
        [Seat(self.0), Seat(self.0 + 2)]
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Dealing,
    Tribute,
    Playing,
    RoundOver,
    MatchOver,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Dealing => "Dealing",
            Phase::Tribute => "Tribute",
            Phase::Playing => "Playing",
            Phase::RoundOver => "RoundOver",
            Phase::MatchOver => "MatchOver",
        }
    }

    fn from_name(s: &str) -> Option<Phase> {
        Some(match s {
            "Dealing" => Phase::Dealing,
            "Tribute" => Phase::Tribute,
            "Playing" => Phase::Playing,
            "RoundOver" => Phase::RoundOver,
            "MatchOver" => Phase::MatchOver,
            _ => return None,
        })
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Deal(Vec<Card>),
    /// A play or a pass.
    Play(Combo),
    Tribute(Card),
    Return(Card),
    AntiTribute(Vec<Card>),
    Declare(u8),
}

impl Action {
    /// True for plays and passes, the actions agents choose.
    pub fn is_turn(&self) -> bool {
        matches!(self, Action::Play(_))
    }

    /// Whether the cards involved are visible to every seat.
    pub fn is_public(&self) -> bool {
        !matches!(self, Action::Deal(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub game: u32,
    pub step: u32,
    pub seat: Seat,
    pub phase: Phase,
    pub action: Action,
    pub level: Level,
    /// Digest of the state after the event was applied.
    pub digest: u64,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogAction {
    pub kind: String,
    pub cards: Vec<Card>,
    pub wilds: Vec<(Card, Card)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub game: u32,
    pub step: u32,
    pub seat: u8,
    pub phase: String,
    pub action: LogAction,
    pub level: Level,
    pub digest: String,
}

impl From<&Event> for LogRecord {
    fn from(e: &Event) -> Self {
        let (kind, cards, wilds, count) = match &e.action {
            Action::Deal(cards) => ("deal".to_string(), cards.clone(), Vec::new(), None),
            Action::Play(c) => (
                c.kind().name().to_string(),
                c.cards().to_vec(),
                c.wilds().iter().map(|w| (w.wild, w.as_card)).collect(),
                None,
            ),
            Action::Tribute(c) => ("tribute".to_string(), vec![*c], Vec::new(), None),
            Action::Return(c) => ("return".to_string(), vec![*c], Vec::new(), None),
            Action::AntiTribute(cards) => ("anti_tribute".to_string(), cards.clone(), Vec::new(), None),
            Action::Declare(n) => ("declare".to_string(), Vec::new(), Vec::new(), Some(*n)),
        };
        LogRecord {
            game: e.game,
            step: e.step,
            seat: e.seat.index() as u8,
            phase: e.phase.name().to_string(),
            action: LogAction { kind, cards, wilds, count },
            level: e.level,
            digest: format!("{:016x}", e.digest),
        }
    }
}

impl LogRecord {
    pub fn to_event(&self, line: usize) -> Result<Event, LogError> {
        let invalid = |message: String| LogError::Invalid { line, message };
        let seat = Seat::new(self.seat as usize).ok_or_else(|| invalid(format!("bad seat {}", self.seat)))?;
        let phase = Phase::from_name(&self.phase).ok_or_else(|| invalid(format!("bad phase {}", self.phase)))?;
        let digest =
            u64::from_str_radix(&self.digest, 16).map_err(|_| invalid(format!("bad digest {}", self.digest)))?;
        let a = &self.action;
        let single = || {
            a.cards
                .first()
                .copied()
                .filter(|_| a.cards.len() == 1)
                .ok_or_else(|| invalid(format!("{} needs exactly one card", a.kind)))
        };
        let action = match a.kind.as_str() {
            "deal" => Action::Deal(a.cards.clone()),
            "tribute" => Action::Tribute(single()?),
            "return" => Action::Return(single()?),
            "anti_tribute" => Action::AntiTribute(a.cards.clone()),
            "declare" => Action::Declare(a.count.ok_or_else(|| invalid("declare without count".into()))?),
            name => Action::Play(decode_combo(name, &a.cards, &a.wilds, self.level).map_err(invalid)?),
        };
        Ok(Event { game: self.game, step: self.step, seat, phase, action, level: self.level, digest })
    }
}

/// Rebuilds a combo from its logged kind, cards and wild assignments.
pub fn decode_combo(kind: &str, cards: &[Card], wilds: &[(Card, Card)], level: Level) -> Result<Combo, String> {
    let kind = ComboKind::from_name(kind, cards.len()).ok_or_else(|| format!("unknown combo kind `{kind}`"))?;
    if kind == ComboKind::Pass {
        return Ok(Combo::pass());
    }
    let candidates: Vec<Combo> =
        classify(cards, level).map_err(|e| e.to_string())?.into_iter().filter(|c| c.kind() == kind).collect();
    let wanted: Vec<WildAssignment> = wilds.iter().map(|&(wild, as_card)| WildAssignment { wild, as_card }).collect();
    let same_wilds = |c: &Combo| {
        let mut a: Vec<_> = c.wilds().iter().map(|w| (w.wild.index(), w.as_card.index())).collect();
        let mut b: Vec<_> = wanted.iter().map(|w| (w.wild.index(), w.as_card.index())).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    };
    if let Some(c) = candidates.iter().find(|c| same_wilds(c)) {
        return Ok(c.clone());
    }
    match candidates.as_slice() {
        [only] => Ok(only.clone()),
        [] => Err(format!("cards {cards:?} do not form a {}", kind.name())),
        _ => Err(format!("ambiguous {} without matching wild assignments", kind.name())),
    }
}

pub fn write_log<W: Write>(mut out: W, events: &[Event]) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, &LogRecord::from(e))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_log<R: BufRead>(input: R) -> Result<Vec<Event>, LogError> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LogRecord = serde_json::from_str(&line).map_err(|source| LogError::Json { line: i + 1, source })?;
        events.push(record.to_event(i + 1)?);
    }
    Ok(events)
}
