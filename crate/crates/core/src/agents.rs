//! Decision policies for simulated seats: seeded random, greedy, and replay
//! from a log.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::Card;
use crate::combos::Combo;
use crate::engine::{read_log, Action, Event, LogError, Seat};
use crate::guider::Observation;

/// Hand size at or below which the greedy policy spends bombs on basic plays.
pub const GREEDY_BOMB_HAND: usize = 6;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("no legal actions offered to seat {0}")]
    NoLegalActions(Seat),
    #[error("replay log has no more actions for seat {0}")]
    ReplayExhausted(Seat),
    #[error("logged action {action} for seat {seat} is not legal here")]
    ReplayIllegal { seat: Seat, action: String },
    #[error("agent configuration: {0}")]
    Config(String),
    #[error("replay log: {0}")]
    Log(#[from] LogError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Random,
    Greedy,
    Replay,
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(AgentKind::Random),
            "greedy" => Ok(AgentKind::Greedy),
            "replay" => Ok(AgentKind::Replay),
            _ => Err(format!("unknown agent `{s}` (expected random, greedy or replay)")),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Random => "random",
            AgentKind::Greedy => "greedy",
            AgentKind::Replay => "replay",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub kind: AgentKind,
    pub seed: u64,
    pub replay_path: Option<PathBuf>,
}

impl AgentConfig {
    pub fn new(kind: AgentKind, seed: u64) -> AgentConfig {
        AgentConfig { kind, seed, replay_path: None }
    }
}

pub trait Agent: Send {
    /// Picks one element of `legal`.
    fn choose(&mut self, obs: &Observation, legal: &[Combo]) -> Result<Combo, AgentError>;

    /// Which offered tribute to take when two are offered; `None` takes the higher.
    fn pick_tribute(&mut self, _obs: &Observation, _offers: &[(Seat, Card)]) -> Result<Option<Card>, AgentError> {
        Ok(None)
    }

    /// Card to hand back after receiving tribute; `None` uses the default.
    fn return_card(&mut self, _obs: &Observation) -> Result<Option<Card>, AgentError> {
        Ok(None)
    }
}

/// Uniform choice over the legal list from a per-seat seeded stream.
pub struct RandomAgent {
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(seed: u64, seat: Seat) -> RandomAgent {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(seat.index() as u64);
        RandomAgent { rng }
    }
}

impl Agent for RandomAgent {
    fn choose(&mut self, obs: &Observation, legal: &[Combo]) -> Result<Combo, AgentError> {
        if legal.is_empty() {
            return Err(AgentError::NoLegalActions(obs.seat));
        }
        Ok(legal[self.rng.random_range(0..legal.len())].clone())
    }
}

pub struct GreedyAgent;

impl Agent for GreedyAgent {
    fn choose(&mut self, obs: &Observation, legal: &[Combo]) -> Result<Combo, AgentError> {
        greedy_choice(obs, legal).ok_or(AgentError::NoLegalActions(obs.seat))
    }
}

/// The greedy policy.
///
/// Leading: the combo with the most cards, then the lowest rank, then the
/// lexicographically smallest card codes. Following: the beating combo with
/// the fewest cards, then the lowest bomb tier and rank; bombs are held back
/// against basic plays while the hand has more than six cards. Passes when
/// nothing qualifies.
pub fn greedy_choice(obs: &Observation, legal: &[Combo]) -> Option<Combo> {
    if legal.is_empty() {
        return None;
    }
    let plays = legal.iter().filter(|c| !c.is_pass());
    let pick = match &obs.incumbent {
        None => plays.min_by_key(|c| (std::cmp::Reverse(c.len()), c.rank(), c.codes(), c.kind())),
        Some(inc) => {
            let spend_bombs = inc.kind().is_bomb_class() || obs.own_hand.len() <= GREEDY_BOMB_HAND;
            plays
                .filter(|c| spend_bombs || !c.kind().is_bomb_class())
                .min_by_key(|c| (c.len(), c.kind().tier(), c.rank(), c.codes(), c.kind()))
        }
    };
    pick.or_else(|| legal.iter().find(|c| c.is_pass())).cloned()
}

/// Replays one seat's logged decisions in order.
pub struct ReplayAgent {
    seat: Seat,
    plays: VecDeque<Combo>,
    picks: BTreeMap<u32, Card>,
    returns: BTreeMap<u32, Card>,
}

impl ReplayAgent {
    pub fn from_events(seat: Seat, events: &[Event]) -> ReplayAgent {
        let mut plays = VecDeque::new();
        let mut picks = BTreeMap::new();
        let mut returns = BTreeMap::new();
        for e in events {
            match &e.action {
                Action::Play(c) if e.seat == seat => plays.push_back(c.clone()),
                Action::Tribute(card) => {
                    picks.entry(e.game).or_insert(*card);
                }
                Action::Return(card) if e.seat == seat => {
                    returns.insert(e.game, *card);
                }
                _ => {}
            }
        }
        ReplayAgent { seat, plays, picks, returns }
    }

    pub fn remaining(&self) -> usize {
        self.plays.len()
    }
}

impl Agent for ReplayAgent {
    fn choose(&mut self, _obs: &Observation, legal: &[Combo]) -> Result<Combo, AgentError> {
        let next = self.plays.pop_front().ok_or(AgentError::ReplayExhausted(self.seat))?;
        if legal.contains(&next) {
            Ok(next)
        } else {
            Err(AgentError::ReplayIllegal { seat: self.seat, action: next.to_string() })
        }
    }

    fn pick_tribute(&mut self, obs: &Observation, _offers: &[(Seat, Card)]) -> Result<Option<Card>, AgentError> {
        Ok(self.picks.get(&obs.game).copied())
    }

    fn return_card(&mut self, obs: &Observation) -> Result<Option<Card>, AgentError> {
        Ok(self.returns.get(&obs.game).copied())
    }
}

pub fn make_agent(config: &AgentConfig, seat: Seat) -> Result<Box<dyn Agent>, AgentError> {
    Ok(match config.kind {
        AgentKind::Random => Box::new(RandomAgent::new(config.seed, seat)),
        AgentKind::Greedy => Box::new(GreedyAgent),
        AgentKind::Replay => {
            let path = config
                .replay_path
                .as_ref()
                .ok_or_else(|| AgentError::Config("a replay agent needs a replay path".into()))?;
            let file = File::open(path).map_err(|e| AgentError::Config(format!("{}: {e}", path.display())))?;
            let events = read_log(BufReader::new(file))?;
            Box::new(ReplayAgent::from_events(seat, &events))
        }
    })
}
