//! Match state machine: dealing, tricks, finish order, levels, tribute and
//! the A-level tribulation.
//!
//! Turn order is ascending seat index, wrapping, skipping seats that have
//! finished. A trick closes once every other active seat has passed in a row;
//! the last player leads again, or their teammate if the last player has
//! emptied their hand, else the next active seat.

mod digest;
pub mod event;
mod tribute;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use digest::{canonical_bytes, digest};
pub use event::{read_log, write_log, Action, Event, LogError, LogRecord, Phase, Seat, Team};
pub use tribute::{
    default_return, tribute_card, valid_return, TributeChoices, TributeMode, TributePlan, TributeRecord,
};

use crate::cards::{effective_order, is_wild, Card, CardCounts, Level, Rank};
use crate::combos::{beats, classify, legal_moves, Combo};
use crate::guider::{HistoryView, Observation};

pub const HAND_SIZE: usize = 27;
/// Hand size at or below which a seat announces its count.
pub const DECLARE_AT: usize = 10;
/// Failed A-level rounds before the level resets.
pub const A_ATTEMPTS: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("wrong phase: expected {expected}, found {actual}")]
    WrongPhase { expected: Phase, actual: Phase },
    #[error("not seat {seat}'s turn")]
    NotYourTurn { seat: Seat },
    #[error("illegal move by seat {seat}: {reason}")]
    IllegalMove { seat: Seat, reason: String },
    #[error("invalid tribute choice: {0}")]
    InvalidChoice(String),
    #[error("invalid return: {0}")]
    InvalidReturn(String),
    #[error("invalid deal: {0}")]
    InvalidDeal(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub tribute_mode: TributeMode,
}

/// Per-team levels, the lead team and A-level attempts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Standings {
    pub team_levels: [Level; 2],
    pub lead_team: Team,
    pub a_attempts: [u8; 2],
}

impl Default for Standings {
    fn default() -> Self {
        Standings { team_levels: [Level::TWO; 2], lead_team: Team::ALL[0], a_attempts: [0; 2] }
    }
}

impl Standings {
    pub fn active_level(&self) -> Level {
        self.team_levels[self.lead_team.index()]
    }

    /// Standings for the next game, plus the match winner if the round ended it.
    ///
    /// A round played at the lead team's own A consumes one of its attempts
    /// unless that team wins with a best victory, which ends the match.
    pub fn after(&self, outcome: &RoundOutcome) -> (Standings, Option<Team>) {
        let lead = self.lead_team.index();
        let win = outcome.winning_team;
        let lead_at_a = self.team_levels[lead] == Level::ACE;
        if lead_at_a && win == self.lead_team && outcome.best_victory {
            return (*self, Some(win));
        }
        let mut next = *self;
        if lead_at_a {
            next.a_attempts[lead] += 1;
        }
        next.team_levels[win.index()] = next.team_levels[win.index()].raised(outcome.upgrade);
        if lead_at_a && next.a_attempts[lead] >= A_ATTEMPTS {
            next.team_levels[lead] = Level::TWO;
            next.a_attempts[lead] = 0;
        }
        next.lead_team = win;
        (next, None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub winning_team: Team,
    pub upgrade: u8,
    pub best_victory: bool,
    /// All four seats, first finisher first.
    pub finish_order: [Seat; 4],
}

impl RoundOutcome {
    /// Outcome from the first three finishers (a fourth entry is optional).
    pub fn from_finish_order(order: &[Seat]) -> Option<RoundOutcome> {
        if order.len() < 3 || order.len() > 4 {
            return None;
        }
        let mut full = [Seat::ALL[0]; 4];
        let mut seen = [false; 4];
        for (i, s) in order.iter().enumerate() {
            if std::mem::replace(&mut seen[s.index()], true) {
                return None;
            }
            full[i] = *s;
        }
        if order.len() == 3 {
            full[3] = Seat::ALL[seen.iter().position(|x| !x)?];
        }
        let first = full[0];
        let mate = full.iter().position(|s| *s == first.partner())?;
        let upgrade = match mate {
            1 => 3,
            2 => 2,
            _ => 1,
        };
        Some(RoundOutcome { winning_team: first.team(), upgrade, best_victory: mate == 1, finish_order: full })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trick {
    pub leader: Seat,
    pub incumbent: Option<Combo>,
    pub last_player: Option<Seat>,
    /// Consecutive passes since the incumbent was played.
    pub passes: u8,
}

impl Trick {
    fn led_by(leader: Seat) -> Trick {
        Trick { leader, incumbent: None, last_player: None, passes: 0 }
    }
}

/// How a scripted state begins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Start {
    /// Play starts with this seat leading.
    Lead(Seat),
    /// Tribute is due from the given previous finish order.
    Tribute { previous_finish: [Seat; 4] },
}

/// A hand-built starting position, mainly for scenarios and tests.
#[derive(Debug, Clone)]
pub struct Setup {
    pub seed: u64,
    pub config: EngineConfig,
    pub standings: Standings,
    pub game: u32,
    /// Hands need not be full; cards in no hand count as already played.
    pub hands: [Vec<Card>; 4],
    pub start: Start,
}

#[derive(Debug, Clone)]
pub struct MatchState {
    config: EngineConfig,
    rng: ChaCha8Rng,
    game: u32,
    step: u32,
    standings: Standings,
    hands: [CardCounts; 4],
    played: CardCounts,
    trick: Trick,
    turn: Option<Seat>,
    finish_order: Vec<Seat>,
    declared: [Option<u8>; 4],
    previous_finish: Option<[Seat; 4]>,
    plan: Option<TributePlan>,
    tribute_log: Vec<TributeRecord>,
    phase: Phase,
    winner: Option<Team>,
    history: Vec<Event>,
    game_start: usize,
}

impl MatchState {
    pub fn new_match(seed: u64) -> MatchState {
        MatchState::with_config(seed, EngineConfig::default())
    }

    pub fn with_config(seed: u64, config: EngineConfig) -> MatchState {
        let mut s = MatchState::blank(seed, config, Standings::default(), 1);
        s.shuffle();
        let leader = Seat::ALL[s.rng.random_range(0..4)];
        s.standings.lead_team = leader.team();
        s.record_deal();
        s.start_play(leader);
        s
    }

    pub fn from_setup(setup: Setup) -> Result<MatchState, EngineError> {
        let mut s = MatchState::blank(setup.seed, setup.config, setup.standings, setup.game);
        s.set_hands(&setup.hands)?;
        s.record_deal();
        match setup.start {
            Start::Lead(leader) => s.start_play(leader),
            Start::Tribute { previous_finish } => {
                RoundOutcome::from_finish_order(&previous_finish)
                    .ok_or_else(|| EngineError::InvalidDeal("previous finish order is not a permutation".into()))?;
                s.previous_finish = Some(previous_finish);
                s.plan = Some(s.plan_tribute(previous_finish)?);
                s.phase = Phase::Tribute;
            }
        }
        Ok(s)
    }

    fn blank(seed: u64, config: EngineConfig, standings: Standings, game: u32) -> MatchState {
        MatchState {
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            game,
            step: 0,
            standings,
            hands: Default::default(),
            played: CardCounts::new(),
            trick: Trick::led_by(Seat::ALL[0]),
            turn: None,
            finish_order: Vec::new(),
            declared: [None; 4],
            previous_finish: None,
            plan: None,
            tribute_log: Vec::new(),
            phase: Phase::Dealing,
            winner: None,
            history: Vec::new(),
            game_start: 0,
        }
    }

    // --- accessors ---

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn game(&self) -> u32 {
        self.game
    }

    /// Index the next event of this game will carry.
    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn standings(&self) -> &Standings {
        &self.standings
    }

    pub fn active_level(&self) -> Level {
        self.standings.active_level()
    }

    pub fn hand(&self, seat: Seat) -> &CardCounts {
        &self.hands[seat.index()]
    }

    pub fn played(&self) -> &CardCounts {
        &self.played
    }

    pub fn trick(&self) -> &Trick {
        &self.trick
    }

    pub fn turn(&self) -> Option<Seat> {
        self.turn
    }

    pub fn finish_order(&self) -> &[Seat] {
        &self.finish_order
    }

    pub fn declared(&self) -> &[Option<u8>; 4] {
        &self.declared
    }

    pub fn tribute_plan(&self) -> Option<&TributePlan> {
        self.plan.as_ref()
    }

    pub fn tribute_log(&self) -> &[TributeRecord] {
        &self.tribute_log
    }

    pub fn winner(&self) -> Option<Team> {
        self.winner
    }

    /// Every event of the match, deals included.
    pub fn history(&self) -> &[Event] {
        &self.history
    }

    /// Events of the current game, deals included.
    pub fn game_events(&self) -> &[Event] {
        &self.history[self.game_start..]
    }

    /// Public events of the current game.
    pub fn history_view(&self) -> HistoryView {
        HistoryView { events: self.game_events().iter().filter(|e| e.action.is_public()).cloned().collect() }
    }

    pub fn digest(&self) -> u64 {
        digest(self)
    }

    pub fn observation(&self, seat: Seat) -> Observation {
        Observation {
            game: self.game,
            seat,
            own_hand: self.hands[seat.index()].clone(),
            level: self.active_level(),
            team_levels: self.standings.team_levels,
            lead_team: self.standings.lead_team,
            incumbent: self.trick.incumbent.clone(),
            incumbent_seat: self.trick.last_player,
            counts: std::array::from_fn(|i| self.hands[i].len() as u8),
            declarations: self.declared,
            finish_order: self.finish_order.clone(),
            tribute: self.tribute_log.clone(),
        }
    }

    fn is_active(&self, seat: Seat) -> bool {
        !self.hands[seat.index()].is_empty() && !self.finish_order.contains(&seat)
    }

    fn expect_phase(&self, expected: Phase) -> Result<(), EngineError> {
        if self.phase == expected {
            Ok(())
        } else {
            Err(EngineError::WrongPhase { expected, actual: self.phase })
        }
    }

    // --- dealing ---

    fn shuffle(&mut self) {
        let mut deck: Vec<Card> = CardCounts::full_deck().iter().collect();
        deck.shuffle(&mut self.rng);
        for (i, chunk) in deck.chunks(HAND_SIZE).enumerate() {
            self.hands[i] = chunk.iter().copied().collect();
        }
        self.played = CardCounts::new();
    }

    fn set_hands(&mut self, hands: &[Vec<Card>; 4]) -> Result<(), EngineError> {
        let mut union = CardCounts::new();
        let mut parsed: [CardCounts; 4] = Default::default();
        for (i, h) in hands.iter().enumerate() {
            parsed[i] =
                CardCounts::from_cards(h.iter().copied()).map_err(|e| EngineError::InvalidDeal(e.to_string()))?;
            union.add_all(&parsed[i]);
        }
        let mut rest = CardCounts::full_deck();
        if !rest.remove_all(&union) {
            return Err(EngineError::InvalidDeal("hands hold more copies than the deck".into()));
        }
        self.hands = parsed;
        self.played = rest;
        Ok(())
    }

    /// Resets per-game state and records one deal event per seat.
    fn record_deal(&mut self) {
        self.finish_order.clear();
        self.declared = [None; 4];
        self.trick = Trick::led_by(Seat::ALL[0]);
        self.turn = None;
        self.tribute_log.clear();
        self.plan = None;
        self.game_start = self.history.len();
        self.step = 0;
        self.phase = Phase::Dealing;
        for seat in Seat::ALL {
            let cards = self.hands[seat.index()].to_vec();
            self.push_event(seat, Action::Deal(cards));
        }
    }

    /// Replaces the current game's deal, e.g. with one read from a log.
    ///
    /// Allowed only before any tribute or play of the game. `leader` sets the
    /// opening seat when play starts without tribute.
    pub fn replace_deal(&mut self, hands: &[Vec<Card>; 4], leader: Option<Seat>) -> Result<(), EngineError> {
        if self.game_events().iter().any(|e| !matches!(e.action, Action::Deal(_)))
            || !matches!(self.phase, Phase::Tribute | Phase::Playing)
        {
            return Err(EngineError::InvalidDeal("the game is already under way".into()));
        }
        if hands.iter().map(Vec::len).sum::<usize>() != crate::cards::DECK_SIZE {
            return Err(EngineError::InvalidDeal("a deal must hand out the whole deck".into()));
        }
        self.set_hands(hands)?;
        let phase = self.phase;
        let leader = leader.unwrap_or(self.trick.leader);
        if phase == Phase::Playing && self.game == 1 {
            self.standings.lead_team = leader.team();
        }
        self.history.truncate(self.game_start);
        self.record_deal();
        match phase {
            Phase::Tribute => {
                let prev = self.previous_finish.ok_or_else(|| EngineError::InvalidDeal("no previous game".into()))?;
                self.plan = Some(self.plan_tribute(prev)?);
                self.phase = Phase::Tribute;
            }
            _ => self.start_play(leader),
        }
        Ok(())
    }

    fn start_play(&mut self, leader: Seat) {
        self.phase = Phase::Playing;
        self.trick = Trick::led_by(leader);
        self.turn = Some(leader);
    }

    fn push_event(&mut self, seat: Seat, action: Action) {
        let event = Event {
            game: self.game,
            step: self.step,
            seat,
            phase: self.phase,
            action,
            level: self.active_level(),
            digest: digest(self),
        };
        self.history.push(event);
        self.step += 1;
    }

    // --- play ---

    pub fn legal_actions(&self, seat: Seat) -> Result<Vec<Combo>, EngineError> {
        self.expect_phase(Phase::Playing)?;
        if self.turn != Some(seat) {
            return Err(EngineError::NotYourTurn { seat });
        }
        Ok(legal_moves(&self.hands[seat.index()], self.trick.incumbent.as_ref(), self.active_level()))
    }

    fn check_move(&self, seat: Seat, combo: &Combo) -> Result<(), String> {
        if combo.is_pass() {
            return match self.trick.incumbent {
                None => Err("the leader may not pass".into()),
                Some(_) => Ok(()),
            };
        }
        let level = self.active_level();
        if !self.hands[seat.index()].contains_all(&combo.counts()) {
            return Err(format!("{combo} uses cards not in hand"));
        }
        let readings = classify(combo.cards(), level).map_err(|e| e.to_string())?;
        if !readings.contains(combo) {
            return Err(format!("{combo} is not a valid combination at level {level}"));
        }
        let wild = Card::new(crate::cards::Suit::Hearts, level.rank());
        let wild_count = combo.cards().iter().filter(|c| is_wild(**c, level)).count();
        let sane = combo.wilds().iter().all(|w| w.wild == wild && !w.as_card.is_joker());
        if !sane || combo.wilds().len() > wild_count {
            return Err(format!("{combo} has an impossible wild assignment"));
        }
        if let Some(inc) = &self.trick.incumbent {
            if !beats(combo, inc) {
                return Err(format!("{combo} does not beat {inc}"));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, seat: Seat, combo: &Combo) -> Result<(), EngineError> {
        self.expect_phase(Phase::Playing)?;
        if self.turn != Some(seat) {
            return Err(EngineError::NotYourTurn { seat });
        }
        self.check_move(seat, combo).map_err(|reason| EngineError::IllegalMove { seat, reason })?;

        if combo.is_pass() {
            self.trick.passes += 1;
        } else {
            let counts = combo.counts();
            self.hands[seat.index()].remove_all(&counts);
            self.played.add_all(&counts);
            self.trick.incumbent = Some(combo.clone());
            self.trick.last_player = Some(seat);
            self.trick.passes = 0;
            if self.hands[seat.index()].is_empty() {
                self.finish_order.push(seat);
            }
        }

        if self.finish_order.len() >= 3 {
            self.phase = Phase::RoundOver;
            self.turn = None;
        } else {
            self.advance_turn(seat);
        }
        self.push_event(seat, Action::Play(combo.clone()));

        let left = self.hands[seat.index()].len();
        if !combo.is_pass() && left > 0 && left <= DECLARE_AT && self.declared[seat.index()].is_none() {
            self.declared[seat.index()] = Some(left as u8);
            self.push_event(seat, Action::Declare(left as u8));
        }
        Ok(())
    }

    fn advance_turn(&mut self, actor: Seat) {
        let last = self.trick.last_player;
        let others = Seat::ALL.iter().filter(|s| self.is_active(**s) && Some(**s) != last).count();
        if self.trick.incumbent.is_some() && self.trick.passes as usize >= others {
            let last = last.expect("an incumbent has a player");
            let leader = if self.is_active(last) {
                last
            } else if self.is_active(last.partner()) {
                last.partner()
            } else {
                self.next_active(last)
            };
            self.trick = Trick::led_by(leader);
            self.turn = Some(leader);
        } else {
            self.turn = Some(self.next_active(actor));
        }
    }

    fn next_active(&self, from: Seat) -> Seat {
        let mut s = from.next();
        while !self.is_active(s) {
            s = s.next();
        }
        s
    }

    // --- round end ---

    pub fn round_outcome(&self) -> Result<RoundOutcome, EngineError> {
        self.expect_phase(Phase::RoundOver)?;
        Ok(RoundOutcome::from_finish_order(&self.finish_order).expect("three distinct finishers"))
    }

    /// Applies the round result to the standings, then either ends the match
    /// or deals the next game and enters the tribute phase.
    pub fn advance_level(&mut self) -> Result<RoundOutcome, EngineError> {
        let outcome = self.round_outcome()?;
        let (next, winner) = self.standings.after(&outcome);
        self.standings = next;
        if let Some(team) = winner {
            self.winner = Some(team);
            self.phase = Phase::MatchOver;
            self.turn = None;
            return Ok(outcome);
        }
        self.game += 1;
        self.previous_finish = Some(outcome.finish_order);
        self.shuffle();
        self.record_deal();
        self.plan = Some(self.plan_tribute(outcome.finish_order)?);
        self.phase = Phase::Tribute;
        Ok(outcome)
    }

    // --- tribute ---

    fn plan_tribute(&self, prev: [Seat; 4]) -> Result<TributePlan, EngineError> {
        let level = self.active_level();
        let both = prev[0].team() == prev[1].team() || self.config.tribute_mode == TributeMode::Double;
        let (givers, receivers) =
            if both { (vec![prev[2], prev[3]], vec![prev[0], prev[1]]) } else { (vec![prev[3]], vec![prev[0]]) };
        let mut offers = Vec::new();
        let mut big_jokers = Vec::new();
        for g in givers {
            let hand = &self.hands[g.index()];
            let card = tribute_card(hand, level)
                .ok_or_else(|| EngineError::InvalidDeal(format!("seat {g} holds no card eligible for tribute")))?;
            offers.push((g, card));
            big_jokers.extend(std::iter::repeat_n(g, hand.rank_count(Rank::BigJoker) as usize));
        }
        Ok(TributePlan { offers, receivers, big_jokers, previous_winner: prev[0] })
    }

    /// Settles the pending tribute and opens play.
    pub fn resolve_tribute(&mut self, choices: &TributeChoices) -> Result<(), EngineError> {
        self.expect_phase(Phase::Tribute)?;
        let backup = self.clone();
        let result = self.settle(choices);
        if result.is_err() {
            *self = backup;
        }
        result
    }

    fn settle(&mut self, choices: &TributeChoices) -> Result<(), EngineError> {
        let plan = self.plan.take().expect("tribute phase has a plan");
        let level = self.active_level();

        if plan.anti_tribute() {
            let mut seats = plan.big_jokers.clone();
            seats.dedup();
            for seat in seats {
                let n = plan.big_jokers.iter().filter(|s| **s == seat).count();
                for _ in 0..n {
                    self.tribute_log.push(TributeRecord::Refused { seat, card: Card::BIG_JOKER });
                }
                self.push_event(seat, Action::AntiTribute(vec![Card::BIG_JOKER; n]));
            }
            self.start_play(plan.previous_winner);
            return Ok(());
        }

        let order_key = |c: Card| (effective_order(c.rank(), level), c.suit());
        let first = match (plan.offers.as_slice(), choices.pick) {
            (offers, Some(pick)) => offers
                .iter()
                .position(|(_, c)| *c == pick)
                .ok_or_else(|| EngineError::InvalidChoice(format!("{pick} was not offered")))?,
            ([_], None) => 0,
            ([a, b], None) => usize::from(order_key(b.1) > order_key(a.1)),
            _ => unreachable!("one or two tributes"),
        };
        let mut pairs = vec![(plan.offers[first], plan.receivers[0])];
        if plan.offers.len() == 2 {
            pairs.push((plan.offers[1 - first], plan.receivers[1]));
        }
        for &((giver, card), receiver) in &pairs {
            self.hands[giver.index()].remove(card);
            self.hands[receiver.index()].add(card);
            self.tribute_log.push(TributeRecord::Paid { from: giver, to: receiver, card });
            self.push_event(giver, Action::Tribute(card));
        }
        for (seat, _) in &choices.returns {
            if !plan.receivers.contains(seat) {
                return Err(EngineError::InvalidReturn(format!("seat {seat} received no tribute")));
            }
        }
        for &((giver, _), receiver) in &pairs {
            let hand = &self.hands[receiver.index()];
            let card = match choices.returns.iter().find(|(s, _)| *s == receiver) {
                Some(&(_, c)) => c,
                None => default_return(hand, level).expect("a receiver holds cards"),
            };
            if !valid_return(hand, card, level) {
                return Err(EngineError::InvalidReturn(format!(
                    "seat {receiver} may not return {card}: a card of rank 10 or lower (or the smallest card) is required"
                )));
            }
            self.hands[receiver.index()].remove(card);
            self.hands[giver.index()].add(card);
            self.tribute_log.push(TributeRecord::Returned { from: receiver, to: giver, card });
            self.push_event(receiver, Action::Return(card));
        }
        self.start_play(pairs[0].0 .0);
        Ok(())
    }
}
