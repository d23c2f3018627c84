//! Match driver: runs agents against the engine, and replays logs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentError, ReplayAgent};
use crate::cards::{Card, Level};
use crate::combos::Combo;
use crate::engine::{Action, EngineConfig, EngineError, Event, MatchState, Phase, Seat, Team, TributeChoices};

/// Default cap on games per match.
pub const MAX_GAMES: u32 = 1000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("seat {seat}: {source}")]
    Agent { seat: Seat, source: AgentError },
    #[error("seat {seat} chose {action}, which is not a legal action")]
    IllegalChoice { seat: Seat, action: String },
    #[error("observer: {0}")]
    Observer(String),
    #[error("replay diverged from the log: {0}")]
    Replay(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub engine: EngineConfig,
    pub max_games: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { engine: EngineConfig::default(), max_games: MAX_GAMES }
    }
}

/// Per-match statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSummary {
    pub games: u32,
    pub winner: Option<Team>,
    /// The game cap was reached before the match ended.
    pub truncated: bool,
    pub finish_orders: Vec<[Seat; 4]>,
    /// Team levels after each completed game.
    pub levels: Vec<[Level; 2]>,
    pub tributes: u32,
    pub anti_tributes: u32,
    pub actions: u64,
}

/// A deal to impose on a game, as read from a log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deal {
    pub hands: [Vec<Card>; 4],
    /// Opening seat, needed only for the first game.
    pub leader: Option<Seat>,
}

/// Called before each play or pass is applied.
pub type Observer<'a> = dyn FnMut(&MatchState, Seat, &Combo) -> Result<(), String> + 'a;

/// Plays `state` to the end of the match or the game cap.
pub fn run(
    state: &mut MatchState,
    agents: &mut [Box<dyn Agent>; 4],
    max_games: u32,
    deals: Option<&BTreeMap<u32, Deal>>,
    observer: &mut Observer<'_>,
) -> Result<MatchSummary, SimError> {
    let mut summary = MatchSummary {
        games: 0,
        winner: None,
        truncated: false,
        finish_orders: Vec::new(),
        levels: Vec::new(),
        tributes: 0,
        anti_tributes: 0,
        actions: 0,
    };
    let mut dealt = BTreeSet::new();
    let agent_err = |seat: Seat| move |source| SimError::Agent { seat, source };
    loop {
        if let Some(deal) = deals.and_then(|d| d.get(&state.game())) {
            if dealt.insert(state.game()) {
                state.replace_deal(&deal.hands, deal.leader)?;
            }
        }
        match state.phase() {
            Phase::Tribute => {
                let plan = state.tribute_plan().expect("tribute phase has a plan").clone();
                let mut choices = TributeChoices::default();
                if plan.anti_tribute() {
                    summary.anti_tributes += 1;
                } else {
                    summary.tributes += plan.offers.len() as u32;
                    let first = plan.receivers[0];
                    if plan.offers.len() == 2 {
                        choices.pick = agents[first.index()]
                            .pick_tribute(&state.observation(first), &plan.offers)
                            .map_err(agent_err(first))?;
                    }
                    for &r in &plan.receivers {
                        if let Some(card) =
                            agents[r.index()].return_card(&state.observation(r)).map_err(agent_err(r))?
                        {
                            choices.returns.push((r, card));
                        }
                    }
                }
                state.resolve_tribute(&choices)?;
            }
            Phase::Playing => {
                let seat = state.turn().expect("a seat is to act");
                let legal = state.legal_actions(seat)?;
                let obs = state.observation(seat);
                let combo = agents[seat.index()].choose(&obs, &legal).map_err(agent_err(seat))?;
                if !legal.contains(&combo) {
                    return Err(SimError::IllegalChoice { seat, action: combo.to_string() });
                }
                observer(state, seat, &combo).map_err(SimError::Observer)?;
                state.apply(seat, &combo)?;
                summary.actions += 1;
            }
            Phase::RoundOver => {
                let outcome = state.round_outcome()?;
                summary.games += 1;
                summary.finish_orders.push(outcome.finish_order);
                if state.game() >= max_games && state.standings().after(&outcome).1.is_none() {
                    summary.truncated = true;
                    summary.levels.push(state.standings().after(&outcome).0.team_levels);
                    break;
                }
                state.advance_level()?;
                summary.levels.push(state.standings().team_levels);
            }
            Phase::MatchOver => {
                summary.winner = state.winner();
                break;
            }
            Phase::Dealing => unreachable!("dealing completes inside the engine"),
        }
    }
    Ok(summary)
}

/// Plays one seeded match.
pub fn play_match(
    seed: u64,
    agents: &mut [Box<dyn Agent>; 4],
    config: &SimConfig,
) -> Result<(MatchState, MatchSummary), SimError> {
    let mut state = MatchState::with_config(seed, config.engine.clone());
    let summary = run(&mut state, agents, config.max_games, None, &mut |_, _, _| Ok(()))?;
    Ok((state, summary))
}

/// Deals recorded in a log, keyed by game.
pub fn deals_from_log(events: &[Event]) -> BTreeMap<u32, Deal> {
    let mut deals: BTreeMap<u32, Deal> = BTreeMap::new();
    for e in events {
        if let Action::Deal(cards) = &e.action {
            let deal = deals.entry(e.game).or_insert_with(|| Deal { hands: Default::default(), leader: None });
            deal.hands[e.seat.index()] = cards.clone();
        }
    }
    let first_game = deals.keys().next().copied();
    if let Some(g) = first_game {
        let leader = events.iter().find(|e| e.game == g && matches!(e.action, Action::Play(_))).map(|e| e.seat);
        if let Some(d) = deals.get_mut(&g) {
            d.leader = leader;
        }
    }
    deals
}

/// Re-simulates a log with replay agents and checks the regenerated events
/// match it exactly.
pub fn replay(
    events: &[Event],
    config: &EngineConfig,
    observer: &mut Observer<'_>,
) -> Result<(MatchState, MatchSummary), SimError> {
    let first = events.first().ok_or_else(|| SimError::Replay("empty log".into()))?;
    if first.game != 1 {
        return Err(SimError::Replay(format!("log starts at game {}, expected 1", first.game)));
    }
    let deals = deals_from_log(events);
    let last_game = events.last().map_or(1, |e| e.game);
    let mut agents: [Box<dyn Agent>; 4] =
        Seat::ALL.map(|s| Box::new(ReplayAgent::from_events(s, events)) as Box<dyn Agent>);
    let mut state = MatchState::with_config(0, config.clone());
    let summary = run(&mut state, &mut agents, last_game, Some(&deals), observer)?;
    let got = state.history();
    if let Some(i) = (0..got.len().max(events.len())).find(|&i| got.get(i) != events.get(i)) {
        return Err(SimError::Replay(format!("event {i}: expected {:?}, regenerated {:?}", events.get(i), got.get(i))));
    }
    Ok((state, summary))
}
