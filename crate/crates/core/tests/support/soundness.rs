//! Whole-match checks: card conservation, legality of every play and
//! reproducible logs.

#![allow(dead_code)]

use guandan_core::agents::{Agent, GreedyAgent, RandomAgent};
use guandan_core::cards::CardCounts;
use guandan_core::combos::beats;
use guandan_core::engine::{write_log, MatchState, Seat};
use guandan_core::sim::{play_match, run, MatchSummary, SimConfig, MAX_GAMES};

/// Greedy on seats 0 and 2, seeded random on 1 and 3.
pub fn greedy_vs_random(seed: u64) -> [Box<dyn Agent>; 4] {
    Seat::ALL.map(|s| -> Box<dyn Agent> {
        if s.index() % 2 == 0 {
            Box::new(GreedyAgent)
        } else {
            Box::new(RandomAgent::new(seed, s))
        }
    })
}

fn conserved(state: &MatchState) -> bool {
    let mut all = state.played().clone();
    for s in Seat::ALL {
        all.add_all(state.hand(s));
    }
    all == CardCounts::full_deck()
}

/// Plays one match, checking every step, then replays the seed and compares logs.
pub fn check_match(seed: u64) -> Result<MatchSummary, String> {
    let mut state = MatchState::new_match(seed);
    let mut agents = greedy_vs_random(seed);
    let mut observer = |s: &MatchState, seat: Seat, combo: &guandan_core::combos::Combo| -> Result<(), String> {
        if !conserved(s) {
            return Err(format!("game {} step {}: cards not conserved", s.game(), s.step()));
        }
        let legal = s.legal_actions(seat).map_err(|e| e.to_string())?;
        if !legal.contains(combo) {
            return Err(format!("game {} step {}: {combo} not legal for seat {seat}", s.game(), s.step()));
        }
        if let Some(inc) = &s.trick().incumbent {
            if !combo.is_pass() && !beats(combo, inc) {
                return Err(format!("game {} step {}: {combo} does not beat {inc}", s.game(), s.step()));
            }
        }
        Ok(())
    };
    let summary =
        run(&mut state, &mut agents, MAX_GAMES, None, &mut observer).map_err(|e| format!("seed {seed}: {e}"))?;
    if !conserved(&state) {
        return Err(format!("seed {seed}: cards not conserved at the end"));
    }
    if summary.truncated || state.winner().is_none() {
        return Err(format!("seed {seed}: match did not finish within {MAX_GAMES} games"));
    }
    let (again, summary2) = play_match(seed, &mut greedy_vs_random(seed), &SimConfig::default())
        .map_err(|e| format!("seed {seed} (second run): {e}"))?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_log(&mut a, state.history()).map_err(|e| e.to_string())?;
    write_log(&mut b, again.history()).map_err(|e| e.to_string())?;
    if a != b || summary != summary2 {
        return Err(format!("seed {seed}: two runs produced different logs"));
    }
    Ok(summary)
}
