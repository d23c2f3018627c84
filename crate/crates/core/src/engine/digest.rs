//! State digest: 64-bit FNV-1a over a canonical byte layout.
//!
//! Layout, in order (`ff` marks an absent value):
//!
//! | field | bytes |
//! |---|---|
//! | game number | u32 little-endian |
//! | phase | 1 (Dealing 0 .. MatchOver 4) |
//! | team levels | 2 (rank value 2..14) |
//! | lead team | 1 |
//! | A-level attempts | 2 |
//! | hands | 4 x 54 face counts, seat order |
//! | played | 54 face counts |
//! | turn | 1 |
//! | trick leader, last player, passes | 3 |
//! | incumbent | kind code, rank, length, then one face index per card |
//! | finish order | length, then seats |
//! | declarations | 4 (count or `ff`) |
//! | match winner | 1 |
//!
//! Kind codes: pass 0, single 1, pair 2, triple 3, full house 4,
//! straight 5, tube 6, plate 7, bomb 8, straight flush 9, four jokers 10.

use std::hash::Hasher;

use fnv::FnvHasher;

use super::{MatchState, Phase};
use crate::combos::{Combo, ComboKind};

const NONE: u8 = 0xff;

fn phase_code(p: Phase) -> u8 {
    match p {
        Phase::Dealing => 0,
        Phase::Tribute => 1,
        Phase::Playing => 2,
        Phase::RoundOver => 3,
        Phase::MatchOver => 4,
    }
}

pub(crate) fn kind_code(k: ComboKind) -> u8 {
    match k {
        ComboKind::Pass => 0,
        ComboKind::Single => 1,
        ComboKind::Pair => 2,
        ComboKind::Triple => 3,
        ComboKind::FullHouse => 4,
        ComboKind::Straight => 5,
        ComboKind::Tube => 6,
        ComboKind::Plate => 7,
        ComboKind::Bomb(_) => 8,
        ComboKind::StraightFlush => 9,
        ComboKind::FourJokers => 10,
    }
}

fn combo_bytes(out: &mut Vec<u8>, c: Option<&Combo>) {
    match c {
        None => out.push(NONE),
        Some(c) => {
            out.push(kind_code(c.kind()));
            out.push(c.rank());
            out.push(c.len() as u8);
            out.extend(c.cards().iter().map(|card| card.index() as u8));
        }
    }
}

/// The canonical serialization hashed by [`digest`].
pub fn canonical_bytes(s: &MatchState) -> Vec<u8> {
    let mut out = Vec::with_capacity(320);
    out.extend_from_slice(&s.game.to_le_bytes());
    out.push(phase_code(s.phase));
    out.extend(s.standings.team_levels.iter().map(|l| l.rank().value()));
    out.push(s.standings.lead_team.index() as u8);
    out.extend_from_slice(&s.standings.a_attempts);
    for h in &s.hands {
        out.extend_from_slice(h.raw());
    }
    out.extend_from_slice(s.played.raw());
    out.push(s.turn.map_or(NONE, |t| t.index() as u8));
    out.push(s.trick.leader.index() as u8);
    out.push(s.trick.last_player.map_or(NONE, |t| t.index() as u8));
    out.push(s.trick.passes);
    combo_bytes(&mut out, s.trick.incumbent.as_ref());
    out.push(s.finish_order.len() as u8);
    out.extend(s.finish_order.iter().map(|x| x.index() as u8));
    out.extend(s.declared.iter().map(|d| d.unwrap_or(NONE)));
    out.push(s.winner.map_or(NONE, |t| t.index() as u8));
    out
}

pub fn digest(s: &MatchState) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&canonical_bytes(s));
    h.finish()
}
