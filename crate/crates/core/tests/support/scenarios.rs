//! Scripted tribute and round-result scenarios with hand-written expectations.

#![allow(dead_code)]

use std::fmt::Debug;

use guandan_core::cards::{parse_cards, Card, CardCounts, Level, Rank};
use guandan_core::combos::{classify, Combo};
use guandan_core::engine::{
    EngineConfig, EngineError, MatchState, Phase, RoundOutcome, Seat, Setup, Standings, Start, Team, TributeChoices,
    TributeMode, TributeRecord,
};

pub type Check = Result<(), String>;

pub fn expect_eq<T: PartialEq + Debug>(what: &str, got: T, want: T) -> Check {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn seat(i: usize) -> Seat {
    Seat::ALL[i]
}

fn card(code: &str) -> Card {
    parse_cards(code).unwrap()[0]
}

fn counts(codes: &str) -> CardCounts {
    CardCounts::from_cards(parse_cards(codes).unwrap()).unwrap()
}

fn tribute_state(prev: [usize; 4], hands: [&str; 4], level: Level, mode: TributeMode) -> Result<MatchState, String> {
    let standings = Standings { team_levels: [level, Level::TWO], lead_team: Team::ALL[0], a_attempts: [0; 2] };
    MatchState::from_setup(Setup {
        seed: 0,
        config: EngineConfig { tribute_mode: mode },
        standings,
        game: 2,
        hands: hands.map(|h| parse_cards(h).unwrap()),
        start: Start::Tribute { previous_finish: prev.map(seat) },
    })
    .map_err(|e| e.to_string())
}

fn paid(from: usize, to: usize, c: &str) -> TributeRecord {
    TributeRecord::Paid { from: seat(from), to: seat(to), card: card(c) }
}

fn returned(from: usize, to: usize, c: &str) -> TributeRecord {
    TributeRecord::Returned { from: seat(from), to: seat(to), card: card(c) }
}

fn refused(s: usize) -> TributeRecord {
    TributeRecord::Refused { seat: seat(s), card: Card::BIG_JOKER }
}

/// Resolves with `choices` and checks the movements, final hands and leader.
fn settle(
    mut s: MatchState,
    choices: TributeChoices,
    log: Vec<TributeRecord>,
    hands: [&str; 4],
    leader: usize,
) -> Check {
    s.resolve_tribute(&choices).map_err(|e| e.to_string())?;
    expect_eq("movements", s.tribute_log().to_vec(), log)?;
    for (i, h) in hands.iter().enumerate() {
        expect_eq(&format!("hand of seat {i}"), s.hand(seat(i)).clone(), counts(h))?;
    }
    expect_eq("phase", s.phase(), Phase::Playing)?;
    expect_eq("leader", s.turn(), Some(seat(leader)))
}

fn double_down_both_pay() -> Check {
    let s = tribute_state([0, 2, 1, 3], ["S5 S6", "SA S3", "S7 S8", "SK S4"], Level::TWO, TributeMode::Standard)?;
    settle(
        s,
        TributeChoices::default(),
        vec![paid(1, 0, "SA"), paid(3, 2, "SK"), returned(0, 1, "S5"), returned(2, 3, "S7")],
        ["S6 SA", "S3 S5", "S8 SK", "S4 S7"],
        1,
    )
}

fn double_down_first_picks_lower() -> Check {
    let s = tribute_state([0, 2, 1, 3], ["S5 S6", "SA S3", "S7 S8", "SK S4"], Level::TWO, TributeMode::Standard)?;
    let choices = TributeChoices { pick: Some(card("SK")), returns: Vec::new() };
    settle(
        s,
        choices,
        vec![paid(3, 0, "SK"), paid(1, 2, "SA"), returned(0, 3, "S5"), returned(2, 1, "S7")],
        ["S6 SK", "S3 S7", "S8 SA", "S4 S5"],
        3,
    )
}

fn single_down_last_pays_first() -> Check {
    let s = tribute_state([0, 1, 2, 3], ["S5 S6", "SA", "SQ", "SK S4"], Level::TWO, TributeMode::Standard)?;
    settle(
        s,
        TributeChoices::default(),
        vec![paid(3, 0, "SK"), returned(0, 3, "S5")],
        ["S6 SK", "SA", "SQ", "S4 S5"],
        3,
    )
}

fn single_down_teammate_last() -> Check {
    let s = tribute_state([0, 1, 3, 2], ["S5 S6", "SA", "SK S4", "SQ"], Level::TWO, TributeMode::Standard)?;
    settle(
        s,
        TributeChoices::default(),
        vec![paid(2, 0, "SK"), returned(0, 2, "S5")],
        ["S6 SK", "SA", "S4 S5", "SQ"],
        2,
    )
}

fn double_mode_both_later_pay() -> Check {
    let s = tribute_state([0, 1, 2, 3], ["S5 S6", "S7 S8", "SQ S3", "SK S4"], Level::TWO, TributeMode::Double)?;
    settle(
        s,
        TributeChoices::default(),
        vec![paid(3, 0, "SK"), paid(2, 1, "SQ"), returned(0, 3, "S5"), returned(1, 2, "S7")],
        ["S6 SK", "S8 SQ", "S3 S7", "S4 S5"],
        3,
    )
}

fn anti_tribute_single_holder() -> Check {
    let s = tribute_state([0, 1, 2, 3], ["S5 S6", "SA", "SQ", "BJ BJ SK"], Level::TWO, TributeMode::Standard)?;
    settle(s, TributeChoices::default(), vec![refused(3), refused(3)], ["S5 S6", "SA", "SQ", "BJ BJ SK"], 0)
}

fn anti_tribute_split_jokers() -> Check {
    let s = tribute_state([2, 0, 1, 3], ["S5 S6", "BJ SA", "S7 S8", "BJ SK"], Level::TWO, TributeMode::Standard)?;
    settle(s, TributeChoices::default(), vec![refused(1), refused(3)], ["S5 S6", "BJ SA", "S7 S8", "BJ SK"], 2)
}

fn single_big_joker_still_pays() -> Check {
    let s = tribute_state([0, 1, 2, 3], ["S5 S6", "SA", "SQ", "BJ LJ SA S3"], Level::TWO, TributeMode::Standard)?;
    settle(
        s,
        TributeChoices::default(),
        vec![paid(3, 0, "SA"), returned(0, 3, "S5")],
        ["S6 SA", "SA", "SQ", "BJ LJ S3 S5"],
        3,
    )
}

fn level_card_is_tributed() -> Check {
    let level = Level::new(Rank::Five).unwrap();
    let s = tribute_state([0, 1, 2, 3], ["S3 S6", "SA", "SQ", "D5 SA S6"], level, TributeMode::Standard)?;
    settle(
        s,
        TributeChoices::default(),
        vec![paid(3, 0, "D5"), returned(0, 3, "S3")],
        ["S6 D5", "SA", "SQ", "SA S6 S3"],
        3,
    )
}

fn heart_level_card_is_kept() -> Check {
    let level = Level::new(Rank::Five).unwrap();
    let s = tribute_state([0, 1, 2, 3], ["S3 S6", "SA", "SQ", "H5 SA S6"], level, TributeMode::Standard)?;
    settle(
        s,
        TributeChoices::default(),
        vec![paid(3, 0, "SA"), returned(0, 3, "S3")],
        ["S6 SA", "SA", "SQ", "H5 S6 S3"],
        3,
    )
}

fn return_must_be_ten_or_lower() -> Check {
    let hands = ["S10 SJ S4", "SA", "SQ", "SK S3"];
    let s = tribute_state([0, 1, 2, 3], hands, Level::TWO, TributeMode::Standard)?;
    let mut bad = s.clone();
    let over = TributeChoices { pick: None, returns: vec![(seat(0), card("SJ"))] };
    match bad.resolve_tribute(&over) {
        Err(EngineError::InvalidReturn(_)) => {}
        other => return Err(format!("returning SJ while holding S10: got {other:?}")),
    }
    expect_eq("state after rejected return", bad.phase(), Phase::Tribute)?;
    expect_eq("hand after rejected return", bad.hand(seat(0)).clone(), counts("S10 SJ S4"))?;
    let ok = TributeChoices { pick: None, returns: vec![(seat(0), card("S10"))] };
    settle(s, ok, vec![paid(3, 0, "SK"), returned(0, 3, "S10")], ["SJ S4 SK", "SA", "SQ", "S3 S10"], 3)
}

fn all_high_returns_smallest() -> Check {
    let hands = ["SJ SQ SK", "SA", "SQ", "SA S3"];
    let s = tribute_state([0, 1, 2, 3], hands, Level::TWO, TributeMode::Standard)?;
    let mut bad = s.clone();
    let over = TributeChoices { pick: None, returns: vec![(seat(0), card("SQ"))] };
    if !matches!(bad.resolve_tribute(&over), Err(EngineError::InvalidReturn(_))) {
        return Err("returning SQ when SJ is smallest was accepted".into());
    }
    settle(
        s,
        TributeChoices::default(),
        vec![paid(3, 0, "SA"), returned(0, 3, "SJ")],
        ["SQ SK SA", "SA", "SQ", "S3 SJ"],
        3,
    )
}

/// Twelve tribute scenarios, each checking exact card movements.
/// A named check.
pub type Scenario = (&'static str, fn() -> Check);

pub fn tribute_scenarios() -> Vec<Scenario> {
    vec![
        ("double-down: both losers pay, higher card to first", double_down_both_pay as fn() -> Check),
        ("double-down: first finisher picks the lower card", double_down_first_picks_lower),
        ("single-down: last pays first", single_down_last_pays_first),
        ("single-down: last finisher on the winning team pays", single_down_teammate_last),
        ("double mode: both later finishers pay", double_mode_both_later_pay),
        ("anti-tribute: one loser holds both big jokers", anti_tribute_single_holder),
        ("anti-tribute: big jokers split across losers", anti_tribute_split_jokers),
        ("one big joker does not refuse; jokers are not tributed", single_big_joker_still_pays),
        ("level card is the highest tribute", level_card_is_tributed),
        ("heart level card is never tributed", heart_level_card_is_kept),
        ("return must be rank 10 or lower", return_must_be_ten_or_lower),
        ("all cards above 10: smallest is returned", all_high_returns_smallest),
    ]
}

fn outcome(order: &[usize]) -> RoundOutcome {
    RoundOutcome::from_finish_order(&order.iter().map(|&i| seat(i)).collect::<Vec<_>>()).unwrap()
}

/// Upgrade for each of the 24 finish orders, from teammate positions only.
pub fn upgrade_table() -> Check {
    let mut perms = Vec::new();
    permute(&mut vec![0, 1, 2, 3], 0, &mut perms);
    expect_eq("finish orders", perms.len(), 24)?;
    for p in perms {
        let o = outcome(&p);
        let mate = (p[0] + 2) % 4;
        let pos = p.iter().position(|&s| s == mate).unwrap();
        let want = [0, 3, 2, 1][pos];
        expect_eq(&format!("upgrade for {p:?}"), o.upgrade, want)?;
        expect_eq(&format!("best victory for {p:?}"), o.best_victory, pos == 1)?;
        expect_eq(&format!("winner for {p:?}"), o.winning_team, seat(p[0]).team())?;
        expect_eq(&format!("three-seat form of {p:?}"), outcome(&p[..3]), o.clone())?;
    }
    Ok(())
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

fn play(s: &mut MatchState, who: usize, codes: &str) -> Result<(), String> {
    let combo = if codes.is_empty() {
        Combo::pass()
    } else {
        classify(&parse_cards(codes).unwrap(), s.active_level()).map_err(|e| e.to_string())?.remove(0)
    };
    s.apply(seat(who), &combo).map_err(|e| e.to_string())
}

/// Plays a scripted round where seats finish in `order`. Finishers hold one
/// single each, ascending in finishing order, and play on their turn; every
/// other seat passes.
fn scripted_round(standings: Standings, order: [usize; 3]) -> Result<MatchState, String> {
    let singles = ["S3", "S4", "S5"];
    let mut hands: [Vec<Card>; 4] = Default::default();
    for (i, &s) in order.iter().enumerate() {
        hands[s] = parse_cards(singles[i]).unwrap();
    }
    let last = (0..4).find(|s| !order.contains(s)).unwrap();
    hands[last] = parse_cards("S7 S8").unwrap();
    let mut s = MatchState::from_setup(Setup {
        seed: 0,
        config: EngineConfig::default(),
        standings,
        game: 3,
        hands,
        start: Start::Lead(seat(order[0])),
    })
    .map_err(|e| e.to_string())?;
    let mut next = 0;
    while s.phase() == Phase::Playing {
        let who = s.turn().ok_or("no seat to act")?.index();
        if next < 3 && who == order[next] {
            play(&mut s, who, singles[next])?;
            next += 1;
        } else {
            play(&mut s, who, "")?;
        }
    }
    expect_eq("phase", s.phase(), Phase::RoundOver)?;
    expect_eq("finish order", s.finish_order()[..3].to_vec(), order.map(seat).to_vec())?;
    Ok(s)
}

fn at_ace(lead: usize, attempts: u8) -> Standings {
    let mut levels = [Level::TWO; 2];
    levels[lead] = Level::ACE;
    let mut a = [0; 2];
    a[lead] = attempts;
    Standings { team_levels: levels, lead_team: Team::ALL[lead], a_attempts: a }
}

/// A best victory at the lead team's A ends the match.
pub fn ace_best_victory_wins() -> Check {
    let mut s = scripted_round(at_ace(0, 1), [0, 2, 1])?;
    let out = s.advance_level().map_err(|e| e.to_string())?;
    expect_eq("best victory", out.best_victory, true)?;
    expect_eq("phase", s.phase(), Phase::MatchOver)?;
    expect_eq("winner", s.winner(), Some(Team::ALL[0]))
}

/// Three rounds at A without a best victory send the team back to 2.
pub fn ace_three_failures_reset() -> Check {
    let mut st = at_ace(0, 0);
    for attempt in 1..=3u8 {
        let mut s = scripted_round(st, [0, 1, 2])?;
        s.advance_level().map_err(|e| e.to_string())?;
        expect_eq("phase", s.phase(), Phase::Tribute)?;
        st = *s.standings();
        if attempt < 3 {
            expect_eq("attempts", st.a_attempts[0], attempt)?;
            expect_eq("level", st.team_levels[0], Level::ACE)?;
        }
    }
    expect_eq("level after third failure", st.team_levels[0], Level::TWO)?;
    expect_eq("attempts after reset", st.a_attempts[0], 0)?;
    expect_eq("other team", st.team_levels[1], Level::TWO)
}

/// The standard upgrade moves the winner's own level, capped at A.
pub fn upgrades_apply_to_winner() -> Check {
    let st = Standings { team_levels: [Level::new(Rank::Queen).unwrap(), Level::TWO], ..Standings::default() };
    let mut s = scripted_round(st, [0, 2, 1])?;
    s.advance_level().map_err(|e| e.to_string())?;
    expect_eq("capped at A", s.standings().team_levels[0], Level::ACE)?;
    let mut s = scripted_round(Standings::default(), [1, 0, 3])?;
    s.advance_level().map_err(|e| e.to_string())?;
    expect_eq("team 1 up two", s.standings().team_levels[1], Level::new(Rank::Four).unwrap())?;
    expect_eq("lead team", s.standings().lead_team, Team::ALL[1])
}
