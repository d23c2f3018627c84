//! Theory-of-mind analysis: card counting, rule-based first-order
//! hypotheses about opponents, and second-order predictions of how they can
//! answer a play.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::{effective_order, Card, CardCounts, Level, Rank, DECK_SIZE};
use crate::combos::{beats, classify, legal_moves, Combo, ComboKind};
use crate::engine::{Action, Seat, TributeRecord};
use crate::guider::{Guider, HistoryView, Observation};

/// A bomb counts as early while the bomber still holds at least this many cards.
pub const EARLY_BOMB_LEFT: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TomError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("candidate {0} is not a legal action for the observed seat")]
    IllegalCandidate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TomOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum HypothesisTag {
    /// Passed on a single of this rank.
    NoSingleAbove {
        rank: Rank,
    },
    /// Every copy of the rank is accounted for outside the opponents' hands.
    RankGone {
        rank: Rank,
    },
    /// As `RankGone`, for the level rank.
    LevelGone {
        rank: Rank,
    },
    StrongHand,
    Pressure {
        count: u8,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hypothesis {
    /// The seat the hypothesis is about; `None` for table-wide facts.
    pub seat: Option<Seat>,
    /// Index into the history events of the triggering event.
    pub event: usize,
    #[serde(flatten)]
    pub tag: HypothesisTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    MustPass,
    CanBeatCheaply,
    NeedsBomb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub seat: Seat,
    pub stance: Stance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondOrder {
    /// Display form of the candidate play.
    pub candidate: String,
    #[serde(skip)]
    pub combo: Option<Combo>,
    pub responses: Vec<Response>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TomReport {
    pub order: TomOrder,
    pub first_order: Vec<Hypothesis>,
    pub second_order: Vec<SecondOrder>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpponentBelief {
    pub seat: Seat,
    pub count: u8,
    /// Ranks the seat likely holds no single of.
    pub excluded_singles: BTreeSet<Rank>,
    /// Cards publicly known to be in this hand (tribute movements).
    pub known: CardCounts,
    pub strong: bool,
    pub pressure: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefState {
    pub unseen: CardCounts,
    pub opponents: Vec<OpponentBelief>,
}

/// Cards publicly known to sit in each other seat's hand, and all played cards.
fn revealed(obs: &Observation, history: &HistoryView) -> ([CardCounts; 4], CardCounts) {
    let mut known: [CardCounts; 4] = Default::default();
    let mut played = CardCounts::new();
    for r in &obs.tribute {
        match *r {
            TributeRecord::Paid { from, to, card } | TributeRecord::Returned { from, to, card } => {
                known[from.index()].remove(card);
                known[to.index()].add(card);
            }
            TributeRecord::Refused { seat, card } => known[seat.index()].add(card),
        }
    }
    for e in &history.events {
        if let Action::Play(c) = &e.action {
            for card in c.cards() {
                known[e.seat.index()].remove(*card);
                played.add(*card);
            }
        }
    }
    known[obs.seat.index()] = CardCounts::new();
    (known, played)
}

/// Deck minus own hand, played cards and cards known to be held by others.
pub fn unseen_cards(obs: &Observation, history: &HistoryView) -> Result<CardCounts, TomError> {
    let (known, played) = revealed(obs, history);
    let mut unseen = CardCounts::full_deck();
    let parts = std::iter::once(("own hand", &obs.own_hand))
        .chain(std::iter::once(("played cards", &played)))
        .chain(known.iter().map(|k| ("tribute-known cards", k)));
    for (what, part) in parts {
        if !unseen.remove_all(part) {
            return Err(TomError::InvalidInput(format!("{what} overlap cards already accounted for")));
        }
    }
    debug_assert!(unseen.len() <= DECK_SIZE);
    Ok(unseen)
}

fn copies(rank: Rank) -> u8 {
    if rank.is_joker() {
        2
    } else {
        8
    }
}

/// Rule-based hypotheses about the other seats, ordered by (seat, event).
pub fn first_order(obs: &Observation, history: &HistoryView) -> Vec<Hypothesis> {
    let level = obs.level;
    let mut out = Vec::new();
    let mut lowest_pass: [Option<(u8, usize, Rank)>; 4] = [None; 4];
    let mut strong = [false; 4];
    let mut counts = [crate::engine::HAND_SIZE; 4];
    for r in &obs.tribute {
        if let TributeRecord::Paid { from, to, .. } | TributeRecord::Returned { from, to, .. } = *r {
            counts[from.index()] -= 1;
            counts[to.index()] += 1;
        }
    }
    let mut last_play: Option<&Combo> = None;
    let mut last_seen: [Option<usize>; 17] = [None; 17];

    for (i, e) in history.events.iter().enumerate() {
        let s = e.seat.index();
        let own = e.seat == obs.seat;
        match &e.action {
            Action::Play(c) if c.is_pass() => {
                if let Some(inc) = last_play.filter(|c| c.kind() == ComboKind::Single) {
                    let rank = inc.cards()[0].rank();
                    let rank = inc.wilds().first().map_or(rank, |w| w.as_card.rank());
                    let key = inc.rank();
                    if !own && lowest_pass[s].is_none_or(|(k, _, _)| key < k) {
                        lowest_pass[s] = Some((key, i, rank));
                    }
                }
            }
            Action::Play(c) => {
                last_play = Some(c);
                counts[s] = counts[s].saturating_sub(c.len());
                for card in c.cards() {
                    last_seen[card.rank().value() as usize] = Some(i);
                }
                if c.kind().is_bomb_class() && counts[s] >= EARLY_BOMB_LEFT && !own && !strong[s] {
                    strong[s] = true;
                    out.push(Hypothesis { seat: Some(e.seat), event: i, tag: HypothesisTag::StrongHand });
                }
            }
            Action::Tribute(card) | Action::Return(card) => last_seen[card.rank().value() as usize] = Some(i),
            Action::AntiTribute(cards) => {
                for card in cards {
                    last_seen[card.rank().value() as usize] = Some(i);
                }
            }
            Action::Declare(n) if !own => {
                out.push(Hypothesis { seat: Some(e.seat), event: i, tag: HypothesisTag::Pressure { count: *n } })
            }
            _ => {}
        }
    }
    for (s, p) in lowest_pass.iter().enumerate() {
        if let Some((_, event, rank)) = p {
            out.push(Hypothesis {
                seat: Some(Seat::ALL[s]),
                event: *event,
                tag: HypothesisTag::NoSingleAbove { rank: *rank },
            });
        }
    }
    if let Ok(unseen) = unseen_cards(obs, history) {
        let mut ranks: Vec<Rank> = Rank::NATURAL.to_vec();
        ranks.extend([Rank::SmallJoker, Rank::BigJoker]);
        for rank in ranks {
            let Some(event) = last_seen[rank.value() as usize] else { continue };
            if unseen.rank_count(rank) == 0 && copies(rank) > 0 {
                let tag = if rank == level.rank() {
                    HypothesisTag::LevelGone { rank }
                } else {
                    HypothesisTag::RankGone { rank }
                };
                out.push(Hypothesis { seat: None, event, tag });
            }
        }
    }
    out.sort();
    out
}

/// Card counting plus first-order flags for each opponent still holding cards.
pub fn belief_state(obs: &Observation, history: &HistoryView) -> Result<BeliefState, TomError> {
    let unseen = unseen_cards(obs, history)?;
    let (known, _) = revealed(obs, history);
    let hyps = first_order(obs, history);
    let level = obs.level;
    let opponents = Seat::ALL
        .iter()
        .filter(|s| s.team() != obs.seat.team())
        .map(|&seat| {
            let mut b = OpponentBelief {
                seat,
                count: obs.counts[seat.index()],
                excluded_singles: BTreeSet::new(),
                known: known[seat.index()].clone(),
                strong: false,
                pressure: false,
            };
            for h in hyps.iter().filter(|h| h.seat == Some(seat)) {
                match h.tag {
                    HypothesisTag::NoSingleAbove { rank } => {
                        let floor = effective_order(rank, level);
                        b.excluded_singles.extend(
                            Rank::NATURAL
                                .iter()
                                .chain(&[Rank::SmallJoker, Rank::BigJoker])
                                .filter(|r| effective_order(**r, level) > floor),
                        );
                    }
                    HypothesisTag::StrongHand => b.strong = true,
                    HypothesisTag::Pressure { .. } => b.pressure = true,
                    _ => {}
                }
            }
            b
        })
        .collect();
    Ok(BeliefState { unseen, opponents })
}

fn is_candidate_legal(obs: &Observation, candidate: &Combo) -> bool {
    if candidate.is_pass() {
        return obs.incumbent.is_some();
    }
    obs.own_hand.contains_all(&candidate.counts())
        && classify(candidate.cards(), obs.level).is_ok_and(|r| r.contains(candidate))
        && obs.incumbent.as_ref().is_none_or(|inc| beats(candidate, inc))
}

fn single_rank(c: &Combo) -> Rank {
    c.wilds().first().map_or(c.cards()[0].rank(), |w| w.as_card.rank())
}

/// Predicted stance of each opponent holding cards towards `candidate`.
///
/// Answers are searched among cards the opponent could hold (unseen cards
/// plus cards known to be theirs) with no more cards than they hold, so
/// `MustPass` is only claimed when no holding could answer. First-order
/// exclusions can only move a prediction from `CanBeatCheaply` to
/// `NeedsBomb`.
pub fn second_order(obs: &Observation, history: &HistoryView, candidate: &Combo) -> Result<Vec<Response>, TomError> {
    if !is_candidate_legal(obs, candidate) {
        return Err(TomError::IllegalCandidate(candidate.to_string()));
    }
    if candidate.is_pass() {
        return Ok(Vec::new());
    }
    let belief = belief_state(obs, history)?;
    let mut out = Vec::new();
    for opp in belief.opponents.iter().filter(|o| o.count > 0) {
        let mut pool = belief.unseen.clone();
        pool.add_all(&opp.known);
        let answers: Vec<Combo> = legal_moves(&pool, Some(candidate), obs.level)
            .into_iter()
            .filter(|c| !c.is_pass() && c.len() <= opp.count as usize)
            .collect();
        let cheap = |c: &&Combo| !c.kind().is_bomb_class();
        let plausible = |c: &&Combo| c.kind() != ComboKind::Single || !opp.excluded_singles.contains(&single_rank(c));
        let stance = if answers.is_empty() {
            Stance::MustPass
        } else if answers.iter().filter(cheap).any(|c| plausible(&c)) {
            Stance::CanBeatCheaply
        } else if answers.iter().any(|c| c.kind().is_bomb_class()) {
            Stance::NeedsBomb
        } else {
            Stance::CanBeatCheaply
        };
        out.push(Response { seat: opp.seat, stance });
    }
    Ok(out)
}

/// Full report of the requested order. A `None` or pass candidate yields no
/// second-order section.
pub fn analyze(
    obs: &Observation,
    history: &HistoryView,
    candidate: Option<&Combo>,
    order: TomOrder,
) -> Result<TomReport, TomError> {
    let first = first_order(obs, history);
    let mut second = Vec::new();
    if order == TomOrder::Second {
        if let Some(c) = candidate.filter(|c| !c.is_pass()) {
            let responses = second_order(obs, history, c)?;
            second.push(SecondOrder { candidate: c.to_string(), combo: Some(c.clone()), responses });
        }
    }
    Ok(TomReport { order, first_order: first, second_order: second })
}

fn rank_name(g: &Guider, rank: Rank) -> String {
    match rank {
        Rank::SmallJoker => g.card(Card::SMALL_JOKER),
        Rank::BigJoker => g.card(Card::BIG_JOKER),
        r => r.label().to_string(),
    }
}

/// Analyzer section text.
pub fn render_tom_prompt(report: &TomReport, g: &Guider, level: Level) -> String {
    let t = g.templates();
    if report.first_order.is_empty() && report.second_order.is_empty() {
        return t.phrase("tom.empty").to_string();
    }
    let mut lines = Vec::new();
    if !report.first_order.is_empty() {
        lines.push(t.phrase("tom.first").to_string());
        for h in &report.first_order {
            let seat = h.seat.map(|s| g.seat(s)).unwrap_or_default();
            let event = h.event.to_string();
            let text = match h.tag {
                HypothesisTag::NoSingleAbove { rank } => {
                    t.say("tom.no_single_above", &[("seat", &seat), ("rank", &rank_name(g, rank)), ("event", &event)])
                }
                HypothesisTag::RankGone { rank } => {
                    t.say("tom.rank_gone", &[("rank", &rank_name(g, rank)), ("event", &event)])
                }
                HypothesisTag::LevelGone { rank } => {
                    t.say("tom.level_gone", &[("rank", &rank_name(g, rank)), ("event", &event)])
                }
                HypothesisTag::StrongHand => t.say("tom.strong", &[("seat", &seat), ("event", &event)]),
                HypothesisTag::Pressure { count } => {
                    t.say("tom.pressure", &[("seat", &seat), ("n", &count.to_string()), ("event", &event)])
                }
            };
            lines.push(t.say("tom.line", &[("text", &text)]));
        }
    }
    for so in &report.second_order {
        let candidate = so.combo.as_ref().map_or_else(|| so.candidate.clone(), |c| g.combo(c, level));
        lines.push(t.say("tom.second", &[("candidate", &candidate)]));
        for r in &so.responses {
            let key = match r.stance {
                Stance::MustPass => "tom.must_pass",
                Stance::CanBeatCheaply => "tom.can_beat_cheaply",
                Stance::NeedsBomb => "tom.needs_bomb",
            };
            let text = t.say(key, &[("seat", &g.seat(r.seat))]);
            lines.push(t.say("tom.line", &[("text", &text)]));
        }
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;
    use crate::engine::{EngineConfig, MatchState, Setup, Standings, Start};
    use crate::templates::Language;

    fn cards(s: &str) -> Vec<Card> {
        parse_cards(s).unwrap()
    }

    fn combo(s: &str, level: Level) -> Combo {
        classify(&cards(s), level).unwrap().remove(0)
    }

    #[test]
    fn game_start_has_81_unseen() {
        let s = MatchState::new_match(1);
        let seat = s.turn().unwrap();
        let u = unseen_cards(&s.observation(seat), &s.history_view()).unwrap();
        assert_eq!(u.len(), 81);
    }

    #[test]
    fn empty_history_has_no_hypotheses() {
        let s = MatchState::new_match(1);
        assert!(first_order(&s.observation(Seat::ALL[0]), &s.history_view()).is_empty());
        let report = analyze(&s.observation(Seat::ALL[0]), &s.history_view(), None, TomOrder::First).unwrap();
        assert_eq!(render_tom_prompt(&report, &Guider::builtin(Language::En), Level::TWO), "No inferences yet.");
    }

    fn scripted(hands: [&str; 4], leader: usize) -> MatchState {
        MatchState::from_setup(Setup {
            seed: 0,
            config: EngineConfig::default(),
            standings: Standings::default(),
            game: 1,
            hands: hands.map(cards),
            start: Start::Lead(Seat::ALL[leader]),
        })
        .unwrap()
    }

    #[test]
    fn pass_on_king_excludes_higher_singles() {
        let mut s = scripted(["SK S3", "D4 D5", "C4 C5", "H4 H5"], 0);
        let lvl = s.active_level();
        s.apply(Seat::ALL[0], &combo("SK", lvl)).unwrap();
        s.apply(Seat::ALL[1], &Combo::pass()).unwrap();
        let history = s.history_view();
        let hyps = first_order(&s.observation(Seat::ALL[2]), &history);
        let h = hyps.iter().find(|h| h.seat == Some(Seat::ALL[1])).unwrap();
        assert_eq!(h.tag, HypothesisTag::NoSingleAbove { rank: Rank::King });
        let e = &history.events[h.event];
        assert_eq!(e.seat, Seat::ALL[1]);
        assert!(matches!(&e.action, Action::Play(c) if c.is_pass()));
    }

    #[test]
    fn four_jokers_force_passes() {
        let s = scripted(["LJ LJ BJ BJ S3", "D4 D5", "C4 C5", "H4 H5"], 0);
        let obs = s.observation(Seat::ALL[0]);
        let fj = combo("LJ LJ BJ BJ", obs.level);
        let r = second_order(&obs, &s.history_view(), &fj).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.stance == Stance::MustPass));
    }

    #[test]
    fn low_single_is_cheap_to_beat() {
        let s = MatchState::new_match(5);
        let seat = s.turn().unwrap();
        let obs = s.observation(seat);
        let low = obs
            .own_hand
            .iter()
            .filter(|c| !c.is_joker() && !crate::cards::is_wild(*c, obs.level))
            .min_by_key(|c| effective_order(c.rank(), obs.level))
            .unwrap();
        let single = classify(&[low], obs.level).unwrap().remove(0);
        let r = second_order(&obs, &s.history_view(), &single).unwrap();
        assert!(r.iter().all(|x| x.stance == Stance::CanBeatCheaply));
    }

    #[test]
    fn illegal_candidate_rejected() {
        let s = scripted(["S3 S4", "D4 D5", "C4 C5", "H4 H5"], 0);
        let obs = s.observation(Seat::ALL[0]);
        let bad = combo("DA", obs.level);
        assert!(matches!(second_order(&obs, &s.history_view(), &bad), Err(TomError::IllegalCandidate(_))));
    }

    #[test]
    fn first_order_only_report_has_no_second_section() {
        let mut s = scripted(["SK S3", "D4 D5", "C4 C5", "H4 H5"], 0);
        let lvl = s.active_level();
        s.apply(Seat::ALL[0], &combo("SK", lvl)).unwrap();
        s.apply(Seat::ALL[1], &Combo::pass()).unwrap();
        let g = Guider::builtin(Language::En);
        let obs = s.observation(Seat::ALL[2]);
        let first = analyze(&obs, &s.history_view(), None, TomOrder::First).unwrap();
        let text = render_tom_prompt(&first, &g, lvl);
        assert!(text.starts_with("First-order inferences:"));
        assert!(!text.contains("Second-order"));
        assert!(first.second_order.is_empty());
    }
}
