//! State commentary guider: turns observations and histories into text and
//! assembles the rule / observation / history prompt.

use serde::{Deserialize, Serialize};

use crate::cards::{sort_for_level, Card, CardCounts, Level, Rank, Suit};
use crate::combos::{Combo, ComboKind};
use crate::engine::{Action, Event, Seat, Team, TributeRecord};
use crate::templates::{fill, Language, Templates};

/// What one seat can see at a decision point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub game: u32,
    pub seat: Seat,
    pub own_hand: CardCounts,
    pub level: Level,
    pub team_levels: [Level; 2],
    pub lead_team: Team,
    pub incumbent: Option<Combo>,
    pub incumbent_seat: Option<Seat>,
    pub counts: [u8; 4],
    pub declarations: [Option<u8>; 4],
    pub finish_order: Vec<Seat>,
    pub tribute: Vec<TributeRecord>,
}

/// Public events of the current game, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistoryView {
    pub events: Vec<Event>,
}

/// Everything the guider prompt is built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub language: Language,
    pub rule_text: String,
    pub observation_rule_text: String,
    pub history_rule_text: String,
    pub rendered_obs: String,
    pub rendered_history: String,
}

/// Ranks from lowest to highest at `level`, jokers excluded.
pub fn order_string(level: Level) -> String {
    let mut ranks: Vec<Rank> = Rank::NATURAL.to_vec();
    ranks.sort_by_key(|r| crate::cards::effective_order(*r, level));
    ranks.iter().map(|r| r.label()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone)]
pub struct Guider {
    t: Templates,
}

impl Guider {
    pub fn new(templates: Templates) -> Guider {
        Guider { t: templates }
    }

    pub fn builtin(language: Language) -> Guider {
        Guider::new(Templates::builtin(language))
    }

    pub fn templates(&self) -> &Templates {
        &self.t
    }

    pub fn seat(&self, seat: Seat) -> String {
        self.t.say("seat", &[("seat", &seat.to_string())])
    }

    pub fn team(&self, team: Team) -> String {
        self.t.say("team", &[("team", &team.to_string())])
    }

    fn suit(&self, suit: Suit) -> &str {
        self.t.phrase(match suit {
            Suit::Hearts => "suit.H",
            Suit::Diamonds => "suit.D",
            Suit::Clubs => "suit.C",
            Suit::Spades => "suit.S",
        })
    }

    pub fn card(&self, card: Card) -> String {
        match card.suit() {
            None if card.rank() == Rank::SmallJoker => self.t.phrase("joker.small").to_string(),
            None => self.t.phrase("joker.big").to_string(),
            Some(s) => self.t.say("card", &[("suit", self.suit(s)), ("rank", card.rank().label())]),
        }
    }

    pub fn cards(&self, cards: &[Card], level: Level) -> String {
        let mut sorted = cards.to_vec();
        sort_for_level(&mut sorted, level);
        let names: Vec<String> = sorted.iter().map(|c| self.card(*c)).collect();
        names.join(self.t.phrase("sep.cards"))
    }

    pub fn kind(&self, kind: ComboKind) -> String {
        match kind {
            ComboKind::Bomb(n) => self.t.say("kind.bomb", &[("n", &n.to_string())]),
            k => self.t.phrase(&format!("kind.{}", k.name())).to_string(),
        }
    }

    pub fn combo(&self, combo: &Combo, level: Level) -> String {
        if combo.is_pass() {
            return self.kind(ComboKind::Pass);
        }
        let kind = self.kind(combo.kind());
        let cards = self.cards(combo.cards(), level);
        if combo.wilds().is_empty() {
            return self.t.say("combo", &[("kind", &kind), ("cards", &cards)]);
        }
        let wilds: Vec<String> = combo
            .wilds()
            .iter()
            .map(|w| self.t.say("wild", &[("wild", &self.card(w.wild)), ("as", &self.card(w.as_card))]))
            .collect();
        let wilds = wilds.join(self.t.phrase("sep.list"));
        self.t.say("combo.wilds", &[("kind", &kind), ("cards", &cards), ("wilds", &wilds)])
    }

    fn place(&self, index: usize) -> &str {
        self.t.phrase(&format!("place.{}", index.min(3) + 1))
    }

    /// The five-section rule text for `level`.
    pub fn rule_prompt(&self, level: Level) -> String {
        let wild = self.card(Card::new(Suit::Hearts, level.rank()));
        fill(
            self.t.file("rules.txt"),
            &[("level", level.rank().label()), ("order", &order_string(level)), ("wild", &wild)],
        )
    }

    fn hand(&self, hand: &CardCounts, level: Level) -> String {
        let mut groups = Vec::new();
        for suit in Suit::ALL {
            let mut cards: Vec<Card> = hand.iter().filter(|c| c.suit() == Some(suit)).collect();
            if cards.is_empty() {
                continue;
            }
            sort_for_level(&mut cards, level);
            let ranks: Vec<&str> = cards.iter().map(|c| c.rank().label()).collect();
            groups.push(self.t.say("obs.group", &[("suit", self.suit(suit)), ("ranks", &ranks.join(" "))]));
        }
        let jokers: Vec<String> = hand.iter().filter(|c| c.is_joker()).map(|c| self.card(c)).collect();
        if !jokers.is_empty() {
            groups.push(self.t.say("obs.group", &[("suit", self.t.phrase("jokers")), ("ranks", &jokers.join(" "))]));
        }
        if groups.is_empty() {
            return self.t.phrase("none").to_string();
        }
        groups.join(self.t.phrase("sep.group"))
    }

    fn list(&self, items: Vec<String>) -> String {
        items.join(self.t.phrase("sep.list"))
    }

    /// Public part of an observation: counts and announcements.
    pub fn public_summary(&self, obs: &Observation) -> String {
        let counts = self.list(
            Seat::ALL
                .iter()
                .map(|s| {
                    self.t.say("obs.count_item", &[("seat", &self.seat(*s)), ("n", &obs.counts[s.index()].to_string())])
                })
                .collect(),
        );
        let mut out = self.t.say("obs.counts", &[("list", &counts)]);
        let declared: Vec<String> = Seat::ALL
            .iter()
            .filter_map(|s| {
                obs.declarations[s.index()]
                    .map(|n| self.t.say("obs.declare_item", &[("seat", &self.seat(*s)), ("n", &n.to_string())]))
            })
            .collect();
        if !declared.is_empty() {
            out.push('\n');
            out.push_str(&self.t.say("obs.declared", &[("list", &self.list(declared))]));
        }
        out
    }

    fn tribute_record(&self, r: &TributeRecord) -> String {
        match r {
            TributeRecord::Paid { from, to, card } => self.t.say(
                "tribute.paid",
                &[("from", &self.seat(*from)), ("to", &self.seat(*to)), ("card", &self.card(*card))],
            ),
            TributeRecord::Returned { from, to, card } => self.t.say(
                "tribute.returned",
                &[("from", &self.seat(*from)), ("to", &self.seat(*to)), ("card", &self.card(*card))],
            ),
            TributeRecord::Refused { seat, card } => {
                self.t.say("tribute.refused", &[("seat", &self.seat(*seat)), ("card", &self.card(*card))])
            }
        }
    }

    pub fn render_observation(&self, obs: &Observation) -> String {
        let level = obs.level;
        let mut lines = vec![
            self.t.say(
                "obs.header",
                &[
                    ("game", &obs.game.to_string()),
                    ("level", level.rank().label()),
                    ("lead", &self.team(obs.lead_team)),
                    ("level0", obs.team_levels[0].rank().label()),
                    ("level1", obs.team_levels[1].rank().label()),
                ],
            ),
            self.t.say("obs.self", &[("seat", &self.seat(obs.seat)), ("team", &self.team(obs.seat.team()))]),
            self.t.say(
                "obs.hand",
                &[("n", &obs.own_hand.len().to_string()), ("groups", &self.hand(&obs.own_hand, level))],
            ),
            self.public_summary(obs),
        ];
        lines.push(match (&obs.incumbent, obs.incumbent_seat) {
            (Some(c), Some(s)) => self.t.say("obs.table", &[("seat", &self.seat(s)), ("combo", &self.combo(c, level))]),
            _ => self.t.phrase("obs.table_empty").to_string(),
        });
        if !obs.finish_order.is_empty() {
            let items = obs
                .finish_order
                .iter()
                .enumerate()
                .map(|(i, s)| self.t.say("obs.finish_item", &[("seat", &self.seat(*s)), ("place", self.place(i))]))
                .collect();
            lines.push(self.t.say("obs.finished", &[("list", &self.list(items))]));
        }
        if !obs.tribute.is_empty() {
            let items = obs.tribute.iter().map(|r| self.tribute_record(r)).collect();
            lines.push(self.t.say("obs.tribute", &[("list", &self.list(items))]));
        }
        lines.join("\n")
    }

    pub fn action(&self, action: &Action, level: Level) -> String {
        match action {
            Action::Deal(cards) => self.t.say("act.deal", &[("n", &cards.len().to_string())]),
            Action::Play(c) if c.is_pass() => self.t.phrase("act.pass").to_string(),
            Action::Play(c) => self.t.say("act.play", &[("combo", &self.combo(c, level))]),
            Action::Tribute(card) => self.t.say("act.tribute", &[("card", &self.card(*card))]),
            Action::Return(card) => self.t.say("act.return", &[("card", &self.card(*card))]),
            Action::AntiTribute(cards) => self.t.say("act.anti", &[("cards", &self.cards(cards, level))]),
            Action::Declare(n) => self.t.say("act.declare", &[("n", &n.to_string())]),
        }
    }

    /// The last `window` events, one line each.
    pub fn render_history(&self, history: &HistoryView, window: usize) -> String {
        let events = &history.events;
        if events.is_empty() {
            return self.t.phrase("hist.empty").to_string();
        }
        let from = events.len().saturating_sub(window.max(1));
        events[from..]
            .iter()
            .map(|e| {
                self.t.say("hist.line", &[("seat", &self.seat(e.seat)), ("action", &self.action(&e.action, e.level))])
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn bundle(&self, obs: &Observation, history: &HistoryView, window: usize) -> PromptBundle {
        PromptBundle {
            language: self.t.language(),
            rule_text: self.rule_prompt(obs.level),
            observation_rule_text: self.t.file("observation_rule.txt").to_string(),
            history_rule_text: self.t.file("history_rule.txt").to_string(),
            rendered_obs: self.render_observation(obs),
            rendered_history: self.render_history(history, window),
        }
    }

    pub fn prompt(&self, bundle: &PromptBundle) -> String {
        fill(
            self.t.file("guider_prompt.txt"),
            &[
                ("rule_text", bundle.rule_text.trim_end()),
                ("observation_rule_text", bundle.observation_rule_text.trim_end()),
                ("history_rule_text", bundle.history_rule_text.trim_end()),
                ("rendered_obs", &bundle.rendered_obs),
                ("rendered_history", &bundle.rendered_history),
            ],
        )
    }

    /// Template-mode commentary for `seat` taking `action` from the position
    /// seen in `obs` (the acting seat's view before the action).
    pub fn narrate(&self, obs: &Observation, seat: Seat, action: &Combo) -> String {
        let level = obs.level;
        let who = self.seat(seat);
        let incumbent = obs.incumbent.as_ref().map(|c| self.combo(c, level));
        let prev = obs.incumbent_seat.map(|s| self.seat(s));
        let mut out = match (action.is_pass(), incumbent, prev) {
            (true, Some(inc), Some(prev)) => {
                self.t.say("narr.pass", &[("seat", &who), ("prev", &prev), ("incumbent", &inc)])
            }
            (false, Some(inc), Some(prev)) => self.t.say(
                "narr.follow",
                &[("seat", &who), ("combo", &self.combo(action, level)), ("prev", &prev), ("incumbent", &inc)],
            ),
            _ => self.t.say("narr.lead", &[("seat", &who), ("combo", &self.combo(action, level))]),
        };
        let left = (obs.counts[seat.index()] as usize).saturating_sub(action.len());
        if !action.is_pass() && left == 0 {
            out.push_str(&self.t.say("narr.finish", &[("seat", &who), ("place", self.place(obs.finish_order.len()))]));
        } else if !action.is_pass() && left <= crate::engine::DECLARE_AT {
            out.push_str(&self.t.say("narr.left", &[("seat", &who), ("n", &left.to_string())]));
        }
        let mut after = obs.clone();
        after.counts[seat.index()] = left as u8;
        out.push('\n');
        out.push_str(&self.public_summary(&after));
        out
    }
}
