//! Guandan match simulation and a staged commentary pipeline with offline
//! evaluation metrics.

pub mod agents;
pub mod cards;
pub mod combos;
pub mod engine;
pub mod gateway;
pub mod guider;
pub mod metrics;
pub mod pipeline;
pub mod retrieval;
pub mod sim;
pub mod templates;
pub mod text;
pub mod tom;

pub use cards::{effective_order, Card, CardCounts, Level, Rank, Suit};
pub use combos::{beats, classify, legal_moves, Combo, ComboKind};
pub use engine::{Action, EngineConfig, Event, MatchState, Phase, Seat, Team, TributeMode};
pub use guider::{Guider, HistoryView, Observation};
pub use metrics::{EvalReport, EvalRow};
pub use pipeline::{CommentaryRecord, Commentator, PipelineConfig};
pub use retrieval::StyleIndex;
pub use templates::Language;
pub use tom::TomReport;
