//! Seed-reproducible simulator and measurement pipeline for coordinated
//! influence campaigns on a microblog-style network.
//!
//! The crate has two halves. The simulation half (`domain`, `engine`,
//! `regimes`, `backends`) runs a population of scripted or LLM-driven agents
//! over a fixed number of iterations and emits an append-only JSONL event
//! log. The measurement half (`text_metrics`, `graph_metrics`, `store`)
//! consumes recorded logs and produces the full coordination/impact report:
//! network cohesion, narrative convergence, co-retweet amplification,
//! hashtag adoption, and cross-group diffusion, plus Mann-Whitney U
//! significance tests.
//!
//! Everything downstream of a seed is deterministic: two runs with the same
//! config, seed, and personas produce byte-identical logs and reports.

pub mod backends;
pub mod domain;
pub mod engine;
pub mod graph_metrics;
pub mod logview;
pub mod numeric;
pub mod regimes;
pub mod store;
pub mod text_metrics;

/// Concrete scalar used by the report pipeline and all serialized outputs.
/// The numeric kernels themselves are generic over [`numeric::Scalar`].
pub type Real = f64;

pub use domain::{
    ActionEvent, ActionKind, AgentGroup, AgentId, Campaign, Persona, PostId, Regime, RunManifest,
    SimulationConfig,
};
