//! Recommendation parsing and strategy consolidation.
//!
//! Each IO agent proposes exactly three recommendations per discussion
//! cycle. The orchestrator consolidates them into at most five ranked
//! strategy items, either deterministically (token-set clustering with
//! supporter counting) or by delegating to an LLM orchestrator prompt.

use crate::backends::{Backend, TextPurpose, TextRequest};
use crate::domain::{AgentId, OrchestratorMode};
use crate::regimes::PromptLibrary;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::OnceLock;
use thiserror::Error;

/// Default token-set Jaccard similarity at or above which two
/// recommendation phrasings count as the same actionable item.
pub const DEFAULT_CLUSTER_JACCARD: f64 = 0.6;

pub const MAX_STRATEGY_ITEMS: usize = 5;
pub const RECOMMENDATION_ARITY: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("expected exactly {RECOMMENDATION_ARITY} numbered points, found {0}")]
    WrongArity(usize),
    #[error("no recommendations to consolidate")]
    Empty,
    #[error("orchestrator reply has no numbered items")]
    UnusableOrchestratorReply,
    #[error("supporter counts must be non-increasing")]
    CountsNotRanked,
    #[error("strategy exceeds {MAX_STRATEGY_ITEMS} items")]
    TooManyItems,
    #[error("orchestrator backend failed: {0}")]
    Backend(String),
}

/// One agent's proposal for the next period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub author: AgentId,
    pub items: [String; RECOMMENDATION_ARITY],
}

/// One ranked entry of a collective strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyItem {
    pub description: String,
    pub supporter_count: u32,
}

/// Ranked list of at most five strategy items with non-increasing
/// supporter counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectiveStrategy {
    pub items: Vec<StrategyItem>,
}

impl CollectiveStrategy {
    pub fn new(items: Vec<StrategyItem>) -> Result<Self, StrategyError> {
        if items.len() > MAX_STRATEGY_ITEMS {
            return Err(StrategyError::TooManyItems);
        }
        if items.windows(2).any(|w| w[0].supporter_count < w[1].supporter_count) {
            return Err(StrategyError::CountsNotRanked);
        }
        Ok(CollectiveStrategy { items })
    }
}

fn numbered_line_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(\d+)[.)]\s*(.+?)\s*$").expect("static regex"))
}

/// Extract `1. ...` / `2) ...` items from a reply, in order.
pub fn parse_numbered_list(raw: &str) -> Vec<String> {
    raw.lines()
        .filter_map(|line| {
            numbered_line_regex()
                .captures(line)
                .map(|cap| cap[2].trim().to_string())
                .filter(|s| !s.is_empty())
        })
        .collect()
}

/// Parse a discussion reply into a [`Recommendation`]; anything other than
/// exactly three numbered points is a parse error.
pub fn parse_recommendation(author: AgentId, raw: &str) -> Result<Recommendation, StrategyError> {
    let items = parse_numbered_list(raw);
    if items.len() != RECOMMENDATION_ARITY {
        return Err(StrategyError::WrongArity(items.len()));
    }
    let mut iter = items.into_iter();
    Ok(Recommendation {
        author,
        items: [
            iter.next().expect("arity checked"),
            iter.next().expect("arity checked"),
            iter.next().expect("arity checked"),
        ],
    })
}

fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            out.extend(ch.to_lowercase());
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn token_set(normalized: &str) -> BTreeSet<&str> {
    normalized.split_whitespace().collect()
}

fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    inter / union
}

/// Deterministic consolidation: cluster normalized items by token-set
/// Jaccard, count distinct supporting agents per cluster, rank by count
/// (descending) breaking ties by normalized text, keep the top five.
///
/// The result is invariant under permutation of the input: items are
/// processed in a canonical sorted order and each cluster is represented by
/// its lexicographically smallest member.
pub fn consolidate_deterministic(
    recs: &[Recommendation],
    jaccard_threshold: f64,
) -> Result<CollectiveStrategy, StrategyError> {
    if recs.is_empty() {
        return Err(StrategyError::Empty);
    }

    struct Item {
        normalized: String,
        original: String,
        author: AgentId,
    }
    let mut items: Vec<Item> = recs
        .iter()
        .flat_map(|r| {
            r.items.iter().map(move |text| Item {
                normalized: normalize(text),
                original: text.clone(),
                author: r.author,
            })
        })
        .collect();
    items.sort_by(|a, b| {
        (&a.normalized, &a.original, a.author).cmp(&(&b.normalized, &b.original, b.author))
    });

    struct Cluster {
        rep_normalized: String,
        rep_original: String,
        authors: BTreeSet<AgentId>,
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    for item in &items {
        let tokens = token_set(&item.normalized);
        let found = clusters
            .iter_mut()
            .find(|c| jaccard(&token_set(&c.rep_normalized), &tokens) >= jaccard_threshold);
        match found {
            Some(cluster) => {
                cluster.authors.insert(item.author);
            }
            None => clusters.push(Cluster {
                rep_normalized: item.normalized.clone(),
                rep_original: item.original.clone(),
                authors: [item.author].into(),
            }),
        }
    }

    clusters.sort_by(|a, b| {
        b.authors.len().cmp(&a.authors.len()).then_with(|| a.rep_normalized.cmp(&b.rep_normalized))
    });
    clusters.truncate(MAX_STRATEGY_ITEMS);
    CollectiveStrategy::new(
        clusters
            .into_iter()
            .map(|c| StrategyItem {
                description: c.rep_original,
                supporter_count: c.authors.len() as u32,
            })
            .collect(),
    )
}

/// Hook for LLM-mode consolidation.
pub struct OrchestratorCall<'a> {
    pub backend: &'a dyn Backend,
    pub prompts: &'a PromptLibrary,
    pub iteration: u32,
    pub seed: u64,
}

fn supporter_count_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(\d+)\s+agents?").expect("static regex"))
}

/// Consolidate through the orchestrator prompt: send all recommendations,
/// parse the returned numbered list, and read supporter counts from the
/// `N agents` phrasing when present (0 otherwise). Items are re-ranked by
/// parsed count to preserve the strategy invariant.
pub fn consolidate_llm(
    recs: &[Recommendation],
    call: &OrchestratorCall<'_>,
) -> Result<CollectiveStrategy, StrategyError> {
    if recs.is_empty() {
        return Err(StrategyError::Empty);
    }
    let mut user = String::from("Agents' coordination recommendations:\n");
    for rec in recs {
        for item in &rec.items {
            user.push_str(&format!("- agent {}: {}\n", rec.author.0, item));
        }
    }
    let req = TextRequest {
        purpose: TextPurpose::Orchestration { iteration: call.iteration },
        system: call.prompts.orchestrator.clone(),
        user,
        seed: call.seed,
    };
    let reply =
        call.backend.complete_text(&req).map_err(|e| StrategyError::Backend(e.to_string()))?;
    let lines = parse_numbered_list(&reply);
    if lines.is_empty() {
        return Err(StrategyError::UnusableOrchestratorReply);
    }
    let mut items: Vec<StrategyItem> = lines
        .into_iter()
        .take(MAX_STRATEGY_ITEMS)
        .map(|line| {
            let count = supporter_count_regex()
                .captures(&line)
                .and_then(|c| c[1].parse().ok())
                .unwrap_or(0);
            StrategyItem { description: line, supporter_count: count }
        })
        .collect();
    items.sort_by(|a, b| b.supporter_count.cmp(&a.supporter_count));
    CollectiveStrategy::new(items)
}

/// Dispatch on the configured orchestrator mode. `orchestrator` is only
/// consulted in LLM mode.
pub fn consolidate_strategies(
    recs: &[Recommendation],
    mode: OrchestratorMode,
    orchestrator: Option<&OrchestratorCall<'_>>,
) -> Result<CollectiveStrategy, StrategyError> {
    match mode {
        OrchestratorMode::Deterministic => consolidate_deterministic(recs, DEFAULT_CLUSTER_JACCARD),
        OrchestratorMode::Llm => {
            let call = orchestrator.ok_or(StrategyError::Empty)?;
            consolidate_llm(recs, call)
        }
    }
}
