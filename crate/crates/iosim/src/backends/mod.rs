//! Agent decision sources.
//!
//! Two implementations share one contract: a deterministic scripted policy
//! for tests and desk-scale runs, and a remote chat backend for live runs.
//! Both consume an [`AgentContext`] snapshot and return an [`AgentDecision`]
//! restricted to the gated action kinds.

mod llm;
mod reply;
mod scripted;

pub use llm::{
    render_decision_request, request_key, ChatClient, LlmBackend, Transcript, TranscriptStore,
};
pub use reply::{parse_llm_reply, ReplyParseError};
pub use scripted::{GroupPolicy, ScriptedBackend, ScriptedPolicyParams};

use crate::domain::{ActionKind, AgentGroup, AgentId, BackendConfig, Campaign, PostId, SimulationConfig};
use std::path::Path;
use crate::regimes::CollectiveStrategy;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Upper bound on non-silent sub-actions per turn.
pub const MAX_SUB_ACTIONS: usize = 3;

/// One post as presented to an agent.
///
/// `is_teammate` is only ever set for IO agents in regimes where the roster
/// is visible; under Common Goal it is always false.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedItem {
    pub post: PostId,
    pub author: AgentId,
    pub author_name: String,
    pub text: String,
    pub hashtags: Vec<String>,
    pub in_network: bool,
    pub is_teammate: bool,
}

/// Everything an agent is entitled to see when deciding one turn.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentContext {
    pub agent: AgentId,
    pub group: AgentGroup,
    pub iteration: u32,
    pub system_prompt: String,
    /// Rendered recent-memory lines, oldest first.
    pub memory_digest: Vec<String>,
    /// Latest collective strategy; present only for IO agents under
    /// collective decision-making.
    pub strategy: Option<CollectiveStrategy>,
    pub feed: Vec<FeedItem>,
    pub permitted: BTreeSet<ActionKind>,
    pub campaign: Campaign,
    /// Times the campaign hashtag has been delivered to this agent's feed,
    /// including the current one.
    pub campaign_exposures: u32,
    /// Teammate names; empty unless the regime reveals the roster.
    pub roster: Vec<String>,
    /// Accounts this agent currently follows.
    pub following: BTreeSet<AgentId>,
    /// Substream seed owned by this decision.
    pub decision_seed: u64,
}

/// One sub-action inside a decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubAction {
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_post: Option<PostId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_agent: Option<AgentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl SubAction {
    pub fn post(text: impl Into<String>) -> Self {
        SubAction {
            kind: ActionKind::Post,
            target_post: None,
            target_agent: None,
            text: Some(text.into()),
        }
    }

    pub fn re_share(target: PostId) -> Self {
        SubAction {
            kind: ActionKind::ReShare,
            target_post: Some(target),
            target_agent: None,
            text: None,
        }
    }

    pub fn comment(target: PostId, text: impl Into<String>) -> Self {
        SubAction {
            kind: ActionKind::Comment,
            target_post: Some(target),
            target_agent: None,
            text: Some(text.into()),
        }
    }

    pub fn like(target: PostId) -> Self {
        SubAction { kind: ActionKind::Like, target_post: Some(target), target_agent: None, text: None }
    }

    pub fn follow(target: AgentId) -> Self {
        SubAction {
            kind: ActionKind::Follow,
            target_post: None,
            target_agent: Some(target),
            text: None,
        }
    }

    pub fn silent() -> Self {
        SubAction { kind: ActionKind::Silent, target_post: None, target_agent: None, text: None }
    }
}

/// A backend's chosen set of actions for one agent in one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AgentDecision {
    pub actions: Vec<SubAction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecisionError {
    #[error("decision carries {0} non-silent sub-actions, cap is {MAX_SUB_ACTIONS}")]
    TooManyActions(usize),
    #[error("action kind {0:?} is not permitted this turn")]
    NotPermitted(ActionKind),
}

impl AgentDecision {
    pub fn silent(rationale: Option<String>) -> Self {
        AgentDecision { actions: vec![SubAction::silent()], rationale }
    }

    pub fn non_silent_len(&self) -> usize {
        self.actions.iter().filter(|a| a.kind != ActionKind::Silent).count()
    }

    /// Check the decision invariants: arity cap and permitted kinds.
    pub fn validate(&self, permitted: &BTreeSet<ActionKind>) -> Result<(), DecisionError> {
        let n = self.non_silent_len();
        if n > MAX_SUB_ACTIONS {
            return Err(DecisionError::TooManyActions(n));
        }
        for action in &self.actions {
            if action.kind != ActionKind::Silent && !permitted.contains(&action.kind) {
                return Err(DecisionError::NotPermitted(action.kind));
            }
        }
        Ok(())
    }
}

/// Free-text request routed through a backend (discussion replies and
/// orchestrator consolidation).
#[derive(Debug, Clone, PartialEq)]
pub struct TextRequest {
    pub purpose: TextPurpose,
    pub system: String,
    pub user: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextPurpose {
    Discussion { agent: AgentId, iteration: u32 },
    Orchestration { iteration: u32 },
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend request timed out")]
    Timeout,
    #[error("backend returned unusable output: {0}")]
    BadReply(String),
    #[error("transcript has no entry for request {0}")]
    MissingTranscript(String),
    #[error("credential environment variable {0} is not set")]
    MissingCredential(String),
    #[error("unsupported request for this backend: {0}")]
    Unsupported(String),
}

/// Decision source contract shared by scripted and LLM implementations.
/// Implementations must be safe for concurrent invocation across agents;
/// determinism comes from the substream seed inside each request.
pub trait Backend: Send + Sync {
    fn decide(&self, ctx: &AgentContext) -> Result<AgentDecision, BackendError>;

    fn complete_text(&self, req: &TextRequest) -> Result<String, BackendError>;
}

/// Instantiate the backend selected by the config. `run_dir` locates the
/// transcript file (`transcripts.jsonl`) for LLM record/replay.
pub fn from_config(
    config: &SimulationConfig,
    run_dir: Option<&Path>,
) -> Result<Box<dyn Backend>, BackendError> {
    match &config.backend {
        BackendConfig::Scripted { params } => {
            let params = params.unwrap_or_else(|| ScriptedPolicyParams::for_regime(config.regime));
            params.validate().map_err(BackendError::Unsupported)?;
            Ok(Box::new(ScriptedBackend::new(params)))
        }
        BackendConfig::Llm(cfg) => {
            let transcript_path = run_dir.map(|d| d.join("transcripts.jsonl"));
            Ok(Box::new(LlmBackend::new(cfg.clone(), transcript_path.as_deref())?))
        }
    }
}
