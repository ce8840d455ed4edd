//! Strict parsing of LLM decision replies.
//!
//! The documented reply schema is one JSON object:
//! `{"actions": [{"kind": "...", ...}], "rationale": "..."}` with kinds in
//! snake_case. A bare ```json fence around the object is tolerated since
//! chat models add one routinely; anything else is a parse error the engine
//! maps to a silent turn.

use super::{AgentDecision, SubAction, MAX_SUB_ACTIONS};
use crate::domain::{ActionKind, AgentId, PostId};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplyParseError {
    #[error("reply is not a JSON decision object: {0}")]
    Malformed(String),
    #[error("reply violates the decision schema: {0}")]
    Schema(String),
    #[error("reply carries {0} non-silent actions, cap is {MAX_SUB_ACTIONS}")]
    OverArity(usize),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplyDoc {
    actions: Vec<ReplyAction>,
    #[serde(default)]
    rationale: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplyAction {
    kind: ActionKind,
    #[serde(default)]
    target_post: Option<u64>,
    #[serde(default)]
    target_agent: Option<u32>,
    #[serde(default)]
    text: Option<String>,
}

fn strip_fence(raw: &str) -> &str {
    let trimmed = raw.trim();
    let Some(body) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let body = body.strip_prefix("json").unwrap_or(body);
    let body = body.strip_suffix("```").unwrap_or(body);
    body.trim()
}

/// Parse a raw model reply into an [`AgentDecision`].
pub fn parse_llm_reply(raw: &str) -> Result<AgentDecision, ReplyParseError> {
    let body = strip_fence(raw);
    let doc: ReplyDoc =
        serde_json::from_str(body).map_err(|e| ReplyParseError::Malformed(e.to_string()))?;
    if doc.actions.is_empty() {
        return Err(ReplyParseError::Schema("empty action list".into()));
    }
    let non_silent = doc.actions.iter().filter(|a| a.kind != ActionKind::Silent).count();
    if non_silent > MAX_SUB_ACTIONS {
        return Err(ReplyParseError::OverArity(non_silent));
    }
    let mut actions = Vec::with_capacity(doc.actions.len());
    for action in doc.actions {
        let sub = SubAction {
            kind: action.kind,
            target_post: action.target_post.map(PostId),
            target_agent: action.target_agent.map(AgentId),
            text: action.text,
        };
        match sub.kind {
            ActionKind::Post | ActionKind::Comment if sub.text.is_none() => {
                return Err(ReplyParseError::Schema(format!(
                    "{:?} action requires text",
                    sub.kind
                )));
            }
            ActionKind::ReShare | ActionKind::Comment | ActionKind::Like
                if sub.target_post.is_none() =>
            {
                return Err(ReplyParseError::Schema(format!(
                    "{:?} action requires target_post",
                    sub.kind
                )));
            }
            ActionKind::Follow if sub.target_agent.is_none() => {
                return Err(ReplyParseError::Schema("follow action requires target_agent".into()));
            }
            _ => {}
        }
        actions.push(sub);
    }
    Ok(AgentDecision { actions, rationale: doc.rationale })
}
