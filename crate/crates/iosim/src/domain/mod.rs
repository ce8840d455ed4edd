//! Core domain types shared by every other module: identifiers, agent
//! groups, personas, campaigns, operational regimes, and the action event
//! that forms the atom of the append-only log.

mod config;
mod hashtags;
mod manifest;
mod personas;

pub use config::{validate_config, BackendConfig, ConfigError, LlmConfig, SimulationConfig};
pub use hashtags::{extract_hashtags, normalize_hashtag};
pub use manifest::RunManifest;
pub use personas::{generate_personas, load_personas_jsonl, PersonaError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense per-run agent identifier, `0..N-1`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// Identifier of a post (original, re-share, or comment), dense per run.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct PostId(pub u64);

impl PostId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for PostId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// The three disjoint agent populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentGroup {
    Io,
    OrganicAligned,
    OrganicNotAligned,
}

impl AgentGroup {
    pub fn is_organic(self) -> bool {
        !matches!(self, AgentGroup::Io)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgentGroup::Io => "io",
            AgentGroup::OrganicAligned => "organic_aligned",
            AgentGroup::OrganicNotAligned => "organic_not_aligned",
        }
    }
}

impl std::fmt::Display for AgentGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identity an agent is instantiated with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub name: String,
    pub profile_summary: String,
    pub group: AgentGroup,
}

/// Level of mutual knowledge granted to IO agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    CommonGoal,
    TeammateAwareness,
    CollectiveDecisionMaking {
        #[serde(default = "default_discussion_period")]
        discussion_period: u32,
        #[serde(default)]
        orchestrator: OrchestratorMode,
    },
}

fn default_discussion_period() -> u32 {
    5
}

impl Regime {
    pub fn collective_decision_making() -> Self {
        Regime::CollectiveDecisionMaking {
            discussion_period: default_discussion_period(),
            orchestrator: OrchestratorMode::Deterministic,
        }
    }

    /// True for regimes where IO agents know their teammates' identities.
    pub fn roster_visible(self) -> bool {
        !matches!(self, Regime::CommonGoal)
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::CommonGoal => "common_goal",
            Regime::TeammateAwareness => "teammate_awareness",
            Regime::CollectiveDecisionMaking { .. } => "collective_decision_making",
        }
    }
}

/// How IO recommendations are consolidated into a collective strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OrchestratorMode {
    /// Token-set clustering with supporter counting; fully reproducible.
    #[default]
    Deterministic,
    /// Delegate consolidation to the orchestrator prompt on the backend.
    Llm,
}

/// What the IO group is promoting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    pub topic: String,
    pub candidate: String,
    /// Single `#`-leading token, stored lowercase for matching.
    pub hashtag: String,
}

/// Closed set of platform actions an agent can take in one turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Post,
    ReShare,
    Comment,
    Like,
    Follow,
    Silent,
}

impl ActionKind {
    /// Canonical application/log order within one agent turn.
    pub fn rank(self) -> u8 {
        match self {
            ActionKind::Post => 0,
            ActionKind::ReShare => 1,
            ActionKind::Comment => 2,
            ActionKind::Like => 3,
            ActionKind::Follow => 4,
            ActionKind::Silent => 5,
        }
    }

    /// The five gateable kinds, in canonical order. `Silent` is always legal.
    pub const GATED: [ActionKind; 5] = [
        ActionKind::Post,
        ActionKind::ReShare,
        ActionKind::Comment,
        ActionKind::Like,
        ActionKind::Follow,
    ];
}

/// One timestamped agent action; the atom of the append-only log.
///
/// Field presence depends on `kind`:
/// - `Post`: `post_id`, `text` (hashtags extracted from the text)
/// - `ReShare`: `post_id` (the new re-share post), `target_post`
/// - `Comment`: `post_id` (the new comment post), `target_post`, `text`
/// - `Like`: `target_post`
/// - `Follow`: `target_agent` (never the actor itself)
/// - `Silent`: no payload
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub iteration: u32,
    pub actor: AgentId,
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_id: Option<PostId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_post: Option<PostId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_agent: Option<AgentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hashtags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EventError {
    #[error("{kind:?} event requires field `{field}`")]
    MissingField { kind: ActionKind, field: &'static str },
    #[error("{kind:?} event must not carry field `{field}`")]
    ForbiddenField { kind: ActionKind, field: &'static str },
    #[error("follow target equals the actor")]
    SelfFollow,
    #[error("hashtags not extracted from the event text: {0:?}")]
    ForeignHashtag(String),
}

impl ActionEvent {
    fn blank(iteration: u32, actor: AgentId, kind: ActionKind) -> Self {
        ActionEvent {
            iteration,
            actor,
            kind,
            post_id: None,
            target_post: None,
            target_agent: None,
            text: None,
            hashtags: Vec::new(),
            rationale: None,
        }
    }

    pub fn post(
        iteration: u32,
        actor: AgentId,
        post_id: PostId,
        text: impl Into<String>,
        rationale: Option<String>,
    ) -> Result<Self, EventError> {
        let text = text.into();
        let hashtags = extract_hashtags(&text);
        let mut ev = Self::blank(iteration, actor, ActionKind::Post);
        ev.post_id = Some(post_id);
        ev.text = Some(text);
        ev.hashtags = hashtags;
        ev.rationale = rationale;
        ev.validate()?;
        Ok(ev)
    }

    pub fn re_share(
        iteration: u32,
        actor: AgentId,
        post_id: PostId,
        target_post: PostId,
        rationale: Option<String>,
    ) -> Result<Self, EventError> {
        let mut ev = Self::blank(iteration, actor, ActionKind::ReShare);
        ev.post_id = Some(post_id);
        ev.target_post = Some(target_post);
        ev.rationale = rationale;
        ev.validate()?;
        Ok(ev)
    }

    pub fn comment(
        iteration: u32,
        actor: AgentId,
        post_id: PostId,
        target_post: PostId,
        text: impl Into<String>,
        rationale: Option<String>,
    ) -> Result<Self, EventError> {
        let text = text.into();
        let hashtags = extract_hashtags(&text);
        let mut ev = Self::blank(iteration, actor, ActionKind::Comment);
        ev.post_id = Some(post_id);
        ev.target_post = Some(target_post);
        ev.text = Some(text);
        ev.hashtags = hashtags;
        ev.rationale = rationale;
        ev.validate()?;
        Ok(ev)
    }

    pub fn like(
        iteration: u32,
        actor: AgentId,
        target_post: PostId,
        rationale: Option<String>,
    ) -> Result<Self, EventError> {
        let mut ev = Self::blank(iteration, actor, ActionKind::Like);
        ev.target_post = Some(target_post);
        ev.rationale = rationale;
        ev.validate()?;
        Ok(ev)
    }

    pub fn follow(
        iteration: u32,
        actor: AgentId,
        target_agent: AgentId,
        rationale: Option<String>,
    ) -> Result<Self, EventError> {
        let mut ev = Self::blank(iteration, actor, ActionKind::Follow);
        ev.target_agent = Some(target_agent);
        ev.rationale = rationale;
        ev.validate()?;
        Ok(ev)
    }

    pub fn silent(iteration: u32, actor: AgentId, rationale: Option<String>) -> Self {
        let mut ev = Self::blank(iteration, actor, ActionKind::Silent);
        ev.rationale = rationale;
        ev
    }

    /// Per-kind field requirements; every constructor-accepted event and
    /// every loaded log line must pass.
    pub fn validate(&self) -> Result<(), EventError> {
        use ActionKind::*;
        let kind = self.kind;
        let require = |present: bool, field: &'static str| {
            if present {
                Ok(())
            } else {
                Err(EventError::MissingField { kind, field })
            }
        };
        let forbid = |absent: bool, field: &'static str| {
            if absent {
                Ok(())
            } else {
                Err(EventError::ForbiddenField { kind, field })
            }
        };
        match kind {
            Post => {
                require(self.post_id.is_some(), "post_id")?;
                require(self.text.is_some(), "text")?;
                forbid(self.target_post.is_none(), "target_post")?;
                forbid(self.target_agent.is_none(), "target_agent")?;
            }
            ReShare => {
                require(self.post_id.is_some(), "post_id")?;
                require(self.target_post.is_some(), "target_post")?;
                forbid(self.text.is_none(), "text")?;
                forbid(self.target_agent.is_none(), "target_agent")?;
                forbid(self.hashtags.is_empty(), "hashtags")?;
            }
            Comment => {
                require(self.post_id.is_some(), "post_id")?;
                require(self.target_post.is_some(), "target_post")?;
                require(self.text.is_some(), "text")?;
                forbid(self.target_agent.is_none(), "target_agent")?;
            }
            Like => {
                require(self.target_post.is_some(), "target_post")?;
                forbid(self.post_id.is_none(), "post_id")?;
                forbid(self.text.is_none(), "text")?;
                forbid(self.target_agent.is_none(), "target_agent")?;
                forbid(self.hashtags.is_empty(), "hashtags")?;
            }
            Follow => {
                require(self.target_agent.is_some(), "target_agent")?;
                forbid(self.post_id.is_none(), "post_id")?;
                forbid(self.target_post.is_none(), "target_post")?;
                forbid(self.text.is_none(), "text")?;
                forbid(self.hashtags.is_empty(), "hashtags")?;
                if self.target_agent == Some(self.actor) {
                    return Err(EventError::SelfFollow);
                }
            }
            Silent => {
                forbid(self.post_id.is_none(), "post_id")?;
                forbid(self.target_post.is_none(), "target_post")?;
                forbid(self.target_agent.is_none(), "target_agent")?;
                forbid(self.text.is_none(), "text")?;
                forbid(self.hashtags.is_empty(), "hashtags")?;
            }
        }
        if let Some(text) = &self.text {
            let extracted = extract_hashtags(text);
            for tag in &self.hashtags {
                if !extracted.contains(tag) {
                    return Err(EventError::ForeignHashtag(tag.clone()));
                }
            }
        }
        Ok(())
    }

    /// Sort key realizing the canonical log order.
    pub fn order_key(&self) -> (u32, u32, u8) {
        (self.iteration, self.actor.0, self.kind.rank())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_constructors_enforce_kind_rules() {
        let post = ActionEvent::post(0, AgentId(1), PostId(0), "hello #World", None).unwrap();
        assert_eq!(post.hashtags, vec!["#world"]);
        assert!(ActionEvent::follow(0, AgentId(1), AgentId(1), None).is_err());
        let follow = ActionEvent::follow(0, AgentId(1), AgentId(2), None).unwrap();
        assert_eq!(follow.target_agent, Some(AgentId(2)));
        let silent = ActionEvent::silent(3, AgentId(0), None);
        assert!(silent.validate().is_ok());
    }

    #[test]
    fn validate_rejects_foreign_hashtags() {
        let mut ev = ActionEvent::post(0, AgentId(0), PostId(0), "no tags here", None).unwrap();
        ev.hashtags = vec!["#sneaky".into()];
        assert_eq!(ev.validate(), Err(EventError::ForeignHashtag("#sneaky".into())));
    }

    #[test]
    fn event_serde_round_trip() {
        let ev =
            ActionEvent::comment(7, AgentId(3), PostId(9), PostId(2), "nice #take", None).unwrap();
        let line = serde_json::to_string(&ev).unwrap();
        let back: ActionEvent = serde_json::from_str(&line).unwrap();
        assert_eq!(ev, back);
    }

    #[test]
    fn regime_serde_shapes() {
        let r: Regime = serde_json::from_str(r#"{"kind":"collective_decision_making"}"#).unwrap();
        assert_eq!(r, Regime::collective_decision_making());
        let r: Regime =
            serde_json::from_str(r#"{"kind":"collective_decision_making","discussion_period":7}"#)
                .unwrap();
        match r {
            Regime::CollectiveDecisionMaking { discussion_period, .. } => {
                assert_eq!(discussion_period, 7)
            }
            _ => panic!("wrong variant"),
        }
        assert_eq!(serde_json::to_string(&Regime::CommonGoal).unwrap(), r#"{"kind":"common_goal"}"#);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        fn arb_kind() -> impl Strategy<Value = ActionKind> {
            prop_oneof![
                Just(ActionKind::Post),
                Just(ActionKind::ReShare),
                Just(ActionKind::Comment),
                Just(ActionKind::Like),
                Just(ActionKind::Follow),
                Just(ActionKind::Silent),
            ]
        }

        proptest! {
            // Any event assembled through the public constructors satisfies
            // the per-kind field requirements.
            #[test]
            fn constructed_events_are_well_formed(
                kind in arb_kind(),
                iter in 0u32..100,
                actor in 0u32..50,
                target in 0u32..50,
                text in "[ a-z#]{0,40}",
            ) {
                let actor_id = AgentId(actor);
                let target_id = AgentId(target);
                let ev = match kind {
                    ActionKind::Post => ActionEvent::post(iter, actor_id, PostId(1), text, None).ok(),
                    ActionKind::ReShare => ActionEvent::re_share(iter, actor_id, PostId(1), PostId(0), None).ok(),
                    ActionKind::Comment => ActionEvent::comment(iter, actor_id, PostId(1), PostId(0), text, None).ok(),
                    ActionKind::Like => ActionEvent::like(iter, actor_id, PostId(0), None).ok(),
                    ActionKind::Follow => ActionEvent::follow(iter, actor_id, target_id, None).ok(),
                    ActionKind::Silent => Some(ActionEvent::silent(iter, actor_id, None)),
                };
                if let Some(ev) = ev {
                    prop_assert!(ev.validate().is_ok());
                } else {
                    // The only constructor that can refuse is Follow on self.
                    prop_assert_eq!(kind, ActionKind::Follow);
                    prop_assert_eq!(actor, target);
                }
            }
        }
    }
}
