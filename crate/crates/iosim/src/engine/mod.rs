//! The iterative simulation loop: feed construction, action gating,
//! decision application, memory and engagement updates, all in a canonical
//! deterministic order.
//!
//! Within one iteration every agent sees the same pre-iteration snapshot;
//! decisions are applied strictly in ascending agent-id order, so the event
//! log is a pure function of (config, seed, personas, backend).

pub mod feed;
pub mod memory;
pub mod post;
pub mod rng;

pub use feed::{build_feed, Feed, FeedEntry};
pub use memory::{update_memory, AgentMemory};
pub use post::{Post, PostKind, PostStore};
pub use rng::{substream, substream_seed, SimRng, StreamPurpose};

use crate::backends::{AgentContext, AgentDecision, Backend, FeedItem};
use crate::domain::{
    check_personas, generate_personas, ActionEvent, ActionKind, AgentGroup, AgentId, Persona,
    PersonaError, RunManifest, SimulationConfig,
};
use crate::regimes::{render_system_prompt, CollectiveStrategy, PromptLibrary};
use crate::store::{LogRecord, StoreError};
use log::warn;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error(transparent)]
    Personas(#[from] PersonaError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("prompt rendering failed: {0}")]
    Prompt(String),
}

/// One agent's mutable state: identity, memory, and follow set.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub persona: Persona,
    pub memory: AgentMemory,
    pub follows: BTreeSet<AgentId>,
}

/// Full mutable world owned by the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub config: SimulationConfig,
    pub iteration: u32,
    pub agents: Vec<AgentState>,
    pub posts: PostStore,
    pub strategy: Option<CollectiveStrategy>,
}

impl SimState {
    pub fn agent(&self, id: AgentId) -> Option<&AgentState> {
        self.agents.get(id.index())
    }

    pub fn group_of(&self, id: AgentId) -> AgentGroup {
        self.agents[id.index()].persona.group
    }

    pub fn io_roster_excluding(&self, me: AgentId) -> Vec<String> {
        self.agents
            .iter()
            .filter(|a| a.persona.group == AgentGroup::Io && a.id != me)
            .map(|a| a.persona.name.clone())
            .collect()
    }
}

/// Build iteration-0 state. Personas must match the configured group counts
/// and carry unique names; they are laid out in canonical id order (IO
/// agents first, then aligned, then not-aligned organics).
pub fn init_simulation(
    config: SimulationConfig,
    personas: Vec<Persona>,
) -> Result<SimState, EngineError> {
    check_personas(&personas, &config)?;
    let mut ordered = Vec::with_capacity(personas.len());
    for group in
        [AgentGroup::Io, AgentGroup::OrganicAligned, AgentGroup::OrganicNotAligned]
    {
        ordered.extend(personas.iter().filter(|p| p.group == group).cloned());
    }
    let agents = ordered
        .into_iter()
        .enumerate()
        .map(|(i, persona)| AgentState {
            id: AgentId(i as u32),
            persona,
            memory: AgentMemory::default(),
            follows: BTreeSet::new(),
        })
        .collect();
    Ok(SimState { config, iteration: 0, agents, posts: PostStore::new(), strategy: None })
}

/// Draw the enabled action kinds for one turn: one uniform draw per gateable
/// kind in canonical order, enabled iff the draw is below the threshold.
/// `Silent` is always permitted.
pub fn gate_actions(rng: &mut SimRng, threshold: f64) -> BTreeSet<ActionKind> {
    let mut enabled = BTreeSet::new();
    for kind in ActionKind::GATED {
        if rng.next_f64() < threshold {
            enabled.insert(kind);
        }
    }
    enabled.insert(ActionKind::Silent);
    enabled
}

/// Assemble the decision context for `agent` from the current snapshot.
/// Records feed hashtag exposures into the agent's memory as a side effect
/// (the delivery is part of the turn).
pub fn build_context(
    state: &mut SimState,
    agent: AgentId,
    prompts: &PromptLibrary,
) -> Result<AgentContext, EngineError> {
    let config = state.config.clone();
    let t = state.iteration;
    let group = state.group_of(agent);
    let roster_visible = group == AgentGroup::Io && config.regime.roster_visible();

    let mut feed_rng = substream(config.seed, agent.0, t, StreamPurpose::Feed);
    let feed = build_feed(
        &state.posts,
        &state.agents[agent.index()].follows,
        agent,
        config.feed_size,
        config.in_network_fraction,
        &mut feed_rng,
    );

    let mut items = Vec::with_capacity(feed.len());
    for entry in &feed.entries {
        let post = state.posts.get(entry.post).expect("feed references existing post");
        items.push(FeedItem {
            post: post.id,
            author: post.author,
            author_name: state.agents[post.author.index()].persona.name.clone(),
            text: post.text.clone(),
            hashtags: post.hashtags.clone(),
            in_network: entry.in_network,
            is_teammate: roster_visible
                && post.author != agent
                && state.group_of(post.author) == AgentGroup::Io,
        });
    }

    // Delivery counts as exposure for every tag carried by a served post.
    {
        let memory = &mut state.agents[agent.index()].memory;
        for item in &items {
            for tag in &item.hashtags {
                memory.record_exposure(tag);
            }
        }
    }

    let mut gate_rng = substream(config.seed, agent.0, t, StreamPurpose::Gate);
    let permitted = gate_actions(&mut gate_rng, config.activation_threshold);

    let roster =
        if roster_visible { state.io_roster_excluding(agent) } else { Vec::new() };
    let strategy = if group == AgentGroup::Io { state.strategy.clone() } else { None };

    let me = &state.agents[agent.index()];
    let system_prompt = render_system_prompt(
        config.regime,
        &me.persona,
        &config.campaign,
        &roster,
        strategy.as_ref(),
        prompts,
    )
    .map_err(|e| EngineError::Prompt(e.to_string()))?;

    let memory_digest = me.memory.recent().map(render_memory_line).collect();
    let campaign_exposures = me.memory.exposures(&config.campaign.hashtag);

    Ok(AgentContext {
        agent,
        group,
        iteration: t,
        system_prompt,
        memory_digest,
        strategy,
        feed: items,
        permitted,
        campaign: config.campaign.clone(),
        campaign_exposures,
        roster,
        following: me.follows.clone(),
        decision_seed: substream_seed(config.seed, agent.0, t, StreamPurpose::Decide),
    })
}

fn render_memory_line(entry: &memory::MemoryEntry) -> String {
    let ev = &entry.event;
    let verb = match ev.kind {
        ActionKind::Post => "posted",
        ActionKind::ReShare => "re-shared",
        ActionKind::Comment => "commented on",
        ActionKind::Like => "liked",
        ActionKind::Follow => "followed",
        ActionKind::Silent => "stayed silent",
    };
    let object = ev
        .target_post
        .map(|p| p.to_string())
        .or_else(|| ev.target_agent.map(|a| a.to_string()))
        .or_else(|| ev.post_id.map(|p| p.to_string()))
        .unwrap_or_default();
    if entry.own_action {
        format!("iter {}: you {} {}", ev.iteration, verb, object).trim_end().to_string()
    } else {
        format!("iter {}: {} {} your {}", ev.iteration, ev.actor, verb, object)
            .trim_end()
            .to_string()
    }
}

/// Apply one agent's decision to the state and return the produced events
/// in canonical order (Post, ReShare, Comment, Like, Follow).
///
/// Sub-actions that are invalid — unpermitted kind, dangling target,
/// missing text, over the arity cap — are dropped with a warning while the
/// rest still apply. A turn that applies nothing yields one Silent event.
pub fn apply_decision(
    state: &mut SimState,
    actor: AgentId,
    decision: &AgentDecision,
    permitted: &BTreeSet<ActionKind>,
) -> Result<Vec<ActionEvent>, EngineError> {
    if state.agent(actor).is_none() {
        return Err(EngineError::UnknownAgent(actor));
    }
    let t = state.iteration;
    let rationale = decision.rationale.clone();

    let mut subs: Vec<&crate::backends::SubAction> =
        decision.actions.iter().filter(|s| s.kind != ActionKind::Silent).collect();
    subs.sort_by_key(|s| s.kind.rank());

    let mut events: Vec<ActionEvent> = Vec::new();
    let mut applied = 0usize;
    for sub in subs {
        if applied >= crate::backends::MAX_SUB_ACTIONS {
            warn!("agent {actor} iter {t}: dropping sub-action over the arity cap");
            continue;
        }
        if !permitted.contains(&sub.kind) {
            warn!("agent {actor} iter {t}: dropping non-permitted {:?}", sub.kind);
            continue;
        }
        let event = match sub.kind {
            ActionKind::Post => {
                let Some(text) = sub.text.clone() else {
                    warn!("agent {actor} iter {t}: post without text dropped");
                    continue;
                };
                let id = state.posts.next_id();
                let ev = ActionEvent::post(t, actor, id, text.clone(), rationale.clone())
                    .expect("constructed post event is valid");
                state.posts.create(actor, t, text, ev.hashtags.clone(), PostKind::Original);
                ev
            }
            ActionKind::ReShare => {
                let Some(target) = sub.target_post else {
                    warn!("agent {actor} iter {t}: re-share without target dropped");
                    continue;
                };
                let Some(source) = state.posts.get(target).cloned() else {
                    warn!("agent {actor} iter {t}: re-share of dangling {target} dropped");
                    continue;
                };
                let id = state.posts.next_id();
                let ev = ActionEvent::re_share(t, actor, id, target, rationale.clone())
                    .expect("constructed re-share event is valid");
                state.posts.create(
                    actor,
                    t,
                    source.text.clone(),
                    source.hashtags.clone(),
                    PostKind::ReShareOf(target),
                );
                state.posts.get_mut(target).expect("checked above").re_shares += 1;
                ev
            }
            ActionKind::Comment => {
                let (Some(target), Some(text)) = (sub.target_post, sub.text.clone()) else {
                    warn!("agent {actor} iter {t}: comment missing target or text dropped");
                    continue;
                };
                if state.posts.get(target).is_none() {
                    warn!("agent {actor} iter {t}: comment on dangling {target} dropped");
                    continue;
                }
                let id = state.posts.next_id();
                let ev =
                    ActionEvent::comment(t, actor, id, target, text.clone(), rationale.clone())
                        .expect("constructed comment event is valid");
                state.posts.create(actor, t, text, ev.hashtags.clone(), PostKind::CommentOn(target));
                state.posts.get_mut(target).expect("checked above").comments += 1;
                ev
            }
            ActionKind::Like => {
                let Some(target) = sub.target_post else {
                    warn!("agent {actor} iter {t}: like without target dropped");
                    continue;
                };
                if state.posts.get(target).is_none() {
                    warn!("agent {actor} iter {t}: like of dangling {target} dropped");
                    continue;
                }
                let ev = ActionEvent::like(t, actor, target, rationale.clone())
                    .expect("constructed like event is valid");
                state.posts.get_mut(target).expect("checked above").likes += 1;
                ev
            }
            ActionKind::Follow => {
                let Some(target) = sub.target_agent else {
                    warn!("agent {actor} iter {t}: follow without target dropped");
                    continue;
                };
                if target == actor || state.agent(target).is_none() {
                    warn!("agent {actor} iter {t}: follow of invalid target {target} dropped");
                    continue;
                }
                // Idempotent: an existing edge produces no event.
                if !state.agents[actor.index()].follows.insert(target) {
                    continue;
                }
                ActionEvent::follow(t, actor, target, rationale.clone())
                    .expect("constructed follow event is valid")
            }
            ActionKind::Silent => unreachable!("silent filtered above"),
        };
        events.push(event);
        applied += 1;
    }

    if events.is_empty() {
        events.push(ActionEvent::silent(t, actor, rationale));
    }

    // Memory updates for everyone the events involve.
    for event in &events {
        let mut involved = vec![event.actor];
        if let Some(target_post) = event.target_post {
            if let Some(post) = state.posts.get(target_post) {
                involved.push(post.author);
            }
        }
        if let Some(target_agent) = event.target_agent {
            involved.push(target_agent);
        }
        involved.dedup();
        for id in involved {
            update_memory(&mut state.agents[id.index()].memory, id, std::slice::from_ref(event));
        }
    }

    Ok(events)
}

/// Regime-specific work hooked in before the agent turns of an iteration.
pub trait RegimeHooks {
    fn before_iteration(
        &mut self,
        state: &mut SimState,
        iteration: u32,
        history: &[LogRecord],
    ) -> Vec<LogRecord>;
}

/// Hooks for regimes without a discussion cycle.
pub struct NoHooks;

impl RegimeHooks for NoHooks {
    fn before_iteration(&mut self, _: &mut SimState, _: u32, _: &[LogRecord]) -> Vec<LogRecord> {
        Vec::new()
    }
}

/// Run one iteration: regime hooks, then per-agent feed/gate/decide/apply
/// in ascending agent-id order. A backend failure leaves that agent silent
/// and the run continues.
pub fn run_iteration(
    state: &mut SimState,
    backend: &dyn Backend,
    hooks: &mut dyn RegimeHooks,
    prompts: &PromptLibrary,
    history: &[LogRecord],
) -> Result<Vec<LogRecord>, EngineError> {
    let t = state.iteration;
    debug_assert!(t < state.config.iterations, "iteration past configured horizon");
    let mut records = hooks.before_iteration(state, t, history);

    // Phase 1: contexts from the pre-iteration snapshot. Only the owner's
    // exposure memory mutates here, which no other context reads.
    let n = state.agents.len();
    let mut contexts = Vec::with_capacity(n);
    for i in 0..n {
        contexts.push(build_context(state, AgentId(i as u32), prompts)?);
    }

    // Phase 2: decisions applied sequentially in ascending id order.
    for ctx in contexts {
        let actor = ctx.agent;
        let permitted = ctx.permitted.clone();
        let decision = match backend.decide(&ctx) {
            Ok(d) => d,
            Err(e) => {
                warn!("agent {actor} iter {t}: backend failed ({e}), staying silent");
                AgentDecision::silent(None)
            }
        };
        let events = apply_decision(state, actor, &decision, &permitted)?;
        records.extend(events.into_iter().map(LogRecord::Action));
    }

    state.iteration += 1;
    Ok(records)
}

/// Where produced log records go, one batch per iteration.
pub trait EventSink {
    fn append(&mut self, records: &[LogRecord]) -> Result<(), StoreError>;
}

/// In-memory sink for tests and library callers.
#[derive(Debug, Default)]
pub struct VecSink(pub Vec<LogRecord>);

impl EventSink for VecSink {
    fn append(&mut self, records: &[LogRecord]) -> Result<(), StoreError> {
        self.0.extend_from_slice(records);
        Ok(())
    }
}

/// Execute a full run: init, `config.iterations` iterations, flush to the
/// sink per iteration. Personas are generated synthetically when absent.
/// On sink failure the run aborts with the partial log already flushed.
pub fn run_simulation(
    config: SimulationConfig,
    personas: Option<Vec<Persona>>,
    backend: &dyn Backend,
    prompts: &PromptLibrary,
    sink: &mut dyn EventSink,
) -> Result<(RunManifest, Vec<LogRecord>), EngineError> {
    let personas = personas.unwrap_or_else(|| generate_personas(&config));
    let mut manifest =
        RunManifest::new(config.clone(), personas.clone(), chrono::Utc::now().to_rfc3339());
    let mut state = init_simulation(config.clone(), personas)?;

    let mut hooks = crate::regimes::DiscussionCycle::new(backend, prompts);
    let mut history: Vec<LogRecord> = Vec::new();
    for _ in 0..config.iterations {
        let records = run_iteration(&mut state, backend, &mut hooks, prompts, &history)?;
        sink.append(&records)?;
        history.extend(records);
    }
    manifest.finished_at = chrono::Utc::now().to_rfc3339();
    Ok((manifest, history))
}
