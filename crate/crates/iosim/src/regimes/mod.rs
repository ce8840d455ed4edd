//! Operational-regime machinery: prompt rendering, the periodic discussion
//! cycle, performance-material assembly, and strategy consolidation.

mod materials;
mod prompts;
mod strategy;

pub use materials::{assemble_performance_materials, render_materials, AgentPerformance, PerformanceMaterials};
pub use prompts::{
    render_system_prompt, render_template, PromptError, PromptLibrary, DISCUSSION_TEMPLATE,
    IO_COMMON_GOAL_TEMPLATE, IO_TEAM_TEMPLATE, ORCHESTRATOR_TEMPLATE, ORGANIC_TEMPLATE,
};
pub use strategy::{
    consolidate_deterministic, consolidate_llm, consolidate_strategies, parse_numbered_list,
    parse_recommendation, CollectiveStrategy, OrchestratorCall, Recommendation, StrategyError,
    StrategyItem, DEFAULT_CLUSTER_JACCARD, MAX_STRATEGY_ITEMS, RECOMMENDATION_ARITY,
};

use crate::backends::{Backend, TextPurpose, TextRequest};
use crate::domain::{ActionEvent, AgentGroup, AgentId, Regime};
use crate::engine::{substream_seed, RegimeHooks, SimState, StreamPurpose};
use crate::store::{DiscussionRecord, LogRecord};
use log::warn;
use std::collections::BTreeMap;
use std::collections::BTreeSet;

/// A discussion happens only under collective decision-making, at the start
/// of every `discussion_period`-th iteration after the first.
pub fn should_hold_discussion(iteration: u32, regime: Regime) -> bool {
    match regime {
        Regime::CollectiveDecisionMaking { discussion_period, .. } => {
            iteration > 0 && iteration % discussion_period == 0
        }
        _ => false,
    }
}

/// Store the consolidated strategy; it is injected into every IO agent's
/// prompt context until the next broadcast replaces it.
pub fn broadcast_strategy(state: &mut SimState, strategy: CollectiveStrategy) {
    state.strategy = Some(strategy);
}

/// Ask each IO agent for its three recommendations given the rendered
/// materials. Replies that fail to parse are dropped with a warning; a
/// backend failure skips that agent.
pub fn collect_recommendations(
    materials: &PerformanceMaterials,
    io_agents: &[AgentId],
    backend: &dyn Backend,
    prompts: &PromptLibrary,
    state: &SimState,
    iteration: u32,
) -> Vec<Recommendation> {
    let period = materials.window.end.saturating_sub(materials.window.start);
    let rendered = render_materials(materials);
    let mut recs = Vec::new();
    for &agent in io_agents {
        let persona = &state.agents[agent.index()].persona;
        let roster = state.io_roster_excluding(agent);
        let system = match render_system_prompt(
            state.config.regime,
            persona,
            &state.config.campaign,
            &roster,
            state.strategy.as_ref(),
            prompts,
        ) {
            Ok(s) => s,
            Err(e) => {
                warn!("discussion iter {iteration}: prompt for {agent} failed: {e}");
                continue;
            }
        };
        let ask = match render_template(
            &prompts.discussion,
            &BTreeMap::from([("N_DISCUSSION_STEPS", period.to_string())]),
        ) {
            Ok(s) => s,
            Err(e) => {
                warn!("discussion iter {iteration}: discussion template failed: {e}");
                continue;
            }
        };
        let req = TextRequest {
            purpose: TextPurpose::Discussion { agent, iteration },
            system,
            user: format!("{rendered}\n{ask}"),
            seed: substream_seed(state.config.seed, agent.0, iteration, StreamPurpose::Discussion),
        };
        match backend.complete_text(&req) {
            Ok(reply) => match parse_recommendation(agent, &reply) {
                Ok(rec) => recs.push(rec),
                Err(e) => warn!("discussion iter {iteration}: reply from {agent} dropped: {e}"),
            },
            Err(e) => warn!("discussion iter {iteration}: backend failed for {agent}: {e}"),
        }
    }
    recs
}

/// Regime hook driving the five-step discussion cycle. Discussions run at
/// the start of the qualifying iteration, before any agent turn, and leave
/// a kind-tagged meta record in the log so cadence is auditable without
/// contaminating the platform-action history.
pub struct DiscussionCycle<'a> {
    backend: &'a dyn Backend,
    prompts: &'a PromptLibrary,
}

impl<'a> DiscussionCycle<'a> {
    pub fn new(backend: &'a dyn Backend, prompts: &'a PromptLibrary) -> Self {
        DiscussionCycle { backend, prompts }
    }
}

impl RegimeHooks for DiscussionCycle<'_> {
    fn before_iteration(
        &mut self,
        state: &mut SimState,
        iteration: u32,
        history: &[LogRecord],
    ) -> Vec<LogRecord> {
        let regime = state.config.regime;
        if !should_hold_discussion(iteration, regime) {
            return Vec::new();
        }
        let Regime::CollectiveDecisionMaking { discussion_period, orchestrator } = regime else {
            return Vec::new();
        };

        let actions: Vec<ActionEvent> = history
            .iter()
            .filter_map(|r| match r {
                LogRecord::Action(e) => Some(e.clone()),
                LogRecord::Discussion(_) => None,
            })
            .collect();
        let io_set: BTreeSet<AgentId> = state
            .agents
            .iter()
            .filter(|a| a.persona.group == AgentGroup::Io)
            .map(|a| a.id)
            .collect();
        let io_agents: Vec<AgentId> = io_set.iter().copied().collect();
        let window = iteration.saturating_sub(discussion_period)..iteration;
        let materials = assemble_performance_materials(&actions, window, &io_set);

        let recs = collect_recommendations(
            &materials,
            &io_agents,
            self.backend,
            self.prompts,
            state,
            iteration,
        );
        if recs.is_empty() {
            warn!("discussion iter {iteration}: no usable recommendations, strategy unchanged");
            return Vec::new();
        }

        let call = OrchestratorCall {
            backend: self.backend,
            prompts: self.prompts,
            iteration,
            seed: substream_seed(state.config.seed, u32::MAX, iteration, StreamPurpose::Discussion),
        };
        let strategy = match consolidate_strategies(&recs, orchestrator, Some(&call)) {
            Ok(s) => s,
            Err(e) => {
                warn!("discussion iter {iteration}: consolidation failed ({e}), strategy unchanged");
                return Vec::new();
            }
        };

        broadcast_strategy(state, strategy.clone());
        vec![LogRecord::Discussion(DiscussionRecord::new(
            iteration,
            recs.iter().map(|r| r.author).collect(),
            strategy,
        ))]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discussion_cadence() {
        let cdm = Regime::collective_decision_making();
        assert!(should_hold_discussion(5, cdm));
        assert!(should_hold_discussion(45, cdm));
        assert!(!should_hold_discussion(0, cdm));
        assert!(!should_hold_discussion(7, cdm));
        assert!(!should_hold_discussion(5, Regime::CommonGoal));
        assert!(!should_hold_discussion(5, Regime::TeammateAwareness));
    }

    #[test]
    fn cadence_counts_for_fifty_iterations() {
        let cdm = Regime::collective_decision_making();
        let held = (0..50).filter(|&t| should_hold_discussion(t, cdm)).count();
        // floor((50-1)/5) discussions: iterations 5, 10, ..., 45.
        assert_eq!(held, 9);
    }
}
