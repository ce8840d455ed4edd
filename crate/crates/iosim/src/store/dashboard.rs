//! Dashboard-compatible JSON bundle: per-iteration network snapshots,
//! cumulative adoption series, and group-interaction matrices, exported as
//! data for any external viewer to replay.

use crate::domain::{ActionEvent, ActionKind, AgentGroup, AgentId, Persona, SimulationConfig};
use crate::graph_metrics::{adoption_curve, adoption_iterations, build_interaction_graph};
use crate::logview::LogView;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub from: AgentId,
    pub to: AgentId,
    pub weight: u32,
}

/// Cumulative interaction networks as of the start of `iteration`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub iteration: u32,
    pub follow: Vec<WeightedEdge>,
    pub re_share: Vec<WeightedEdge>,
    pub comment: Vec<WeightedEdge>,
    pub like: Vec<WeightedEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub agent: AgentId,
    pub name: String,
    pub group: AgentGroup,
}

/// Row-normalized source-group x target-group interaction proportions.
/// Rows and columns follow `groups`; a row of zeros means the source group
/// never acted with that kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMatrix {
    pub groups: Vec<AgentGroup>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DashboardBundle {
    pub schema_version: u32,
    pub iterations: u32,
    pub hashtag: String,
    pub roster: Vec<RosterEntry>,
    /// `iterations + 1` snapshots: before iteration 0 through after the
    /// last iteration.
    pub snapshots: Vec<NetworkSnapshot>,
    /// Cumulative unique adopters per iteration, keyed by group.
    pub adoption: BTreeMap<String, Vec<u32>>,
    /// One matrix per interaction kind.
    pub interaction_matrix: BTreeMap<String, GroupMatrix>,
}

const GROUP_ORDER: [AgentGroup; 3] =
    [AgentGroup::Io, AgentGroup::OrganicAligned, AgentGroup::OrganicNotAligned];

const EDGE_KINDS: [(ActionKind, &str); 4] = [
    (ActionKind::Follow, "follow"),
    (ActionKind::ReShare, "re_share"),
    (ActionKind::Comment, "comment"),
    (ActionKind::Like, "like"),
];

fn edges_up_to(
    events: &[ActionEvent],
    view: &LogView,
    kind: ActionKind,
    before: u32,
) -> Vec<WeightedEdge> {
    let subset: Vec<ActionEvent> =
        events.iter().filter(|e| e.iteration < before).cloned().collect();
    let graph = build_interaction_graph(&subset, view, &[kind].into(), None);
    graph.edges().map(|(from, to, weight)| WeightedEdge { from, to, weight }).collect()
}

fn group_matrix(
    events: &[ActionEvent],
    view: &LogView,
    config: &SimulationConfig,
    kind: ActionKind,
) -> GroupMatrix {
    let index = |group: AgentGroup| GROUP_ORDER.iter().position(|&g| g == group).expect("known");
    let mut counts = [[0u64; 3]; 3];
    for event in events.iter().filter(|e| e.kind == kind) {
        let Some(target) = view.target_author(event) else { continue };
        let src = index(config.group_of(event.actor));
        let dst = index(config.group_of(target));
        counts[src][dst] += 1;
    }
    let rows = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                .collect()
        })
        .collect();
    GroupMatrix { groups: GROUP_ORDER.to_vec(), rows }
}

/// Assemble the full bundle from a complete log.
pub fn export_dashboard_bundle(
    events: &[ActionEvent],
    config: &SimulationConfig,
    personas: &[Persona],
) -> DashboardBundle {
    let view = LogView::from_events(events);
    let roster = personas
        .iter()
        .enumerate()
        .map(|(i, p)| RosterEntry { agent: AgentId(i as u32), name: p.name.clone(), group: p.group })
        .collect();

    let snapshots = (0..=config.iterations)
        .map(|t| NetworkSnapshot {
            iteration: t,
            follow: edges_up_to(events, &view, ActionKind::Follow, t),
            re_share: edges_up_to(events, &view, ActionKind::ReShare, t),
            comment: edges_up_to(events, &view, ActionKind::Comment, t),
            like: edges_up_to(events, &view, ActionKind::Like, t),
        })
        .collect();

    let adoptions = adoption_iterations(events, &view, &config.campaign.hashtag);
    let mut adoption = BTreeMap::new();
    for group in GROUP_ORDER {
        let members: BTreeSet<AgentId> = config.agents_in(group).into_iter().collect();
        adoption.insert(
            group.as_str().to_string(),
            adoption_curve(&adoptions, &members, config.iterations),
        );
    }

    let interaction_matrix = EDGE_KINDS
        .iter()
        .map(|&(kind, name)| (name.to_string(), group_matrix(events, &view, config, kind)))
        .collect();

    DashboardBundle {
        schema_version: BUNDLE_SCHEMA_VERSION,
        iterations: config.iterations,
        hashtag: config.campaign.hashtag.clone(),
        roster,
        snapshots,
        adoption,
        interaction_matrix,
    }
}
