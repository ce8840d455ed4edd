//! Performance materials presented to IO agents at the start of a
//! discussion cycle: per-agent and aggregated activity summaries plus the
//! list of IO-to-IO interactions, all derived purely from the event log
//! restricted to the window.

use crate::domain::{ActionEvent, ActionKind, AgentId, PostId};
use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentPerformance {
    pub agent: AgentId,
    /// Texts of original posts made inside the window.
    pub posts: Vec<String>,
    pub re_shares_received: u32,
    pub comments_received: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerformanceMaterials {
    /// Window of iterations, start inclusive, end exclusive.
    pub window: Range<u32>,
    pub per_agent: Vec<AgentPerformance>,
    pub total_posts: u32,
    pub total_re_shares_received: u32,
    pub total_comments_received: u32,
    /// Window events where an IO agent acted on another IO agent's post or
    /// followed another IO agent.
    pub io_io_events: Vec<ActionEvent>,
}

/// Summarize the window for the IO group. `events` must cover the full run
/// so far so that targets created before the window still resolve.
pub fn assemble_performance_materials(
    events: &[ActionEvent],
    window: Range<u32>,
    io_agents: &BTreeSet<AgentId>,
) -> PerformanceMaterials {
    let author_of: BTreeMap<PostId, AgentId> = events
        .iter()
        .filter_map(|e| e.post_id.map(|p| (p, e.actor)))
        .collect();
    let target_author = |e: &ActionEvent| -> Option<AgentId> {
        e.target_post.and_then(|p| author_of.get(&p).copied()).or(e.target_agent)
    };

    let in_window =
        |e: &&ActionEvent| window.contains(&e.iteration);

    let mut per_agent: Vec<AgentPerformance> = io_agents
        .iter()
        .map(|&agent| AgentPerformance {
            agent,
            posts: Vec::new(),
            re_shares_received: 0,
            comments_received: 0,
        })
        .collect();
    let index_of: BTreeMap<AgentId, usize> =
        per_agent.iter().enumerate().map(|(i, p)| (p.agent, i)).collect();

    let mut io_io_events = Vec::new();
    for event in events.iter().filter(in_window) {
        if event.kind == ActionKind::Post {
            if let Some(&i) = index_of.get(&event.actor) {
                per_agent[i].posts.push(event.text.clone().unwrap_or_default());
            }
        }
        if let Some(recipient) = target_author(event) {
            if let Some(&i) = index_of.get(&recipient) {
                match event.kind {
                    ActionKind::ReShare => per_agent[i].re_shares_received += 1,
                    ActionKind::Comment => per_agent[i].comments_received += 1,
                    _ => {}
                }
            }
            if io_agents.contains(&event.actor)
                && io_agents.contains(&recipient)
                && event.actor != recipient
                && matches!(
                    event.kind,
                    ActionKind::ReShare | ActionKind::Comment | ActionKind::Like | ActionKind::Follow
                )
            {
                io_io_events.push(event.clone());
            }
        }
    }

    let total_posts = per_agent.iter().map(|p| p.posts.len() as u32).sum();
    let total_re_shares_received = per_agent.iter().map(|p| p.re_shares_received).sum();
    let total_comments_received = per_agent.iter().map(|p| p.comments_received).sum();

    PerformanceMaterials {
        window,
        per_agent,
        total_posts,
        total_re_shares_received,
        total_comments_received,
        io_io_events,
    }
}

/// Plain-text rendering of the materials for the discussion prompt.
pub fn render_materials(materials: &PerformanceMaterials) -> String {
    let mut out = format!(
        "Performance materials for iterations {}..{}\n",
        materials.window.start, materials.window.end
    );
    out.push_str(&format!(
        "Aggregate: {} posts, {} re-shares received, {} comments received\n",
        materials.total_posts,
        materials.total_re_shares_received,
        materials.total_comments_received
    ));
    for perf in &materials.per_agent {
        out.push_str(&format!(
            "- {}: {} posts, {} re-shares received, {} comments received\n",
            perf.agent,
            perf.posts.len(),
            perf.re_shares_received,
            perf.comments_received
        ));
        for text in &perf.posts {
            out.push_str(&format!("    post: {text}\n"));
        }
    }
    out.push_str(&format!("IO <-> IO actions in window: {}\n", materials.io_io_events.len()));
    for event in &materials.io_io_events {
        out.push_str(&format!(
            "    iter {}: {} {:?} -> {}\n",
            event.iteration,
            event.actor,
            event.kind,
            event
                .target_post
                .map(|p| p.to_string())
                .or_else(|| event.target_agent.map(|a| a.to_string()))
                .unwrap_or_default()
        ));
    }
    out
}
