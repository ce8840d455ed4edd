//! Directed weighted interaction graphs and the cohesion measures over
//! them: density, average local clustering (on the undirected projection),
//! and reciprocity.

use super::MetricsError;
use crate::domain::{ActionEvent, ActionKind, AgentId};
use crate::logview::LogView;
use crate::numeric::Scalar;
use std::collections::{BTreeMap, BTreeSet};

/// Directed graph over agents; edge weight = interaction count. Self-loops
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InteractionGraph {
    nodes: BTreeSet<AgentId>,
    edges: BTreeMap<(AgentId, AgentId), u32>,
}

impl InteractionGraph {
    pub fn new(nodes: impl IntoIterator<Item = AgentId>) -> Self {
        InteractionGraph { nodes: nodes.into_iter().collect(), edges: BTreeMap::new() }
    }

    pub fn add_edge(&mut self, from: AgentId, to: AgentId) {
        if from == to {
            return;
        }
        self.nodes.insert(from);
        self.nodes.insert(to);
        *self.edges.entry((from, to)).or_insert(0) += 1;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Distinct directed edges, weights ignored.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, from: AgentId, to: AgentId) -> u32 {
        self.edges.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn has_edge(&self, from: AgentId, to: AgentId) -> bool {
        self.edges.contains_key(&(from, to))
    }

    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId, u32)> + '_ {
        self.edges.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    pub fn nodes(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.nodes.iter().copied()
    }

    /// Undirected projection: neighbor sets where an edge in either
    /// direction links two nodes.
    pub fn undirected_neighbors(&self) -> BTreeMap<AgentId, BTreeSet<AgentId>> {
        let mut adj: BTreeMap<AgentId, BTreeSet<AgentId>> =
            self.nodes.iter().map(|&n| (n, BTreeSet::new())).collect();
        for &(a, b) in self.edges.keys() {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }
}

/// Aggregate events of the given kinds into a directed graph: one edge
/// increment per event from the actor to the author of the targeted post
/// (or the followed agent). With `members` given, the node set is exactly
/// that group and only member-to-member events count; otherwise nodes are
/// everyone the counted events touch.
pub fn build_interaction_graph(
    events: &[ActionEvent],
    view: &LogView,
    kinds: &BTreeSet<ActionKind>,
    members: Option<&BTreeSet<AgentId>>,
) -> InteractionGraph {
    debug_assert!(
        kinds.iter().all(|k| matches!(
            k,
            ActionKind::ReShare | ActionKind::Comment | ActionKind::Follow | ActionKind::Like
        )),
        "interaction graphs are built from engagement kinds only"
    );
    let mut graph = match members {
        Some(m) => InteractionGraph::new(m.iter().copied()),
        None => InteractionGraph::default(),
    };
    for event in events {
        if !kinds.contains(&event.kind) {
            continue;
        }
        let Some(target) = view.target_author(event) else { continue };
        if let Some(m) = members {
            if !m.contains(&event.actor) || !m.contains(&target) {
                continue;
            }
        }
        graph.add_edge(event.actor, target);
    }
    graph
}

/// Distinct directed edges over all ordered pairs: `|E| / (n (n-1))`.
pub fn density<F: Scalar>(graph: &InteractionGraph) -> Result<F, MetricsError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(MetricsError::TooFewNodes { needed: 2, has: n });
    }
    Ok(F::from_count(graph.edge_count()) / F::from_count(n * (n - 1)))
}

/// Average local clustering coefficient of the undirected projection;
/// nodes with degree < 2 contribute 0.
pub fn avg_clustering<F: Scalar>(graph: &InteractionGraph) -> Result<F, MetricsError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(MetricsError::TooFewNodes { needed: 1, has: 0 });
    }
    let adj = graph.undirected_neighbors();
    let mut total = F::zero();
    for neighbors in adj.values() {
        let k = neighbors.len();
        if k < 2 {
            continue;
        }
        let mut closed = 0usize;
        let list: Vec<AgentId> = neighbors.iter().copied().collect();
        for i in 0..list.len() {
            for j in (i + 1)..list.len() {
                if adj[&list[i]].contains(&list[j]) {
                    closed += 1;
                }
            }
        }
        total = total + F::from_count(closed) / F::from_count(k * (k - 1) / 2);
    }
    Ok(total / F::from_count(n))
}

/// Fraction of distinct directed edges whose reverse edge also exists.
pub fn reciprocity<F: Scalar>(graph: &InteractionGraph) -> Result<F, MetricsError> {
    if graph.edge_count() == 0 {
        return Err(MetricsError::NoEdges);
    }
    let mutual = graph.edges().filter(|&(a, b, _)| graph.has_edge(b, a)).count();
    Ok(F::from_count(mutual) / F::from_count(graph.edge_count()))
}

/// Of all `kind` events by group members, the fraction whose target is
/// also a group member.
pub fn intra_group_share<F: Scalar>(
    events: &[ActionEvent],
    view: &LogView,
    kind: ActionKind,
    members: &BTreeSet<AgentId>,
) -> Result<F, MetricsError> {
    let mut total = 0usize;
    let mut intra = 0usize;
    for event in events.iter().filter(|e| e.kind == kind && members.contains(&e.actor)) {
        let Some(target) = view.target_author(event) else { continue };
        total += 1;
        if members.contains(&target) {
            intra += 1;
        }
    }
    if total == 0 {
        return Err(MetricsError::NoEvents);
    }
    Ok(F::from_count(intra) / F::from_count(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PostId;
    use approx::assert_abs_diff_eq;

    fn graph_from(edges: &[(u32, u32)], nodes: &[u32]) -> InteractionGraph {
        let mut g = InteractionGraph::new(nodes.iter().map(|&n| AgentId(n)));
        for &(a, b) in edges {
            g.add_edge(AgentId(a), AgentId(b));
        }
        g
    }

    #[test]
    fn empty_log_gives_empty_graph() {
        let view = LogView::from_events(&[]);
        let g = build_interaction_graph(&[], &view, &[ActionKind::ReShare].into(), None);
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn repeated_re_share_weights_edge() {
        // Oracle: recount events by hand — two a->b re-shares, weight 2.
        let events = vec![
            ActionEvent::post(0, AgentId(1), PostId(0), "root", None).unwrap(),
            ActionEvent::re_share(1, AgentId(0), PostId(1), PostId(0), None).unwrap(),
            ActionEvent::re_share(2, AgentId(0), PostId(2), PostId(0), None).unwrap(),
        ];
        let view = LogView::from_events(&events);
        let g = build_interaction_graph(&events, &view, &[ActionKind::ReShare].into(), None);
        assert_eq!(g.weight(AgentId(0), AgentId(1)), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_interactions_excluded() {
        let events = vec![
            ActionEvent::post(0, AgentId(1), PostId(0), "root", None).unwrap(),
            ActionEvent::comment(1, AgentId(1), PostId(1), PostId(0), "own note", None).unwrap(),
        ];
        let view = LogView::from_events(&events);
        let g = build_interaction_graph(&events, &view, &[ActionKind::Comment].into(), None);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn complete_digraph_has_density_one() {
        let g = graph_from(&[(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)], &[0, 1, 2]);
        assert_abs_diff_eq!(density::<f64>(&g).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn density_counts_ordered_pairs() {
        // {A->B, B->A, A->C} on 3 nodes: 3 of 6 ordered pairs.
        let g = graph_from(&[(0, 1), (1, 0), (0, 2)], &[0, 1, 2]);
        assert_abs_diff_eq!(density::<f64>(&g).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn density_needs_two_nodes() {
        let g = graph_from(&[], &[0]);
        assert!(matches!(density::<f64>(&g), Err(MetricsError::TooFewNodes { .. })));
    }

    #[test]
    fn isolated_nodes_lower_density() {
        let g = graph_from(&[(0, 1)], &[0, 1, 2, 3]);
        assert_abs_diff_eq!(density::<f64>(&g).unwrap(), 1.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn triangle_clusters_fully() {
        let g = graph_from(&[(0, 1), (1, 2), (2, 0)], &[0, 1, 2]);
        assert_abs_diff_eq!(avg_clustering::<f64>(&g).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn path_has_zero_clustering() {
        let g = graph_from(&[(0, 1), (1, 2)], &[0, 1, 2]);
        assert_abs_diff_eq!(avg_clustering::<f64>(&g).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn k4_minus_edge_clusters_five_sixths() {
        // K4 minus the 2-3 edge; brute-force triangle enumeration by hand:
        // nodes 0,1 see 2/3 closed neighbor pairs, nodes 2,3 see 1/1.
        let g = graph_from(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)], &[0, 1, 2, 3]);
        assert_abs_diff_eq!(avg_clustering::<f64>(&g).unwrap(), 5.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn reciprocity_examples() {
        let g = graph_from(&[(0, 1), (1, 0)], &[0, 1]);
        assert_abs_diff_eq!(reciprocity::<f64>(&g).unwrap(), 1.0, epsilon = 1e-15);
        let g = graph_from(&[(0, 1)], &[0, 1]);
        assert_abs_diff_eq!(reciprocity::<f64>(&g).unwrap(), 0.0, epsilon = 1e-15);
        let g = graph_from(&[(0, 1), (1, 0), (0, 2)], &[0, 1, 2]);
        assert_abs_diff_eq!(reciprocity::<f64>(&g).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        let empty = graph_from(&[], &[0, 1]);
        assert_eq!(reciprocity::<f64>(&empty), Err(MetricsError::NoEdges));
    }

    #[test]
    fn intra_group_share_direct_counts() {
        let io: BTreeSet<AgentId> = (0..2).map(AgentId).collect();
        let mut events = vec![
            ActionEvent::post(0, AgentId(0), PostId(0), "io post", None).unwrap(),
            ActionEvent::post(0, AgentId(5), PostId(1), "organic post", None).unwrap(),
        ];
        // 8 of 10 IO re-shares target the IO post.
        for i in 0..10u64 {
            let target = if i < 8 { PostId(0) } else { PostId(1) };
            events.push(
                ActionEvent::re_share(1, AgentId(1), PostId(10 + i), target, None).unwrap(),
            );
        }
        let view = LogView::from_events(&events);
        let share: f64 = intra_group_share(&events, &view, ActionKind::ReShare, &io).unwrap();
        assert_abs_diff_eq!(share, 0.8, epsilon = 1e-15);

        // All targeting IO: upper bound 1.0.
        let events_all: Vec<ActionEvent> = events
            .iter()
            .cloned()
            .map(|mut e| {
                if e.kind == ActionKind::ReShare {
                    e.target_post = Some(PostId(0));
                }
                e
            })
            .collect();
        let view = LogView::from_events(&events_all);
        let share: f64 =
            intra_group_share(&events_all, &view, ActionKind::ReShare, &io).unwrap();
        assert_abs_diff_eq!(share, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn intra_group_share_zero_denominator_is_error() {
        let io: BTreeSet<AgentId> = (0..2).map(AgentId).collect();
        let view = LogView::from_events(&[]);
        assert_eq!(
            intra_group_share::<f64>(&[], &view, ActionKind::ReShare, &io),
            Err(MetricsError::NoEvents)
        );
    }

    #[test]
    fn member_filter_restricts_nodes_and_edges() {
        let events = vec![
            ActionEvent::post(0, AgentId(0), PostId(0), "io", None).unwrap(),
            ActionEvent::post(0, AgentId(9), PostId(1), "organic", None).unwrap(),
            ActionEvent::re_share(1, AgentId(1), PostId(2), PostId(0), None).unwrap(),
            ActionEvent::re_share(1, AgentId(1), PostId(3), PostId(1), None).unwrap(),
            ActionEvent::re_share(1, AgentId(9), PostId(4), PostId(0), None).unwrap(),
        ];
        let view = LogView::from_events(&events);
        let members: BTreeSet<AgentId> = (0..3).map(AgentId).collect();
        let g = build_interaction_graph(
            &events,
            &view,
            &[ActionKind::ReShare].into(),
            Some(&members),
        );
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(AgentId(1), AgentId(0)));
    }
}
