//! Diffusion cascade reconstruction: one tree per IO-authored original
//! post, children linked by re-share/comment parent references.

use crate::domain::{AgentId, PostId};
use crate::logview::LogView;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cascade {
    pub root: PostId,
    /// Every node in the tree with its depth; the root sits at depth 0.
    pub nodes: Vec<(PostId, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeStats {
    /// Total posts in the cascade, root included.
    pub size: usize,
    /// Longest root-to-leaf path, in edges.
    pub depth: u32,
    /// Maximum number of nodes on one level.
    pub breadth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CascadeForest {
    pub cascades: Vec<Cascade>,
    /// Posts excluded because their parent chain dangles or cycles.
    pub orphans: usize,
    /// Posts rooted at a non-member original.
    pub non_member_rooted: usize,
}

/// Build one cascade per original post authored by a `roots_by` member.
/// Nodes with dangling parent references are excluded (and counted), as
/// are posts rooted outside the member set; together with the cascade
/// sizes these partition the post table.
pub fn build_cascades(view: &LogView, roots_by: &BTreeSet<AgentId>) -> CascadeForest {
    let mut children: BTreeMap<PostId, Vec<PostId>> = BTreeMap::new();
    for post in view.posts() {
        if let Some(parent) = post.kind.parent() {
            children.entry(parent).or_default().push(post.id);
        }
    }

    let mut forest = CascadeForest::default();
    for post in view.posts() {
        match view.root_original(post.id) {
            None => forest.orphans += 1,
            Some(root) => {
                let root_author = view.author_of(root).expect("root exists");
                if !roots_by.contains(&root_author) {
                    forest.non_member_rooted += 1;
                }
            }
        }
    }

    for post in view.posts() {
        if post.kind.parent().is_some() || !roots_by.contains(&post.author) {
            continue;
        }
        // BFS from the root, levels in ascending post-id order.
        let mut nodes = vec![(post.id, 0u32)];
        let mut frontier = vec![post.id];
        let mut depth = 0u32;
        while !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            for node in frontier {
                if let Some(kids) = children.get(&node) {
                    for &kid in kids {
                        nodes.push((kid, depth));
                        next.push(kid);
                    }
                }
            }
            frontier = next;
        }
        forest.cascades.push(Cascade { root: post.id, nodes });
    }
    forest
}

/// Size, depth, and breadth of one cascade.
pub fn cascade_stats(cascade: &Cascade) -> CascadeStats {
    let mut level_width: BTreeMap<u32, usize> = BTreeMap::new();
    for &(_, depth) in &cascade.nodes {
        *level_width.entry(depth).or_insert(0) += 1;
    }
    CascadeStats {
        size: cascade.nodes.len(),
        depth: level_width.keys().max().copied().unwrap_or(0),
        breadth: level_width.values().max().copied().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ActionEvent;

    fn io() -> BTreeSet<AgentId> {
        [AgentId(0)].into()
    }

    #[test]
    fn untouched_post_is_a_singleton_cascade() {
        let events = vec![ActionEvent::post(0, AgentId(0), PostId(0), "root", None).unwrap()];
        let view = LogView::from_events(&events);
        let forest = build_cascades(&view, &io());
        assert_eq!(forest.cascades.len(), 1);
        let stats = cascade_stats(&forest.cascades[0]);
        assert_eq!((stats.size, stats.depth, stats.breadth), (1, 0, 1));
    }

    #[test]
    fn star_of_three_re_shares() {
        let mut events = vec![ActionEvent::post(0, AgentId(0), PostId(0), "root", None).unwrap()];
        for i in 1..=3u64 {
            events.push(
                ActionEvent::re_share(1, AgentId(i as u32), PostId(i), PostId(0), None).unwrap(),
            );
        }
        let view = LogView::from_events(&events);
        let forest = build_cascades(&view, &io());
        let stats = cascade_stats(&forest.cascades[0]);
        assert_eq!((stats.size, stats.depth, stats.breadth), (4, 1, 3));
    }

    #[test]
    fn chain_of_three() {
        let events = vec![
            ActionEvent::post(0, AgentId(0), PostId(0), "root", None).unwrap(),
            ActionEvent::re_share(1, AgentId(1), PostId(1), PostId(0), None).unwrap(),
            ActionEvent::comment(2, AgentId(2), PostId(2), PostId(1), "deep reply", None).unwrap(),
        ];
        let view = LogView::from_events(&events);
        let forest = build_cascades(&view, &io());
        let stats = cascade_stats(&forest.cascades[0]);
        assert_eq!((stats.size, stats.depth, stats.breadth), (3, 2, 1));
        // The comment on the re-share sits at depth 2.
        assert!(forest.cascades[0].nodes.contains(&(PostId(2), 2)));
    }

    #[test]
    fn dangling_parent_nodes_are_excluded_and_counted() {
        let events = vec![
            ActionEvent::post(0, AgentId(0), PostId(0), "root", None).unwrap(),
            ActionEvent::re_share(1, AgentId(1), PostId(1), PostId(77), None).unwrap(),
        ];
        let view = LogView::from_events(&events);
        let forest = build_cascades(&view, &io());
        assert_eq!(forest.cascades.len(), 1);
        assert_eq!(forest.orphans, 1);
        assert_eq!(cascade_stats(&forest.cascades[0]).size, 1);
    }

    #[test]
    fn node_conservation() {
        // sizes + orphans + non-member-rooted == total posts.
        let events = vec![
            ActionEvent::post(0, AgentId(0), PostId(0), "io root", None).unwrap(),
            ActionEvent::post(0, AgentId(5), PostId(1), "organic root", None).unwrap(),
            ActionEvent::re_share(1, AgentId(2), PostId(2), PostId(0), None).unwrap(),
            ActionEvent::re_share(1, AgentId(3), PostId(3), PostId(1), None).unwrap(),
            ActionEvent::re_share(2, AgentId(4), PostId(4), PostId(99), None).unwrap(),
        ];
        let view = LogView::from_events(&events);
        let forest = build_cascades(&view, &io());
        let total_in_cascades: usize =
            forest.cascades.iter().map(|c| c.nodes.len()).sum();
        assert_eq!(
            total_in_cascades + forest.orphans + forest.non_member_rooted,
            view.len()
        );
    }
}
