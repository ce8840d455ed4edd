//! Recommendation feed: a recency-ranked in-network slice topped up with
//! uniform samples from out-of-network posts.

use super::post::PostStore;
use super::rng::SimRng;
use crate::domain::{AgentId, PostId};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedEntry {
    pub post: PostId,
    pub in_network: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Feed {
    pub entries: Vec<FeedEntry>,
}

impl Feed {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Assemble a feed of at most `feed_size` posts for `owner`.
///
/// Up to `floor(feed_size * in_network_fraction)` slots go to posts by
/// followed authors, newest first (ties by ascending post id); the rest are
/// sampled uniformly without replacement from posts by non-followed authors.
/// The owner's own posts never appear. Fewer entries come back when the
/// store is small.
pub fn build_feed(
    posts: &PostStore,
    follows: &BTreeSet<AgentId>,
    owner: AgentId,
    feed_size: u32,
    in_network_fraction: f64,
    rng: &mut SimRng,
) -> Feed {
    let feed_size = feed_size as usize;
    let quota = (feed_size as f64 * in_network_fraction).floor() as usize;

    let mut in_network: Vec<(u32, PostId)> = posts
        .iter()
        .filter(|p| follows.contains(&p.author))
        .map(|p| (p.iteration, p.id))
        .collect();
    // Newest first, ties by ascending id.
    in_network.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    in_network.truncate(quota);

    let mut entries: Vec<FeedEntry> =
        in_network.iter().map(|&(_, post)| FeedEntry { post, in_network: true }).collect();

    let out_pool: Vec<PostId> = posts
        .iter()
        .filter(|p| p.author != owner && !follows.contains(&p.author))
        .map(|p| p.id)
        .collect();
    let remaining = feed_size.saturating_sub(entries.len());
    for idx in rng.sample_indices(out_pool.len(), remaining) {
        entries.push(FeedEntry { post: out_pool[idx], in_network: false });
    }

    Feed { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::post::PostKind;

    fn store_with(authors_and_iters: &[(u32, u32)]) -> PostStore {
        let mut store = PostStore::new();
        for &(author, iter) in authors_and_iters {
            store.create(AgentId(author), iter, format!("post by {author}"), vec![], PostKind::Original);
        }
        store
    }

    #[test]
    fn empty_store_gives_empty_feed() {
        let store = PostStore::new();
        let mut rng = SimRng::new(1);
        let feed = build_feed(&store, &BTreeSet::new(), AgentId(0), 10, 0.5, &mut rng);
        assert!(feed.is_empty());
    }

    #[test]
    fn no_follows_means_all_out_of_network() {
        let store = store_with(&[(1, 0), (2, 0), (3, 1)]);
        let mut rng = SimRng::new(1);
        let feed = build_feed(&store, &BTreeSet::new(), AgentId(0), 10, 0.5, &mut rng);
        assert_eq!(feed.len(), 3);
        assert!(feed.entries.iter().all(|e| !e.in_network));
    }

    #[test]
    fn quota_takes_most_recent_in_network_and_fills_with_others() {
        // R=4, fraction 0.5 -> in-network quota 2. Owner follows agent 1,
        // who wrote 10 posts across iterations 0..9; agents 2 and 3 wrote
        // one post each. Expected by the ranking rule: agent 1's two newest
        // posts in network, then 2 sampled out-of-network posts.
        let mut spec: Vec<(u32, u32)> = (0..10).map(|i| (1u32, i)).collect();
        spec.push((2, 3));
        spec.push((3, 4));
        let store = store_with(&spec);
        let follows: BTreeSet<AgentId> = [AgentId(1)].into();
        let mut rng = SimRng::new(7);
        let feed = build_feed(&store, &follows, AgentId(0), 4, 0.5, &mut rng);
        assert_eq!(feed.len(), 4);
        let in_net: Vec<PostId> =
            feed.entries.iter().filter(|e| e.in_network).map(|e| e.post).collect();
        // Agent 1's newest posts are ids 9 (iter 9) and 8 (iter 8).
        assert_eq!(in_net, vec![PostId(9), PostId(8)]);
        let out_net: Vec<PostId> =
            feed.entries.iter().filter(|e| !e.in_network).map(|e| e.post).collect();
        assert_eq!(out_net.len(), 2);
        // Out-of-network pool is exactly the two posts by agents 2 and 3.
        for p in out_net {
            assert!(p == PostId(10) || p == PostId(11));
        }
    }

    #[test]
    fn ties_break_by_ascending_post_id() {
        let store = store_with(&[(1, 5), (1, 5), (1, 5)]);
        let follows: BTreeSet<AgentId> = [AgentId(1)].into();
        let mut rng = SimRng::new(3);
        let feed = build_feed(&store, &follows, AgentId(0), 4, 0.5, &mut rng);
        let in_net: Vec<PostId> =
            feed.entries.iter().filter(|e| e.in_network).map(|e| e.post).collect();
        assert_eq!(in_net, vec![PostId(0), PostId(1)]);
    }

    #[test]
    fn own_posts_never_served() {
        let store = store_with(&[(0, 1), (0, 2), (1, 1)]);
        let mut rng = SimRng::new(5);
        let feed = build_feed(&store, &BTreeSet::new(), AgentId(0), 10, 0.5, &mut rng);
        assert_eq!(feed.len(), 1);
        assert_eq!(feed.entries[0].post, PostId(2));
    }
}
