//! Read-side reconstruction of the post table from a recorded event log.
//!
//! Metrics never see the live engine state; everything they need — post
//! authorship, parent links, resolved re-share content, cascade roots — is
//! derived here from the action events alone.

use crate::domain::{ActionEvent, ActionKind, AgentId, PostId};
use crate::engine::PostKind;
use std::collections::{BTreeMap, BTreeSet};

/// One post as recoverable from the log.
#[derive(Debug, Clone, PartialEq)]
pub struct PostView {
    pub id: PostId,
    pub author: AgentId,
    pub iteration: u32,
    pub kind: PostKind,
    /// Text written by this post's author; a re-share writes none.
    pub own_text: Option<String>,
    pub own_hashtags: Vec<String>,
}

/// Post table plus content resolution over a full log.
#[derive(Debug, Clone, Default)]
pub struct LogView {
    posts: BTreeMap<PostId, PostView>,
    resolved: BTreeMap<PostId, (String, Vec<String>)>,
    roots: BTreeMap<PostId, Option<PostId>>,
}

impl LogView {
    pub fn from_events(events: &[ActionEvent]) -> Self {
        let mut posts = BTreeMap::new();
        for ev in events {
            let Some(id) = ev.post_id else { continue };
            let kind = match ev.kind {
                ActionKind::Post => PostKind::Original,
                ActionKind::ReShare => {
                    PostKind::ReShareOf(ev.target_post.expect("validated re-share"))
                }
                ActionKind::Comment => {
                    PostKind::CommentOn(ev.target_post.expect("validated comment"))
                }
                _ => continue,
            };
            posts.insert(
                id,
                PostView {
                    id,
                    author: ev.actor,
                    iteration: ev.iteration,
                    kind,
                    own_text: ev.text.clone(),
                    own_hashtags: ev.hashtags.clone(),
                },
            );
        }
        let mut view = LogView { posts, resolved: BTreeMap::new(), roots: BTreeMap::new() };
        let ids: Vec<PostId> = view.posts.keys().copied().collect();
        for id in ids {
            view.resolve(id, &mut BTreeSet::new());
            view.root(id, &mut BTreeSet::new());
        }
        view
    }

    fn resolve(&mut self, id: PostId, visiting: &mut BTreeSet<PostId>) -> (String, Vec<String>) {
        if let Some(hit) = self.resolved.get(&id) {
            return hit.clone();
        }
        if !visiting.insert(id) {
            return (String::new(), Vec::new());
        }
        let value = match self.posts.get(&id).cloned() {
            None => (String::new(), Vec::new()),
            Some(post) => match post.kind {
                // A re-share carries the content of what it re-shares.
                PostKind::ReShareOf(parent) => self.resolve(parent, visiting),
                PostKind::Original | PostKind::CommentOn(_) => {
                    (post.own_text.unwrap_or_default(), post.own_hashtags)
                }
            },
        };
        visiting.remove(&id);
        self.resolved.insert(id, value.clone());
        value
    }

    fn root(&mut self, id: PostId, visiting: &mut BTreeSet<PostId>) -> Option<PostId> {
        if let Some(hit) = self.roots.get(&id) {
            return *hit;
        }
        if !visiting.insert(id) {
            return None;
        }
        let value = match self.posts.get(&id).map(|p| p.kind) {
            None => None,
            Some(PostKind::Original) => Some(id),
            Some(PostKind::ReShareOf(parent)) | Some(PostKind::CommentOn(parent)) => {
                self.root(parent, visiting)
            }
        };
        visiting.remove(&id);
        self.roots.insert(id, value);
        value
    }

    pub fn post(&self, id: PostId) -> Option<&PostView> {
        self.posts.get(&id)
    }

    pub fn author_of(&self, id: PostId) -> Option<AgentId> {
        self.posts.get(&id).map(|p| p.author)
    }

    /// Agent on the receiving end of an event: the author of the target
    /// post, or the followed agent.
    pub fn target_author(&self, event: &ActionEvent) -> Option<AgentId> {
        event.target_post.and_then(|p| self.author_of(p)).or(event.target_agent)
    }

    /// Content a post presents: its own text, or for re-shares the resolved
    /// content of the re-shared post.
    pub fn resolved_content(&self, id: PostId) -> Option<(&str, &[String])> {
        self.resolved.get(&id).map(|(t, h)| (t.as_str(), h.as_slice()))
    }

    pub fn resolved_hashtags(&self, id: PostId) -> &[String] {
        self.resolved.get(&id).map(|(_, h)| h.as_slice()).unwrap_or(&[])
    }

    /// The original post at the root of a post's parent chain; `None` when
    /// the chain dangles or cycles.
    pub fn root_original(&self, id: PostId) -> Option<PostId> {
        self.roots.get(&id).copied().flatten()
    }

    pub fn posts(&self) -> impl Iterator<Item = &PostView> {
        self.posts.values()
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }
}
