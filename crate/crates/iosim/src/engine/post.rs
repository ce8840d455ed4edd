//! In-run post store. Re-shares and comments are posts in their own right;
//! a re-share's content resolves to the content of the post it re-shares.

use crate::domain::{AgentId, PostId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parent", rename_all = "snake_case")]
pub enum PostKind {
    Original,
    ReShareOf(PostId),
    CommentOn(PostId),
}

impl PostKind {
    pub fn parent(self) -> Option<PostId> {
        match self {
            PostKind::Original => None,
            PostKind::ReShareOf(p) | PostKind::CommentOn(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Post {
    pub id: PostId,
    pub author: AgentId,
    pub iteration: u32,
    /// Resolved content: a re-share carries the text of its target.
    pub text: String,
    pub hashtags: Vec<String>,
    pub kind: PostKind,
    pub re_shares: u32,
    pub comments: u32,
    pub likes: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PostStore {
    posts: Vec<Post>,
}

impl PostStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn next_id(&self) -> PostId {
        PostId(self.posts.len() as u64)
    }

    pub fn create(
        &mut self,
        author: AgentId,
        iteration: u32,
        text: String,
        hashtags: Vec<String>,
        kind: PostKind,
    ) -> PostId {
        let id = self.next_id();
        self.posts.push(Post {
            id,
            author,
            iteration,
            text,
            hashtags,
            kind,
            re_shares: 0,
            comments: 0,
            likes: 0,
        });
        id
    }

    pub fn get(&self, id: PostId) -> Option<&Post> {
        self.posts.get(id.index())
    }

    pub fn get_mut(&mut self, id: PostId) -> Option<&mut Post> {
        self.posts.get_mut(id.index())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Post> {
        self.posts.iter()
    }
}
