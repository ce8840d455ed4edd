//! Per-agent interaction memory: a bounded ring buffer of recent events
//! plus cumulative feedback counters and hashtag exposure tallies.

use crate::domain::{ActionEvent, ActionKind, AgentId};
use std::collections::{BTreeMap, VecDeque};

pub const DEFAULT_CAPACITY: usize = 50;
pub const DEFAULT_CONTEXT_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentMemory {
    capacity: usize,
    context_window: usize,
    buffer: VecDeque<MemoryEntry>,
    pub posts_made: u32,
    pub re_shares_received: u32,
    pub comments_received: u32,
    pub likes_received: u32,
    /// Per-tag count of posts delivered to this agent's feed.
    pub tag_exposures: BTreeMap<String, u32>,
}

/// One remembered event, tagged with how the owner was involved.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub event: ActionEvent,
    pub own_action: bool,
}

impl Default for AgentMemory {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY, DEFAULT_CONTEXT_WINDOW)
    }
}

impl AgentMemory {
    pub fn new(capacity: usize, context_window: usize) -> Self {
        AgentMemory {
            capacity,
            context_window,
            buffer: VecDeque::new(),
            posts_made: 0,
            re_shares_received: 0,
            comments_received: 0,
            likes_received: 0,
            tag_exposures: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Most recent entries, oldest first, bounded by the context window.
    pub fn recent(&self) -> impl Iterator<Item = &MemoryEntry> {
        let skip = self.buffer.len().saturating_sub(self.context_window);
        self.buffer.iter().skip(skip)
    }

    pub fn record_exposure(&mut self, tag: &str) {
        *self.tag_exposures.entry(tag.to_string()).or_insert(0) += 1;
    }

    pub fn exposures(&self, tag: &str) -> u32 {
        self.tag_exposures.get(tag).copied().unwrap_or(0)
    }
}

/// Fold `events` into `memory`. Every event must involve the owner, either
/// as the actor or as the author/target on the receiving end; the buffer
/// keeps the last `capacity` entries and counters only ever grow.
pub fn update_memory(memory: &mut AgentMemory, owner: AgentId, events: &[ActionEvent]) {
    for event in events {
        let own_action = event.actor == owner;
        if own_action {
            if event.kind == ActionKind::Post {
                memory.posts_made += 1;
            }
        } else {
            match event.kind {
                ActionKind::ReShare => memory.re_shares_received += 1,
                ActionKind::Comment => memory.comments_received += 1,
                ActionKind::Like => memory.likes_received += 1,
                _ => {}
            }
        }
        memory.buffer.push_back(MemoryEntry { event: event.clone(), own_action });
        while memory.buffer.len() > memory.capacity {
            memory.buffer.pop_front();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PostId;

    fn owner() -> AgentId {
        AgentId(1)
    }

    #[test]
    fn empty_events_leave_memory_unchanged() {
        let mut m = AgentMemory::default();
        let before = m.clone();
        update_memory(&mut m, owner(), &[]);
        assert_eq!(m, before);
    }

    #[test]
    fn ring_buffer_keeps_last_m() {
        let mut m = AgentMemory::new(2, 10);
        let events: Vec<ActionEvent> = (0..3)
            .map(|i| {
                ActionEvent::post(i, owner(), PostId(u64::from(i)), format!("post {i}"), None)
                    .unwrap()
            })
            .collect();
        update_memory(&mut m, owner(), &events);
        assert_eq!(m.len(), 2);
        let kept: Vec<u32> = m.recent().map(|e| e.event.iteration).collect();
        assert_eq!(kept, vec![1, 2]);
        assert_eq!(m.posts_made, 3);
    }

    #[test]
    fn received_re_share_bumps_counter() {
        // Oracle: recount from the full event list.
        let mut m = AgentMemory::default();
        let events = vec![
            ActionEvent::re_share(4, AgentId(2), PostId(10), PostId(3), None).unwrap(),
            ActionEvent::re_share(5, AgentId(3), PostId(11), PostId(3), None).unwrap(),
            ActionEvent::comment(5, AgentId(2), PostId(12), PostId(3), "hm", None).unwrap(),
        ];
        update_memory(&mut m, owner(), &events);
        let expected_reshares =
            events.iter().filter(|e| e.kind == ActionKind::ReShare && e.actor != owner()).count();
        assert_eq!(m.re_shares_received, expected_reshares as u32);
        assert_eq!(m.comments_received, 1);
        assert_eq!(m.posts_made, 0);
    }

    #[test]
    fn context_window_bounds_recent() {
        let mut m = AgentMemory::new(50, 3);
        let events: Vec<ActionEvent> = (0..10)
            .map(|i| {
                ActionEvent::post(i, owner(), PostId(u64::from(i)), format!("p{i}"), None).unwrap()
            })
            .collect();
        update_memory(&mut m, owner(), &events);
        assert_eq!(m.recent().count(), 3);
    }

    #[test]
    fn exposures_accumulate() {
        let mut m = AgentMemory::default();
        m.record_exposure("#x");
        m.record_exposure("#x");
        m.record_exposure("#y");
        assert_eq!(m.exposures("#x"), 2);
        assert_eq!(m.exposures("#y"), 1);
        assert_eq!(m.exposures("#z"), 0);
    }
}
