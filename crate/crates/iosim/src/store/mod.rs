//! Durable run artifacts: the append-only JSONL event log, manifests, and
//! JSON exports.
//!
//! Log lines are canonical JSON (sorted keys, shortest round-trip floats)
//! so content digests are stable across platforms. Platform actions and
//! discussion meta records share the log but are distinguishable by shape;
//! analytics only ever consume the action lines.

mod dashboard;

pub use dashboard::{export_dashboard_bundle, DashboardBundle, GroupMatrix, NetworkSnapshot, WeightedEdge};

use crate::domain::{ActionEvent, AgentId};
use crate::regimes::CollectiveStrategy;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io error on {0}: {1}")]
    Io(String, String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: ordering violation, {msg}")]
    Ordering { line: usize, msg: String },
    #[error("appended records do not extend the existing order")]
    AppendOrdering,
}

/// Marker field value distinguishing meta records from platform actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaKind {
    Discussion,
}

/// Outcome of one discussion cycle; logged before any agent turn of the
/// iteration so H1-H5 graphs never see it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscussionRecord {
    pub record: MetaKind,
    pub iteration: u32,
    pub participants: Vec<AgentId>,
    pub strategy: CollectiveStrategy,
}

impl DiscussionRecord {
    pub fn new(iteration: u32, participants: Vec<AgentId>, strategy: CollectiveStrategy) -> Self {
        DiscussionRecord { record: MetaKind::Discussion, iteration, participants, strategy }
    }
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogRecord {
    Discussion(DiscussionRecord),
    Action(ActionEvent),
}

impl LogRecord {
    /// Canonical position: (iteration, discussion-before-actions, actor,
    /// per-kind rank). Log order must be non-decreasing in this key.
    pub fn order_key(&self) -> (u32, u8, u32, u8) {
        match self {
            LogRecord::Discussion(d) => (d.iteration, 0, 0, 0),
            LogRecord::Action(e) => {
                let (it, actor, rank) = e.order_key();
                (it, 1, actor, rank)
            }
        }
    }

    pub fn as_action(&self) -> Option<&ActionEvent> {
        match self {
            LogRecord::Action(e) => Some(e),
            LogRecord::Discussion(_) => None,
        }
    }
}

/// Extract the platform actions, dropping meta records.
pub fn actions_of(records: &[LogRecord]) -> Vec<ActionEvent> {
    records.iter().filter_map(|r| r.as_action().cloned()).collect()
}

/// Canonical single-line JSON: object keys sorted, ryu float text.
pub fn canonical_line<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value).expect("serializable").to_string()
}

/// Canonical pretty JSON for manifests, reports, and bundles.
pub fn canonical_pretty<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable");
    serde_json::to_string_pretty(&value).expect("serializable")
}

/// Summary of a closed or in-progress log file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLogFile {
    pub path: PathBuf,
    pub lines: u64,
    /// Hex SHA-256 of the exact file bytes.
    pub digest: String,
}

/// Single-writer appender maintaining the ordering invariant and a running
/// content digest.
pub struct EventLogWriter {
    file: File,
    path: PathBuf,
    lines: u64,
    hasher: Sha256,
    last_key: Option<(u32, u8, u32, u8)>,
}

impl EventLogWriter {
    pub fn create(path: &Path) -> Result<Self, StoreError> {
        let file = File::create(path)
            .map_err(|e| StoreError::Io(path.display().to_string(), e.to_string()))?;
        Ok(EventLogWriter {
            file,
            path: path.to_path_buf(),
            lines: 0,
            hasher: Sha256::new(),
            last_key: None,
        })
    }

    /// Reopen an existing log for appending; replays the content to restore
    /// the digest and the ordering cursor.
    pub fn open_append(path: &Path) -> Result<Self, StoreError> {
        let records = load_records(path)?;
        let raw = std::fs::read(path)
            .map_err(|e| StoreError::Io(path.display().to_string(), e.to_string()))?;
        let mut hasher = Sha256::new();
        hasher.update(&raw);
        let file = std::fs::OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| StoreError::Io(path.display().to_string(), e.to_string()))?;
        Ok(EventLogWriter {
            file,
            path: path.to_path_buf(),
            lines: records.len() as u64,
            hasher,
            last_key: records.last().map(LogRecord::order_key),
        })
    }

    /// Durable append; `records` must extend the existing canonical order.
    pub fn append(&mut self, records: &[LogRecord]) -> Result<(), StoreError> {
        let mut cursor = self.last_key;
        for record in records {
            let key = record.order_key();
            if let Some(prev) = cursor {
                if key < prev {
                    return Err(StoreError::AppendOrdering);
                }
            }
            if let LogRecord::Action(e) = record {
                e.validate().map_err(|err| StoreError::Parse {
                    line: (self.lines + 1) as usize,
                    msg: err.to_string(),
                })?;
            }
            cursor = Some(key);
            let line = canonical_line(record);
            let bytes = format!("{line}\n");
            self.file
                .write_all(bytes.as_bytes())
                .map_err(|e| StoreError::Io(self.path.display().to_string(), e.to_string()))?;
            self.hasher.update(bytes.as_bytes());
            self.lines += 1;
        }
        self.file
            .flush()
            .map_err(|e| StoreError::Io(self.path.display().to_string(), e.to_string()))?;
        self.last_key = cursor;
        Ok(())
    }

    pub fn file_info(&self) -> EventLogFile {
        let digest = self.hasher.clone().finalize();
        EventLogFile {
            path: self.path.clone(),
            lines: self.lines,
            digest: hex(&digest),
        }
    }
}

impl crate::engine::EventSink for EventLogWriter {
    fn append(&mut self, records: &[LogRecord]) -> Result<(), StoreError> {
        EventLogWriter::append(self, records)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hex SHA-256 of a file's exact bytes.
pub fn file_digest(path: &Path) -> Result<String, StoreError> {
    let raw =
        std::fs::read(path).map_err(|e| StoreError::Io(path.display().to_string(), e.to_string()))?;
    let mut hasher = Sha256::new();
    hasher.update(&raw);
    Ok(hex(&hasher.finalize()))
}

/// Load every line of a log; malformed or mis-ordered lines error with
/// their line number. An empty file is an empty log.
pub fn load_records(path: &Path) -> Result<Vec<LogRecord>, StoreError> {
    let file =
        File::open(path).map_err(|e| StoreError::Io(path.display().to_string(), e.to_string()))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut last_key: Option<(u32, u8, u32, u8)> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line =
            line.map_err(|e| StoreError::Io(path.display().to_string(), e.to_string()))?;
        if line.trim().is_empty() {
            return Err(StoreError::Parse { line: line_no, msg: "blank line".into() });
        }
        let record: LogRecord = serde_json::from_str(&line)
            .map_err(|e| StoreError::Parse { line: line_no, msg: e.to_string() })?;
        if let LogRecord::Action(e) = &record {
            e.validate()
                .map_err(|err| StoreError::Parse { line: line_no, msg: err.to_string() })?;
        }
        let key = record.order_key();
        if let Some(prev) = last_key {
            if key < prev {
                return Err(StoreError::Ordering {
                    line: line_no,
                    msg: format!("{key:?} after {prev:?}"),
                });
            }
        }
        last_key = Some(key);
        records.push(record);
    }
    Ok(records)
}

/// Load only the platform actions of a log.
pub fn load_events(path: &Path) -> Result<Vec<ActionEvent>, StoreError> {
    Ok(actions_of(&load_records(path)?))
}

/// First line where two logs differ, with both sides (missing side `None`).
pub fn first_divergence(
    a: &Path,
    b: &Path,
) -> Result<Option<(usize, Option<String>, Option<String>)>, StoreError> {
    let read = |p: &Path| -> Result<Vec<String>, StoreError> {
        Ok(std::fs::read_to_string(p)
            .map_err(|e| StoreError::Io(p.display().to_string(), e.to_string()))?
            .lines()
            .map(str::to_string)
            .collect())
    };
    let la = read(a)?;
    let lb = read(b)?;
    for i in 0..la.len().max(lb.len()) {
        if la.get(i) != lb.get(i) {
            return Ok(Some((i + 1, la.get(i).cloned(), lb.get(i).cloned())));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PostId;

    fn sample_records() -> Vec<LogRecord> {
        vec![
            LogRecord::Action(
                ActionEvent::post(0, AgentId(0), PostId(0), "first #tag", None).unwrap(),
            ),
            LogRecord::Action(
                ActionEvent::re_share(0, AgentId(1), PostId(1), PostId(0), None).unwrap(),
            ),
            LogRecord::Action(ActionEvent::silent(1, AgentId(0), None)),
        ]
    }

    #[test]
    fn append_empty_keeps_digest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut writer = EventLogWriter::create(&path).unwrap();
        writer.append(&sample_records()).unwrap();
        let before = writer.file_info();
        writer.append(&[]).unwrap();
        let after = writer.file_info();
        assert_eq!(before.digest, after.digest);
        assert_eq!(before.lines, after.lines);
    }

    #[test]
    fn round_trip_preserves_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let records = sample_records();
        let mut writer = EventLogWriter::create(&path).unwrap();
        writer.append(&records).unwrap();
        let loaded = load_records(&path).unwrap();
        assert_eq!(loaded, records);
    }

    #[test]
    fn out_of_order_append_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut writer = EventLogWriter::create(&path).unwrap();
        writer.append(&[LogRecord::Action(ActionEvent::silent(5, AgentId(0), None))]).unwrap();
        let err = writer
            .append(&[LogRecord::Action(ActionEvent::silent(4, AgentId(0), None))])
            .unwrap_err();
        assert!(matches!(err, StoreError::AppendOrdering));
    }

    #[test]
    fn truncated_line_errors_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut writer = EventLogWriter::create(&path).unwrap();
        writer.append(&sample_records()).unwrap();
        let mut content = std::fs::read_to_string(&path).unwrap();
        content.truncate(content.len() - 10);
        std::fs::write(&path, content).unwrap();
        match load_records(&path).unwrap_err() {
            StoreError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_log() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(load_records(&path).unwrap().is_empty());
    }

    #[test]
    fn discussion_records_round_trip_and_sort_first() {
        use crate::regimes::{CollectiveStrategy, StrategyItem};
        let strategy = CollectiveStrategy::new(vec![StrategyItem {
            description: "amplify".into(),
            supporter_count: 3,
        }])
        .unwrap();
        let disc = LogRecord::Discussion(DiscussionRecord::new(5, vec![AgentId(0)], strategy));
        let action = LogRecord::Action(ActionEvent::silent(5, AgentId(0), None));
        assert!(disc.order_key() < action.order_key());
        let line = canonical_line(&disc);
        let back: LogRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, disc);
    }

    #[test]
    fn digest_matches_file_digest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let mut writer = EventLogWriter::create(&path).unwrap();
        writer.append(&sample_records()).unwrap();
        assert_eq!(writer.file_info().digest, file_digest(&path).unwrap());
    }

    #[test]
    fn reopened_writer_continues_digest_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let records = sample_records();
        {
            let mut writer = EventLogWriter::create(&path).unwrap();
            writer.append(&records[..2]).unwrap();
        }
        let mut writer = EventLogWriter::open_append(&path).unwrap();
        writer.append(&records[2..]).unwrap();
        assert_eq!(writer.file_info().digest, file_digest(&path).unwrap());
        assert_eq!(load_records(&path).unwrap(), records);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // load(append(e)) == e for ordered event lists.
            #[test]
            fn log_round_trip(n_agents in 1u32..6, iters in 1u32..5) {
                let mut records = Vec::new();
                for t in 0..iters {
                    for a in 0..n_agents {
                        records.push(LogRecord::Action(ActionEvent::silent(t, AgentId(a), None)));
                    }
                }
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("events.jsonl");
                let mut writer = EventLogWriter::create(&path).unwrap();
                writer.append(&records).unwrap();
                prop_assert_eq!(load_records(&path).unwrap(), records);
            }
        }
    }
}
