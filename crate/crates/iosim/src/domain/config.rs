//! Run configuration schema, defaults, and validation.

use super::{normalize_hashtag, Campaign, Regime};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Full configuration of one simulation run.
///
/// Defaults reproduce the reference setup: a 10/20/20 population, 50
/// iterations, feed size 100 with a 50% in-network share, and an activation
/// threshold of 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(default = "defaults::n_io")]
    pub n_io: u32,
    #[serde(default = "defaults::n_aligned")]
    pub n_aligned: u32,
    #[serde(default = "defaults::n_not_aligned")]
    pub n_not_aligned: u32,
    #[serde(default = "defaults::iterations")]
    pub iterations: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::regime")]
    pub regime: Regime,
    pub campaign: Campaign,
    /// Maximum number of posts recommended to an agent per iteration.
    #[serde(default = "defaults::feed_size")]
    pub feed_size: u32,
    /// Fraction of the feed reserved for posts from followed accounts.
    #[serde(default = "defaults::in_network_fraction")]
    pub in_network_fraction: f64,
    /// Probability that each gateable action kind is enabled in a turn.
    #[serde(default = "defaults::activation_threshold")]
    pub activation_threshold: f64,
    #[serde(default)]
    pub backend: BackendConfig,
}

mod defaults {
    use crate::domain::Regime;

    pub fn n_io() -> u32 {
        10
    }
    pub fn n_aligned() -> u32 {
        20
    }
    pub fn n_not_aligned() -> u32 {
        20
    }
    pub fn iterations() -> u32 {
        50
    }
    pub fn regime() -> Regime {
        Regime::CommonGoal
    }
    pub fn feed_size() -> u32 {
        100
    }
    pub fn in_network_fraction() -> f64 {
        0.5
    }
    pub fn activation_threshold() -> f64 {
        0.5
    }
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_io: defaults::n_io(),
            n_aligned: defaults::n_aligned(),
            n_not_aligned: defaults::n_not_aligned(),
            iterations: defaults::iterations(),
            seed: 0,
            regime: defaults::regime(),
            campaign: Campaign {
                topic: "the federal jobs program".into(),
                candidate: "Alex Morgan".into(),
                hashtag: "#jobsforward".into(),
            },
            feed_size: defaults::feed_size(),
            in_network_fraction: defaults::in_network_fraction(),
            activation_threshold: defaults::activation_threshold(),
            backend: BackendConfig::default(),
        }
    }
}

impl SimulationConfig {
    pub fn population(&self) -> u32 {
        self.n_io + self.n_aligned + self.n_not_aligned
    }

    pub fn group_size(&self, group: super::AgentGroup) -> u32 {
        match group {
            super::AgentGroup::Io => self.n_io,
            super::AgentGroup::OrganicAligned => self.n_aligned,
            super::AgentGroup::OrganicNotAligned => self.n_not_aligned,
        }
    }

    /// Group of an agent id under the canonical id layout: IO agents first,
    /// then aligned, then not-aligned organics.
    pub fn group_of(&self, agent: super::AgentId) -> super::AgentGroup {
        let i = agent.0;
        if i < self.n_io {
            super::AgentGroup::Io
        } else if i < self.n_io + self.n_aligned {
            super::AgentGroup::OrganicAligned
        } else {
            super::AgentGroup::OrganicNotAligned
        }
    }

    pub fn agents_in(&self, group: super::AgentGroup) -> Vec<super::AgentId> {
        let (lo, hi) = match group {
            super::AgentGroup::Io => (0, self.n_io),
            super::AgentGroup::OrganicAligned => (self.n_io, self.n_io + self.n_aligned),
            super::AgentGroup::OrganicNotAligned => {
                (self.n_io + self.n_aligned, self.population())
            }
        };
        (lo..hi).map(super::AgentId).collect()
    }

    /// Parse a config file; JSON or TOML selected by extension (`.toml` is
    /// TOML, everything else is treated as JSON).
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
        let parsed: SimulationConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&raw).map_err(|e| ConfigError::Parse(e.to_string()))?
        } else {
            serde_json::from_str(&raw).map_err(|e| ConfigError::Parse(e.to_string()))?
        };
        validate_config(parsed)
    }
}

/// Which decision source drives the agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    /// Deterministic policy backend; params default per regime when omitted.
    Scripted {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<crate::backends::ScriptedPolicyParams>,
    },
    /// OpenAI-compatible chat-completions endpoint.
    Llm(LlmConfig),
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Scripted { params: None }
    }
}

/// Connection and decoding parameters for the remote chat backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default = "llm_defaults::temperature")]
    pub temperature: f64,
    #[serde(default = "llm_defaults::max_tokens")]
    pub max_tokens: u32,
    /// Environment variable holding the API credential.
    #[serde(default = "llm_defaults::api_key_env")]
    pub api_key_env: String,
    #[serde(default = "llm_defaults::max_retries")]
    pub max_retries: u32,
    /// Initial backoff in milliseconds; doubles per retry.
    #[serde(default = "llm_defaults::backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "llm_defaults::timeout_secs")]
    pub timeout_secs: u64,
    /// Upper bound on concurrent requests.
    #[serde(default = "llm_defaults::max_in_flight")]
    pub max_in_flight: u32,
    /// Record request/response transcripts, or replay from existing ones.
    #[serde(default)]
    pub transcript: TranscriptMode,
}

mod llm_defaults {
    pub fn temperature() -> f64 {
        0.7
    }
    pub fn max_tokens() -> u32 {
        512
    }
    pub fn api_key_env() -> String {
        "IOSIM_API_KEY".into()
    }
    pub fn max_retries() -> u32 {
        3
    }
    pub fn backoff_ms() -> u64 {
        1000
    }
    pub fn timeout_secs() -> u64 {
        120
    }
    pub fn max_in_flight() -> u32 {
        4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptMode {
    #[default]
    Record,
    Replay,
    Off,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("empty population")]
    EmptyPopulation,
    #[error("population must contain at least 2 agents")]
    PopulationTooSmall,
    #[error("iterations must be positive")]
    ZeroIterations,
    #[error("in_network_fraction must lie in [0, 1], got {0}")]
    BadInNetworkFraction(String),
    #[error("activation_threshold must lie in [0, 1], got {0}")]
    BadActivationThreshold(String),
    #[error("feed_size must be positive")]
    ZeroFeedSize,
    #[error("campaign hashtag must be a single '#'-leading token, got {0:?}")]
    BadHashtag(String),
    #[error("discussion_period must be positive")]
    ZeroDiscussionPeriod,
    #[error("campaign topic and candidate must be non-empty")]
    EmptyCampaignField,
    #[error("cannot read config {0}: {1}")]
    Io(String, String),
    #[error("cannot parse config: {0}")]
    Parse(String),
}

/// Normalize and check a raw configuration: fills nothing (serde defaults
/// already did), lowercases the campaign hashtag, and rejects degenerate
/// setups.
pub fn validate_config(mut raw: SimulationConfig) -> Result<SimulationConfig, ConfigError> {
    if raw.population() == 0 {
        return Err(ConfigError::EmptyPopulation);
    }
    if raw.population() < 2 {
        return Err(ConfigError::PopulationTooSmall);
    }
    if raw.iterations == 0 {
        return Err(ConfigError::ZeroIterations);
    }
    if raw.feed_size == 0 {
        return Err(ConfigError::ZeroFeedSize);
    }
    if !(0.0..=1.0).contains(&raw.in_network_fraction) || raw.in_network_fraction.is_nan() {
        return Err(ConfigError::BadInNetworkFraction(raw.in_network_fraction.to_string()));
    }
    if !(0.0..=1.0).contains(&raw.activation_threshold) || raw.activation_threshold.is_nan() {
        return Err(ConfigError::BadActivationThreshold(raw.activation_threshold.to_string()));
    }
    if raw.campaign.topic.trim().is_empty() || raw.campaign.candidate.trim().is_empty() {
        return Err(ConfigError::EmptyCampaignField);
    }
    raw.campaign.hashtag = normalize_hashtag(&raw.campaign.hashtag)
        .ok_or_else(|| ConfigError::BadHashtag(raw.campaign.hashtag.clone()))?;
    if let Regime::CollectiveDecisionMaking { discussion_period, .. } = raw.regime {
        if discussion_period == 0 {
            return Err(ConfigError::ZeroDiscussionPeriod);
        }
    }
    Ok(raw)
}
