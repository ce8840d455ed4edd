//! Remote chat backend speaking an OpenAI-compatible chat-completions
//! endpoint, with bounded retries and first-class transcript record/replay
//! so live runs can be re-analyzed deterministically.

use super::{
    parse_llm_reply, AgentContext, AgentDecision, Backend, BackendError, TextRequest,
};
use crate::domain::{ActionKind, LlmConfig, TranscriptMode};
use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

/// One recorded request/response pair, keyed by a request digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub key: String,
    pub system: String,
    pub user: String,
    pub reply: String,
}

/// JSONL transcript store beside the run log. A single store handles both
/// record and replay; lookups are by request digest, so replays are
/// insensitive to call order.
pub struct TranscriptStore {
    path: PathBuf,
    entries: Mutex<BTreeMap<String, Transcript>>,
}

impl TranscriptStore {
    pub fn open(path: &Path) -> Result<Self, BackendError> {
        let mut entries = BTreeMap::new();
        if path.exists() {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| BackendError::Unavailable(format!("transcripts: {e}")))?;
            for (i, line) in raw.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let t: Transcript = serde_json::from_str(line).map_err(|e| {
                    BackendError::Unavailable(format!("transcripts line {}: {e}", i + 1))
                })?;
                entries.insert(t.key.clone(), t);
            }
        }
        Ok(TranscriptStore { path: path.to_path_buf(), entries: Mutex::new(entries) })
    }

    pub fn lookup(&self, key: &str) -> Option<String> {
        self.entries.lock().expect("transcript lock").get(key).map(|t| t.reply.clone())
    }

    pub fn record(&self, transcript: Transcript) -> Result<(), BackendError> {
        let mut entries = self.entries.lock().expect("transcript lock");
        if entries.contains_key(&transcript.key) {
            return Ok(());
        }
        let line = crate::store::canonical_line(&transcript);
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| BackendError::Unavailable(format!("transcripts: {e}")))?;
        writeln!(file, "{line}")
            .map_err(|e| BackendError::Unavailable(format!("transcripts: {e}")))?;
        entries.insert(transcript.key.clone(), transcript);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("transcript lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Digest identifying a chat request; decoding parameters are part of the
/// key so replays cannot silently serve mismatched settings.
pub fn request_key(model: &str, temperature: f64, system: &str, user: &str) -> String {
    let payload = serde_json::json!({
        "model": model,
        "temperature": temperature,
        "system": system,
        "user": user,
    });
    let mut hasher = Sha256::new();
    hasher.update(payload.to_string().as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Thin blocking client for the chat-completions wire protocol.
pub struct ChatClient {
    cfg: LlmConfig,
    http: reqwest::blocking::Client,
}

impl ChatClient {
    pub fn new(cfg: LlmConfig) -> Result<Self, BackendError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        Ok(ChatClient { cfg, http })
    }

    /// Wire request body; model name and decoding parameters pass through
    /// verbatim.
    pub fn build_request_body(cfg: &LlmConfig, system: &str, user: &str) -> serde_json::Value {
        serde_json::json!({
            "model": cfg.model,
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }

    /// One round trip with up to `max_retries` attempts and exponential
    /// backoff between them.
    pub fn complete(&self, system: &str, user: &str) -> Result<String, BackendError> {
        let body = Self::build_request_body(&self.cfg, system, user);
        let mut last_err = BackendError::Unavailable("no attempts made".into());
        for attempt in 0..self.cfg.max_retries.max(1) {
            if attempt > 0 {
                let delay = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1));
                std::thread::sleep(Duration::from_millis(delay));
            }
            match self.try_once(&body) {
                Ok(reply) => return Ok(reply),
                Err(e) => {
                    warn!("chat attempt {} failed: {e}", attempt + 1);
                    last_err = e;
                }
            }
        }
        Err(last_err)
    }

    fn try_once(&self, body: &serde_json::Value) -> Result<String, BackendError> {
        let mut req = self.http.post(self.endpoint()).json(body);
        if let Ok(key) = std::env::var(&self.cfg.api_key_env) {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Unavailable(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(BackendError::Unavailable(format!("status {status}: {text}")));
        }
        let parsed: ChatResponse =
            resp.json().map_err(|e| BackendError::BadReply(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| BackendError::BadReply("response has no choices".into()))
    }
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Debug, Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Debug, Deserialize)]
struct ChatMessage {
    content: String,
}

/// Chat-completions decision backend with transcript record/replay.
pub struct LlmBackend {
    cfg: LlmConfig,
    client: Option<ChatClient>,
    transcripts: Option<TranscriptStore>,
}

impl LlmBackend {
    /// In replay mode no network client is constructed at all; in record
    /// mode every live reply is appended to the transcript file.
    pub fn new(cfg: LlmConfig, transcript_path: Option<&Path>) -> Result<Self, BackendError> {
        let transcripts = match (cfg.transcript, transcript_path) {
            (TranscriptMode::Off, _) | (_, None) => None,
            (_, Some(path)) => Some(TranscriptStore::open(path)?),
        };
        let client = match cfg.transcript {
            TranscriptMode::Replay => None,
            _ => Some(ChatClient::new(cfg.clone())?),
        };
        Ok(LlmBackend { cfg, client, transcripts })
    }

    fn chat(&self, system: &str, user: &str) -> Result<String, BackendError> {
        let key = request_key(&self.cfg.model, self.cfg.temperature, system, user);
        if let Some(store) = &self.transcripts {
            if let Some(reply) = store.lookup(&key) {
                return Ok(reply);
            }
            if self.cfg.transcript == TranscriptMode::Replay {
                return Err(BackendError::MissingTranscript(key));
            }
        }
        let client = self
            .client
            .as_ref()
            .ok_or_else(|| BackendError::Unavailable("no client in replay mode".into()))?;
        let reply = client.complete(system, user)?;
        if let Some(store) = &self.transcripts {
            store.record(Transcript {
                key,
                system: system.to_string(),
                user: user.to_string(),
                reply: reply.clone(),
            })?;
        }
        Ok(reply)
    }
}

/// Render the per-turn user message: recent activity, the feed, permitted
/// actions, and the reply schema.
pub fn render_decision_request(ctx: &AgentContext) -> String {
    let mut out = format!("Iteration {}.\n", ctx.iteration);
    if !ctx.memory_digest.is_empty() {
        out.push_str("Your recent activity and feedback:\n");
        for line in &ctx.memory_digest {
            out.push_str(&format!("- {line}\n"));
        }
    }
    if ctx.feed.is_empty() {
        out.push_str("Your feed is empty this round.\n");
    } else {
        out.push_str("Your feed:\n");
        for item in &ctx.feed {
            out.push_str(&format!("- post {} by {}: {}\n", item.post.0, item.author_name, item.text));
        }
    }
    let permitted: Vec<&str> = ctx
        .permitted
        .iter()
        .map(|k| match k {
            ActionKind::Post => "post",
            ActionKind::ReShare => "re_share",
            ActionKind::Comment => "comment",
            ActionKind::Like => "like",
            ActionKind::Follow => "follow",
            ActionKind::Silent => "silent",
        })
        .collect();
    out.push_str(&format!("Permitted action kinds this turn: {}.\n", permitted.join(", ")));
    out.push_str(
        "Reply with one JSON object and nothing else: \
         {\"actions\": [{\"kind\": \"post|re_share|comment|like|follow|silent\", \
         \"target_post\": <post id>, \"target_agent\": <agent id>, \"text\": \"...\"}], \
         \"rationale\": \"why\"}. \
         Use at most 3 non-silent actions; target_post refers to feed post ids.\n",
    );
    out
}

impl Backend for LlmBackend {
    fn decide(&self, ctx: &AgentContext) -> Result<AgentDecision, BackendError> {
        let user = render_decision_request(ctx);
        let reply = self.chat(&ctx.system_prompt, &user)?;
        parse_llm_reply(&reply).map_err(|e| BackendError::BadReply(e.to_string()))
    }

    fn complete_text(&self, req: &TextRequest) -> Result<String, BackendError> {
        self.chat(&req.system, &req.user)
    }
}
