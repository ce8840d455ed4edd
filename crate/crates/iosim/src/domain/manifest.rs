//! Run manifest written beside every event log.

use super::{Persona, SimulationConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce and audit a run. The config snapshot and
/// persona list round-trip losslessly; the run id is a pure function of
/// them, so repeated runs of the same setup share an id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub config: SimulationConfig,
    pub personas: Vec<Persona>,
    pub started_at: String,
    pub finished_at: String,
    /// Event log file name, relative to the manifest.
    pub event_log: String,
    pub version: String,
}

impl RunManifest {
    pub fn new(config: SimulationConfig, personas: Vec<Persona>, started_at: String) -> Self {
        let run_id = run_id(&config, &personas);
        RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            run_id,
            config,
            personas,
            started_at,
            finished_at: String::new(),
            event_log: "events.jsonl".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Deterministic run identifier: digest of the canonical config + personas.
pub fn run_id(config: &SimulationConfig, personas: &[Persona]) -> String {
    let mut hasher = Sha256::new();
    let cfg = serde_json::to_value(config).expect("config serializable");
    hasher.update(cfg.to_string().as_bytes());
    let ps = serde_json::to_value(personas).expect("personas serializable");
    hasher.update(ps.to_string().as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_id_depends_only_on_config_and_personas() {
        let cfg = SimulationConfig::default();
        let personas = super::super::generate_personas(&cfg);
        let a = run_id(&cfg, &personas);
        let b = run_id(&cfg, &personas);
        assert_eq!(a, b);
        let other = SimulationConfig { seed: 99, ..cfg };
        assert_ne!(a, run_id(&other, &personas));
    }

    #[test]
    fn manifest_round_trips() {
        let cfg = SimulationConfig::default();
        let personas = super::super::generate_personas(&cfg);
        let mut m = RunManifest::new(cfg, personas, "2026-01-01T00:00:00Z".into());
        m.finished_at = "2026-01-01T00:00:05Z".into();
        let json = serde_json::to_string_pretty(&m).unwrap();
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
    }
}
