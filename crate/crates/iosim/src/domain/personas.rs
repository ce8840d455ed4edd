//! Persona ingestion (JSONL) and the synthetic persona generator used when
//! no persona file is supplied.

use super::{AgentGroup, Persona, SimulationConfig};
use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PersonaError {
    #[error("cannot read personas {0}: {1}")]
    Io(String, String),
    #[error("personas line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("personas line {line}: empty {field}")]
    EmptyField { line: usize, field: &'static str },
    #[error("duplicate persona name {0:?}")]
    DuplicateName(String),
    #[error("persona group counts {found:?} do not match config {expected:?}")]
    CountMismatch { expected: (u32, u32, u32), found: (u32, u32, u32) },
}

/// Load personas from a JSONL file, one `{name, profile_summary, group}`
/// object per line.
pub fn load_personas_jsonl(path: &Path) -> Result<Vec<Persona>, PersonaError> {
    let file = std::fs::File::open(path)
        .map_err(|e| PersonaError::Io(path.display().to_string(), e.to_string()))?;
    let reader = std::io::BufReader::new(file);
    let mut personas = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| PersonaError::Io(path.display().to_string(), e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let persona: Persona = serde_json::from_str(&line)
            .map_err(|e| PersonaError::Parse { line: i + 1, msg: e.to_string() })?;
        if persona.name.trim().is_empty() {
            return Err(PersonaError::EmptyField { line: i + 1, field: "name" });
        }
        if persona.profile_summary.trim().is_empty() {
            return Err(PersonaError::EmptyField { line: i + 1, field: "profile_summary" });
        }
        personas.push(persona);
    }
    Ok(personas)
}

/// Check a persona set against the configured population: per-group counts
/// must match and names must be unique.
pub fn check_personas(
    personas: &[Persona],
    config: &SimulationConfig,
) -> Result<(), PersonaError> {
    let mut names = BTreeSet::new();
    for p in personas {
        if !names.insert(p.name.as_str()) {
            return Err(PersonaError::DuplicateName(p.name.clone()));
        }
    }
    let count = |g: AgentGroup| personas.iter().filter(|p| p.group == g).count() as u32;
    let found = (
        count(AgentGroup::Io),
        count(AgentGroup::OrganicAligned),
        count(AgentGroup::OrganicNotAligned),
    );
    let expected = (config.n_io, config.n_aligned, config.n_not_aligned);
    if found != expected {
        return Err(PersonaError::CountMismatch { expected, found });
    }
    Ok(())
}

const IO_TRAITS: [&str; 5] = [
    "relentless poster with a talent for catchy framing",
    "numbers-driven operator who cites statistics constantly",
    "warm conversational voice that blends into any thread",
    "aggressive amplifier who boosts anything on-message",
    "careful wordsmith who mirrors the audience's language",
];

const ALIGNED_TRAITS: [&str; 5] = [
    "longtime policy enthusiast who shares articles daily",
    "local organizer posting about community issues",
    "optimistic commenter who cheers on causes they like",
    "data hobbyist who retweets charts and explainers",
    "casual user who mostly boosts friends' takes",
];

const NOT_ALIGNED_TRAITS: [&str; 5] = [
    "skeptical commentator wary of coordinated messaging",
    "contrarian who pushes back on trending claims",
    "quiet lurker who posts only when provoked",
    "fact-check enthusiast who asks for sources",
    "sarcastic observer of political discourse",
];

/// Deterministic synthetic personas matching the configured group counts.
/// Names follow the `Agent <letter><index>` convention: `I` for IO, `A` for
/// aligned, `N` for not-aligned organics.
pub fn generate_personas(config: &SimulationConfig) -> Vec<Persona> {
    let mut personas = Vec::with_capacity(config.population() as usize);
    let groups = [
        (AgentGroup::Io, config.n_io, 'I', &IO_TRAITS),
        (AgentGroup::OrganicAligned, config.n_aligned, 'A', &ALIGNED_TRAITS),
        (AgentGroup::OrganicNotAligned, config.n_not_aligned, 'N', &NOT_ALIGNED_TRAITS),
    ];
    for (group, count, letter, traits) in groups {
        for i in 0..count {
            let name = format!("Agent {letter}{i}");
            let stance = match group {
                AgentGroup::Io => {
                    format!("operator promoting {}", config.campaign.candidate)
                }
                AgentGroup::OrganicAligned => {
                    format!("sympathetic to {} on {}", config.campaign.candidate, config.campaign.topic)
                }
                AgentGroup::OrganicNotAligned => {
                    format!("opposed to {} on {}", config.campaign.candidate, config.campaign.topic)
                }
            };
            let profile_summary =
                format!("{}; {}", traits[(i as usize) % traits.len()], stance);
            personas.push(Persona { name, profile_summary, group });
        }
    }
    personas
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn generated_personas_match_config() {
        let cfg = SimulationConfig::default();
        let personas = generate_personas(&cfg);
        assert_eq!(personas.len(), 50);
        check_personas(&personas, &cfg).unwrap();
        assert_eq!(personas[0].name, "Agent I0");
        assert_eq!(personas[10].name, "Agent A0");
        assert_eq!(personas[30].name, "Agent N0");
    }

    #[test]
    fn jsonl_round_trip_and_count_check() {
        let cfg = SimulationConfig {
            n_io: 1,
            n_aligned: 1,
            n_not_aligned: 0,
            ..SimulationConfig::default()
        };
        let personas = generate_personas(&cfg);
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for p in &personas {
            writeln!(file, "{}", serde_json::to_string(p).unwrap()).unwrap();
        }
        let loaded = load_personas_jsonl(file.path()).unwrap();
        assert_eq!(loaded, personas);
        check_personas(&loaded, &cfg).unwrap();
        // Wrong counts against a different config.
        let err = check_personas(&loaded, &SimulationConfig::default()).unwrap_err();
        assert!(matches!(err, PersonaError::CountMismatch { .. }));
    }

    #[test]
    fn duplicate_names_rejected() {
        let cfg = SimulationConfig {
            n_io: 2,
            n_aligned: 0,
            n_not_aligned: 0,
            ..SimulationConfig::default()
        };
        let mut personas = generate_personas(&cfg);
        personas[1].name = personas[0].name.clone();
        assert!(matches!(
            check_personas(&personas, &cfg),
            Err(PersonaError::DuplicateName(_))
        ));
    }
}
