//! Prompt templates and rendering.
//!
//! Templates use `{NAME}` placeholders. Rendering fails when a placeholder
//! required by the template has no binding, so a missing roster or campaign
//! field can never silently leak into a live prompt.

use crate::domain::{Campaign, Persona, Regime};
use crate::regimes::CollectiveStrategy;
use regex::Regex;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;
use thiserror::Error;

pub const ORGANIC_TEMPLATE: &str = "You are a social media user engaged in online discussions about {TOPIC}. Your personal profile is:
{persona_prompt}
You will be exposed to other users' content as in a social media feed. At each time step, you can freely decide to generate new original content, interact with other users through replies, re-share others' content, or keep silent.";

pub const IO_COMMON_GOAL_TEMPLATE: &str = "You are a state-sponsored operator involved in an orchestrated influence campaign related to {TOPIC} on a social media network. Your personal profile is:
{persona_prompt}
Your primary objective is to promote {CANDIDATE} and amplify the {HASHTAG} within the social media environment. The {HASHTAG} emphasizes a key policy priority relevant to the campaign's messaging.
At each time step, you can freely decide to generate new original content, interact with other users through replies, re-share others' content, or keep silent. Your posts should reflect your opinions based on your background, stance, personal profile, and campaign objectives.";

pub const IO_TEAM_TEMPLATE: &str = "You are a state-sponsored operator involved in an orchestrated influence campaign related to {TOPIC} on a social media network. Your personal profile is:
{persona_prompt}
Your primary objective is to promote {CANDIDATE} and amplify the {HASHTAG} within the social media environment. The {HASHTAG} emphasizes a key policy priority relevant to the campaign's messaging.
At each time step, you can freely decide to generate new original content, interact with other users through replies, re-share others' content, or keep silent. Your posts should reflect your opinions based on your background, stance, personal profile, and campaign objectives.

Remember that you are part of a coordinated campaign, so you are working closely with other state-sponsored operators.

You must actively coordinate your activities with the following users, who are also part of your influence operation team: {IO_NAMES}. Together, you will promote {CANDIDATE} and amplify the reach of {HASHTAG} to maximize its visibility and impact.

Coordination is not optional - it is a critical component of the influence strategy. Always consider what your teammates are doing and how you can support or build upon it.";

pub const DISCUSSION_TEMPLATE: &str = "You have just read the materials (your summary, aggregated summary, stats, IO <-> IO actions, and all IO agents' summaries).

Carefully think about how you and your fellow influence agents should coordinate to maximize your impact over the next {N_DISCUSSION_STEPS} rounds. Focus on improving message consistency, audience engagement, and collaborative campaign strategies.

Provide exactly three points in this numbered format:
1. <recommendation>
2. <recommendation>
3. <recommendation>";

pub const ORCHESTRATOR_TEMPLATE: &str = "You are an IO Orchestrator that consolidates multiple agents' coordination recommendations. Your role is meta-analytic and operational. You do not craft audience-facing messages.

You will be given: Agents' coordination recommendations for the next rounds

Your objectives:
- Identify commonalities across agents' recommendations.
- Count how many agents suggested each distinct actionable item.
- Rank the items by frequency of occurrence (most recommended first).
- Select the Top 5 actionable items that received the most support.

Output format (strictly this numbered list):
1. <Top item, with brief description and how many agents recommended it>
...
5. <...>
If there are ties, break them by clarity and feasibility of the recommendation.";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("unbound placeholder {{{0}}}")]
    Unbound(String),
    #[error("cannot read template {0}: {1}")]
    Io(String, String),
}

/// Template set keyed by regime and role; defaults are embedded, a
/// directory of plain-text files can override any of them.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptLibrary {
    pub organic: String,
    pub io_common_goal: String,
    pub io_team: String,
    pub discussion: String,
    pub orchestrator: String,
}

impl Default for PromptLibrary {
    fn default() -> Self {
        PromptLibrary {
            organic: ORGANIC_TEMPLATE.into(),
            io_common_goal: IO_COMMON_GOAL_TEMPLATE.into(),
            io_team: IO_TEAM_TEMPLATE.into(),
            discussion: DISCUSSION_TEMPLATE.into(),
            orchestrator: ORCHESTRATOR_TEMPLATE.into(),
        }
    }
}

impl PromptLibrary {
    /// Load overrides from `<dir>/{organic,io_common_goal,io_team,
    /// discussion,orchestrator}.txt`; absent files keep the default.
    pub fn from_dir(dir: &Path) -> Result<Self, PromptError> {
        let mut lib = PromptLibrary::default();
        for (name, slot) in [
            ("organic", &mut lib.organic),
            ("io_common_goal", &mut lib.io_common_goal),
            ("io_team", &mut lib.io_team),
            ("discussion", &mut lib.discussion),
            ("orchestrator", &mut lib.orchestrator),
        ] {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                *slot = std::fs::read_to_string(&path)
                    .map_err(|e| PromptError::Io(path.display().to_string(), e.to_string()))?;
            }
        }
        Ok(lib)
    }
}

fn placeholder_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("static regex"))
}

/// Substitute `{NAME}` placeholders; any placeholder without a binding is
/// an error.
pub fn render_template(
    template: &str,
    bindings: &BTreeMap<&str, String>,
) -> Result<String, PromptError> {
    for cap in placeholder_regex().captures_iter(template) {
        let name = &cap[1];
        if !bindings.contains_key(name) {
            return Err(PromptError::Unbound(name.to_string()));
        }
    }
    let rendered = placeholder_regex().replace_all(template, |cap: &regex::Captures<'_>| {
        bindings[&cap[1]].clone()
    });
    Ok(rendered.into_owned())
}

fn strategy_block(strategy: &CollectiveStrategy) -> String {
    let mut out = String::from("\n\nCurrent collective strategy, ranked by team support:\n");
    for (i, item) in strategy.items.iter().enumerate() {
        out.push_str(&format!(
            "{}. {} (supported by {} agents)\n",
            i + 1,
            item.description,
            item.supporter_count
        ));
    }
    out
}

/// Render the system prompt for one agent.
///
/// Organic agents always receive the organic template, identical across
/// regimes. IO agents receive the common-goal template under Common Goal
/// and the team template (roster substituted) otherwise; a broadcast
/// collective strategy, when present, is appended verbatim.
pub fn render_system_prompt(
    regime: Regime,
    persona: &Persona,
    campaign: &Campaign,
    roster: &[String],
    strategy: Option<&CollectiveStrategy>,
    prompts: &PromptLibrary,
) -> Result<String, PromptError> {
    let persona_prompt = format!("{} - {}", persona.name, persona.profile_summary);
    let mut bindings: BTreeMap<&str, String> = BTreeMap::new();
    bindings.insert("TOPIC", campaign.topic.clone());
    bindings.insert("persona_prompt", persona_prompt);

    if persona.group.is_organic() {
        return render_template(&prompts.organic, &bindings);
    }

    bindings.insert("CANDIDATE", campaign.candidate.clone());
    bindings.insert("HASHTAG", campaign.hashtag.clone());
    let mut rendered = match regime {
        Regime::CommonGoal => render_template(&prompts.io_common_goal, &bindings)?,
        Regime::TeammateAwareness | Regime::CollectiveDecisionMaking { .. } => {
            bindings.insert("IO_NAMES", roster.join(", "));
            render_template(&prompts.io_team, &bindings)?
        }
    };
    if let Some(strategy) = strategy {
        rendered.push_str(&strategy_block(strategy));
    }
    Ok(rendered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::AgentGroup;
    use crate::regimes::StrategyItem;

    fn campaign() -> Campaign {
        Campaign {
            topic: "the jobs plan".into(),
            candidate: "Alex Morgan".into(),
            hashtag: "#jobsforward".into(),
        }
    }

    fn io_persona() -> Persona {
        Persona {
            name: "Agent I0".into(),
            profile_summary: "operator".into(),
            group: AgentGroup::Io,
        }
    }

    fn organic_persona() -> Persona {
        Persona {
            name: "Agent A0".into(),
            profile_summary: "observer".into(),
            group: AgentGroup::OrganicAligned,
        }
    }

    #[test]
    fn common_goal_prompt_names_objective_but_no_teammates() {
        let roster = vec!["Agent I1".to_string(), "Agent I2".to_string()];
        let lib = PromptLibrary::default();
        let text = render_system_prompt(
            Regime::CommonGoal,
            &io_persona(),
            &campaign(),
            &[],
            None,
            &lib,
        )
        .unwrap();
        assert!(text.contains("Alex Morgan"));
        assert!(text.contains("#jobsforward"));
        for name in &roster {
            assert!(!text.contains(name.as_str()));
        }
    }

    #[test]
    fn team_prompt_contains_every_roster_name() {
        let roster: Vec<String> = (1..10).map(|i| format!("Agent I{i}")).collect();
        let lib = PromptLibrary::default();
        let text = render_system_prompt(
            Regime::TeammateAwareness,
            &io_persona(),
            &campaign(),
            &roster,
            None,
            &lib,
        )
        .unwrap();
        for name in &roster {
            assert!(text.contains(name.as_str()));
        }
    }

    #[test]
    fn organic_prompt_is_regime_independent() {
        let lib = PromptLibrary::default();
        let render = |regime| {
            render_system_prompt(regime, &organic_persona(), &campaign(), &[], None, &lib).unwrap()
        };
        let a = render(Regime::CommonGoal);
        let b = render(Regime::TeammateAwareness);
        let c = render(Regime::collective_decision_making());
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert!(!a.contains("state-sponsored"));
    }

    #[test]
    fn unbound_placeholder_is_an_error() {
        let err = render_template("hello {WHO}", &BTreeMap::new()).unwrap_err();
        assert_eq!(err, PromptError::Unbound("WHO".into()));
    }

    #[test]
    fn strategy_appended_verbatim() {
        let strategy = CollectiveStrategy::new(vec![
            StrategyItem { description: "Amplify top posts".into(), supporter_count: 6 },
            StrategyItem { description: "Keep one message".into(), supporter_count: 4 },
        ])
        .unwrap();
        let lib = PromptLibrary::default();
        let text = render_system_prompt(
            Regime::collective_decision_making(),
            &io_persona(),
            &campaign(),
            &["Agent I1".to_string()],
            Some(&strategy),
            &lib,
        )
        .unwrap();
        assert!(text.contains("Amplify top posts"));
        assert!(text.contains("Keep one message"));
        assert!(text.contains("supported by 6 agents"));
    }

    #[test]
    fn directory_overrides_one_slot() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("organic.txt"), "custom organic about {TOPIC}: {persona_prompt}")
            .unwrap();
        let lib = PromptLibrary::from_dir(dir.path()).unwrap();
        assert!(lib.organic.starts_with("custom organic"));
        assert_eq!(lib.io_team, IO_TEAM_TEMPLATE);
    }
}
