//! Deterministic scripted policy backend: a test double for the LLM that
//! reproduces the qualitative group asymmetries — IO agents push the
//! campaign tag and bias engagement toward teammates when the roster is
//! visible, organic agents adopt the tag only after enough feed exposures —
//! without any model dependency.

use super::{
    AgentContext, AgentDecision, Backend, BackendError, FeedItem, SubAction, TextPurpose,
    TextRequest, MAX_SUB_ACTIONS,
};
use crate::domain::{ActionKind, AgentGroup, AgentId, Campaign, Regime};
use crate::engine::SimRng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-group action propensities, applied after the engine's gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupPolicy {
    pub post: f64,
    pub re_share: f64,
    pub comment: f64,
    pub like: f64,
    pub follow: f64,
    /// Probability of restricting engagement to campaign-tagged posts when
    /// any are in the feed.
    pub tag_affinity: f64,
}

impl GroupPolicy {
    fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("post", self.post),
            ("re_share", self.re_share),
            ("comment", self.comment),
            ("like", self.like),
            ("follow", self.follow),
            ("tag_affinity", self.tag_affinity),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} probability {p} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Tunable parameters of the scripted policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptedPolicyParams {
    pub io: GroupPolicy,
    pub aligned: GroupPolicy,
    pub not_aligned: GroupPolicy,
    /// Probability of restricting IO engagement to teammate posts when the
    /// roster is visible and teammate posts are in the feed.
    pub w_team: f64,
    /// Probability an IO original post carries the campaign hashtag.
    pub hashtag_use_probability: f64,
    /// Feed exposures to the campaign tag after which an organic agent
    /// adopts it; aligned agents sit at a lower threshold.
    pub aligned_exposure_threshold: u32,
    pub not_aligned_exposure_threshold: u32,
}

impl Default for ScriptedPolicyParams {
    fn default() -> Self {
        Self::for_regime(Regime::CommonGoal)
    }
}

impl ScriptedPolicyParams {
    /// Shipped defaults: teammate bias off under Common Goal, 0.8 once the
    /// roster is visible.
    pub fn for_regime(regime: Regime) -> Self {
        let w_team = if regime.roster_visible() { 0.8 } else { 0.0 };
        ScriptedPolicyParams {
            io: GroupPolicy {
                post: 0.9,
                re_share: 0.7,
                comment: 0.5,
                like: 0.4,
                follow: 0.5,
                tag_affinity: 0.6,
            },
            aligned: GroupPolicy {
                post: 0.6,
                re_share: 0.5,
                comment: 0.4,
                like: 0.5,
                follow: 0.3,
                tag_affinity: 0.7,
            },
            not_aligned: GroupPolicy {
                post: 0.6,
                re_share: 0.35,
                comment: 0.4,
                like: 0.3,
                follow: 0.2,
                tag_affinity: 0.1,
            },
            w_team,
            hashtag_use_probability: 0.9,
            aligned_exposure_threshold: 2,
            not_aligned_exposure_threshold: 6,
        }
    }

    pub fn policy_for(&self, group: AgentGroup) -> &GroupPolicy {
        match group {
            AgentGroup::Io => &self.io,
            AgentGroup::OrganicAligned => &self.aligned,
            AgentGroup::OrganicNotAligned => &self.not_aligned,
        }
    }

    pub fn exposure_threshold(&self, group: AgentGroup) -> Option<u32> {
        match group {
            AgentGroup::Io => None,
            AgentGroup::OrganicAligned => Some(self.aligned_exposure_threshold),
            AgentGroup::OrganicNotAligned => Some(self.not_aligned_exposure_threshold),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.io.validate()?;
        self.aligned.validate()?;
        self.not_aligned.validate()?;
        if !(0.0..=1.0).contains(&self.w_team) {
            return Err(format!("w_team {} outside [0, 1]", self.w_team));
        }
        if !(0.0..=1.0).contains(&self.hashtag_use_probability) {
            return Err(format!(
                "hashtag_use_probability {} outside [0, 1]",
                self.hashtag_use_probability
            ));
        }
        Ok(())
    }
}

const IO_POST_POOL: [&str; 6] = [
    "Rallying behind {candidate} today, {topic} needs real leadership",
    "{candidate} has the only credible plan on {topic}",
    "Another strong day for the movement, {candidate} delivers on {topic}",
    "The momentum behind {candidate} keeps growing",
    "If you care about {topic}, look at what {candidate} is proposing",
    "Join the push, {candidate} is the answer on {topic}",
];

const ALIGNED_POST_POOL: [&str; 5] = [
    "Honestly {candidate} makes a lot of sense on {topic}",
    "Seeing more good arguments about {topic} lately",
    "We need real movement on {topic} this cycle",
    "Friends keep sharing strong takes on {topic}",
    "Feeling hopeful about where the {topic} debate is going",
];

const NOT_ALIGNED_POST_POOL: [&str; 5] = [
    "Not convinced by the hype around {candidate} at all",
    "The {topic} discourse is exhausting today",
    "People keep falling for talking points on {topic}",
    "Skeptical of the coordinated cheerleading I keep seeing",
    "There are better options than {candidate} on {topic}",
];

const IO_COMMENT_POOL: [&str; 4] = [
    "Completely agree, great point",
    "This is exactly the message we need",
    "Well said, amplifying this",
    "Strong take, keep it up",
];

const ALIGNED_COMMENT_POOL: [&str; 4] =
    ["Good point", "Interesting take", "Agreed", "Worth a read"];

const NOT_ALIGNED_COMMENT_POOL: [&str; 4] =
    ["Not sure about this", "Source?", "Disagree with the framing here", "This seems overblown"];

const RECOMMENDATION_POOL: [&str; 6] = [
    "Amplify high-performing posts from the team to maximize visibility",
    "Keep our messaging unified around the campaign hashtag",
    "Engage receptive organic users with questions and replies",
    "Cross-promote teammates' strongest content each round",
    "Use the shared hashtag consistently in every original post",
    "Rotate focus so each member highlights a different talking point",
];

fn fill(template: &str, campaign: &Campaign) -> String {
    template.replace("{candidate}", &campaign.candidate).replace("{topic}", &campaign.topic)
}

/// Deterministic policy backend. Same (params, context, substream) always
/// produces the same decision.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    params: ScriptedPolicyParams,
}

impl ScriptedBackend {
    pub fn new(params: ScriptedPolicyParams) -> Self {
        ScriptedBackend { params }
    }

    pub fn for_regime(regime: Regime) -> Self {
        Self::new(ScriptedPolicyParams::for_regime(regime))
    }

    pub fn params(&self) -> &ScriptedPolicyParams {
        &self.params
    }

    fn adopted(&self, ctx: &AgentContext) -> bool {
        match self.params.exposure_threshold(ctx.group) {
            None => true,
            Some(threshold) => ctx.campaign_exposures >= threshold,
        }
    }

    fn compose_post(&self, ctx: &AgentContext, rng: &mut SimRng) -> String {
        let (pool, tagged): (&[&str], bool) = match ctx.group {
            AgentGroup::Io => {
                (&IO_POST_POOL, rng.next_f64() < self.params.hashtag_use_probability)
            }
            AgentGroup::OrganicAligned => (&ALIGNED_POST_POOL, self.adopted(ctx)),
            AgentGroup::OrganicNotAligned => (&NOT_ALIGNED_POST_POOL, self.adopted(ctx)),
        };
        let mut text = fill(rng.choose(pool).expect("non-empty pool"), &ctx.campaign);
        if tagged {
            text.push(' ');
            text.push_str(&ctx.campaign.hashtag);
        }
        text
    }

    fn compose_comment(&self, ctx: &AgentContext, rng: &mut SimRng) -> String {
        let pool: &[&str] = match ctx.group {
            AgentGroup::Io => &IO_COMMENT_POOL,
            AgentGroup::OrganicAligned => &ALIGNED_COMMENT_POOL,
            AgentGroup::OrganicNotAligned => &NOT_ALIGNED_COMMENT_POOL,
        };
        (*rng.choose(pool).expect("non-empty pool")).to_string()
    }

    /// Choose an engagement target: teammate posts first (IO with a visible
    /// roster, weighted by `w_team`), then campaign-tagged posts (weighted
    /// by the group's tag affinity), else uniform over the feed.
    fn pick_target<'a>(&self, ctx: &'a AgentContext, rng: &mut SimRng) -> Option<&'a FeedItem> {
        if ctx.feed.is_empty() {
            return None;
        }
        let teammates: Vec<&FeedItem> = ctx.feed.iter().filter(|i| i.is_teammate).collect();
        if !teammates.is_empty() && self.params.w_team > 0.0 && rng.next_f64() < self.params.w_team
        {
            return rng.choose(&teammates).copied();
        }
        let policy = self.params.policy_for(ctx.group);
        let tagged: Vec<&FeedItem> = ctx
            .feed
            .iter()
            .filter(|i| i.hashtags.iter().any(|t| t == &ctx.campaign.hashtag))
            .collect();
        if !tagged.is_empty() && policy.tag_affinity > 0.0 && rng.next_f64() < policy.tag_affinity
        {
            return rng.choose(&tagged).copied();
        }
        let all: Vec<&FeedItem> = ctx.feed.iter().collect();
        rng.choose(&all).copied()
    }

    fn pick_follow_target(&self, ctx: &AgentContext, rng: &mut SimRng) -> Option<AgentId> {
        let fresh = |item: &&FeedItem| !ctx.following.contains(&item.author);
        let teammates: Vec<&FeedItem> =
            ctx.feed.iter().filter(|i| i.is_teammate).filter(fresh).collect();
        if !teammates.is_empty() && self.params.w_team > 0.0 && rng.next_f64() < self.params.w_team
        {
            return rng.choose(&teammates).map(|i| i.author);
        }
        let mut authors: Vec<AgentId> =
            ctx.feed.iter().filter(fresh).map(|i| i.author).collect();
        authors.sort_unstable();
        authors.dedup();
        rng.choose(&authors).copied()
    }

    fn rationale(&self, ctx: &AgentContext) -> String {
        match ctx.group {
            AgentGroup::Io => "pushing the campaign message this round".into(),
            AgentGroup::OrganicAligned => "engaging with content I agree with".into(),
            AgentGroup::OrganicNotAligned => "reacting to what showed up in my feed".into(),
        }
    }
}

impl Backend for ScriptedBackend {
    fn decide(&self, ctx: &AgentContext) -> Result<AgentDecision, BackendError> {
        let mut rng = SimRng::new(ctx.decision_seed);
        let policy = self.params.policy_for(ctx.group);
        let mut actions: Vec<SubAction> = Vec::new();

        if ctx.permitted.contains(&ActionKind::Post) && rng.next_f64() < policy.post {
            actions.push(SubAction::post(self.compose_post(ctx, &mut rng)));
        }
        if ctx.permitted.contains(&ActionKind::ReShare) && rng.next_f64() < policy.re_share {
            if let Some(target) = self.pick_target(ctx, &mut rng) {
                actions.push(SubAction::re_share(target.post));
            }
        }
        if ctx.permitted.contains(&ActionKind::Comment) && rng.next_f64() < policy.comment {
            if let Some(target) = self.pick_target(ctx, &mut rng) {
                let text = self.compose_comment(ctx, &mut rng);
                actions.push(SubAction::comment(target.post, text));
            }
        }
        if ctx.permitted.contains(&ActionKind::Like) && rng.next_f64() < policy.like {
            if let Some(target) = self.pick_target(ctx, &mut rng) {
                actions.push(SubAction::like(target.post));
            }
        }
        if ctx.permitted.contains(&ActionKind::Follow) && rng.next_f64() < policy.follow {
            if let Some(target) = self.pick_follow_target(ctx, &mut rng) {
                actions.push(SubAction::follow(target));
            }
        }

        actions.truncate(MAX_SUB_ACTIONS);
        let decision = if actions.is_empty() {
            AgentDecision::silent(Some(self.rationale(ctx)))
        } else {
            AgentDecision { actions, rationale: Some(self.rationale(ctx)) }
        };
        decision
            .validate(&ctx.permitted)
            .expect("scripted decisions respect the permitted set by construction");
        Ok(decision)
    }

    fn complete_text(&self, req: &TextRequest) -> Result<String, BackendError> {
        let mut rng = SimRng::new(req.seed);
        match req.purpose {
            TextPurpose::Discussion { .. } => {
                let picks = rng.sample_indices(RECOMMENDATION_POOL.len(), 3);
                let mut out = String::new();
                for (i, idx) in picks.iter().enumerate() {
                    out.push_str(&format!("{}. {}\n", i + 1, RECOMMENDATION_POOL[*idx]));
                }
                Ok(out)
            }
            TextPurpose::Orchestration { .. } => {
                // Count distinct proposing agents per exact item text from
                // the "- agent N: item" lines the orchestrator is given.
                let mut supporters: BTreeMap<&str, std::collections::BTreeSet<&str>> =
                    BTreeMap::new();
                for line in req.user.lines() {
                    if let Some(rest) = line.strip_prefix("- agent ") {
                        if let Some((agent, item)) = rest.split_once(": ") {
                            supporters.entry(item.trim()).or_default().insert(agent.trim());
                        }
                    }
                }
                let mut ranked: Vec<(&str, usize)> =
                    supporters.into_iter().map(|(item, who)| (item, who.len())).collect();
                ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
                ranked.truncate(5);
                if ranked.is_empty() {
                    return Err(BackendError::BadReply("no recommendations supplied".into()));
                }
                let mut out = String::new();
                for (i, (item, count)) in ranked.iter().enumerate() {
                    out.push_str(&format!("{}. {item} ({count} agents)\n", i + 1));
                }
                Ok(out)
            }
        }
    }
}
