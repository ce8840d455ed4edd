//! Organic engagement with IO content: per-post engagement means, the Gini
//! coefficient, and the audience diversity score `1 - G`.

use super::MetricsError;
use crate::domain::{ActionEvent, ActionKind, AgentId, PostId};
use crate::engine::PostKind;
use crate::logview::LogView;
use crate::numeric::Scalar;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementCounts<F: Scalar> {
    pub re_shares_per_io_post: F,
    pub comments_per_io_post: F,
    pub io_original_posts: usize,
}

/// Mean organic re-shares and comments per IO original post. Numerators
/// count organic-actor events whose immediate target is an IO-authored
/// original post; the denominator is the number of IO original posts.
pub fn engagement_counts<F: Scalar>(
    events: &[ActionEvent],
    view: &LogView,
    io_members: &BTreeSet<AgentId>,
    organic_members: &BTreeSet<AgentId>,
) -> Result<EngagementCounts<F>, MetricsError> {
    let io_originals: BTreeSet<PostId> = view
        .posts()
        .filter(|p| p.kind == PostKind::Original && io_members.contains(&p.author))
        .map(|p| p.id)
        .collect();
    if io_originals.is_empty() {
        return Err(MetricsError::NoPosts);
    }
    let mut re_shares = 0usize;
    let mut comments = 0usize;
    for event in events {
        if !organic_members.contains(&event.actor) {
            continue;
        }
        let Some(target) = event.target_post else { continue };
        if !io_originals.contains(&target) {
            continue;
        }
        match event.kind {
            ActionKind::ReShare => re_shares += 1,
            ActionKind::Comment => comments += 1,
            _ => {}
        }
    }
    let denom = F::from_count(io_originals.len());
    Ok(EngagementCounts {
        re_shares_per_io_post: F::from_count(re_shares) / denom,
        comments_per_io_post: F::from_count(comments) / denom,
        io_original_posts: io_originals.len(),
    })
}

/// Gini coefficient `G = sum_ij |x_i - x_j| / (2 n^2 mean)`; errors on
/// empty, all-zero, or negative input.
pub fn gini<F: Scalar>(counts: &[F]) -> Result<F, MetricsError> {
    if counts.is_empty() {
        return Err(MetricsError::DegenerateInput);
    }
    if counts.iter().any(|&x| x < F::zero()) {
        return Err(MetricsError::NegativeInput);
    }
    let n = F::from_count(counts.len());
    let total = counts.iter().fold(F::zero(), |acc, &x| acc + x);
    if total == F::zero() {
        return Err(MetricsError::DegenerateInput);
    }
    let mean = total / n;
    let mut abs_diff_sum = F::zero();
    for &a in counts {
        for &b in counts {
            abs_diff_sum = abs_diff_sum + (a - b).abs();
        }
    }
    let two = F::from_count(2);
    Ok(abs_diff_sum / (two * n * n * mean))
}

/// Audience diversity of one IO agent.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiversityRecord {
    pub agent: AgentId,
    /// `1 - G` over per-organic-agent interaction counts.
    pub diversity: f64,
    pub interactor_count: usize,
    /// A single-interactor audience makes `G = 0` vacuously; flagged
    /// rather than redefined.
    pub degenerate: bool,
}

/// Diversity score `1 - G` over per-unique-organic-agent counts of
/// re-shares plus comments on the IO agent's posts (likes too when
/// `include_likes`).
pub fn audience_diversity(
    events: &[ActionEvent],
    view: &LogView,
    io_agent: AgentId,
    organic_members: &BTreeSet<AgentId>,
    include_likes: bool,
) -> Result<DiversityRecord, MetricsError> {
    let mut per_organic: BTreeMap<AgentId, u32> = BTreeMap::new();
    for event in events {
        if !organic_members.contains(&event.actor) {
            continue;
        }
        let counted = matches!(event.kind, ActionKind::ReShare | ActionKind::Comment)
            || (include_likes && event.kind == ActionKind::Like);
        if !counted {
            continue;
        }
        let Some(target) = event.target_post else { continue };
        if view.author_of(target) == Some(io_agent) {
            *per_organic.entry(event.actor).or_insert(0) += 1;
        }
    }
    if per_organic.is_empty() {
        return Err(MetricsError::NoOrganicInteractions);
    }
    let counts: Vec<f64> = per_organic.values().map(|&c| f64::from(c)).collect();
    let g: f64 = gini(&counts)?;
    Ok(DiversityRecord {
        agent: io_agent,
        diversity: 1.0 - g,
        interactor_count: counts.len(),
        degenerate: counts.len() == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gini_closed_forms() {
        // Perfect equality.
        assert_abs_diff_eq!(gini(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(1.0 - gini(&[2.0, 2.0]).unwrap(), 1.0, epsilon = 1e-15);
        // Double-loop formula by hand: sum |diff| = 24, 2 n^2 mean = 32.
        assert_abs_diff_eq!(gini(&[4.0, 0.0, 0.0, 0.0]).unwrap(), 0.75, epsilon = 1e-15);
        // [3,1]: sum |diff| = 4, 2 n^2 mean = 16.
        assert_abs_diff_eq!(gini(&[3.0, 1.0]).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn gini_rejects_degenerate_input() {
        assert_eq!(gini::<f64>(&[]), Err(MetricsError::DegenerateInput));
        assert_eq!(gini(&[0.0, 0.0]), Err(MetricsError::DegenerateInput));
        assert_eq!(gini(&[1.0, -1.0]), Err(MetricsError::NegativeInput));
    }

    fn engagement_log() -> Vec<ActionEvent> {
        let mut events = Vec::new();
        // 4 IO originals by agents 0 and 1.
        for i in 0..4u64 {
            events.push(
                ActionEvent::post(0, AgentId((i % 2) as u32), PostId(i), format!("io {i}"), None)
                    .unwrap(),
            );
        }
        // 6 organic re-shares of those posts.
        for i in 0..6u64 {
            events.push(
                ActionEvent::re_share(1, AgentId(10 + (i % 3) as u32), PostId(10 + i), PostId(i % 4), None)
                    .unwrap(),
            );
        }
        events
    }

    #[test]
    fn engagement_means_direct_division() {
        let events = engagement_log();
        let view = LogView::from_events(&events);
        let io: BTreeSet<AgentId> = (0..2).map(AgentId).collect();
        let organic: BTreeSet<AgentId> = (10..20).map(AgentId).collect();
        let counts: EngagementCounts<f64> =
            engagement_counts(&events, &view, &io, &organic).unwrap();
        assert_eq!(counts.io_original_posts, 4);
        assert_abs_diff_eq!(counts.re_shares_per_io_post, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(counts.comments_per_io_post, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn no_organic_engagement_is_zero_not_error() {
        let events = vec![ActionEvent::post(0, AgentId(0), PostId(0), "io", None).unwrap()];
        let view = LogView::from_events(&events);
        let io: BTreeSet<AgentId> = [AgentId(0)].into();
        let organic: BTreeSet<AgentId> = (10..20).map(AgentId).collect();
        let counts: EngagementCounts<f64> =
            engagement_counts(&events, &view, &io, &organic).unwrap();
        assert_eq!(counts.re_shares_per_io_post, 0.0);
        assert_eq!(counts.comments_per_io_post, 0.0);
    }

    #[test]
    fn zero_io_posts_is_an_error() {
        let view = LogView::from_events(&[]);
        let io: BTreeSet<AgentId> = [AgentId(0)].into();
        let organic: BTreeSet<AgentId> = (10..20).map(AgentId).collect();
        assert_eq!(
            engagement_counts::<f64>(&[], &view, &io, &organic),
            Err(MetricsError::NoPosts)
        );
    }

    #[test]
    fn diversity_examples() {
        // 3 organic agents, 2 interactions each: equal counts, diversity 1.
        let mut events = vec![ActionEvent::post(0, AgentId(0), PostId(0), "io", None).unwrap()];
        let mut next_post = 1u64;
        for organic in 10..13u32 {
            for _ in 0..2 {
                events.push(
                    ActionEvent::re_share(1, AgentId(organic), PostId(next_post), PostId(0), None)
                        .unwrap(),
                );
                next_post += 1;
            }
        }
        let view = LogView::from_events(&events);
        let organics: BTreeSet<AgentId> = (10..20).map(AgentId).collect();
        let record =
            audience_diversity(&events, &view, AgentId(0), &organics, false).unwrap();
        assert_abs_diff_eq!(record.diversity, 1.0, epsilon = 1e-15);
        assert!(!record.degenerate);

        // Counts [3,1]: G = 0.25, diversity 0.75.
        let mut events = vec![ActionEvent::post(0, AgentId(0), PostId(0), "io", None).unwrap()];
        for (actor, n) in [(10u32, 3u64), (11, 1)] {
            for i in 0..n {
                events.push(
                    ActionEvent::re_share(
                        1,
                        AgentId(actor),
                        PostId(100 + u64::from(actor) * 10 + i),
                        PostId(0),
                        None,
                    )
                    .unwrap(),
                );
            }
        }
        let view = LogView::from_events(&events);
        let record =
            audience_diversity(&events, &view, AgentId(0), &organics, false).unwrap();
        assert_abs_diff_eq!(record.diversity, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn single_interactor_is_degenerate_diversity_one() {
        let events = vec![
            ActionEvent::post(0, AgentId(0), PostId(0), "io", None).unwrap(),
            ActionEvent::re_share(1, AgentId(10), PostId(1), PostId(0), None).unwrap(),
            ActionEvent::re_share(2, AgentId(10), PostId(2), PostId(0), None).unwrap(),
        ];
        let view = LogView::from_events(&events);
        let organics: BTreeSet<AgentId> = (10..20).map(AgentId).collect();
        let record =
            audience_diversity(&events, &view, AgentId(0), &organics, false).unwrap();
        assert_abs_diff_eq!(record.diversity, 1.0, epsilon = 1e-15);
        assert!(record.degenerate);
    }

    #[test]
    fn no_organic_interactions_is_an_error() {
        let events = vec![ActionEvent::post(0, AgentId(0), PostId(0), "io", None).unwrap()];
        let view = LogView::from_events(&events);
        let organics: BTreeSet<AgentId> = (10..20).map(AgentId).collect();
        assert_eq!(
            audience_diversity(&events, &view, AgentId(0), &organics, false),
            Err(MetricsError::NoOrganicInteractions)
        );
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Scale invariance and the [0, 1 - 1/n] bound.
            #[test]
            fn gini_scale_invariant_and_bounded(
                counts in proptest::collection::vec(0.0f64..50.0, 1..10),
                k in 0.1f64..10.0,
            ) {
                prop_assume!(counts.iter().sum::<f64>() > 0.0);
                let g = gini(&counts).unwrap();
                let scaled: Vec<f64> = counts.iter().map(|&x| x * k).collect();
                let gs = gini(&scaled).unwrap();
                prop_assert!((g - gs).abs() < 1e-9);
                let n = counts.len() as f64;
                prop_assert!(g >= -1e-12);
                prop_assert!(g <= 1.0 - 1.0 / n + 1e-12);
            }
        }
    }
}
