//! Text-derived coordination measures: embedding cosine for narrative
//! convergence, lexicon sentiment for affective alignment, and TF-IDF
//! co-retweet similarity for amplification synchrony.

mod embed;
mod sentiment;
mod tfidf;

pub use embed::{
    cosine, mean_pairs, normalize, HashEmbedder, TextEmbedder, VectorError, DEFAULT_EMBED_DIM,
};
pub use sentiment::{sentiment, Lexicon, LexiconError};
pub use tfidf::{cosine_sparse, tfidf, SparseVector};

use crate::domain::{ActionEvent, ActionKind, AgentId};
use crate::logview::LogView;
use crate::numeric::Scalar;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
pub enum TextMetricsError {
    #[error("fewer than 2 original posts by group members")]
    NotEnoughPosts,
    #[error("group needs at least 2 members")]
    NotEnoughMembers,
    #[error("no intra-group comments")]
    NoComments,
}

/// Mean and raw values over unordered pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSimilarity<F: Scalar> {
    pub mean: F,
    pub pairs: Vec<F>,
}

/// Mean and raw per-item sentiment values.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentSummary<F: Scalar> {
    pub mean: F,
    pub values: Vec<F>,
}

/// Pairwise embedding cosine over original posts authored by group members.
///
/// All unordered post pairs enter by default, including same-author pairs
/// across time; `cross_author_only` restricts to pairs with distinct
/// authors.
pub fn group_content_similarity<F: Scalar>(
    posts: &[(AgentId, String)],
    members: &BTreeSet<AgentId>,
    embedder: &dyn TextEmbedder<F>,
    cross_author_only: bool,
) -> Result<PairSimilarity<F>, TextMetricsError> {
    let selected: Vec<(AgentId, Vec<F>)> = posts
        .iter()
        .filter(|(author, _)| members.contains(author))
        .map(|(author, text)| (*author, embedder.embed(text)))
        .collect();
    if selected.len() < 2 {
        return Err(TextMetricsError::NotEnoughPosts);
    }
    let mut pairs = Vec::new();
    for i in 0..selected.len() {
        for j in (i + 1)..selected.len() {
            if cross_author_only && selected[i].0 == selected[j].0 {
                continue;
            }
            let sim = cosine(&selected[i].1, &selected[j].1).expect("equal embedder dim");
            pairs.push(sim);
        }
    }
    if pairs.is_empty() {
        return Err(TextMetricsError::NotEnoughPosts);
    }
    let mean = mean_pairs(&pairs).expect("non-empty pairs");
    Ok(PairSimilarity { mean, pairs })
}

/// Original posts (author, text) extracted from a log.
pub fn original_posts(events: &[ActionEvent]) -> Vec<(AgentId, String)> {
    events
        .iter()
        .filter(|e| e.kind == ActionKind::Post)
        .map(|e| (e.actor, e.text.clone().unwrap_or_default()))
        .collect()
}

/// Co-retweet similarity: one document per group member holding the
/// multiset of original posts it re-shared (re-shares of re-shares resolve
/// to the root original), TF-IDF weighted, compared pairwise by cosine.
/// Members with no re-shares contribute zero-similarity pairs.
pub fn co_retweet_similarity<F: Scalar>(
    events: &[ActionEvent],
    view: &LogView,
    members: &BTreeSet<AgentId>,
) -> Result<PairSimilarity<F>, TextMetricsError> {
    if members.len() < 2 {
        return Err(TextMetricsError::NotEnoughMembers);
    }
    let ordered: Vec<AgentId> = members.iter().copied().collect();
    let mut docs: BTreeMap<AgentId, BTreeMap<String, u32>> =
        ordered.iter().map(|&m| (m, BTreeMap::new())).collect();
    for event in events.iter().filter(|e| e.kind == ActionKind::ReShare) {
        if !members.contains(&event.actor) {
            continue;
        }
        let Some(target) = event.target_post else { continue };
        let Some(root) = view.root_original(target) else { continue };
        *docs.get_mut(&event.actor).expect("member doc").entry(root.to_string()).or_insert(0) +=
            1;
    }
    let corpus: Vec<BTreeMap<String, u32>> =
        ordered.iter().map(|m| docs[m].clone()).collect();
    let vectors: Vec<SparseVector<F>> = tfidf(&corpus);
    let mut pairs = Vec::new();
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            pairs.push(cosine_sparse(&vectors[i], &vectors[j]));
        }
    }
    let mean = mean_pairs(&pairs).ok_or(TextMetricsError::NotEnoughMembers)?;
    Ok(PairSimilarity { mean, pairs })
}

/// Mean lexicon sentiment over intra-group comments (commenter and
/// commented-post author both members).
pub fn group_comment_sentiment<F: Scalar>(
    events: &[ActionEvent],
    view: &LogView,
    members: &BTreeSet<AgentId>,
    lexicon: &Lexicon,
) -> Result<SentimentSummary<F>, TextMetricsError> {
    let mut values = Vec::new();
    for event in events.iter().filter(|e| e.kind == ActionKind::Comment) {
        if !members.contains(&event.actor) {
            continue;
        }
        let Some(author) = event.target_post.and_then(|p| view.author_of(p)) else {
            continue;
        };
        if !members.contains(&author) {
            continue;
        }
        values.push(lexicon.score(event.text.as_deref().unwrap_or_default()));
    }
    let mean = mean_pairs(&values).ok_or(TextMetricsError::NoComments)?;
    Ok(SentimentSummary { mean, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PostId;
    use approx::assert_abs_diff_eq;

    fn members(ids: &[u32]) -> BTreeSet<AgentId> {
        ids.iter().map(|&i| AgentId(i)).collect()
    }

    #[test]
    fn identical_posts_have_mean_similarity_one() {
        let posts: Vec<(AgentId, String)> =
            (0..3).map(|i| (AgentId(i), "same message #tag".to_string())).collect();
        let result: PairSimilarity<f64> = group_content_similarity(
            &posts,
            &members(&[0, 1, 2]),
            &HashEmbedder::default(),
            false,
        )
        .unwrap();
        assert_abs_diff_eq!(result.mean, 1.0, epsilon = 1e-9);
        assert_eq!(result.pairs.len(), 3);
    }

    #[test]
    fn mean_over_pairs_is_plain_average() {
        // Hand average over C(3,2) pairs with values {1.0, 0.5, 0.5}.
        let mean: f64 = mean_pairs(&[1.0, 0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(mean, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn fewer_than_two_posts_is_an_error() {
        let posts = vec![(AgentId(0), "only one".to_string())];
        let err = group_content_similarity::<f64>(
            &posts,
            &members(&[0]),
            &HashEmbedder::default(),
            false,
        )
        .unwrap_err();
        assert_eq!(err, TextMetricsError::NotEnoughPosts);
    }

    #[test]
    fn cross_author_flag_drops_same_author_pairs() {
        let posts = vec![
            (AgentId(0), "alpha beta".to_string()),
            (AgentId(0), "alpha beta".to_string()),
            (AgentId(1), "gamma delta".to_string()),
        ];
        let all: PairSimilarity<f64> =
            group_content_similarity(&posts, &members(&[0, 1]), &HashEmbedder::default(), false)
                .unwrap();
        let cross: PairSimilarity<f64> =
            group_content_similarity(&posts, &members(&[0, 1]), &HashEmbedder::default(), true)
                .unwrap();
        assert_eq!(all.pairs.len(), 3);
        assert_eq!(cross.pairs.len(), 2);
    }

    fn reshare_log() -> Vec<ActionEvent> {
        // Originals p0, p1 by agent 9; members 0.. re-share them.
        let mut events = vec![
            ActionEvent::post(0, AgentId(9), PostId(0), "root a", None).unwrap(),
            ActionEvent::post(0, AgentId(9), PostId(1), "root b", None).unwrap(),
        ];
        events.push(ActionEvent::re_share(1, AgentId(0), PostId(2), PostId(0), None).unwrap());
        events.push(ActionEvent::re_share(1, AgentId(0), PostId(3), PostId(1), None).unwrap());
        events.push(ActionEvent::re_share(2, AgentId(1), PostId(4), PostId(0), None).unwrap());
        events.push(ActionEvent::re_share(2, AgentId(1), PostId(5), PostId(1), None).unwrap());
        events
    }

    #[test]
    fn same_re_share_sets_have_similarity_one() {
        let events = reshare_log();
        let view = LogView::from_events(&events);
        let result: PairSimilarity<f64> =
            co_retweet_similarity(&events, &view, &members(&[0, 1])).unwrap();
        assert_abs_diff_eq!(result.mean, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_re_share_sets_have_similarity_zero() {
        let mut events = vec![
            ActionEvent::post(0, AgentId(9), PostId(0), "root a", None).unwrap(),
            ActionEvent::post(0, AgentId(9), PostId(1), "root b", None).unwrap(),
        ];
        events.push(ActionEvent::re_share(1, AgentId(0), PostId(2), PostId(0), None).unwrap());
        events.push(ActionEvent::re_share(1, AgentId(1), PostId(3), PostId(1), None).unwrap());
        let view = LogView::from_events(&events);
        let result: PairSimilarity<f64> =
            co_retweet_similarity(&events, &view, &members(&[0, 1])).unwrap();
        assert_abs_diff_eq!(result.mean, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn re_shares_of_re_shares_resolve_to_the_root() {
        let mut events = vec![
            ActionEvent::post(0, AgentId(9), PostId(0), "root", None).unwrap(),
        ];
        events.push(ActionEvent::re_share(1, AgentId(0), PostId(1), PostId(0), None).unwrap());
        // Agent 1 re-shares agent 0's re-share; the document term must be p0.
        events.push(ActionEvent::re_share(2, AgentId(1), PostId(2), PostId(1), None).unwrap());
        let view = LogView::from_events(&events);
        let result: PairSimilarity<f64> =
            co_retweet_similarity(&events, &view, &members(&[0, 1])).unwrap();
        assert_abs_diff_eq!(result.mean, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn members_without_re_shares_contribute_zero_pairs() {
        let events = reshare_log();
        let view = LogView::from_events(&events);
        let result: PairSimilarity<f64> =
            co_retweet_similarity(&events, &view, &members(&[0, 1, 5])).unwrap();
        assert_eq!(result.pairs.len(), 3);
        let zeros = result.pairs.iter().filter(|&&p| p == 0.0).count();
        assert_eq!(zeros, 2);
    }

    #[test]
    fn comment_sentiment_examples() {
        let lexicon = Lexicon::default();
        let mut events = vec![
            ActionEvent::post(0, AgentId(0), PostId(0), "root", None).unwrap(),
        ];
        events.push(
            ActionEvent::comment(1, AgentId(1), PostId(1), PostId(0), "entirely procedural note", None)
                .unwrap(),
        );
        let view = LogView::from_events(&events);
        let single: SentimentSummary<f64> =
            group_comment_sentiment(&events, &view, &members(&[0, 1]), &lexicon).unwrap();
        assert_abs_diff_eq!(single.mean, 0.5, epsilon = 1e-12);

        events.push(
            ActionEvent::comment(2, AgentId(1), PostId(2), PostId(0), "great support win", None)
                .unwrap(),
        );
        let view = LogView::from_events(&events);
        let both: SentimentSummary<f64> =
            group_comment_sentiment(&events, &view, &members(&[0, 1]), &lexicon).unwrap();
        // {0.5, 1.0} -> 0.75
        assert_abs_diff_eq!(both.mean, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn out_of_group_comments_do_not_qualify() {
        let lexicon = Lexicon::default();
        let events = vec![
            ActionEvent::post(0, AgentId(0), PostId(0), "root", None).unwrap(),
            ActionEvent::comment(1, AgentId(5), PostId(1), PostId(0), "nice", None).unwrap(),
        ];
        let view = LogView::from_events(&events);
        let err = group_comment_sentiment::<f64>(&events, &view, &members(&[0, 1]), &lexicon)
            .unwrap_err();
        assert_eq!(err, TextMetricsError::NoComments);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Relabeling agents does not change the co-retweet mean.
            #[test]
            fn co_retweet_invariant_under_relabeling(swap in any::<bool>()) {
                let (a, b) = if swap { (1u32, 0u32) } else { (0u32, 1u32) };
                let mut events = vec![
                    ActionEvent::post(0, AgentId(9), PostId(0), "r1", None).unwrap(),
                    ActionEvent::post(0, AgentId(9), PostId(1), "r2", None).unwrap(),
                ];
                events.push(ActionEvent::re_share(1, AgentId(a), PostId(2), PostId(0), None).unwrap());
                events.push(ActionEvent::re_share(1, AgentId(b), PostId(3), PostId(0), None).unwrap());
                events.push(ActionEvent::re_share(2, AgentId(a), PostId(4), PostId(1), None).unwrap());
                let view = LogView::from_events(&events);
                let result: PairSimilarity<f64> =
                    co_retweet_similarity(&events, &view, &members(&[0, 1])).unwrap();
                // Same structure regardless of which label re-shared more.
                prop_assert!((result.mean - result.pairs[0]).abs() < 1e-12);
                prop_assert!(result.mean > 0.0);
            }
        }
    }
}
