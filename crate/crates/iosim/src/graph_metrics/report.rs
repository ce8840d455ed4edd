//! Full measurement report over one run log: every coordination and impact
//! metric is populated with a value or an absent-with-reason entry, never
//! aborting the report as a whole. Deterministic: same log bytes, same
//! report bytes.

use super::{
    adoption_curve, adoption_iterations, adoption_records, audience_diversity, avg_clustering,
    build_cascades, build_interaction_graph, cascade_stats, density, engagement_counts,
    hashtag_prevalence, intra_group_share, mann_whitney_u, reciprocity, AdoptionRecord,
    DiversityRecord, ExposureOptions, MetricsError,
};
use crate::domain::{ActionEvent, ActionKind, AgentGroup, AgentId, SimulationConfig};
use crate::logview::LogView;
use crate::text_metrics::{
    co_retweet_similarity, group_comment_sentiment, group_content_similarity, mean_pairs,
    original_posts, HashEmbedder, Lexicon, PairSimilarity, SentimentSummary,
};
use crate::Real;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Display;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// A metric value or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricValue<T> {
    Value(T),
    Absent(String),
}

impl<T> MetricValue<T> {
    pub fn from_result<E: Display>(result: Result<T, E>) -> Self {
        match result {
            Ok(v) => MetricValue::Value(v),
            Err(e) => MetricValue::Absent(e.to_string()),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            MetricValue::Value(v) => Some(v),
            MetricValue::Absent(_) => None,
        }
    }

    pub fn map_value<U>(&self, f: impl FnOnce(&T) -> U) -> MetricValue<U> {
        match self {
            MetricValue::Value(v) => MetricValue::Value(f(v)),
            MetricValue::Absent(r) => MetricValue::Absent(r.clone()),
        }
    }
}

/// Measurement switches; defaults follow the headline metric definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MetricsOptions {
    /// Count likes in interaction graphs, interactions, and engagement.
    pub include_likes: bool,
    /// Restrict H2 similarity to cross-author post pairs.
    pub cross_author_only: bool,
    /// Count only in-network feed deliveries as exposures.
    pub strict_exposures: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H1Report {
    pub density: MetricValue<Real>,
    pub clustering: MetricValue<Real>,
    pub reciprocity: MetricValue<Real>,
    pub intra_group_share_re_share: MetricValue<Real>,
    pub intra_group_share_comment: MetricValue<Real>,
    pub intra_group_share_follow: MetricValue<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intra_group_share_like: Option<MetricValue<Real>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Report {
    pub content_similarity: MetricValue<Real>,
    pub content_similarity_baseline: MetricValue<Real>,
    pub content_similarity_pairs: Vec<Real>,
    pub content_similarity_baseline_pairs: Vec<Real>,
    pub comment_sentiment: MetricValue<Real>,
    pub comment_sentiment_baseline: MetricValue<Real>,
    pub comment_sentiment_values: Vec<Real>,
    pub comment_sentiment_baseline_values: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H3Report {
    pub co_retweet: MetricValue<Real>,
    pub co_retweet_baseline: MetricValue<Real>,
    pub co_retweet_pairs: Vec<Real>,
    pub co_retweet_baseline_pairs: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H4Report {
    pub prevalence_original: MetricValue<Real>,
    pub prevalence_re_share: MetricValue<Real>,
    pub prevalence_comment: MetricValue<Real>,
    /// Cumulative unique adopters per iteration, one curve per group.
    pub adoption_curve_io: Vec<u32>,
    pub adoption_curve_organic_aligned: Vec<u32>,
    pub adoption_curve_organic_not_aligned: Vec<u32>,
    pub adoption_records: MetricValue<Vec<AdoptionRecord>>,
    /// Interaction-to-adoption lags of organic adopters with interactions.
    pub lag_values: Vec<i64>,
    /// Exposure counts before adoption, organic adopters only.
    pub exposure_values: Vec<u32>,
    pub mean_lag: MetricValue<Real>,
    pub mean_exposures_before_adoption: MetricValue<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H5Report {
    pub re_shares_per_io_post: MetricValue<Real>,
    pub comments_per_io_post: MetricValue<Real>,
    pub audience_diversity_mean: MetricValue<Real>,
    pub audience_diversity: Vec<DiversityRecord>,
    pub cascade_count: usize,
    pub cascade_size_mean: MetricValue<Real>,
    pub cascade_depth_mean: MetricValue<Real>,
    pub cascade_breadth_mean: MetricValue<Real>,
    pub cascade_sizes: Vec<u32>,
    pub cascade_depths: Vec<u32>,
    pub cascade_breadths: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwuOut {
    pub u: Real,
    pub p_two_sided: Real,
    pub n_io: usize,
    pub n_baseline: usize,
}

/// Per-run IO-vs-organic-baseline Mann-Whitney tests over pooled item
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub content_similarity: MetricValue<MwuOut>,
    pub comment_sentiment: MetricValue<MwuOut>,
    pub co_retweet: MetricValue<MwuOut>,
}

/// The complete measurement bundle for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub run_id: String,
    pub regime: String,
    pub seed: u64,
    pub iterations: u32,
    pub n_io: u32,
    pub n_aligned: u32,
    pub n_not_aligned: u32,
    pub events: usize,
    pub h1: H1Report,
    pub h2: H2Report,
    pub h3: H3Report,
    pub h4: H4Report,
    pub h5: H5Report,
    pub significance: SignificanceReport,
}

fn real_mean_u32(values: &[u32]) -> Result<Real, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    Ok(values.iter().map(|&v| Real::from(v)).sum::<Real>() / values.len() as Real)
}

fn real_mean_i64(values: &[i64]) -> Result<Real, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    Ok(values.iter().map(|&v| v as Real).sum::<Real>() / values.len() as Real)
}

fn mwu_between(io: &[Real], baseline: &[Real]) -> Result<MwuOut, MetricsError> {
    let result = mann_whitney_u(io, baseline)?;
    Ok(MwuOut {
        u: result.u,
        p_two_sided: result.p_two_sided,
        n_io: io.len(),
        n_baseline: baseline.len(),
    })
}

/// Compute the full report with default measurement options.
pub fn compute_report(events: &[ActionEvent], config: &SimulationConfig) -> MetricsReport {
    compute_report_with(events, config, MetricsOptions::default())
}

/// Compute the full report; every metric lands as a value or an
/// absent-with-reason entry.
pub fn compute_report_with(
    events: &[ActionEvent],
    config: &SimulationConfig,
    options: MetricsOptions,
) -> MetricsReport {
    let view = LogView::from_events(events);
    let io: BTreeSet<AgentId> = config.agents_in(AgentGroup::Io).into_iter().collect();
    let aligned: BTreeSet<AgentId> =
        config.agents_in(AgentGroup::OrganicAligned).into_iter().collect();
    let not_aligned: BTreeSet<AgentId> =
        config.agents_in(AgentGroup::OrganicNotAligned).into_iter().collect();
    let organic: BTreeSet<AgentId> = aligned.union(&not_aligned).copied().collect();

    // H1: cohesion of the IO intra-group graph over re-share + comment
    // interactions (likes only by option); follow reported as a share.
    let mut h1_kinds: BTreeSet<ActionKind> = [ActionKind::ReShare, ActionKind::Comment].into();
    if options.include_likes {
        h1_kinds.insert(ActionKind::Like);
    }
    let io_graph = build_interaction_graph(events, &view, &h1_kinds, Some(&io));
    let h1 = H1Report {
        density: MetricValue::from_result(density::<Real>(&io_graph)),
        clustering: MetricValue::from_result(avg_clustering::<Real>(&io_graph)),
        reciprocity: MetricValue::from_result(reciprocity::<Real>(&io_graph)),
        intra_group_share_re_share: MetricValue::from_result(intra_group_share::<Real>(
            events,
            &view,
            ActionKind::ReShare,
            &io,
        )),
        intra_group_share_comment: MetricValue::from_result(intra_group_share::<Real>(
            events,
            &view,
            ActionKind::Comment,
            &io,
        )),
        intra_group_share_follow: MetricValue::from_result(intra_group_share::<Real>(
            events,
            &view,
            ActionKind::Follow,
            &io,
        )),
        intra_group_share_like: options.include_likes.then(|| {
            MetricValue::from_result(intra_group_share::<Real>(
                events,
                &view,
                ActionKind::Like,
                &io,
            ))
        }),
    };

    // H2: narrative and affective convergence, with organic baselines.
    let embedder = HashEmbedder::default();
    let lexicon = Lexicon::default();
    let posts = original_posts(events);
    let similarity_io: Result<PairSimilarity<Real>, _> =
        group_content_similarity(&posts, &io, &embedder, options.cross_author_only);
    let similarity_organic: Result<PairSimilarity<Real>, _> =
        group_content_similarity(&posts, &organic, &embedder, options.cross_author_only);
    let sentiment_io: Result<SentimentSummary<Real>, _> =
        group_comment_sentiment(events, &view, &io, &lexicon);
    let sentiment_organic: Result<SentimentSummary<Real>, _> =
        group_comment_sentiment(events, &view, &organic, &lexicon);
    let h2 = H2Report {
        content_similarity: MetricValue::from_result(similarity_io.as_ref().map(|s| s.mean).map_err(|e| *e)),
        content_similarity_baseline: MetricValue::from_result(
            similarity_organic.as_ref().map(|s| s.mean).map_err(|e| *e),
        ),
        content_similarity_pairs: similarity_io.as_ref().map(|s| s.pairs.clone()).unwrap_or_default(),
        content_similarity_baseline_pairs: similarity_organic
            .as_ref()
            .map(|s| s.pairs.clone())
            .unwrap_or_default(),
        comment_sentiment: MetricValue::from_result(
            sentiment_io.as_ref().map(|s| s.mean).map_err(|e| *e),
        ),
        comment_sentiment_baseline: MetricValue::from_result(
            sentiment_organic.as_ref().map(|s| s.mean).map_err(|e| *e),
        ),
        comment_sentiment_values: sentiment_io.as_ref().map(|s| s.values.clone()).unwrap_or_default(),
        comment_sentiment_baseline_values: sentiment_organic
            .as_ref()
            .map(|s| s.values.clone())
            .unwrap_or_default(),
    };

    // H3: co-retweet similarity with organic baseline.
    let co_io: Result<PairSimilarity<Real>, _> = co_retweet_similarity(events, &view, &io);
    let co_organic: Result<PairSimilarity<Real>, _> =
        co_retweet_similarity(events, &view, &organic);
    let h3 = H3Report {
        co_retweet: MetricValue::from_result(co_io.as_ref().map(|s| s.mean).map_err(|e| *e)),
        co_retweet_baseline: MetricValue::from_result(
            co_organic.as_ref().map(|s| s.mean).map_err(|e| *e),
        ),
        co_retweet_pairs: co_io.as_ref().map(|s| s.pairs.clone()).unwrap_or_default(),
        co_retweet_baseline_pairs: co_organic.as_ref().map(|s| s.pairs.clone()).unwrap_or_default(),
    };

    // H4: prevalence, adoption curves, lags, exposures.
    let hashtag = &config.campaign.hashtag;
    let prevalence = hashtag_prevalence::<Real>(&view, hashtag);
    let adoptions = adoption_iterations(events, &view, hashtag);
    let records = adoption_records(
        events,
        config,
        ExposureOptions {
            in_network_only: options.strict_exposures,
            include_likes: options.include_likes,
        },
    );
    let lag_values: Vec<i64> = records
        .as_ref()
        .map(|rs| rs.iter().filter_map(|r| r.delta_t).collect())
        .unwrap_or_default();
    let exposure_values: Vec<u32> = records
        .as_ref()
        .map(|rs| {
            rs.iter()
                .filter(|r| r.t_first_adoption.is_some())
                .map(|r| r.exposures_before_adoption)
                .collect()
        })
        .unwrap_or_default();
    let absent_type = |share: Option<Real>| match share {
        Some(v) => MetricValue::Value(v),
        None => MetricValue::Absent(MetricsError::NoPosts.to_string()),
    };
    let h4 = H4Report {
        prevalence_original: absent_type(prevalence.original),
        prevalence_re_share: absent_type(prevalence.re_share),
        prevalence_comment: absent_type(prevalence.comment),
        adoption_curve_io: adoption_curve(&adoptions, &io, config.iterations),
        adoption_curve_organic_aligned: adoption_curve(&adoptions, &aligned, config.iterations),
        adoption_curve_organic_not_aligned: adoption_curve(
            &adoptions,
            &not_aligned,
            config.iterations,
        ),
        adoption_records: MetricValue::from_result(records),
        mean_lag: MetricValue::from_result(real_mean_i64(&lag_values)),
        mean_exposures_before_adoption: MetricValue::from_result(real_mean_u32(&exposure_values)),
        lag_values,
        exposure_values,
    };

    // H5: engagement, audience diversity, cascades rooted at IO originals.
    let engagement = engagement_counts::<Real>(events, &view, &io, &organic);
    let mut diversity_records: Vec<DiversityRecord> = Vec::new();
    for &agent in &io {
        if let Ok(record) =
            audience_diversity(events, &view, agent, &organic, options.include_likes)
        {
            diversity_records.push(record);
        }
    }
    let diversity_mean = if diversity_records.is_empty() {
        Err(MetricsError::NoOrganicInteractions)
    } else {
        Ok(diversity_records.iter().map(|r| r.diversity).sum::<Real>()
            / diversity_records.len() as Real)
    };
    let forest = build_cascades(&view, &io);
    let stats: Vec<_> = forest.cascades.iter().map(cascade_stats).collect();
    let cascade_sizes: Vec<u32> = stats.iter().map(|s| s.size as u32).collect();
    let cascade_depths: Vec<u32> = stats.iter().map(|s| s.depth).collect();
    let cascade_breadths: Vec<u32> = stats.iter().map(|s| s.breadth as u32).collect();
    let h5 = H5Report {
        re_shares_per_io_post: MetricValue::from_result(
            engagement.as_ref().map(|e| e.re_shares_per_io_post).map_err(Clone::clone),
        ),
        comments_per_io_post: MetricValue::from_result(
            engagement.as_ref().map(|e| e.comments_per_io_post).map_err(Clone::clone),
        ),
        audience_diversity_mean: MetricValue::from_result(diversity_mean),
        audience_diversity: diversity_records,
        cascade_count: forest.cascades.len(),
        cascade_size_mean: MetricValue::from_result(real_mean_u32(&cascade_sizes)),
        cascade_depth_mean: MetricValue::from_result(real_mean_u32(&cascade_depths)),
        cascade_breadth_mean: MetricValue::from_result(real_mean_u32(&cascade_breadths)),
        cascade_sizes,
        cascade_depths,
        cascade_breadths,
    };

    let significance = SignificanceReport {
        content_similarity: MetricValue::from_result(mwu_between(
            &h2.content_similarity_pairs,
            &h2.content_similarity_baseline_pairs,
        )),
        comment_sentiment: MetricValue::from_result(mwu_between(
            &h2.comment_sentiment_values,
            &h2.comment_sentiment_baseline_values,
        )),
        co_retweet: MetricValue::from_result(mwu_between(
            &h3.co_retweet_pairs,
            &h3.co_retweet_baseline_pairs,
        )),
    };

    MetricsReport {
        schema_version: REPORT_SCHEMA_VERSION,
        run_id: String::new(),
        regime: config.regime.name().to_string(),
        seed: config.seed,
        iterations: config.iterations,
        n_io: config.n_io,
        n_aligned: config.n_aligned,
        n_not_aligned: config.n_not_aligned,
        events: events.len(),
        h1,
        h2,
        h3,
        h4,
        h5,
        significance,
    }
}

fn csv_value(value: &MetricValue<Real>) -> String {
    match value {
        MetricValue::Value(v) => format!("{v}"),
        MetricValue::Absent(_) => String::new(),
    }
}

/// Flat CSV: one row per scalar metric, columns
/// `metric,group,regime,run,value`; absent metrics leave the value empty.
pub fn report_csv(report: &MetricsReport) -> String {
    let mut rows: Vec<(String, &str, String)> = vec![
        ("density".into(), "io", csv_value(&report.h1.density)),
        ("clustering".into(), "io", csv_value(&report.h1.clustering)),
        ("reciprocity".into(), "io", csv_value(&report.h1.reciprocity)),
        (
            "intra_group_share_re_share".into(),
            "io",
            csv_value(&report.h1.intra_group_share_re_share),
        ),
        (
            "intra_group_share_comment".into(),
            "io",
            csv_value(&report.h1.intra_group_share_comment),
        ),
        (
            "intra_group_share_follow".into(),
            "io",
            csv_value(&report.h1.intra_group_share_follow),
        ),
        ("content_similarity".into(), "io", csv_value(&report.h2.content_similarity)),
        (
            "content_similarity".into(),
            "organic",
            csv_value(&report.h2.content_similarity_baseline),
        ),
        ("comment_sentiment".into(), "io", csv_value(&report.h2.comment_sentiment)),
        (
            "comment_sentiment".into(),
            "organic",
            csv_value(&report.h2.comment_sentiment_baseline),
        ),
        ("co_retweet".into(), "io", csv_value(&report.h3.co_retweet)),
        ("co_retweet".into(), "organic", csv_value(&report.h3.co_retweet_baseline)),
        ("prevalence_original".into(), "all", csv_value(&report.h4.prevalence_original)),
        ("prevalence_re_share".into(), "all", csv_value(&report.h4.prevalence_re_share)),
        ("prevalence_comment".into(), "all", csv_value(&report.h4.prevalence_comment)),
        ("mean_lag".into(), "organic", csv_value(&report.h4.mean_lag)),
        (
            "mean_exposures_before_adoption".into(),
            "organic",
            csv_value(&report.h4.mean_exposures_before_adoption),
        ),
        (
            "adoption_final".into(),
            "organic_aligned",
            report.h4.adoption_curve_organic_aligned.last().map(u32::to_string).unwrap_or_default(),
        ),
        (
            "adoption_final".into(),
            "organic_not_aligned",
            report
                .h4
                .adoption_curve_organic_not_aligned
                .last()
                .map(u32::to_string)
                .unwrap_or_default(),
        ),
        ("re_shares_per_io_post".into(), "io", csv_value(&report.h5.re_shares_per_io_post)),
        ("comments_per_io_post".into(), "io", csv_value(&report.h5.comments_per_io_post)),
        (
            "audience_diversity".into(),
            "io",
            csv_value(&report.h5.audience_diversity_mean),
        ),
        ("cascade_size".into(), "io", csv_value(&report.h5.cascade_size_mean)),
        ("cascade_depth".into(), "io", csv_value(&report.h5.cascade_depth_mean)),
        ("cascade_breadth".into(), "io", csv_value(&report.h5.cascade_breadth_mean)),
    ];
    if let Some(like) = &report.h1.intra_group_share_like {
        rows.push(("intra_group_share_like".into(), "io", csv_value(like)));
    }
    let mut out = String::from("metric,group,regime,run,value\n");
    for (metric, group, value) in rows {
        out.push_str(&format!("{metric},{group},{},{},{value}\n", report.regime, report.run_id));
    }
    out
}
