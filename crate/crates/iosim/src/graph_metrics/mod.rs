//! Graph- and diffusion-based measurement: network cohesion, intra-group
//! shares, hashtag adoption analytics, engagement, audience diversity,
//! cascade reconstruction, and the Mann-Whitney U test, all computed from a
//! recorded event log.

mod adoption;
mod cascade;
mod engagement;
mod graph;
mod mwu;
mod report;

pub use adoption::{
    adoption_curve, adoption_iterations, adoption_records, hashtag_prevalence, replay_feeds,
    AdoptionRecord, ExposureOptions, Prevalence,
};
pub use cascade::{build_cascades, cascade_stats, Cascade, CascadeForest, CascadeStats};
pub use engagement::{audience_diversity, engagement_counts, gini, DiversityRecord, EngagementCounts};
pub use graph::{
    avg_clustering, build_interaction_graph, density, intra_group_share, reciprocity,
    InteractionGraph,
};
pub use mwu::{mann_whitney_u, mann_whitney_u_exact, mann_whitney_u_normal, MwuResult};
pub use report::{
    compute_report, compute_report_with, report_csv, MetricValue, MetricsOptions, MetricsReport,
    REPORT_SCHEMA_VERSION,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("graph needs at least {needed} nodes, has {has}")]
    TooFewNodes { needed: usize, has: usize },
    #[error("graph has no edges")]
    NoEdges,
    #[error("no qualifying events")]
    NoEvents,
    #[error("no posts of this type")]
    NoPosts,
    #[error("empty or all-zero input")]
    DegenerateInput,
    #[error("negative count in input")]
    NegativeInput,
    #[error("empty sample")]
    EmptySample,
    #[error("no organic interactions received")]
    NoOrganicInteractions,
    #[error("log is not engine-canonical: {0}")]
    NonCanonicalLog(String),
}
