//! Training and evaluation runs, engagement analytics and term counts.

mod analytics;
mod report;

pub use analytics::{
    engagement_stats, engagement_tsv, group_jaccard, group_location_engagement, hashtag_counts,
    label_location_engagement, location_bucket, term_frequencies, EngagementRow, HashtagCounts,
    LocationCounts, LOCATIONS,
};
pub use report::{run_experiment, EvalReport, ExperimentConfig, RunResult};
