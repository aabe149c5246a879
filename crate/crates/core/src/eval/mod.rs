//! Leave-one-out ranking metrics and evaluation protocols.

mod metrics;
mod protocols;
mod report;

pub use metrics::{hit_ratio, ndcg, rank_test_item, RankOutcome, NUM_CANDIDATES};
pub use protocols::{evaluate, evaluate_cold_start, evaluate_degraded, rank_users, DEFAULT_KS};
pub use report::{parse_ks, write_csv, write_json, MetricRow, MetricsReport};
