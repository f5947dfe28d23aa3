//! Topic modeling of dated statements.
//!
//! Topics come from collapsed Gibbs LDA; their change over time is a
//! least-squares regression of document-topic proportions on a basis of the
//! day index. Candidate models are compared by semantic coherence and
//! exclusivity across a sweep of topic counts and restarts.

mod lda;
mod quality;
mod sweep;
mod trend;

pub use lda::{fit_lda, fit_lda_observed, GibbsSampler, LdaConfig, TopicModel};
pub use quality::{exclusivity, semantic_coherence, top_word_indices, top_words, QualityScore};
pub use sweep::{run_seed, score_entries, select_entry, standardize, sweep, SweepConfig, SweepEntry, SweepResult};
pub use trend::{
    cluster_prevalence, prevalence_trend, trends_to_csv, Basis, ClusterMap, ClusterMapSpec, ClusterSource, TrendConfig,
    TrendSeries, SLOPE_TOLERANCE,
};
