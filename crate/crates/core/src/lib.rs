//! Triangulated measurement of actors that cannot be observed directly.
//!
//! The crate bundles the pieces of a measurement workflow in which the
//! *performance pattern* of interpretable models, fitted to several
//! heterogeneous data traces, is compared against the patterns that rival
//! theories predict:
//!
//! - [`corpus`]: ingestion, tokenization, stopword policies, vocabularies and
//!   term-weight matrices.
//! - [`forest`]: a stratified, balanced-subsample random forest with
//!   out-of-bag bookkeeping, confusion diagnostics, Gini importance and
//!   proximities.
//! - [`model_selection`]: stratified k-fold cross-validation and grid search.
//! - [`embedding`]: classical multidimensional scaling of forest proximities.
//! - [`topics`]: collapsed Gibbs LDA, coherence/exclusivity scoring, model
//!   sweeps and prevalence trends over time.
//! - [`events`]: conflict-dyad proportion series and breakpoint shifts.
//! - [`triangulate`]: declarative hypothesis specs and the verdict engine.
//! - [`scenario`]: synthetic generators with planted ground truth.
//!
//! Every stochastic routine takes an explicit seed. Parallel work (enabled by
//! the default `parallel` feature) derives one random stream per work item,
//! so results never depend on the number of threads.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod events;
pub mod forest;
mod linalg;
pub mod model_selection;
mod par;
pub mod rng;
pub mod scenario;
pub mod topics;
pub mod triangulate;

pub use error::{Error, ErrorKind, Result};
