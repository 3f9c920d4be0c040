//! Unsupervised induction of a morphological forest over a vocabulary.
//!
//! Each word receives one edge to its single-step derivational parent (roots
//! carry self-edges). Training alternates between contrastive estimation of a
//! log-linear edge model and an integer program that enforces global affix-
//! and family-sparsity, pruning the affix inventory between rounds. The
//! resulting forest decodes into segmentations, morphological families, and
//! roots, with evaluators for all three tasks and a synthetic-language
//! generator for ground-truth fixtures.

pub mod affixes;
pub mod candidates;
pub mod config;
pub mod corpus;
pub mod error;
pub mod features;
pub mod ilp;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod synthbench;
pub(crate) mod util;

pub use config::{IlpMode, RunConfig};
pub use error::{Error, Result};
