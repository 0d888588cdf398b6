//! Diversity-constrained token subset selection.
//!
//! Given a set of token embeddings and a per-token saliency weight, pick a
//! subset of at most `M` tokens that maximizes total saliency while keeping
//! every selected pair's cosine similarity at or below a threshold `tau`.
//!
//! The crate provides:
//!
//! * [`greedy::greedy_prune`], the pivot-and-eliminate greedy selector;
//! * [`exact::exact_solve`], a branch-and-bound oracle for small instances,
//!   together with Lagrangian evaluators;
//! * behavioral baselines in [`baselines`] (top-k, farthest-point, random, grid);
//! * the prefill compute model in [`cost`];
//! * a planted-cluster instance generator in [`synth`];
//! * bit-exact file formats in [`io`], grid visualizations in [`report`] and
//!   experiment drivers in [`harness`].

pub mod baselines;
pub mod cost;
pub mod error;
pub mod exact;
pub mod greedy;
pub mod harness;
pub mod io;
pub mod report;
pub mod saliency;
pub mod similarity;
pub mod synth;
pub mod tokens;

pub use error::{Error, Result};
pub use tokens::{SaliencyVector, Selection, SimilarityMatrix, TokenMatrix};
