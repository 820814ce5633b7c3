//! Parameter estimation and evaluation for log-linear rankers over
//! enumerated candidate parse sets.
//!
//! The input is a treebank-style corpus: each sentence carries the feature
//! vectors of its candidate parses and the index of the hand-annotated
//! correct one. On top of that this crate provides
//!
//! - the conditional log-linear model and its pseudo-likelihood objective
//!   ([`loglinear`]),
//! - feature diagnostics that detect degenerate geometry before training
//!   ([`diagnostics`]),
//! - a conjugate-gradient trainer for the penalized pseudo-likelihood
//!   ([`cg`]),
//! - a simulated-annealing trainer that directly maximizes the number of
//!   correctly ranked sentences ([`anneal`]),
//! - held-out scoring and k-fold cross-validation ([`eval`]),
//! - small enumerable universes with exact likelihoods, KL divergences,
//!   and synthetic corpus generation for end-to-end checks ([`synth`]),
//! - a command-line driver ([`cli`]).
//!
//! Every seeded computation is deterministic: the same inputs and seeds
//! produce bit-identical outputs, regardless of thread count.
//!
//! The `examples/` directory contains one runnable walkthrough per
//! capability; start with `corpus_stats` and `train_pseudo_likelihood`.
//!
//! ```
//! use plrank::{Corpus, FeatureCatalog, FeatureVector, Sentence};
//!
//! // Two sentences; feature "uses_adjunct" favors the correct parses.
//! let catalog = FeatureCatalog::new(["uses_adjunct"])?;
//! let sentences = vec![
//!     Sentence::new(
//!         "s1",
//!         vec![FeatureVector::from_dense(&[1.0]), FeatureVector::from_dense(&[0.0])],
//!         0,
//!     )?,
//!     Sentence::new(
//!         "s2",
//!         vec![FeatureVector::from_dense(&[0.0]), FeatureVector::from_dense(&[2.0])],
//!         1,
//!     )?,
//! ];
//! let corpus = Corpus::new(catalog, sentences)?;
//!
//! let (theta, _trace) = plrank::cg::train_pl(&corpus, &plrank::cg::CgConfig::default(), 7.0)?;
//! assert!(theta.get(0) > 0.0);
//!
//! let scores = plrank::eval::evaluate(&theta, &corpus)?;
//! assert_eq!(scores.correct_count, 2.0);
//! # Ok::<(), plrank::Error>(())
//! ```

pub mod anneal;
pub mod cg;
pub mod cli;
pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod eval;
pub mod loglinear;
mod parallel;
pub mod synth;

pub use corpus::{Corpus, CorpusStats, FeatureCatalog, FeatureVector, Sentence};
pub use error::{Error, Result};
pub use loglinear::ParameterVector;
