//! Optimal-transport repair of attributed graphs for fair edge prediction.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: the attributed graph model, SBM generation, KNN similarity
//!   graphs, Laplacians, assortativity and TSV/CSV I/O.
//! - [`ot`]: exact EMD (network simplex), Laplacian-regularized OT solved by
//!   conditional gradient, and the free-support Wasserstein barycenter.
//! - [`repair`]: binary geodesic-midpoint repair, multi-class barycenter
//!   repair and the random-edge baseline.
//! - [`embedding`]: weighted random walks, skip-gram with negative sampling
//!   and a spectral embedder.
//! - [`predict`]: edge splits, logistic regression, AUC and the link
//!   prediction pipeline.
//! - [`metrics`]: disparate impact, balanced error rate, representation
//!   bias, consistency and the empirical checks of the DI/BER bounds.
//! - [`experiment`]: configuration-driven sweeps over seeds and `λ` that
//!   write per-run reports and aggregate tables.
//!
//! Data-parallel loops (walk generation, per-group transport solves, sweep
//! runs, cross-validation folds) go through [`parallel::Execution`]. With the
//! default `parallel` feature they run on rayon; without it every loop runs
//! sequentially and produces identical results.

pub mod embedding;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod ot;
pub mod parallel;
pub mod predict;
pub mod repair;

pub use error::{Error, ErrorKind, Result};
pub use graph::{AttributedGraph, GroupPartition, LabelMode, SbmSpec};
pub use parallel::Execution;
