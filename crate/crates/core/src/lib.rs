//! Diagnostics for overtuning in hyperparameter optimization.
//!
//! A run is a [`ScoreTrajectory`]: validation and test errors of the
//! configurations an optimizer evaluated, in order. From it we extract the
//! incumbent (best-validation) series and measure how much the incumbent's
//! test error exceeds that of earlier incumbents (overtuning), its own
//! validation error (meta-overfitting), and every evaluated configuration
//! (test regret).
//!
//! Modules:
//! - [`metrics`]: incumbent extraction and per-time-point metrics
//! - [`ingest`]: CSV / JSON-lines corpora with declared metric orientation
//! - [`analysis`]: ECDFs, stratified summaries, budget sweeps, paired deltas
//! - [`replication`]: subsampled replicate curves with standard errors
//! - [`synthetic`]: runs over a known test surface with a split-noise model
//! - [`selection`]: counterfactual stopping and selection rules
//!
//! Per-run work is spread over rayon when the `parallel` feature (default)
//! is on; every result is independent of the thread count.

pub mod analysis;
pub mod error;
pub mod fmt;
pub mod ingest;
pub mod metrics;
pub mod par;
pub mod replication;
pub mod rng;
pub mod selection;
pub mod synthetic;

pub use error::{Error, ErrorKind, Result};
pub use metrics::{Epsilon, IncumbentTrace, OvertuningReport, ScoreTrajectory};
