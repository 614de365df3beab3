//! Fair ordinal regression with threshold models.
//!
//! A threshold model predicts label `i` when a linear score falls in
//! `(θ_{i-1}, θ_i]`. This crate learns such models in two steps, each of
//! which can be made approximately fair under pairwise demographic parity
//! or pairwise equal opportunity:
//!
//! 1. [`reduction`]: a linear scorer learned as a fair binary classifier on
//!    label-distinct difference pairs.
//! 2. [`thresholds`]: thresholds minimizing mean cost plus `λ` times the
//!    fairness violation, by exact dynamic programming or local search.
//!
//! [`pipeline`] chains both steps and sweeps the accuracy/fairness trade-off,
//! [`metrics`] audits any predictor, and [`simulate`] holds the enumeration
//! and Monte Carlo experiments.

pub mod cli;
pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod reduction;
pub mod rng;
pub mod simulate;
pub mod thresholds;

pub use error::{Error, Result};
pub use model::{CostMatrix, Dataset, FairnessNotion, LinearScorer, Normalizer, ThresholdModel, Thresholds};
