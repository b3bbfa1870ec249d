//! Unsupervised out-of-distribution node detection by feature resonance.
//!
//! A linear head is trained to pull known in-distribution node features onto a
//! fixed random target. Per step, unlabeled in-distribution nodes move with the
//! known set while OOD nodes barely move; that movement (`τ`) ranks wild
//! nodes. The lowest-`τ` nodes seed Langevin-synthesized OOD examples, and an
//! energy-based GCN classifier is trained on known ID versus both.
//!
//! Module map:
//! - [`graph`]: graph model, normalization, datasets, splits
//! - [`nn`]: dense/GCN layers, losses, gradient descent
//! - [`resonance`]: resonance scores, epoch selection, τ detector
//! - [`synth`]: candidate selection and SGLD synthesis
//! - [`classifier`]: energy model training and detection
//! - [`metrics`] and [`baselines`]: evaluation
//! - [`pipeline`]: configuration, staged execution, reports

pub mod baselines;
pub mod classifier;
pub mod dense;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod nn;
pub mod par;
pub mod pipeline;
pub mod resonance;
pub mod rng;
pub mod synth;

pub use dense::DenseMatrix;
pub use error::{Result, RslError};
