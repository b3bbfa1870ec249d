//! Energy-based binary OOD classifier over a K-layer GCN.

mod model;
mod snapshot;
mod train;

pub use model::{EnergyForward, EnergyGrads, EnergyModel};
pub use snapshot::{decode_model, encode_model};
pub use train::{bce_objective, train_classifier, GraphInput, TrainConfig, TrainOutcome, TrainSet};

use crate::error::Result;
use crate::resonance::{flag_at_or_below, score_threshold, DetectorThreshold};

/// `γ′`: nearest-rank lower `(1 − tpr)` quantile of validation ID energies.
pub fn energy_threshold(val_id_energy: &[f64], target_id_tpr: f64) -> Result<DetectorThreshold> {
    score_threshold(val_id_energy, target_id_tpr)
}

/// `1{E ≤ γ′}` per node.
pub fn detect_ood_energy(energy: &[f64], threshold: &DetectorThreshold) -> Vec<bool> {
    flag_at_or_below(energy, threshold)
}
