//! Feature resonance: align known-ID representations to fixed targets with a
//! linear head and record how far each wild node's representation moves per
//! step. Wild ID nodes move with the known set; OOD nodes lag behind.

mod detector;
mod head;
mod targets;
mod trace;

pub use detector::{
    detect_ood_tau, flag_at_or_below, project_onto_gradient, score_threshold, tau_threshold,
    DetectorThreshold,
};
pub use head::{compute_tau, delta_representations, ResonanceHead};
pub use targets::{assign_targets, generate_targets, TargetMode, TargetSpec};
pub use trace::{
    select_resonant_epoch, trajectory_scores, validation_auroc, ResonanceTrace, TrajectoryVariant,
};

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::rng::{stage_seed, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceConfig {
    pub lr: f64,
    pub epochs: usize,
    /// Output width of the head.
    pub dim: usize,
    pub target_mode: TargetMode,
    pub num_targets: usize,
    /// Per-known-node labels for the ETF mode.
    pub labels: Option<Vec<usize>>,
    pub seed: u64,
    /// Keep every epoch's wild representations in the trace.
    pub keep_snapshots: bool,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self {
            lr: 0.005,
            epochs: 200,
            dim: 16,
            target_mode: TargetMode::SingleRandom,
            num_targets: 1,
            labels: None,
            seed: 0,
            keep_snapshots: false,
        }
    }
}

/// Inputs of one resonance run: head inputs for known and wild nodes plus the
/// validation split (by node id) used for per-epoch AUROC.
pub struct ResonanceInputs<'a> {
    pub known: &'a DenseMatrix,
    pub wild: &'a DenseMatrix,
    pub wild_nodes: &'a [usize],
    pub val_in: &'a [usize],
    pub val_out: &'a [usize],
}

/// Trains the head for `cfg.epochs` full-batch steps and records τ for every
/// wild node at every step. Targets draw from `seed`, weights from `seed + 1`.
pub fn run_resonance(cfg: &ResonanceConfig, inputs: &ResonanceInputs<'_>) -> Result<ResonanceTrace> {
    let known = inputs.known;
    let wild = inputs.wild;
    if inputs.wild_nodes.len() != wild.rows() {
        return Err(RslError::dim(format!(
            "{} wild ids for {} wild rows",
            inputs.wild_nodes.len(),
            wild.rows()
        )));
    }
    if known.rows() == 0 {
        return Err(RslError::config("resonance needs at least one known ID node"));
    }
    let spec = TargetSpec {
        mode: cfg.target_mode,
        num_targets: cfg.num_targets,
        dim: cfg.dim,
        seed: cfg.seed,
        labels: cfg.labels.clone(),
    };
    let targets = generate_targets(&spec)?;
    let assigned = assign_targets(&spec, &targets, known.rows())?;
    let mut rng = Rng::new(stage_seed(cfg.seed, 1));
    let mut head = ResonanceHead::init(cfg.dim, known.cols(), cfg.lr, &mut rng)?;

    let mut taus = Vec::with_capacity(cfg.epochs);
    let mut val_auroc = Vec::with_capacity(cfg.epochs);
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut snaps = cfg.keep_snapshots.then(|| vec![]);
    if let Some(s) = snaps.as_mut() {
        s.push(head.forward(wild)?);
    }
    for _ in 0..cfg.epochs {
        let before = head.w.clone();
        losses.push(head.align_epoch(known, &assigned)?);
        let tau = compute_tau(&before, &head.w, wild)?;
        val_auroc.push(validation_auroc(inputs.wild_nodes, &tau, inputs.val_in, inputs.val_out)?);
        taus.push(tau);
        if let Some(s) = snaps.as_mut() {
            s.push(head.forward(wild)?);
        }
    }
    Ok(ResonanceTrace {
        nodes: inputs.wild_nodes.to_vec(),
        taus,
        val_auroc,
        losses,
        rep_snapshots: snaps,
    })
}
