use std::collections::HashMap;

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::metrics::{auroc, ScoredLabels};

/// Per-epoch resonance scores over the wild nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceTrace {
    /// Wild node ids, in column order of `taus`.
    pub nodes: Vec<usize>,
    /// `taus[t][i]`: score of `nodes[i]` for the step from epoch `t` to `t + 1`.
    pub taus: Vec<Vec<f64>>,
    /// Validation AUROC of `−τ` per epoch.
    pub val_auroc: Vec<f64>,
    /// Pre-step alignment loss per epoch.
    pub losses: Vec<f64>,
    /// Wild representations `h_t` for `t = 0..=epochs`, when recorded.
    pub rep_snapshots: Option<Vec<DenseMatrix>>,
}

impl ResonanceTrace {
    pub fn epochs(&self) -> usize {
        self.taus.len()
    }

    pub fn tau_at(&self, epoch: usize) -> &[f64] {
        &self.taus[epoch]
    }

    fn positions(&self) -> HashMap<usize, usize> {
        self.nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryVariant {
    /// `Σ_t τ^t`: total path length.
    ScalarSum,
    /// `‖h_T − h_0‖`: norm of the summed per-step movement.
    VectorNorm,
    /// `Σ_{s = epoch−width+1 ..= epoch} τ^s`.
    Window { width: usize, epoch: usize },
}

pub fn trajectory_scores(trace: &ResonanceTrace, variant: TrajectoryVariant) -> Result<Vec<f64>> {
    let epochs = trace.epochs();
    if epochs == 0 {
        return Err(RslError::config("trajectory over an empty trace"));
    }
    let n = trace.nodes.len();
    match variant {
        TrajectoryVariant::ScalarSum => Ok((0..n)
            .map(|i| trace.taus.iter().map(|t| t[i]).sum())
            .collect()),
        TrajectoryVariant::VectorNorm => {
            let snaps = trace.rep_snapshots.as_ref().ok_or_else(|| {
                RslError::config("vector-norm trajectory needs recorded representations")
            })?;
            let first = snaps.first().expect("snapshots hold epochs + 1 entries");
            let last = snaps.last().expect("snapshots hold epochs + 1 entries");
            Ok(last.sub(first)?.row_norms())
        }
        TrajectoryVariant::Window { width, epoch } => {
            if width == 0 {
                return Err(RslError::config("window width must be at least 1"));
            }
            if epoch >= epochs || width > epoch + 1 {
                return Err(RslError::config(format!(
                    "window of width {width} ending at epoch {epoch} exceeds a {epochs}-epoch trace"
                )));
            }
            let span = &trace.taus[epoch + 1 - width..=epoch];
            Ok((0..n).map(|i| span.iter().map(|t| t[i]).sum()).collect())
        }
    }
}

/// Validation AUROC of `ood_score = −scores`, with nodes looked up by id.
pub fn validation_auroc(
    nodes: &[usize],
    scores: &[f64],
    val_in: &[usize],
    val_out: &[usize],
) -> Result<f64> {
    let pos: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    validation_auroc_with(&pos, scores, val_in, val_out)
}

fn validation_auroc_with(
    pos: &HashMap<usize, usize>,
    scores: &[f64],
    val_in: &[usize],
    val_out: &[usize],
) -> Result<f64> {
    if val_in.is_empty() || val_out.is_empty() {
        return Err(RslError::Selection(format!(
            "validation needs both classes (ID {}, OOD {})",
            val_in.len(),
            val_out.len()
        )));
    }
    let lookup = |v: &usize| -> Result<f64> {
        pos.get(v)
            .map(|&i| -scores[i])
            .ok_or_else(|| RslError::Selection(format!("validation node {v} has no score")))
    };
    let id: Vec<f64> = val_in.iter().map(lookup).collect::<Result<_>>()?;
    let ood: Vec<f64> = val_out.iter().map(lookup).collect::<Result<_>>()?;
    auroc(&ScoredLabels::from_groups(&id, &ood)?)
}

/// Epoch whose `−τ` best separates validation OOD from validation ID; ties go to
/// the earliest epoch.
pub fn select_resonant_epoch(trace: &ResonanceTrace, val_in: &[usize], val_out: &[usize]) -> Result<usize> {
    if trace.epochs() == 0 {
        return Err(RslError::Selection("empty trace".into()));
    }
    let pos = trace.positions();
    let mut best = (0, f64::NEG_INFINITY);
    for (t, taus) in trace.taus.iter().enumerate() {
        let a = validation_auroc_with(&pos, taus, val_in, val_out)?;
        if a > best.1 {
            best = (t, a);
        }
    }
    Ok(best.0)
}
