use crate::dense::dot;
use crate::error::{Result, RslError};
use crate::metrics::nearest_rank;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorThreshold {
    pub gamma: f64,
    pub target_id_tpr: f64,
}

/// Threshold below which a score is flagged OOD: the nearest-rank lower
/// `(1 − target_id_tpr)` quantile of validation ID scores.
pub fn score_threshold(val_id_scores: &[f64], target_id_tpr: f64) -> Result<DetectorThreshold> {
    if val_id_scores.is_empty() {
        return Err(RslError::Selection("threshold needs validation ID scores".into()));
    }
    if !(target_id_tpr > 0.0 && target_id_tpr <= 1.0) {
        return Err(RslError::config(format!(
            "target ID TPR {target_id_tpr} is outside (0, 1]"
        )));
    }
    let mut sorted = val_id_scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gamma = nearest_rank(&sorted, 1.0 - target_id_tpr).expect("non-empty");
    Ok(DetectorThreshold {
        gamma,
        target_id_tpr,
    })
}

/// Threshold on validation ID τ at the selected epoch.
pub fn tau_threshold(val_id_tau: &[f64], target_id_tpr: f64) -> Result<DetectorThreshold> {
    score_threshold(val_id_tau, target_id_tpr)
}

/// `1{score ≤ γ}` per node.
pub fn flag_at_or_below(scores: &[f64], threshold: &DetectorThreshold) -> Vec<bool> {
    scores.iter().map(|&s| s <= threshold.gamma).collect()
}

pub fn detect_ood_tau(tau: &[f64], threshold: &DetectorThreshold) -> Vec<bool> {
    flag_at_or_below(tau, threshold)
}

/// Orthogonal projection `(x·g / ‖g‖²) g`.
pub fn project_onto_gradient(x: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if x.len() != g.len() {
        return Err(RslError::dim("projection operands differ in length"));
    }
    let gg = dot(g, g);
    if gg == 0.0 {
        return Err(RslError::Numerical("projection onto a zero gradient".into()));
    }
    let c = dot(x, g) / gg;
    Ok(g.iter().map(|v| c * v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(tau_threshold(&v, 0.95).unwrap().gamma, 1.0);
        assert_eq!(tau_threshold(&[0.7; 9], 0.95).unwrap().gamma, 0.7);
        let shuffled = [5.0, 3.0, 9.0, 4.0];
        assert_eq!(tau_threshold(&shuffled, 1.0).unwrap().gamma, 3.0);
        assert!(tau_threshold(&[], 0.95).is_err());
        assert!(tau_threshold(&[1.0], 0.0).is_err());
    }

    #[test]
    fn inclusive_comparison() {
        let thr = DetectorThreshold {
            gamma: 0.2,
            target_id_tpr: 0.95,
        };
        assert_eq!(detect_ood_tau(&[0.1, 0.5], &thr), vec![true, false]);
        assert_eq!(detect_ood_tau(&[0.2], &thr), vec![true]);
        assert_eq!(detect_ood_tau(&[0.3, 0.9], &thr), vec![false, false]);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_onto_gradient(&[0.0, 3.0], &[2.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(project_onto_gradient(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), vec![1.5, -2.0]);
        assert_eq!(project_onto_gradient(&[1.0, 1.0], &[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(
            project_onto_gradient(&[1.0, 1.0], &[0.0, 0.0]),
            Err(RslError::Numerical(_))
        ));
    }
}
