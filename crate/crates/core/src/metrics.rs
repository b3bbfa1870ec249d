//! Threshold-free detection metrics.
//!
//! Convention used across the crate: `ood_score` is higher for more OOD-like
//! nodes and OOD is the positive class for AUROC and AUPR. FPR95 fixes the
//! threshold so that 95% of ID nodes are classified ID and reports the share of
//! OOD nodes that slip under it.

use std::cmp::Ordering;

use crate::error::{Result, RslError};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredLabels {
    pub ood_score: Vec<f64>,
    pub is_ood: Vec<bool>,
}

impl ScoredLabels {
    pub fn new(ood_score: Vec<f64>, is_ood: Vec<bool>) -> Result<Self> {
        if ood_score.len() != is_ood.len() {
            return Err(RslError::dim(format!(
                "{} scores for {} labels",
                ood_score.len(),
                is_ood.len()
            )));
        }
        if ood_score.iter().any(|s| s.is_nan()) {
            return Err(RslError::Metric("NaN score".into()));
        }
        Ok(Self { ood_score, is_ood })
    }

    /// Builds labels from separate ID and OOD score lists.
    pub fn from_groups(id: &[f64], ood: &[f64]) -> Result<Self> {
        let mut s = id.to_vec();
        s.extend_from_slice(ood);
        let mut y = vec![false; id.len()];
        y.extend(std::iter::repeat_n(true, ood.len()));
        Self::new(s, y)
    }

    pub fn counts(&self) -> (usize, usize) {
        let pos = self.is_ood.iter().filter(|&&y| y).count();
        (pos, self.is_ood.len() - pos)
    }

    fn require_both(&self, metric: &str) -> Result<(usize, usize)> {
        let (pos, neg) = self.counts();
        if pos == 0 || neg == 0 {
            return Err(RslError::Metric(format!(
                "{metric} needs both classes (OOD {pos}, ID {neg})"
            )));
        }
        Ok((pos, neg))
    }
}

fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Mann–Whitney AUROC: `P(s_OOD > s_ID) + ½ P(s_OOD = s_ID)`.
pub fn auroc(data: &ScoredLabels) -> Result<f64> {
    let (pos, neg) = data.require_both("AUROC")?;
    let mut order: Vec<usize> = (0..data.ood_score.len()).collect();
    order.sort_by(|&a, &b| cmp_f64(&data.ood_score[a], &data.ood_score[b]));
    // Twice the rank sum of positives, using average ranks over tied groups.
    let mut twice_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && data.ood_score[order[j + 1]] == data.ood_score[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1, average (i + j + 2) / 2
        let twice_avg = (i + j + 2) as f64;
        let pos_in_group = order[i..=j].iter().filter(|&&k| data.is_ood[k]).count();
        twice_rank_sum += twice_avg * pos_in_group as f64;
        i = j + 1;
    }
    let p = pos as f64;
    let twice_u = twice_rank_sum - p * (p + 1.0);
    Ok(twice_u / (2.0 * p * neg as f64))
}

/// Average precision over the descending-score sweep; tied scores form one step.
pub fn aupr(data: &ScoredLabels) -> Result<f64> {
    let (pos, _) = data.counts();
    if pos == 0 {
        return Err(RslError::Metric("AUPR needs at least one OOD node".into()));
    }
    let mut order: Vec<usize> = (0..data.ood_score.len()).collect();
    order.sort_by(|&a, &b| cmp_f64(&data.ood_score[b], &data.ood_score[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && data.ood_score[order[j + 1]] == data.ood_score[order[i]] {
            j += 1;
        }
        for &k in &order[i..=j] {
            if data.is_ood[k] {
                tp += 1
            } else {
                fp += 1
            }
        }
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    Ok(ap)
}

/// Nearest-rank quantile of ascending-sorted `values`: the element at rank
/// `⌈q·m⌉` (1-based, at least 1). A small guard absorbs floating error in `q·m`.
pub fn nearest_rank(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let m = sorted.len();
    let r = ((q * m as f64) - 1e-9).ceil().max(1.0) as usize;
    Some(sorted[r.min(m) - 1])
}

/// Share of OOD nodes at or below the nearest-rank 95% quantile of ID scores.
pub fn fpr_at_95_tpr(data: &ScoredLabels) -> Result<f64> {
    let (pos, _) = data.require_both("FPR95")?;
    let mut id: Vec<f64> = data
        .ood_score
        .iter()
        .zip(&data.is_ood)
        .filter(|(_, &y)| !y)
        .map(|(&s, _)| s)
        .collect();
    id.sort_by(cmp_f64);
    let threshold = nearest_rank(&id, 0.95).expect("ID scores are non-empty");
    let missed = data
        .ood_score
        .iter()
        .zip(&data.is_ood)
        .filter(|(&s, &y)| y && s <= threshold)
        .count();
    Ok(missed as f64 / pos as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub auroc: f64,
    pub aupr: f64,
    pub fpr95: f64,
}

pub fn summarize(data: &ScoredLabels) -> Result<MetricSummary> {
    Ok(MetricSummary {
        auroc: auroc(data)?,
        aupr: aupr(data)?,
        fpr95: fpr_at_95_tpr(data)?,
    })
}
