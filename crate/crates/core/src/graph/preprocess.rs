use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};

use super::SparseMatrix;

/// `Â^hops · X`; `hops = 0` returns `X` unchanged.
pub fn propagate(adj: &SparseMatrix, x: &DenseMatrix, hops: usize) -> Result<DenseMatrix> {
    if x.rows() != adj.dim() {
        return Err(RslError::dim(format!(
            "propagating {} feature rows over {} nodes",
            x.rows(),
            adj.dim()
        )));
    }
    let mut p = x.clone();
    for _ in 0..hops {
        p = adj.matmul(&p)?;
    }
    Ok(p)
}

/// Per-column feature rescaling fitted on known-ID rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureScaling {
    None,
    /// Divide each column by its known-ID standard deviation.
    Scale,
    /// Subtract the known-ID mean, then divide by the standard deviation.
    Zscore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mode: FeatureScaling,
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    /// Fits column statistics on `rows` of `x`. Columns with (near) zero spread keep unit scale.
    pub fn fit(mode: FeatureScaling, x: &DenseMatrix, rows: &[usize]) -> Result<Self> {
        let d = x.cols();
        if rows.is_empty() && mode != FeatureScaling::None {
            return Err(RslError::config("standardization needs at least one known row"));
        }
        let sub = x.select_rows(rows);
        let mean = sub.column_means();
        let mut std = vec![0.0; d];
        for r in 0..sub.rows() {
            for (c, &v) in sub.row(r).iter().enumerate() {
                std[c] += (v - mean[c]).powi(2);
            }
        }
        let n = sub.rows().max(1) as f64;
        for s in &mut std {
            *s = (*s / n).sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Ok(Self { mode, mean, std })
    }

    pub fn mode(&self) -> FeatureScaling {
        self.mode
    }

    pub fn transform(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.std.len() {
            return Err(RslError::dim("standardizer width mismatch"));
        }
        let mut out = x.clone();
        match self.mode {
            FeatureScaling::None => {}
            FeatureScaling::Scale => {
                for r in 0..out.rows() {
                    for (v, s) in out.row_mut(r).iter_mut().zip(&self.std) {
                        *v /= s;
                    }
                }
            }
            FeatureScaling::Zscore => {
                for r in 0..out.rows() {
                    for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                        *v = (*v - m) / s;
                    }
                }
            }
        }
        Ok(out)
    }
}
