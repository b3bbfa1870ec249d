//! Prototype-distance OOD scorers: cosine, Euclidean, and Mahalanobis distance
//! to the mean of the known-ID representations.

use serde::{Deserialize, Serialize};

use crate::dense::{cholesky, dot, forward_substitute, norm, DenseMatrix};
use crate::error::{Result, RslError};
use crate::par;

/// Ridge added to the sample covariance.
pub const COVARIANCE_RIDGE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMode {
    Cosine,
    Euclidean,
    Mahalanobis,
}

impl BaselineMode {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMode::Cosine => "cosine",
            BaselineMode::Euclidean => "euclidean",
            BaselineMode::Mahalanobis => "mahalanobis",
        }
    }

    pub fn all() -> [BaselineMode; 3] {
        [BaselineMode::Cosine, BaselineMode::Euclidean, BaselineMode::Mahalanobis]
    }
}

impl std::str::FromStr for BaselineMode {
    type Err = RslError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(BaselineMode::Cosine),
            "euclidean" => Ok(BaselineMode::Euclidean),
            "mahalanobis" => Ok(BaselineMode::Mahalanobis),
            other => Err(RslError::config(format!("unknown baseline `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    pub mean: Vec<f64>,
    /// Regularized sample covariance, present when fitted for Mahalanobis.
    pub covariance: Option<DenseMatrix>,
    chol: Option<DenseMatrix>,
}

pub fn fit_prototype(known: &DenseMatrix, mode: BaselineMode) -> Result<Prototype> {
    let n = known.rows();
    let need = if mode == BaselineMode::Mahalanobis { 2 } else { 1 };
    if n < need {
        return Err(RslError::config(format!(
            "{} prototype needs at least {need} known rows, got {n}",
            mode.name()
        )));
    }
    let mean = known.column_means();
    if mode != BaselineMode::Mahalanobis {
        return Ok(Prototype {
            mean,
            covariance: None,
            chol: None,
        });
    }
    let d = known.cols();
    let mut cov = DenseMatrix::zeros(d, d);
    for r in 0..n {
        let c: Vec<f64> = known.row(r).iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            for j in 0..d {
                cov.set(i, j, cov.get(i, j) + c[i] * c[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in 0..d {
            let v = cov.get(i, j) / denom + if i == j { COVARIANCE_RIDGE } else { 0.0 };
            cov.set(i, j, v);
        }
    }
    let chol = cholesky(&cov)?;
    Ok(Prototype {
        mean,
        covariance: Some(cov),
        chol: Some(chol),
    })
}

impl Prototype {
    /// Prototype with an explicit covariance.
    pub fn with_covariance(mean: Vec<f64>, covariance: DenseMatrix) -> Result<Self> {
        let chol = cholesky(&covariance)?;
        Ok(Self {
            mean,
            covariance: Some(covariance),
            chol: Some(chol),
        })
    }
}

/// Higher is more OOD-like: `−cos(x, mean)`, `‖x − mean‖`, or the Mahalanobis distance.
pub fn baseline_scores(mode: BaselineMode, proto: &Prototype, reps: &DenseMatrix) -> Result<Vec<f64>> {
    if reps.cols() != proto.mean.len() {
        return Err(RslError::dim("representation width differs from the prototype"));
    }
    let mean_norm = norm(&proto.mean);
    let chol = match mode {
        BaselineMode::Mahalanobis => Some(proto.chol.as_ref().ok_or_else(|| {
            RslError::config("prototype was not fitted for Mahalanobis scoring")
        })?),
        _ => None,
    };
    par::map_indices(reps.rows(), |r| {
        let x = reps.row(r);
        match mode {
            BaselineMode::Cosine => {
                let xn = norm(x);
                if xn == 0.0 || mean_norm == 0.0 {
                    return Err(RslError::Numerical(format!(
                        "cosine similarity undefined for zero vector (row {r})"
                    )));
                }
                Ok(-dot(x, &proto.mean) / (xn * mean_norm))
            }
            BaselineMode::Euclidean => Ok(x
                .iter()
                .zip(&proto.mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()),
            BaselineMode::Mahalanobis => {
                let diff: Vec<f64> = x.iter().zip(&proto.mean).map(|(a, b)| a - b).collect();
                let y = forward_substitute(chol.expect("checked above"), &diff);
                Ok(norm(&y))
            }
        }
    })
    .into_iter()
    .collect()
}
