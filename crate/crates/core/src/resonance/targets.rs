use serde::{Deserialize, Serialize};

use crate::dense::{dot, DenseMatrix};
use crate::error::{Result, RslError};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// One random unit vector shared by every known node.
    SingleRandom,
    /// `num_targets` independent random unit vectors, assigned round-robin.
    MultiRandom,
    /// A simplex equiangular tight frame, one vertex per label.
    EtfByLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub mode: TargetMode,
    pub num_targets: usize,
    pub dim: usize,
    pub seed: u64,
    /// Label of each known node (in known-set order), required for `EtfByLabel`.
    pub labels: Option<Vec<usize>>,
}

impl TargetSpec {
    pub fn single(dim: usize, seed: u64) -> Self {
        Self {
            mode: TargetMode::SingleRandom,
            num_targets: 1,
            dim,
            seed,
            labels: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(RslError::config("target dimension must be positive"));
        }
        match self.mode {
            TargetMode::SingleRandom if self.num_targets != 1 => Err(RslError::config(
                "single_random mode uses exactly one target",
            )),
            TargetMode::MultiRandom if self.num_targets == 0 => {
                Err(RslError::config("multi_random mode needs at least one target"))
            }
            TargetMode::EtfByLabel if self.num_targets < 2 => {
                Err(RslError::config("a simplex ETF needs at least two vertices"))
            }
            TargetMode::EtfByLabel if self.dim < self.num_targets => Err(RslError::config(
                format!(
                    "ETF with {} vertices needs dim >= {}, got {}",
                    self.num_targets, self.num_targets, self.dim
                ),
            )),
            _ => Ok(()),
        }
    }
}

fn random_unit(rng: &mut Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let n = dot(&v, &v).sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Orthonormal columns `U ∈ R^{p×k}` from Gram–Schmidt on Gaussian draws, stored as `k` rows.
fn orthonormal_rows(rng: &mut Rng, k: usize, p: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..p).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Target vectors, one per row (`num_targets × dim`), each of unit length.
pub fn generate_targets(spec: &TargetSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let mut rng = Rng::new(spec.seed);
    let rows: Vec<Vec<f64>> = match spec.mode {
        TargetMode::SingleRandom | TargetMode::MultiRandom => (0..spec.num_targets)
            .map(|_| random_unit(&mut rng, spec.dim))
            .collect(),
        TargetMode::EtfByLabel => {
            // E = √(K/(K−1)) · U (I − 11ᵀ/K); row k of the result is column k of E.
            let k = spec.num_targets;
            let u = orthonormal_rows(&mut rng, k, spec.dim);
            let scale = (k as f64 / (k as f64 - 1.0)).sqrt();
            let kf = k as f64;
            (0..k)
                .map(|col| {
                    (0..spec.dim)
                        .map(|r| {
                            let centered: f64 = (0..k)
                                .map(|j| {
                                    let m = if j == col { 1.0 - 1.0 / kf } else { -1.0 / kf };
                                    u[j][r] * m
                                })
                                .sum();
                            scale * centered
                        })
                        .collect()
                })
                .collect()
        }
    };
    DenseMatrix::from_rows(&rows)
}

/// Per-known-row target matrix (`known_count × dim`).
///
/// `MultiRandom` assigns row `r` to target `r mod K`; `EtfByLabel` uses the
/// supplied labels, which must lie in `0..K`.
pub fn assign_targets(spec: &TargetSpec, targets: &DenseMatrix, known_count: usize) -> Result<DenseMatrix> {
    let k = targets.rows();
    let mut out = DenseMatrix::zeros(known_count, targets.cols());
    for r in 0..known_count {
        let t = match spec.mode {
            TargetMode::SingleRandom => 0,
            TargetMode::MultiRandom => r % k,
            TargetMode::EtfByLabel => {
                let labels = spec
                    .labels
                    .as_ref()
                    .ok_or_else(|| RslError::config("etf_by_label needs known-node labels"))?;
                if labels.len() != known_count {
                    return Err(RslError::config(format!(
                        "{} labels for {known_count} known nodes",
                        labels.len()
                    )));
                }
                let l = labels[r];
                if l >= k {
                    return Err(RslError::config(format!("label {l} has no ETF vertex (K = {k})")));
                }
                l
            }
        };
        out.row_mut(r).copy_from_slice(targets.row(t));
    }
    Ok(out)
}
