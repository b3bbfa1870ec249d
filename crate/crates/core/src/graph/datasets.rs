//! Seeded synthetic datasets: edge-free Gaussian clusters and a stochastic
//! block model with per-block Gaussian features.

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::rng::{stage_seed, Rng};

use super::{stratified_split, Graph, SplitMasks};

/// A generated graph together with its split and per-node ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub masks: SplitMasks,
    /// Ground-truth OOD flag for every node (known nodes are `false`).
    pub is_ood: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub n_known: usize,
    pub n_wild_in: usize,
    pub n_wild_out: usize,
    pub dim: usize,
    pub id_center: Vec<f64>,
    pub ood_center: Vec<f64>,
    pub spread: f64,
    pub seed: u64,
}

impl Default for ToySpec {
    /// 200/200/200 nodes in 8 dimensions; the two centers are orthogonal and
    /// four standard deviations apart.
    fn default() -> Self {
        let dim = 8;
        let a = 4.0 / std::f64::consts::SQRT_2;
        let mut id_center = vec![0.0; dim];
        let mut ood_center = vec![0.0; dim];
        id_center[0] = a;
        ood_center[1] = a;
        Self {
            n_known: 200,
            n_wild_in: 200,
            n_wild_out: 200,
            dim,
            id_center,
            ood_center,
            spread: 1.0,
            seed: 0,
        }
    }
}

fn gaussian_rows(rng: &mut Rng, n: usize, center: &[f64], spread: f64, out: &mut Vec<f64>) {
    for _ in 0..n {
        for &c in center {
            out.push(c + spread * rng.normal());
        }
    }
}

/// Nodes are laid out as known ID, then wild ID, then wild OOD.
pub fn make_toy_dataset(spec: &ToySpec) -> Result<Dataset> {
    if spec.n_known == 0 {
        return Err(RslError::config("toy dataset needs n_known >= 1"));
    }
    if spec.dim == 0 || spec.id_center.is_empty() || spec.ood_center.is_empty() {
        return Err(RslError::dim("toy centers must be non-empty"));
    }
    if spec.id_center.len() != spec.dim || spec.ood_center.len() != spec.dim {
        return Err(RslError::dim(format!(
            "toy centers must have length dim = {}",
            spec.dim
        )));
    }
    if !(spec.spread >= 0.0) {
        return Err(RslError::config("toy spread must be >= 0"));
    }
    let n = spec.n_known + spec.n_wild_in + spec.n_wild_out;
    let mut rng = Rng::new(spec.seed);
    let mut data = Vec::with_capacity(n * spec.dim);
    gaussian_rows(&mut rng, spec.n_known + spec.n_wild_in, &spec.id_center, spec.spread, &mut data);
    gaussian_rows(&mut rng, spec.n_wild_out, &spec.ood_center, spec.spread, &mut data);
    let features = DenseMatrix::from_vec(n, spec.dim, data)?;
    let graph = Graph::new(&[], features)?;

    let is_ood: Vec<bool> = (0..n).map(|i| i >= spec.n_known + spec.n_wild_in).collect();
    let known: Vec<usize> = (0..spec.n_known).collect();
    let wild: Vec<usize> = (spec.n_known..n).collect();
    let wild_flags: Vec<bool> = wild.iter().map(|&v| is_ood[v]).collect();
    let masks = stratified_split(known, wild, &wild_flags, stage_seed(spec.seed, 1))?;
    Ok(Dataset {
        graph,
        masks,
        is_ood,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmBlock {
    pub size: usize,
    pub ood: bool,
    pub center: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub blocks: Vec<SbmBlock>,
    pub p_in: f64,
    pub p_out: f64,
    pub spread: f64,
    /// 0.5 leaves `p_in`/`p_out` as given; 1 moves all mass within blocks, 0 all between.
    pub homophily_shift: f64,
    /// Fraction of each ID block that is labeled known.
    pub known_fraction: f64,
    pub seed: u64,
}

impl SbmSpec {
    /// Feature center value of the default benchmark blocks.
    pub const CENTER_SCALE: f64 = 1.0;

    /// Edge probabilities after applying `homophily_shift`.
    ///
    /// The pair-type total `p_in + p_out` is held fixed while the within-block
    /// share is moved linearly from 0 (shift 0) through the given share
    /// (shift 0.5) to 1 (shift 1). Results are clamped to `[0, 1]`.
    pub fn effective_probabilities(&self) -> (f64, f64) {
        let total = self.p_in + self.p_out;
        if total == 0.0 {
            return (0.0, 0.0);
        }
        let base = self.p_in / total;
        let s = self.homophily_shift;
        let share = if s <= 0.5 {
            base * (s / 0.5)
        } else {
            base + (1.0 - base) * ((s - 0.5) / 0.5)
        };
        let p_in = (total * share).clamp(0.0, 1.0);
        let p_out = (total * (1.0 - share)).clamp(0.0, 1.0);
        if s == 0.5 {
            (self.p_in, self.p_out)
        } else {
            (p_in, p_out)
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_in", self.p_in),
            ("p_out", self.p_out),
            ("homophily_shift", self.homophily_shift),
            ("known_fraction", self.known_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(RslError::config(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if !(self.spread >= 0.0) {
            return Err(RslError::config("sbm spread must be >= 0"));
        }
        if !self.blocks.iter().any(|b| b.ood) || !self.blocks.iter().any(|b| !b.ood) {
            return Err(RslError::config(
                "sbm needs at least one ID block and one OOD block",
            ));
        }
        let dim = self.blocks[0].center.len();
        if dim == 0 || self.blocks.iter().any(|b| b.center.len() != dim) {
            return Err(RslError::dim("sbm block centers must share a non-zero length"));
        }
        Ok(())
    }
}

impl Default for SbmSpec {
    /// The desk-scale benchmark: 600 nodes in two ID blocks of 250 and one OOD
    /// block of 100, homophilous wiring, 32-dimensional noisy features.
    fn default() -> Self {
        let dim = 32;
        let center = |block: usize| -> Vec<f64> {
            (0..dim)
                .map(|c| if c % 3 == block { Self::CENTER_SCALE } else { 0.0 })
                .collect()
        };
        Self {
            blocks: vec![
                SbmBlock {
                    size: 250,
                    ood: false,
                    center: center(0),
                },
                SbmBlock {
                    size: 250,
                    ood: false,
                    center: center(1),
                },
                SbmBlock {
                    size: 100,
                    ood: true,
                    center: center(2),
                },
            ],
            p_in: 0.03,
            p_out: 0.003,
            spread: 1.0,
            homophily_shift: 0.5,
            known_fraction: 0.5,
            seed: 0,
        }
    }
}

pub fn make_sbm_dataset(spec: &SbmSpec) -> Result<Dataset> {
    spec.validate()?;
    let (p_in, p_out) = spec.effective_probabilities();
    let dim = spec.blocks[0].center.len();
    let n: usize = spec.blocks.iter().map(|b| b.size).sum();
    let mut rng = Rng::new(spec.seed);

    let mut block_of = Vec::with_capacity(n);
    for (b, block) in spec.blocks.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, block.size));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if block_of[i] == block_of[j] { p_in } else { p_out };
            if rng.bernoulli(p) {
                edges.push((i, j));
            }
        }
    }

    let mut data = Vec::with_capacity(n * dim);
    for block in &spec.blocks {
        gaussian_rows(&mut rng, block.size, &block.center, spec.spread, &mut data);
    }
    let graph = Graph::new(&edges, DenseMatrix::from_vec(n, dim, data)?)?;

    let is_ood: Vec<bool> = block_of.iter().map(|&b| spec.blocks[b].ood).collect();
    let mut known = Vec::new();
    let mut wild = Vec::new();
    let mut start = 0;
    for block in &spec.blocks {
        let mut members: Vec<usize> = (start..start + block.size).collect();
        start += block.size;
        if block.ood {
            wild.extend(members);
            continue;
        }
        rng.shuffle(&mut members);
        let n_known = (spec.known_fraction * block.size as f64).round() as usize;
        wild.extend_from_slice(&members[n_known..]);
        members.truncate(n_known);
        known.extend(members);
    }
    if known.is_empty() {
        return Err(RslError::config("sbm spec labels no known ID nodes"));
    }
    wild.sort_unstable();
    let wild_flags: Vec<bool> = wild.iter().map(|&v| is_ood[v]).collect();
    let masks = stratified_split(known, wild, &wild_flags, stage_seed(spec.seed, 1))?;
    Ok(Dataset {
        graph,
        masks,
        is_ood,
    })
}
