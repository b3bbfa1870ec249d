//! Candidate OOD selection from resonance scores and SGLD synthesis of
//! OOD-like nodes wired into the graph next to their nearest candidates.

use crate::classifier::EnergyModel;
use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::graph::{normalize_adjacency, Graph};
use crate::par;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    /// Positions in the score vector, ascending by `(τ, position)`.
    pub indices: Vec<usize>,
    /// The n-th smallest score.
    pub threshold: f64,
}

/// The `n` smallest scores; ties broken by ascending position.
pub fn select_candidates(tau: &[f64], n: usize) -> Result<Candidates> {
    if n == 0 || n > tau.len() {
        return Err(RslError::config(format!(
            "candidate count {n} must lie in 1..={}",
            tau.len()
        )));
    }
    let mut order: Vec<usize> = (0..tau.len()).collect();
    order.sort_by(|&a, &b| tau[a].total_cmp(&tau[b]).then(a.cmp(&b)));
    order.truncate(n);
    let threshold = tau[order[n - 1]];
    Ok(Candidates {
        indices: order,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub count: usize,
    pub steps: usize,
    /// `α` in the `α/2` gradient coefficient.
    pub step_size: f64,
    pub lambda: f64,
    pub noise_std: f64,
    pub knn_k: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            count: 0,
            steps: 20,
            step_size: 1.0,
            lambda: 0.5,
            noise_std: 0.01,
            knn_k: 5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(RslError::config(format!("lambda {} is outside [0, 1]", self.lambda)));
        }
        if !(self.step_size > 0.0) {
            return Err(RslError::config("SGLD step size must be positive"));
        }
        if !(self.noise_std >= 0.0) {
            return Err(RslError::config("SGLD noise std must be >= 0"));
        }
        Ok(())
    }
}

/// One Langevin update:
/// `x′ = λ (x − (α/2) ∇E + ε) + (1 − λ)(mean_cand − x)`.
pub fn sgld_step(
    x: &[f64],
    grad_e: &[f64],
    cand_mean: &[f64],
    cfg: &SynthConfig,
    noise: &[f64],
) -> Result<Vec<f64>> {
    let d = x.len();
    if grad_e.len() != d || cand_mean.len() != d || noise.len() != d {
        return Err(RslError::dim("SGLD operands differ in length"));
    }
    let all = x.iter().chain(grad_e).chain(cand_mean).chain(noise);
    if all.clone().any(|v| !v.is_finite()) {
        return Err(RslError::Numerical("non-finite SGLD input".into()));
    }
    let lam = cfg.lambda;
    let half = cfg.step_size / 2.0;
    Ok((0..d)
        .map(|i| lam * (x[i] - half * grad_e[i] + noise[i]) + (1.0 - lam) * (cand_mean[i] - x[i]))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub features: DenseMatrix,
    /// `(synthetic index, candidate node id)`, one entry per undirected edge.
    pub edges: Vec<(usize, usize)>,
}

impl Synthesis {
    /// Graph with the synthetic nodes appended after the original ones.
    pub fn augment(&self, graph: &Graph) -> Result<Graph> {
        let base = graph.num_nodes();
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&(s, c)| (base + s, c)).collect();
        graph.with_extra_nodes(&self.features, &edges)
    }

    pub fn count(&self) -> usize {
        self.features.rows()
    }
}

/// Each synthetic row linked to its `k` nearest candidates by Euclidean distance
/// (ties by candidate order).
fn knn_wiring(features: &DenseMatrix, graph: &Graph, candidates: &[usize], k: usize) -> Vec<(usize, usize)> {
    let k = k.min(candidates.len()).max(1);
    let x = graph.features();
    let mut edges = Vec::with_capacity(features.rows() * k);
    for s in 0..features.rows() {
        let row = features.row(s);
        let mut dist: Vec<(f64, usize)> = candidates
            .iter()
            .enumerate()
            .map(|(pos, &c)| {
                let d: f64 = row.iter().zip(x.row(c)).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, pos)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        edges.extend(dist[..k].iter().map(|&(_, pos)| (s, candidates[pos])));
    }
    edges
}

/// Runs `cfg.steps` synchronous SGLD updates for `cfg.count` synthetic nodes
/// (every candidate count when `cfg.count` is 0), starting from standard
/// Gaussian features. Each step rewires the synthetic nodes to their nearest
/// candidates and differentiates their energy through the augmented graph.
pub fn synthesize_nodes(
    model: &EnergyModel,
    graph: &Graph,
    candidates: &[usize],
    cfg: &SynthConfig,
) -> Result<Synthesis> {
    cfg.validate()?;
    if candidates.is_empty() {
        return Err(RslError::config("synthesis needs at least one candidate"));
    }
    let d = graph.feature_dim();
    let count = if cfg.count == 0 { candidates.len() } else { cfg.count };
    let mut rng = Rng::new(cfg.seed);
    let init: Vec<f64> = (0..count * d).map(|_| rng.normal()).collect();
    let mut syn = Synthesis {
        features: DenseMatrix::from_vec(count, d, init)?,
        edges: Vec::new(),
    };
    let cand_mean = graph.features().select_rows(candidates).column_means();
    let base = graph.num_nodes();
    for _ in 0..cfg.steps {
        syn.edges = knn_wiring(&syn.features, graph, candidates, cfg.knn_k);
        let aug = syn.augment(graph)?;
        let adj = normalize_adjacency(&aug);
        let fwd = model.forward(&adj, aug.features())?;
        let grads = par::map_indices(count, |s| model.self_input_gradient(&adj, &fwd, base + s));
        let noise: Vec<f64> = (0..count * d).map(|_| cfg.noise_std * rng.normal()).collect();
        let mut next = DenseMatrix::zeros(count, d);
        for (s, g) in grads.into_iter().enumerate() {
            let stepped = sgld_step(syn.features.row(s), &g?, &cand_mean, cfg, &noise[s * d..(s + 1) * d])?;
            next.row_mut(s).copy_from_slice(&stepped);
        }
        syn.features = next;
    }
    syn.edges = knn_wiring(&syn.features, graph, candidates, cfg.knn_k);
    Ok(syn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::sgd_step;

    #[test]
    fn candidate_examples() {
        let c = select_candidates(&[0.3, 0.1, 0.2], 2).unwrap();
        assert_eq!(c.indices, vec![1, 2]);
        assert_eq!(c.threshold, 0.2);
        let c = select_candidates(&[0.5; 4], 2).unwrap();
        assert_eq!(c.indices, vec![0, 1]);
        let c = select_candidates(&[0.4, 0.1, 0.9], 3).unwrap();
        assert_eq!(c.indices.len(), 3);
        assert!(matches!(select_candidates(&[0.1], 2), Err(RslError::Config(_))));
    }

    fn cfg(lambda: f64) -> SynthConfig {
        SynthConfig {
            lambda,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn lambda_one_without_gradient_or_noise_is_identity() {
        let x = [1.5, -2.0];
        let out = sgld_step(&x, &[0.0, 0.0], &[9.0, 9.0], &cfg(1.0), &[0.0, 0.0]).unwrap();
        assert_eq!(out, x.to_vec());
    }

    #[test]
    fn lambda_zero_reflects_through_mean() {
        let out = sgld_step(&[1.0, 2.0], &[5.0, 5.0], &[4.0, -1.0], &cfg(0.0), &[0.3, 0.3]).unwrap();
        assert_eq!(out, vec![3.0, -3.0]);
    }

    #[test]
    fn half_lambda_substitution() {
        let out = sgld_step(&[2.0], &[0.0], &[4.0], &cfg(0.5), &[0.0]).unwrap();
        assert_eq!(out, vec![2.0]);
    }

    #[test]
    fn lambda_one_is_gradient_descent() {
        let x = [0.7, -0.2, 1.1];
        let g = [0.3, -0.9, 0.05];
        let c = SynthConfig {
            lambda: 1.0,
            step_size: 0.4,
            ..SynthConfig::default()
        };
        let out = sgld_step(&x, &g, &[0.0; 3], &c, &[0.0; 3]).unwrap();
        let mut p = x.to_vec();
        sgd_step(&mut p, &g, c.step_size / 2.0).unwrap();
        for (a, b) in out.iter().zip(&p) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(sgld_step(&[f64::NAN], &[0.0], &[0.0], &cfg(0.5), &[0.0]).is_err());
        assert!(sgld_step(&[0.0], &[0.0, 1.0], &[0.0], &cfg(0.5), &[0.0]).is_err());
    }

    fn small_graph() -> Graph {
        let x = DenseMatrix::from_vec(4, 2, vec![0.0, 0.0, 1.0, 0.0, 5.0, 5.0, 6.0, 5.0]).unwrap();
        Graph::new(&[(0, 1), (2, 3)], x).unwrap()
    }

    #[test]
    fn zero_steps_returns_initialization() {
        let g = small_graph();
        let m = EnergyModel::init(2, 4, 2, &mut Rng::new(1)).unwrap();
        let c = SynthConfig {
            count: 3,
            steps: 0,
            seed: 17,
            ..SynthConfig::default()
        };
        let s = synthesize_nodes(&m, &g, &[2, 3], &c).unwrap();
        let mut rng = Rng::new(17);
        let init: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
        assert_eq!(s.features.as_slice(), init.as_slice());
    }

    #[test]
    fn noiseless_synthesis_is_deterministic() {
        let g = small_graph();
        let m = EnergyModel::init(2, 4, 2, &mut Rng::new(1)).unwrap();
        let c = SynthConfig {
            count: 2,
            steps: 5,
            noise_std: 0.0,
            seed: 3,
            ..SynthConfig::default()
        };
        let a = synthesize_nodes(&m, &g, &[2, 3], &c).unwrap();
        let b = synthesize_nodes(&m, &g, &[2, 3], &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_candidate_wiring() {
        let g = small_graph();
        let m = EnergyModel::init(2, 4, 2, &mut Rng::new(1)).unwrap();
        let c = SynthConfig {
            count: 4,
            steps: 2,
            knn_k: 1,
            ..SynthConfig::default()
        };
        let s = synthesize_nodes(&m, &g, &[3], &c).unwrap();
        assert_eq!(s.edges, vec![(0, 3), (1, 3), (2, 3), (3, 3)]);
        let aug = s.augment(&g).unwrap();
        assert_eq!(aug.num_nodes(), 8);
        assert!((4..8).all(|v| aug.neighbors(v) == [3]));
        assert!(synthesize_nodes(&m, &g, &[], &c).is_err());
    }

    #[test]
    fn knn_is_capped_by_candidates() {
        let g = small_graph();
        let f = DenseMatrix::from_vec(1, 2, vec![5.2, 5.0]).unwrap();
        assert_eq!(knn_wiring(&f, &g, &[0, 2, 3], 2), vec![(0, 2), (0, 3)]);
        assert_eq!(knn_wiring(&f, &g, &[0, 2], 5).len(), 2);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn candidates_are_the_n_smallest(
                tau in proptest::collection::vec((0u8..20).prop_map(|v| f64::from(v) / 10.0), 1..80),
                frac in 0.0f64..1.0,
            ) {
                let n = 1 + ((tau.len() - 1) as f64 * frac) as usize;
                let c = select_candidates(&tau, n).unwrap();
                prop_assert_eq!(c.indices.len(), n);
                let max_in = c.indices.iter().map(|&i| tau[i]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(max_in, c.threshold);
                for i in 0..tau.len() {
                    if !c.indices.contains(&i) {
                        prop_assert!(tau[i] >= c.threshold);
                        // an excluded tie at T must come after every included index with τ = T
                        if tau[i] == c.threshold {
                            prop_assert!(c.indices.iter().all(|&j| tau[j] < c.threshold || j < i));
                        }
                    }
                }
                prop_assert_eq!(select_candidates(&tau, n).unwrap(), c);
            }
        }
    }
}
