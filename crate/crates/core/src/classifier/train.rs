use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::graph::SparseMatrix;
use crate::nn::{bce_loss, sgd_step};
use crate::resonance::validation_auroc;
use crate::rng::Rng;

use super::EnergyModel;

/// Training nodes (indices into the augmented graph) and their labels:
/// known ID → 1, candidates and synthetic nodes → 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSet {
    pub nodes: Vec<usize>,
    pub labels: Vec<f64>,
}

impl TrainSet {
    pub fn new(known: &[usize], candidates: &[usize], synthetic: &[usize]) -> Self {
        let mut nodes = known.to_vec();
        let mut labels = vec![1.0; known.len()];
        for &v in candidates.iter().chain(synthetic) {
            nodes.push(v);
            labels.push(0.0);
        }
        Self { nodes, labels }
    }

    pub fn count(&self, label: f64) -> usize {
        self.labels.iter().filter(|&&y| y == label).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.005,
            dropout: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters at `best_epoch`.
    pub model: EnergyModel,
    pub best_epoch: usize,
    /// Validation AUROC of `−E`; entry 0 is the initialization.
    pub val_auroc: Vec<f64>,
    /// Training loss per update (`epochs` entries).
    pub losses: Vec<f64>,
}

/// Inverted dropout on the input features: each entry survives with
/// probability `1 − rate` and is scaled by `1/(1 − rate)`.
fn dropout(x: &DenseMatrix, rate: f64, rng: &mut Rng) -> DenseMatrix {
    if rate <= 0.0 {
        return x.clone();
    }
    let keep = 1.0 - rate;
    let mut out = x.clone();
    for v in out.as_mut_slice() {
        *v = if rng.bernoulli(keep) { *v / keep } else { 0.0 };
    }
    out
}

/// BCE loss over the train set and its gradient on every parameter.
pub fn bce_objective(
    model: &EnergyModel,
    adj: &SparseMatrix,
    x: &DenseMatrix,
    train: &TrainSet,
) -> Result<(f64, Vec<f64>)> {
    let fwd = model.forward(adj, x)?;
    let logits: Vec<f64> = train.nodes.iter().map(|&v| fwd.energy[v]).collect();
    let (loss, d_logits) = bce_loss(&logits, &train.labels)?;
    let mut d_energy = vec![0.0; x.rows()];
    for (&v, &g) in train.nodes.iter().zip(&d_logits) {
        d_energy[v] += g;
    }
    let grads = model.backward(adj, &fwd, &d_energy)?;
    Ok((loss, grads.to_flat()))
}

/// Normalized adjacency plus node features.
#[derive(Debug, Clone, Copy)]
pub struct GraphInput<'a> {
    pub adj: &'a SparseMatrix,
    pub x: &'a DenseMatrix,
}

/// Full-batch gradient descent on BCE over `fit`, keeping the parameters with
/// the best validation AUROC on `eval` (earliest on ties, initialization
/// included as epoch 0). `train` indexes `fit`; the validation sets index `eval`.
pub fn train_classifier(
    init: EnergyModel,
    fit: GraphInput<'_>,
    eval: GraphInput<'_>,
    train: &TrainSet,
    val_in: &[usize],
    val_out: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    let (adj, x) = (fit.adj, fit.x);
    if train.count(1.0) == 0 || train.count(0.0) == 0 {
        return Err(RslError::config("classifier training needs both labels"));
    }
    if !(0.0..1.0).contains(&cfg.dropout) {
        return Err(RslError::config(format!("dropout {} is outside [0, 1)", cfg.dropout)));
    }
    let all_nodes: Vec<usize> = (0..eval.x.rows()).collect();
    let score = |m: &EnergyModel| -> Result<f64> {
        let e = m.energies(eval.adj, eval.x)?;
        validation_auroc(&all_nodes, &e, val_in, val_out)
    };
    let mut rng = Rng::new(cfg.seed);
    let mut model = init;
    let mut best = model.clone();
    let mut best_epoch = 0;
    let mut best_auroc = score(&model)?;
    let mut val_auroc = vec![best_auroc];
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let xd = dropout(x, cfg.dropout, &mut rng);
        let (loss, grad) = bce_objective(&model, adj, &xd, train)?;
        if !loss.is_finite() {
            return Err(RslError::Numerical(format!("classifier loss is {loss} at epoch {epoch}")));
        }
        let mut flat = model.to_flat();
        sgd_step(&mut flat, &grad, cfg.lr)?;
        model.set_flat(&flat)?;
        losses.push(loss);
        let a = score(&model)?;
        val_auroc.push(a);
        if a > best_auroc {
            best_auroc = a;
            best_epoch = epoch;
            best = model.clone();
        }
    }
    Ok(TrainOutcome {
        model: best,
        best_epoch,
        val_auroc,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize_adjacency, Graph};

    fn gi<'a>(adj: &'a SparseMatrix, x: &'a DenseMatrix) -> GraphInput<'a> {
        GraphInput { adj, x }
    }

    fn two_nodes() -> (SparseMatrix, DenseMatrix) {
        let x = DenseMatrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let g = Graph::new(&[], x.clone()).unwrap();
        (normalize_adjacency(&g), x)
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (a, x) = two_nodes();
        let mut rng = Rng::new(3);
        let m = EnergyModel::init(2, 4, 2, &mut rng).unwrap();
        let t = TrainSet::new(&[0], &[1], &[]);
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let out = train_classifier(m.clone(), gi(&a, &x), gi(&a, &x), &t, &[0], &[1], &cfg).unwrap();
        assert_eq!(out.best_epoch, 0);
        assert_eq!(out.model, m);
        assert_eq!(out.val_auroc.len(), 1);
    }

    #[test]
    fn separable_pair_loss_decreases() {
        let (a, x) = two_nodes();
        let mut rng = Rng::new(11);
        let m = EnergyModel::init(2, 4, 2, &mut rng).unwrap();
        let t = TrainSet::new(&[0], &[1], &[]);
        let cfg = TrainConfig {
            epochs: 50,
            lr: 0.1,
            dropout: 0.0,
            seed: 1,
        };
        let out = train_classifier(m, gi(&a, &x), gi(&a, &x), &t, &[0], &[1], &cfg).unwrap();
        assert!(out.losses.windows(2).all(|w| w[1] < w[0]), "{:?}", out.losses);
    }

    #[test]
    fn single_class_train_set_is_rejected() {
        let (a, x) = two_nodes();
        let mut rng = Rng::new(3);
        let m = EnergyModel::init(2, 4, 2, &mut rng).unwrap();
        let t = TrainSet::new(&[0, 1], &[], &[]);
        let r = train_classifier(m, gi(&a, &x), gi(&a, &x), &t, &[0], &[1], &TrainConfig::default());
        assert!(matches!(r, Err(RslError::Config(_))));
    }

    #[test]
    fn label_partition() {
        let t = TrainSet::new(&[0, 1, 2], &[5, 6], &[9]);
        assert_eq!(t.count(1.0), 3);
        assert_eq!(t.count(0.0), 3);
        assert_eq!(t.nodes, vec![0, 1, 2, 5, 6, 9]);
    }
}
