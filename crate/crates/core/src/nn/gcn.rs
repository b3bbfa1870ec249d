use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::graph::SparseMatrix;
use crate::rng::Rng;

use super::init_uniform;

/// Weights of a bias-free K-layer GCN. Layer `k` maps `fan_in → fan_out`
/// (`W_k` is `fan_in × fan_out`); ReLU follows every layer but the last.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    pub layer_weights: Vec<DenseMatrix>,
}

impl GcnParams {
    pub fn init(d_in: usize, hidden: usize, layers: usize, rng: &mut Rng) -> Result<Self> {
        if layers == 0 {
            return Err(RslError::config("GCN needs at least one layer"));
        }
        let mut layer_weights = Vec::with_capacity(layers);
        let mut fan_in = d_in;
        for _ in 0..layers {
            layer_weights.push(init_uniform(fan_in, hidden, fan_in, rng));
            fan_in = hidden;
        }
        Ok(Self { layer_weights })
    }

    pub fn num_layers(&self) -> usize {
        self.layer_weights.len()
    }

    fn validate(&self, d_in: usize) -> Result<()> {
        if self.layer_weights.is_empty() {
            return Err(RslError::config("GCN needs at least one layer"));
        }
        let mut width = d_in;
        for (k, w) in self.layer_weights.iter().enumerate() {
            if w.rows() != width {
                return Err(RslError::dim(format!(
                    "layer {k} expects {} inputs, previous width is {width}",
                    w.rows()
                )));
            }
            width = w.cols();
        }
        Ok(())
    }
}

/// Intermediates of one forward pass, consumed by [`gcn_backward`].
#[derive(Debug, Clone)]
pub struct GcnCache {
    /// `Â h^(k−1)` for each layer.
    aggregated: Vec<DenseMatrix>,
    /// Pre-activation `Â h^(k−1) W_k`.
    pre: Vec<DenseMatrix>,
    /// Layer outputs `h^(1..K)`.
    pub layers: Vec<DenseMatrix>,
}

impl GcnCache {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }
}

/// Runs every layer and keeps the intermediates needed for backpropagation.
pub fn gcn_forward(adj: &SparseMatrix, x: &DenseMatrix, params: &GcnParams) -> Result<GcnCache> {
    params.validate(x.cols())?;
    let k_last = params.num_layers() - 1;
    let mut aggregated = Vec::with_capacity(params.num_layers());
    let mut pre = Vec::with_capacity(params.num_layers());
    let mut layers: Vec<DenseMatrix> = Vec::with_capacity(params.num_layers());
    for (k, w) in params.layer_weights.iter().enumerate() {
        let input = if k == 0 { x } else { &layers[k - 1] };
        let agg = adj.matmul(input)?;
        let z = agg.matmul(w)?;
        let h = if k < k_last { z.map(|v| v.max(0.0)) } else { z.clone() };
        aggregated.push(agg);
        pre.push(z);
        layers.push(h);
    }
    Ok(GcnCache {
        aggregated,
        pre,
        layers,
    })
}

/// Backpropagates upstream gradients on each layer output `h^(k)` through the
/// network. Returns the weight gradients and the gradient on the input features.
pub fn gcn_backward(
    adj: &SparseMatrix,
    params: &GcnParams,
    cache: &GcnCache,
    upstream: &[DenseMatrix],
) -> Result<(Vec<DenseMatrix>, DenseMatrix)> {
    let k_count = params.num_layers();
    if cache.num_layers() != k_count || upstream.len() != k_count {
        return Err(RslError::dim(format!(
            "backward over {k_count} layers with a {}-layer cache and {} upstream gradients",
            cache.num_layers(),
            upstream.len()
        )));
    }
    let mut grads: Vec<DenseMatrix> = params
        .layer_weights
        .iter()
        .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
        .collect();
    let mut carry: Option<DenseMatrix> = None;
    let mut d_input = DenseMatrix::zeros(0, 0);
    for k in (0..k_count).rev() {
        let mut d_h = upstream[k].clone();
        if d_h.shape() != cache.layers[k].shape() {
            return Err(RslError::dim(format!("upstream gradient {k} has the wrong shape")));
        }
        if let Some(c) = carry.take() {
            d_h.add_scaled(&c, 1.0)?;
        }
        let d_z = if k + 1 < k_count {
            let mask = cache.pre[k].map(|z| if z > 0.0 { 1.0 } else { 0.0 });
            d_h.hadamard(&mask)?
        } else {
            d_h
        };
        grads[k] = cache.aggregated[k].transa_matmul(&d_z)?;
        let d_agg = d_z.matmul_transb(&params.layer_weights[k])?;
        // Â is symmetric, so Âᵀ d_agg = Â d_agg.
        let d_prev = adj.matmul(&d_agg)?;
        if k == 0 {
            d_input = d_prev;
        } else {
            carry = Some(d_prev);
        }
    }
    Ok((grads, d_input))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize_adjacency, Graph};

    fn adj(n: usize, edges: &[(usize, usize)]) -> SparseMatrix {
        normalize_adjacency(&Graph::new(edges, DenseMatrix::zeros(n, 1)).unwrap())
    }

    #[test]
    fn zero_weights_zero_representations() {
        let a = adj(3, &[(0, 1)]);
        let params = GcnParams {
            layer_weights: vec![DenseMatrix::zeros(2, 4), DenseMatrix::zeros(4, 4)],
        };
        let x = DenseMatrix::filled(3, 2, 1.5);
        let c = gcn_forward(&a, &x, &params).unwrap();
        assert!(c.layers.iter().all(|h| h.as_slice().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn single_node_single_layer() {
        let a = adj(1, &[]);
        let params = GcnParams {
            layer_weights: vec![DenseMatrix::filled(1, 1, 2.5)],
        };
        let x = DenseMatrix::filled(1, 1, -3.0);
        let c = gcn_forward(&a, &x, &params).unwrap();
        // final layer carries no rectifier
        assert_eq!(c.layers[0].as_slice(), &[-7.5]);
    }

    #[test]
    fn two_node_hand_computation() {
        let a = adj(2, &[(0, 1)]);
        let params = GcnParams {
            layer_weights: vec![DenseMatrix::filled(1, 1, 3.0)],
        };
        let x = DenseMatrix::from_vec(2, 1, vec![2.0, 0.0]).unwrap();
        let c = gcn_forward(&a, &x, &params).unwrap();
        // Â·X = [1, 1], times W = 3
        assert_eq!(c.layers[0].as_slice(), &[3.0, 3.0]);
    }

    #[test]
    fn hidden_layers_are_nonnegative() {
        let mut rng = Rng::new(5);
        let a = adj(6, &[(0, 1), (1, 2), (3, 4), (4, 5), (0, 5)]);
        let params = GcnParams::init(3, 4, 3, &mut rng).unwrap();
        let x = DenseMatrix::from_vec(6, 3, (0..18).map(|_| rng.normal()).collect()).unwrap();
        let c = gcn_forward(&a, &x, &params).unwrap();
        for h in &c.layers[..2] {
            assert!(h.as_slice().iter().all(|&v| v >= 0.0));
        }
        assert!(c.layers[2].as_slice().iter().any(|&v| v < 0.0));
    }

    #[test]
    fn shape_mismatch() {
        let a = adj(2, &[]);
        let params = GcnParams {
            layer_weights: vec![DenseMatrix::zeros(3, 2)],
        };
        assert!(gcn_forward(&a, &DenseMatrix::zeros(2, 2), &params).is_err());
        let bad = GcnParams {
            layer_weights: vec![DenseMatrix::zeros(2, 2), DenseMatrix::zeros(3, 2)],
        };
        assert!(gcn_forward(&a, &DenseMatrix::zeros(2, 2), &bad).is_err());
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let mut rng = Rng::new(1);
        let a = adj(4, &[(0, 1), (2, 3)]);
        let params = GcnParams::init(2, 3, 2, &mut rng).unwrap();
        let x = DenseMatrix::filled(4, 2, 0.7);
        let c = gcn_forward(&a, &x, &params).unwrap();
        let up: Vec<DenseMatrix> = c.layers.iter().map(|h| DenseMatrix::zeros(h.rows(), h.cols())).collect();
        let (g, dx) = gcn_backward(&a, &params, &c, &up).unwrap();
        assert!(g.iter().all(|m| m.as_slice().iter().all(|&v| v == 0.0)));
        assert!(dx.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut rng = Rng::new(1);
        let a = adj(2, &[(0, 1)]);
        let p2 = GcnParams::init(2, 3, 2, &mut rng).unwrap();
        let p1 = GcnParams::init(2, 3, 1, &mut rng).unwrap();
        let c = gcn_forward(&a, &DenseMatrix::filled(2, 2, 1.0), &p1).unwrap();
        let up = vec![DenseMatrix::zeros(2, 3); 2];
        assert!(gcn_backward(&a, &p2, &c, &up).is_err());
    }

    #[test]
    fn forward_is_pure() {
        let mut rng = Rng::new(8);
        let a = adj(5, &[(0, 1), (1, 2), (3, 4)]);
        let params = GcnParams::init(3, 4, 2, &mut rng).unwrap();
        let x = DenseMatrix::from_vec(5, 3, (0..15).map(|_| rng.normal()).collect()).unwrap();
        let a1 = gcn_forward(&a, &x, &params).unwrap();
        let a2 = crate::par::single_threaded(|| gcn_forward(&a, &x, &params).unwrap());
        assert_eq!(a1.layers, a2.layers);
    }
}
