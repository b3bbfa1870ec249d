use crate::dense::{dot, DenseMatrix};
use crate::error::{Result, RslError};
use crate::graph::SparseMatrix;
use crate::nn::{gcn_backward, gcn_forward, init_uniform, GcnCache, GcnParams};
use crate::rng::Rng;

/// `E(v) = w_out · Σ_k β_k h_v^(k)` over a K-layer GCN whose layers share one width.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    pub gcn: GcnParams,
    pub beta: Vec<f64>,
    pub w_out: Vec<f64>,
}

/// Cached forward pass of an [`EnergyModel`].
#[derive(Debug, Clone)]
pub struct EnergyForward {
    gcn: GcnCache,
    /// `Σ_k β_k h^(k)`, one row per node.
    mix: DenseMatrix,
    pub energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrads {
    pub layers: Vec<DenseMatrix>,
    pub beta: Vec<f64>,
    pub w_out: Vec<f64>,
    /// Gradient with respect to the input feature matrix.
    pub input: DenseMatrix,
}

impl EnergyGrads {
    /// Same ordering as [`EnergyModel::to_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .layers
            .iter()
            .flat_map(|m| m.as_slice().iter().copied())
            .collect();
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(&self.w_out);
        v
    }
}

impl EnergyModel {
    /// Every layer is `hidden` wide; `β_k = 1/K`, `w_out` scaled-uniform.
    pub fn init(d_in: usize, hidden: usize, layers: usize, rng: &mut Rng) -> Result<Self> {
        let gcn = GcnParams::init(d_in, hidden, layers, rng)?;
        let beta = vec![1.0 / layers as f64; layers];
        let w_out = init_uniform(1, hidden, hidden, rng).into_vec();
        Ok(Self { gcn, beta, w_out })
    }

    pub fn num_layers(&self) -> usize {
        self.gcn.num_layers()
    }

    pub fn width(&self) -> usize {
        self.w_out.len()
    }

    pub fn input_dim(&self) -> usize {
        self.gcn.layer_weights.first().map_or(0, DenseMatrix::rows)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_layers();
        if k == 0 {
            return Err(RslError::config("energy model needs at least one layer"));
        }
        if self.beta.len() != k {
            return Err(RslError::dim(format!("{} layer weights β for {k} layers", self.beta.len())));
        }
        if let Some((i, w)) = self
            .gcn
            .layer_weights
            .iter()
            .enumerate()
            .find(|(_, w)| w.cols() != self.w_out.len())
        {
            return Err(RslError::dim(format!(
                "layer {i} is {} wide but the projection expects {}",
                w.cols(),
                self.w_out.len()
            )));
        }
        let finite = self.to_flat().iter().all(|v| v.is_finite());
        if !finite {
            return Err(RslError::Numerical("non-finite energy model parameter".into()));
        }
        Ok(())
    }

    pub fn forward(&self, adj: &SparseMatrix, x: &DenseMatrix) -> Result<EnergyForward> {
        self.validate()?;
        let gcn = gcn_forward(adj, x, &self.gcn)?;
        let mut mix = DenseMatrix::zeros(x.rows(), self.width());
        for (h, &b) in gcn.layers.iter().zip(&self.beta) {
            mix.add_scaled(h, b)?;
        }
        let energy = (0..mix.rows()).map(|r| dot(mix.row(r), &self.w_out)).collect();
        Ok(EnergyForward { gcn, mix, energy })
    }

    pub fn energies(&self, adj: &SparseMatrix, x: &DenseMatrix) -> Result<Vec<f64>> {
        Ok(self.forward(adj, x)?.energy)
    }

    /// Exact gradients of `Σ_v d_energy[v] · E(v)` with respect to every
    /// parameter and the input features.
    pub fn backward(&self, adj: &SparseMatrix, fwd: &EnergyForward, d_energy: &[f64]) -> Result<EnergyGrads> {
        let n = fwd.mix.rows();
        if d_energy.len() != n || fwd.gcn.num_layers() != self.num_layers() || fwd.mix.cols() != self.width() {
            return Err(RslError::dim("energy backward does not match its forward pass"));
        }
        let width = self.width();
        let mut w_out = vec![0.0; width];
        let mut d_mix = DenseMatrix::zeros(n, width);
        for v in 0..n {
            let g = d_energy[v];
            if g == 0.0 {
                continue;
            }
            for (acc, &m) in w_out.iter_mut().zip(fwd.mix.row(v)) {
                *acc += g * m;
            }
            for (d, &w) in d_mix.row_mut(v).iter_mut().zip(&self.w_out) {
                *d = g * w;
            }
        }
        let beta: Vec<f64> = fwd.gcn.layers.iter().map(|h| h.frobenius_dot(&d_mix)).collect();
        let upstream: Vec<DenseMatrix> = self.beta.iter().map(|&b| d_mix.scale(b)).collect();
        let (layers, input) = gcn_backward(adj, &self.gcn, &fwd.gcn, &upstream)?;
        Ok(EnergyGrads {
            layers,
            beta,
            w_out,
            input,
        })
    }

    pub fn param_count(&self) -> usize {
        self.gcn.layer_weights.iter().map(|m| m.as_slice().len()).sum::<usize>()
            + self.beta.len()
            + self.w_out.len()
    }

    /// Layer weights (row-major, in layer order), then `β`, then `w_out`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .gcn
            .layer_weights
            .iter()
            .flat_map(|m| m.as_slice().iter().copied())
            .collect();
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(&self.w_out);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(RslError::dim(format!(
                "{} values for {} parameters",
                flat.len(),
                self.param_count()
            )));
        }
        let mut off = 0;
        for m in &mut self.gcn.layer_weights {
            let len = m.as_slice().len();
            m.as_mut_slice().copy_from_slice(&flat[off..off + len]);
            off += len;
        }
        let k = self.beta.len();
        self.beta.copy_from_slice(&flat[off..off + k]);
        off += k;
        self.w_out.copy_from_slice(&flat[off..]);
        Ok(())
    }

    /// `∂E(node) / ∂x_node`: the gradient of one node's energy with respect to
    /// its own input features.
    pub fn self_input_gradient(&self, adj: &SparseMatrix, fwd: &EnergyForward, node: usize) -> Result<Vec<f64>> {
        let mut seed = vec![0.0; fwd.mix.rows()];
        seed[node] = 1.0;
        let g = self.backward(adj, fwd, &seed)?;
        Ok(g.input.row(node).to_vec())
    }
}
