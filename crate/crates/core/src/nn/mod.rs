//! Dense layers, a cached GCN forward/backward pass, the two training losses,
//! and plain gradient descent.

mod gcn;
mod loss;
mod optim;

pub use gcn::{gcn_backward, gcn_forward, GcnCache, GcnParams};
pub use loss::{bce_loss, mse_align_loss, mse_align_loss_rows, sigmoid};
pub use optim::sgd_step;

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::rng::Rng;

/// `X Wᵀ` with no bias.
pub fn linear_forward(x: &DenseMatrix, w: &DenseMatrix) -> Result<DenseMatrix> {
    if x.cols() != w.cols() {
        return Err(RslError::dim(format!(
            "linear layer expects {} input columns, got {}",
            w.cols(),
            x.cols()
        )));
    }
    x.matmul_transb(w)
}

/// `rows × cols` matrix with entries uniform in `[-1/√fan_in, 1/√fan_in]`.
pub fn init_uniform(rows: usize, cols: usize, fan_in: usize, rng: &mut Rng) -> DenseMatrix {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.uniform(-bound, bound)).collect();
    DenseMatrix::from_vec(rows, cols, data).expect("sized by construction")
}
