use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::nn::{init_uniform, linear_forward, mse_align_loss_rows};
use crate::rng::Rng;

/// One bias-free linear layer `h(x) = x Wᵀ` trained to pull known-ID
/// representations onto fixed targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceHead {
    /// `dim × d_in`.
    pub w: DenseMatrix,
    pub lr: f64,
}

impl ResonanceHead {
    pub fn new(w: DenseMatrix, lr: f64) -> Result<Self> {
        if !(lr > 0.0) {
            return Err(RslError::config(format!("learning rate {lr} must be positive")));
        }
        if !w.is_finite() {
            return Err(RslError::Numerical("non-finite head weights".into()));
        }
        Ok(Self { w, lr })
    }

    pub fn init(dim: usize, d_in: usize, lr: f64, rng: &mut Rng) -> Result<Self> {
        Self::new(init_uniform(dim, d_in, d_in, rng), lr)
    }

    pub fn forward(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        linear_forward(x, &self.w)
    }

    /// Alignment loss and its analytic gradient with respect to `W`:
    /// `(2/(n·d)) (X Wᵀ − T)ᵀ X`.
    pub fn loss_and_gradient(&self, known: &DenseMatrix, targets: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
        let h = self.forward(known)?;
        let (loss, d_h) = mse_align_loss_rows(&h, targets)?;
        Ok((loss, d_h.transa_matmul(known)?))
    }

    /// One full-batch gradient step; returns the loss before the step.
    pub fn align_epoch(&mut self, known: &DenseMatrix, targets: &DenseMatrix) -> Result<f64> {
        if targets.rows() != known.rows() {
            return Err(RslError::dim(format!(
                "{} targets for {} known rows",
                targets.rows(),
                known.rows()
            )));
        }
        let (loss, grad) = self.loss_and_gradient(known, targets)?;
        if !loss.is_finite() {
            return Err(RslError::Numerical(format!("alignment loss is {loss}")));
        }
        crate::nn::sgd_step(self.w.as_mut_slice(), grad.as_slice(), self.lr)?;
        Ok(loss)
    }
}

/// `Δh(x̃) = x̃ (W_after − W_before)ᵀ` for every row of `x`.
pub fn delta_representations(
    w_before: &DenseMatrix,
    w_after: &DenseMatrix,
    x: &DenseMatrix,
) -> Result<DenseMatrix> {
    let dw = w_after.sub(w_before)?;
    linear_forward(x, &dw)
}

/// Resonance score `τ_i = ‖Δh(x̃_i)‖₂`.
pub fn compute_tau(w_before: &DenseMatrix, w_after: &DenseMatrix, x: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(delta_representations(w_before, w_after, x)?.row_norms())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn targets(e: &[f64], n: usize) -> DenseMatrix {
        DenseMatrix::from_rows(&vec![e.to_vec(); n]).unwrap()
    }

    #[test]
    fn satisfied_head_does_not_move() {
        // W = [[1, 0]] maps both rows to their first coordinate = 1
        let x = DenseMatrix::from_vec(2, 2, vec![1.0, 3.0, 1.0, -2.0]).unwrap();
        let w = DenseMatrix::from_vec(1, 2, vec![1.0, 0.0]).unwrap();
        let mut head = ResonanceHead::new(w.clone(), 0.1).unwrap();
        let loss = head.align_epoch(&x, &targets(&[1.0], 2)).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(head.w, w);
    }

    #[test]
    fn zero_inputs_give_zero_gradient() {
        let w = DenseMatrix::from_vec(2, 3, vec![0.1, 0.2, 0.3, -0.1, 0.5, 0.0]).unwrap();
        let mut head = ResonanceHead::new(w.clone(), 0.5).unwrap();
        head.align_epoch(&DenseMatrix::zeros(4, 3), &targets(&[0.6, 0.8], 4)).unwrap();
        assert_eq!(head.w, w);
    }

    #[test]
    fn one_dimensional_hand_step() {
        let mut head = ResonanceHead::new(DenseMatrix::zeros(1, 1), 0.5).unwrap();
        let x = DenseMatrix::filled(1, 1, 1.0);
        let loss = head.align_epoch(&x, &targets(&[1.0], 1)).unwrap();
        assert_eq!(loss, 1.0);
        assert_eq!(head.w.as_slice(), &[1.0]);
    }

    #[test]
    fn tau_edge_cases() {
        let a = DenseMatrix::from_vec(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let b = DenseMatrix::from_vec(2, 2, vec![0.5, 0.2, 0.3, -0.4]).unwrap();
        let x = DenseMatrix::from_vec(2, 2, vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        let tau = compute_tau(&a, &b, &x).unwrap();
        assert_eq!(tau[0], 0.0);
        assert!(tau[1] > 0.0);
        assert!(compute_tau(&a, &a, &x).unwrap().iter().all(|&t| t == 0.0));
        assert!(compute_tau(&a, &b, &DenseMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn rejects_bad_learning_rate() {
        assert!(ResonanceHead::new(DenseMatrix::zeros(1, 1), 0.0).is_err());
    }

    mod properties {
        use super::*;
        use crate::rng::Rng;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tau_is_nonnegative_and_linear_in_lr(seed in 0u64..1000, n in 1usize..10, d_in in 1usize..6, d_out in 1usize..5) {
                let mut rng = Rng::new(seed);
                let mut draw = |r: usize, c: usize| {
                    DenseMatrix::from_vec(r, c, (0..r * c).map(|_| rng.normal()).collect()).unwrap()
                };
                let known = draw(n, d_in);
                let wild = draw(7, d_in);
                let w0 = draw(d_out, d_in);
                let e: Vec<f64> = (0..d_out).map(|j| (j as f64 + 1.0).recip()).collect();
                let t = targets(&e, n);
                let step = |lr: f64| {
                    let mut h = ResonanceHead::new(w0.clone(), lr).unwrap();
                    h.align_epoch(&known, &t).unwrap();
                    compute_tau(&w0, &h.w, &wild).unwrap()
                };
                let one = step(0.005);
                let two = step(0.01);
                for (a, b) in one.iter().zip(&two) {
                    prop_assert!(*a >= 0.0);
                    prop_assert!((b - 2.0 * a).abs() < 1e-10);
                }
            }
        }
    }
}
