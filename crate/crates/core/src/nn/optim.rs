use crate::error::{Result, RslError};

/// In-place `p ← p − lr·g`. No momentum, no weight decay.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
    if params.len() != grads.len() {
        return Err(RslError::dim(format!(
            "{} parameters but {} gradients",
            params.len(),
            grads.len()
        )));
    }
    if !(lr > 0.0) || !lr.is_finite() {
        return Err(RslError::config(format!("learning rate {lr} must be positive")));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(RslError::Numerical("non-finite gradient".into()));
    }
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = vec![1.0, -2.0];
        sgd_step(&mut p, &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn table_learning_rate_step() {
        let mut p = vec![1.0];
        sgd_step(&mut p, &[2.0], 0.005).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-15);
    }

    #[test]
    fn deterministic() {
        let mut a = vec![0.3, 0.7];
        let mut b = a.clone();
        sgd_step(&mut a, &[0.11, -0.2], 0.01).unwrap();
        sgd_step(&mut b, &[0.11, -0.2], 0.01).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut p = vec![1.0];
        assert!(matches!(sgd_step(&mut p, &[f64::NAN], 0.1), Err(RslError::Numerical(_))));
        assert!(sgd_step(&mut p, &[1.0], 0.0).is_err());
        assert!(sgd_step(&mut p, &[1.0, 2.0], 0.1).is_err());
    }
}
