use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};

/// Mean squared error between every row of `h` and the target `e`, averaged
/// over all entries, and its gradient with respect to `h`.
pub fn mse_align_loss(h: &DenseMatrix, e: &[f64]) -> Result<(f64, DenseMatrix)> {
    if h.cols() != e.len() {
        return Err(RslError::dim(format!(
            "{} representation columns against a target of length {}",
            h.cols(),
            e.len()
        )));
    }
    let mut targets = DenseMatrix::zeros(h.rows(), h.cols());
    for r in 0..h.rows() {
        targets.row_mut(r).copy_from_slice(e);
    }
    mse_align_loss_rows(h, &targets)
}

/// As [`mse_align_loss`] with a separate target per row.
pub fn mse_align_loss_rows(h: &DenseMatrix, targets: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
    if h.shape() != targets.shape() {
        return Err(RslError::dim("representation and target shapes differ"));
    }
    let count = (h.rows() * h.cols()).max(1) as f64;
    let diff = h.sub(targets)?;
    let loss = diff.as_slice().iter().map(|d| d * d).sum::<f64>() / count;
    Ok((loss, diff.scale(2.0 / count)))
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy on logits, with its gradient `(σ(z) − y) / n`.
pub fn bce_loss(logits: &[f64], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
    if logits.len() != labels.len() {
        return Err(RslError::dim(format!(
            "{} logits for {} labels",
            logits.len(),
            labels.len()
        )));
    }
    if let Some(y) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
        return Err(RslError::Validation(format!("label {y} is not 0 or 1")));
    }
    let n = logits.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&z, &y) in logits.iter().zip(labels) {
        // -[y log σ(z) + (1-y) log(1-σ(z))] = max(z,0) - z y + ln(1 + e^{-|z|})
        loss += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
        grad.push((sigmoid(z) - y) / n);
    }
    Ok((loss / n, grad))
}
