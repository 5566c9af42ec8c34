use crate::error::{NeuralError, Result};
use crate::tensor::Tensor;

pub const PROB_CLIP: f64 = 1e-7;

fn same_shape(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(NeuralError::Shape(format!(
            "loss operands {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Mean squared error over all elements, with its gradient w.r.t. `pred`.
pub fn mse(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    same_shape(pred, target)?;
    let n = pred.len().max(1) as f64;
    let mut grad = Vec::with_capacity(pred.len());
    let mut loss = 0.0;
    for (p, t) in pred.data().iter().zip(target.data()) {
        let d = p - t;
        loss += d * d;
        grad.push(2.0 * d / n);
    }
    Ok((loss / n, Tensor::new(pred.shape().to_vec(), grad)?))
}

/// Categorical cross-entropy averaged over the batch. Probabilities are
/// clipped to `[1e-7, 1 - 1e-7]`; the gradient is zero where clipping is active.
pub fn categorical_crossentropy(probs: &Tensor, one_hot: &Tensor) -> Result<(f64, Tensor)> {
    same_shape(probs, one_hot)?;
    let batch = probs.batch().max(1) as f64;
    let mut grad = Vec::with_capacity(probs.len());
    let mut loss = 0.0;
    for (&p, &y) in probs.data().iter().zip(one_hot.data()) {
        let clipped = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
        loss -= y * clipped.ln();
        let inside = p > PROB_CLIP && p < 1.0 - PROB_CLIP;
        grad.push(if inside { -y / (clipped * batch) } else { 0.0 });
    }
    Ok((loss / batch, Tensor::new(probs.shape().to_vec(), grad)?))
}
