//! Loss functions. Both return the batch-mean loss and the gradient that
//! seeds backpropagation.

use crate::math;
use crate::matrix::Matrix;

/// Numerical floor inside the cross-entropy logarithm.
const LOG_EPSILON: f64 = 1e-12;

/// Mean over the batch of `0.5 * (y - a)^2`.
///
/// The gradient w.r.t. `a` is `(a - y) / batch`.
pub fn mse_loss(targets: &Matrix, outputs: &Matrix) -> (f64, Matrix) {
    assert_eq!(targets.shape(), outputs.shape(), "mse shape mismatch");
    let batch = targets.rows() as f64;
    let mut loss = 0.0;
    for (y, a) in targets.as_slice().iter().zip(outputs.as_slice()) {
        let d = y - a;
        loss += 0.5 * d * d;
    }
    let grad = Matrix::from_fn(outputs.rows(), outputs.cols(), |r, c| {
        (outputs[(r, c)] - targets[(r, c)]) / batch
    });
    (loss / batch, grad)
}

/// Label-smoothed categorical cross-entropy over softmax probabilities.
///
/// Targets are smoothed to `(1-eps)·onehot + eps/K`; the returned gradient
/// is w.r.t. the logits with the softmax Jacobian folded in:
/// `(probs - smoothed) / batch`.
pub fn cross_entropy_smoothed(
    targets_onehot: &Matrix,
    probs: &Matrix,
    smoothing: f64,
) -> (f64, Matrix) {
    assert_eq!(
        targets_onehot.shape(),
        probs.shape(),
        "cross-entropy shape mismatch"
    );
    assert!((0.0..1.0).contains(&smoothing), "smoothing must be in [0,1)");
    let classes = probs.cols() as f64;
    let batch = probs.rows() as f64;
    let uniform = smoothing / classes;
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(probs.rows(), probs.cols());
    for r in 0..probs.rows() {
        let target_row = targets_onehot.row(r);
        let prob_row = probs.row(r);
        let grad_row = grad.row_mut(r);
        for ((g, &t), &p) in grad_row.iter_mut().zip(target_row).zip(prob_row) {
            let smoothed = (1.0 - smoothing) * t + uniform;
            loss -= smoothed * math::ln(p + LOG_EPSILON);
            *g = (p - smoothed) / batch;
        }
    }
    (loss / batch, grad)
}

/// One-hot encode labels into a `len × classes` matrix.
pub fn one_hot(labels: &[u8], classes: usize) -> Matrix {
    let mut out = Matrix::zeros(labels.len(), classes);
    for (r, &label) in labels.iter().enumerate() {
        out[(r, label as usize)] = 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mse_matches_printed_formula() {
        let y = Matrix::from_vec(1, 1, vec![1.0]);
        let a = Matrix::from_vec(1, 1, vec![0.8]);
        let (loss, grad) = mse_loss(&y, &a);
        assert!((loss - 0.02).abs() < 1e-15);
        assert!((grad[(0, 0)] - (-0.2)).abs() < 1e-15);
    }

    #[test]
    fn mse_zero_at_perfect_prediction() {
        let y = Matrix::from_vec(2, 1, vec![0.3, 0.9]);
        let (loss, grad) = mse_loss(&y, &y);
        assert_eq!(loss, 0.0);
        assert!(grad.as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn mse_batch_mean() {
        // Pairs (y=1, a=0) and (y=0, a=0): mean of {0.5, 0} = 0.25.
        let y = Matrix::from_vec(2, 1, vec![1.0, 0.0]);
        let a = Matrix::from_vec(2, 1, vec![0.0, 0.0]);
        let (loss, _) = mse_loss(&y, &a);
        assert!((loss - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_vanishes_for_confident_correct_prediction() {
        let targets = one_hot(&[0], 3);
        let probs = Matrix::from_vec(1, 3, vec![1.0 - 2e-9, 1e-9, 1e-9]);
        let (loss, _) = cross_entropy_smoothed(&targets, &probs, 0.0);
        assert!(loss < 1e-8, "loss {loss}");
    }

    #[test]
    fn smoothed_targets_sum_to_one() {
        for smoothing in [0.0, 0.1, 0.35] {
            let k = 3.0;
            let sum: f64 = (1.0 - smoothing) + k * (smoothing / k);
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn smoothed_target_values_for_k3() {
        // eps = 0.1, K = 3, true class 0: (0.9333..., 0.0333..., 0.0333...).
        // Verified through the gradient at uniform probabilities.
        let targets = one_hot(&[0], 3);
        let third = 1.0 / 3.0;
        let probs = Matrix::from_vec(1, 3, vec![third, third, third]);
        let (_, grad) = cross_entropy_smoothed(&targets, &probs, 0.1);
        let smoothed_0 = third - grad[(0, 0)];
        let smoothed_other = third - grad[(0, 1)];
        assert!((smoothed_0 - (0.9 + 0.1 / 3.0)).abs() < 1e-12);
        assert!((smoothed_other - 0.1 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_hot_layout() {
        let m = one_hot(&[2, 0], 3);
        assert_eq!(m.row(0), &[0.0, 0.0, 1.0]);
        assert_eq!(m.row(1), &[1.0, 0.0, 0.0]);
    }
}
