//! Central finite-difference verification of analytic gradients.

use alloc::vec::Vec;

use crate::math;

pub const DEFAULT_STEP: f64 = 1e-5;

/// Compare an analytic gradient against central differences of `loss`.
///
/// Returns the maximum relative error
/// `|a - n| / max(|a|, |n|, 1e-8)` over all parameters.
pub fn grad_check(
    mut loss: impl FnMut(&[f64]) -> f64,
    params: &[f64],
    analytic: &[f64],
    step: f64,
) -> f64 {
    assert_eq!(params.len(), analytic.len(), "gradient length mismatch");
    let mut theta: Vec<f64> = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        let original = theta[i];
        theta[i] = original + step;
        let plus = loss(&theta);
        theta[i] = original - step;
        let minus = loss(&theta);
        theta[i] = original;
        let numeric = (plus - minus) / (2.0 * step);
        let denom = math::abs(analytic[i]).max(math::abs(numeric)).max(1e-8);
        worst = worst.max(math::abs(analytic[i] - numeric) / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_gradient_of_quadratic_on_linear_model() {
        // loss(w) = 0.5 * (w·x - y)^2; gradient = (w·x - y) * x.
        let x = [0.7, -1.3, 2.0];
        let y = 0.4;
        let w = vec![0.1, 0.2, -0.3];
        let loss = |theta: &[f64]| {
            let pred: f64 = theta.iter().zip(&x).map(|(t, xi)| t * xi).sum();
            0.5 * (pred - y) * (pred - y)
        };
        let pred: f64 = w.iter().zip(&x).map(|(t, xi)| t * xi).sum();
        let analytic: Vec<f64> = x.iter().map(|xi| (pred - y) * xi).collect();
        let err = grad_check(loss, &w, &analytic, DEFAULT_STEP);
        assert!(err < 1e-7, "error {err}");
    }

    #[test]
    fn corrupted_gradient_is_flagged() {
        let x = [0.7, -1.3, 2.0];
        let y = 0.4;
        let w = vec![0.1, 0.2, -0.3];
        let loss = |theta: &[f64]| {
            let pred: f64 = theta.iter().zip(&x).map(|(t, xi)| t * xi).sum();
            0.5 * (pred - y) * (pred - y)
        };
        let pred: f64 = w.iter().zip(&x).map(|(t, xi)| t * xi).sum();
        let corrupted: Vec<f64> = x.iter().map(|xi| 1.1 * (pred - y) * xi).collect();
        let err = grad_check(loss, &w, &corrupted, DEFAULT_STEP);
        assert!(err > 1e-2, "error {err}");
    }
}
