//! SGD, Adam, and AdamW over flat parameter vectors.
//!
//! Models expose their parameters as one flat `Vec<f64>` in a fixed
//! traversal order; the optimizer keeps its moment accumulators aligned
//! with that order.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    Sgd,
    Adam,
    AdamW,
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Decoupled decay coefficient; only AdamW reads it.
    pub weight_decay: f64,
    step: u64,
    beta1_pow: f64,
    beta2_pow: f64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Optimizer {
            kind,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
            step: 0,
            beta1_pow: 1.0,
            beta2_pow: 1.0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    pub fn with_weight_decay(mut self, weight_decay: f64) -> Self {
        self.weight_decay = weight_decay;
        self
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update. `params` and `grads` must have equal, stable
    /// lengths across calls.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), grads.len(), "param/grad length mismatch");
        match self.kind {
            OptimizerKind::Sgd => {
                self.step += 1;
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= self.learning_rate * g;
                }
            }
            OptimizerKind::Adam | OptimizerKind::AdamW => {
                if self.first_moment.is_empty() {
                    self.first_moment = vec![0.0; params.len()];
                    self.second_moment = vec![0.0; params.len()];
                }
                assert_eq!(
                    self.first_moment.len(),
                    params.len(),
                    "optimizer state length mismatch"
                );
                self.step += 1;
                self.beta1_pow *= self.beta1;
                self.beta2_pow *= self.beta2;
                let bias1 = 1.0 - self.beta1_pow;
                let bias2 = 1.0 - self.beta2_pow;
                let decay = if self.kind == OptimizerKind::AdamW {
                    self.learning_rate * self.weight_decay
                } else {
                    0.0
                };
                for (((p, &g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.first_moment)
                    .zip(&mut self.second_moment)
                {
                    *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                    *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                    let m_hat = *m / bias1;
                    let v_hat = *v / bias2;
                    let update = self.learning_rate * m_hat / (math::sqrt(v_hat) + self.epsilon);
                    // Decoupled decay uses the pre-update parameter value.
                    *p -= update + decay * *p;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_sgd_and_adam_unchanged() {
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let mut opt = Optimizer::new(kind, 0.1);
            let mut params = [1.5, -2.0];
            opt.step(&mut params, &[0.0, 0.0]);
            assert_eq!(params, [1.5, -2.0]);
        }
    }

    #[test]
    fn adamw_zero_gradient_applies_pure_decay() {
        let mut opt = Optimizer::new(OptimizerKind::AdamW, 0.1).with_weight_decay(0.5);
        let mut params = [2.0];
        opt.step(&mut params, &[0.0]);
        // theta * (1 - lr * wd) = 2.0 * 0.95.
        assert!((params[0] - 1.9).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.01);
        let mut params = [0.0];
        opt.step(&mut params, &[1.0]);
        // Bias correction at t=1 makes m_hat = g and v_hat = g^2.
        let expected = -0.01 * (1.0 / (1.0 + 1e-8));
        assert!((params[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn sgd_step_is_plain_descent() {
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.5);
        let mut params = [3.0];
        opt.step(&mut params, &[2.0]);
        assert_eq!(params, [2.0]);
    }

    #[test]
    fn adamw_decays_faster_than_adam_on_same_gradients() {
        let mut adam = Optimizer::new(OptimizerKind::Adam, 0.1);
        let mut adamw = Optimizer::new(OptimizerKind::AdamW, 0.1).with_weight_decay(0.1);
        let mut pa = [2.0];
        let mut pw = [2.0];
        for _ in 0..10 {
            adam.step(&mut pa, &[1.0]);
            adamw.step(&mut pw, &[1.0]);
        }
        assert!(pw[0].abs() < pa[0].abs());
    }

    #[test]
    fn optimizer_converges_on_quadratic() {
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.1);
        let mut params = [5.0, -3.0];
        for _ in 0..200 {
            let grads = [2.0 * params[0], 2.0 * params[1]];
            opt.step(&mut params, &grads);
        }
        assert!(params[0].abs() < 0.05 && params[1].abs() < 0.05);
    }
}
