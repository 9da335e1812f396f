//! Elementwise activations and the stable row-wise softmax.

use serde::{Deserialize, Serialize};

use crate::math;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
    Sigmoid,
    Tanh,
    Softmax,
    Identity,
}

pub fn relu(z: f64) -> f64 {
    z.max(0.0)
}

/// Subgradient convention: `relu'(0) = 0`.
pub fn relu_prime(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + math::exp(-z))
}

/// Derivative expressed through the output `s = sigmoid(z)`.
pub fn sigmoid_prime_from_output(s: f64) -> f64 {
    s * (1.0 - s)
}

pub fn tanh_act(z: f64) -> f64 {
    math::tanh(z)
}

/// Derivative expressed through the output `t = tanh(z)`.
pub fn tanh_prime_from_output(t: f64) -> f64 {
    1.0 - t * t
}

/// In-place softmax with max subtraction for overflow safety.
pub fn softmax_row(row: &mut [f64]) {
    let mut max = f64::NEG_INFINITY;
    for &x in row.iter() {
        max = max.max(x);
    }
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = math::exp(*x - max);
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

impl Activation {
    /// Apply to a whole pre-activation matrix.
    pub fn apply(&self, pre: &Matrix) -> Matrix {
        match self {
            Activation::ReLU => pre.map(relu),
            Activation::Sigmoid => pre.map(sigmoid),
            Activation::Tanh => pre.map(tanh_act),
            Activation::Identity => pre.clone(),
            Activation::Softmax => {
                let mut out = pre.clone();
                for r in 0..out.rows() {
                    softmax_row(out.row_mut(r));
                }
                out
            }
        }
    }

    /// Elementwise derivative, given both the pre-activation and the
    /// output. Softmax has no elementwise derivative; its backward runs
    /// fused with the cross-entropy loss.
    pub fn derivative(&self, pre: &Matrix, out: &Matrix) -> Matrix {
        match self {
            Activation::ReLU => pre.map(relu_prime),
            Activation::Sigmoid => out.map(sigmoid_prime_from_output),
            Activation::Tanh => out.map(tanh_prime_from_output),
            Activation::Identity => pre.map(|_| 1.0),
            Activation::Softmax => {
                panic!("softmax backward must go through the fused cross-entropy gradient")
            }
        }
    }
}
