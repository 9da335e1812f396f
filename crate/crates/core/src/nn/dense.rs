//! Fully connected layer over batches of row vectors.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::init::glorot_uniform;
use super::NnError;
use crate::matrix::Matrix;
use crate::rng::Rng;

/// Weights are `out × in`; a batch forward computes `a = act(x·Wᵀ + b)`
/// with `x` in `batch × in` layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Forward intermediates kept for the backward pass.
pub struct DenseCache {
    pub input: Matrix,
    pub pre: Matrix,
    pub out: Matrix,
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(output: usize, input: usize, activation: Activation, rng: &mut Rng) -> Self {
        Dense {
            weights: glorot_uniform(output, input, input, output, rng),
            bias: vec![0.0; output],
            activation,
        }
    }

    pub fn input_size(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_size(&self) -> usize {
        self.weights.rows()
    }

    pub fn forward(&self, x: &Matrix) -> Result<DenseCache, NnError> {
        if x.cols() != self.input_size() {
            return Err(NnError::ShapeMismatch {
                context: "dense forward input",
                expected_rows: x.rows(),
                expected_cols: self.input_size(),
                got_rows: x.rows(),
                got_cols: x.cols(),
            });
        }
        let mut pre = x.matmul_nt(&self.weights);
        pre.add_row_broadcast(&self.bias);
        let out = self.activation.apply(&pre);
        Ok(DenseCache {
            input: x.clone(),
            pre,
            out,
        })
    }

    /// Backward from the gradient w.r.t. the activation output.
    pub fn backward(&self, cache: &DenseCache, grad_out: &Matrix) -> (DenseGrads, Matrix) {
        let dpre = grad_out.hadamard(&self.activation.derivative(&cache.pre, &cache.out));
        self.backward_from_pre(cache, &dpre)
    }

    /// Backward from the gradient w.r.t. the pre-activation; used by the
    /// fused softmax + cross-entropy path.
    pub fn backward_from_pre(&self, cache: &DenseCache, dpre: &Matrix) -> (DenseGrads, Matrix) {
        let grads = DenseGrads {
            weights: dpre.matmul_tn(&cache.input),
            bias: dpre.col_sums(),
        };
        let dinput = dpre.matmul(&self.weights);
        (grads, dinput)
    }
}

impl DenseGrads {
    pub fn zeros_like(layer: &Dense) -> Self {
        DenseGrads {
            weights: Matrix::zeros(layer.weights.rows(), layer.weights.cols()),
            bias: vec![0.0; layer.bias.len()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer_passes_input_through() {
        let layer = Dense {
            weights: Matrix::from_fn(3, 3, |r, c| if r == c { 1.0 } else { 0.0 }),
            bias: vec![0.0; 3],
            activation: Activation::Identity,
        };
        let x = Matrix::from_vec(2, 3, vec![1.0, -2.0, 3.0, 0.5, 0.0, -1.0]);
        let cache = layer.forward(&x).unwrap();
        assert_eq!(cache.out, x);
    }

    #[test]
    fn scalar_chain_rule() {
        // 1x1 layer: W = [2], b = [1], x = [3] -> a = 7.
        let layer = Dense {
            weights: Matrix::from_vec(1, 1, vec![2.0]),
            bias: vec![1.0],
            activation: Activation::Identity,
        };
        let x = Matrix::from_vec(1, 1, vec![3.0]);
        let cache = layer.forward(&x).unwrap();
        assert_eq!(cache.out[(0, 0)], 7.0);
        let upstream = Matrix::from_vec(1, 1, vec![1.0]);
        let (grads, dx) = layer.backward(&cache, &upstream);
        assert_eq!(grads.weights[(0, 0)], 3.0);
        assert_eq!(grads.bias[0], 1.0);
        assert_eq!(dx[(0, 0)], 2.0);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let mut rng = Rng::from_seed(1);
        let layer = Dense::new(4, 3, Activation::ReLU, &mut rng);
        let x = Matrix::zeros(2, 5);
        assert!(matches!(
            layer.forward(&x),
            Err(NnError::ShapeMismatch { .. })
        ));
    }
}
