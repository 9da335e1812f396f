//! Inverted dropout: training mode zeroes with probability `rate` and
//! scales survivors by `1/(1-rate)`; inference mode is the identity.

use super::NnError;
use crate::matrix::Matrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Inference,
}

/// Returns the masked output plus the mask itself (entries are 0 or
/// `1/(1-rate)`), which the backward pass reuses. Mask draws are one
/// uniform per element, row-major.
pub fn dropout_forward(
    x: &Matrix,
    rate: f64,
    mode: DropoutMode,
    rng: &mut Rng,
) -> Result<(Matrix, Matrix), NnError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::BadDropoutRate(rate));
    }
    if mode == DropoutMode::Inference || rate == 0.0 {
        return Ok((x.clone(), x.map(|_| 1.0)));
    }
    let keep_scale = 1.0 / (1.0 - rate);
    let mask = x.map(|_| {
        if rng.next_f64() < rate {
            0.0
        } else {
            keep_scale
        }
    });
    Ok((x.hadamard(&mask), mask))
}

pub fn dropout_backward(grad: &Matrix, mask: &Matrix) -> Matrix {
    grad.hadamard(mask)
}
