//! Seeded weight initialization.

use crate::math;
use crate::matrix::Matrix;
use crate::rng::Rng;

/// Uniform Glorot initialization: entries drawn row-major from
/// `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform(rows: usize, cols: usize, fan_in: usize, fan_out: usize, rng: &mut Rng) -> Matrix {
    let bound = math::sqrt(6.0 / (fan_in + fan_out) as f64);
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-bound, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_and_determinism() {
        let mut rng = Rng::from_seed(4);
        let m = glorot_uniform(10, 20, 20, 10, &mut rng);
        let bound = math::sqrt(6.0 / 30.0);
        assert!(m.as_slice().iter().all(|&x| x.abs() <= bound));
        let mut rng2 = Rng::from_seed(4);
        let m2 = glorot_uniform(10, 20, 20, 10, &mut rng2);
        assert_eq!(m, m2);
    }
}
