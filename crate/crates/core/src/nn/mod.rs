//! From-scratch neural primitives: activations, dense and LSTM layers,
//! bidirectional composition, dropout, losses, optimizers, and a
//! finite-difference gradient checker.
//!
//! Every backward pass returns exact analytic gradients; gradient
//! accumulation over batches and timesteps uses a fixed sequential order,
//! so training is bit-deterministic for a given seed.

pub mod activation;
pub mod dense;
pub mod dropout;
pub mod gradcheck;
pub mod init;
pub mod loss;
pub mod lstm;
pub mod optim;

pub use activation::Activation;
pub use dense::{Dense, DenseCache, DenseGrads};
pub use dropout::{dropout_backward, dropout_forward, DropoutMode};
pub use gradcheck::grad_check;
pub use loss::{cross_entropy_smoothed, mse_loss, one_hot};
pub use lstm::{BiLstm, BiLstmCache, BiLstmGrads, LstmCellParams, LstmGrads, LstmSequenceCache};
pub use optim::{Optimizer, OptimizerKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("{context}: expected shape {expected_rows}x{expected_cols}, got {got_rows}x{got_cols}")]
    ShapeMismatch {
        context: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("sequence input must be nonempty")]
    EmptySequence,
    #[error("dropout rate must lie in [0, 1), got {0}")]
    BadDropoutRate(f64),
}
