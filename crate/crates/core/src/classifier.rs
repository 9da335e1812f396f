//! Three-class attack-shape classifier: two stacked bidirectional LSTM
//! layers, a ReLU dense layer with dropout, and a softmax head, trained
//! with label-smoothed cross-entropy, AdamW, and accuracy-monitored early
//! stopping.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureError, ScalerParams, SequenceWindow, SplitMode};
use crate::matrix::Matrix;
use crate::nn::{
    cross_entropy_smoothed, dropout_backward, dropout_forward, one_hot, Activation, BiLstm,
    Dense, DropoutMode, LstmCellParams, LstmGrads, NnError, Optimizer, OptimizerKind,
};
use crate::rng::{derive_seed, Rng};

pub const CLASS_COUNT: usize = 3;

const PREDICT_CHUNK: usize = 512;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("max_epochs must be at least 1")]
    ZeroEpochs,
    #[error("batch_size must be at least 1")]
    ZeroBatch,
    #[error("early-stopping patience must be at least 1")]
    ZeroPatience,
    #[error("label_smoothing must lie in [0, 1), got {0}")]
    BadSmoothing(f64),
    #[error("windows are empty")]
    NoWindows,
    #[error("class {0} is absent from the window targets")]
    MissingClass(u8),
    #[error("window {index} has shape {got_rows}x{got_cols}, expected {rows}x{cols}")]
    NonUniformWindows {
        index: usize,
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("window feature width {got} does not match the model's {expected}")]
    FeatureWidthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Training hyperparameters; architecture sizes are exposed here so tests
/// and experiments can shrink the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub label_smoothing: f64,
    /// Epochs without a validation-accuracy improvement before stopping.
    pub patience: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub dense_width: usize,
    pub dropout_rate: f64,
    pub split_ratios: (f64, f64, f64),
    pub seed: u64,
}

impl Default for ClassifierTrainConfig {
    fn default() -> Self {
        ClassifierTrainConfig {
            max_epochs: 100,
            batch_size: 128,
            learning_rate: 1e-3,
            weight_decay: 1e-4,
            label_smoothing: 0.1,
            patience: 10,
            hidden1: 64,
            hidden2: 32,
            dense_width: 32,
            dropout_rate: 0.2,
            split_ratios: (0.7, 0.15, 0.15),
            seed: 0,
        }
    }
}

impl ClassifierTrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.max_epochs == 0 {
            return Err(ClassifierError::ZeroEpochs);
        }
        if self.batch_size == 0 {
            return Err(ClassifierError::ZeroBatch);
        }
        if self.patience == 0 {
            return Err(ClassifierError::ZeroPatience);
        }
        if !(0.0..1.0).contains(&self.label_smoothing) {
            return Err(ClassifierError::BadSmoothing(self.label_smoothing));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMeta {
    pub seed: u64,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierEpoch {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

/// Trained classifier carrying the weights of the best validation epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub bilstm_layer_1: BiLstm,
    pub bilstm_layer_2: BiLstm,
    pub dense: Dense,
    pub dropout_rate: f64,
    pub head: Dense,
    pub scaler: ScalerParams,
    pub sequence_length: usize,
    pub meta: ClassifierMeta,
}

impl ClassifierModel {
    fn new_untrained(
        features: usize,
        sequence_length: usize,
        cfg: &ClassifierTrainConfig,
        rng: &mut Rng,
    ) -> Self {
        let bilstm_layer_1 = BiLstm::new(features, cfg.hidden1, rng);
        let bilstm_layer_2 = BiLstm::new(2 * cfg.hidden1, cfg.hidden2, rng);
        let dense = Dense::new(cfg.dense_width, 2 * cfg.hidden2, Activation::ReLU, rng);
        let head = Dense::new(CLASS_COUNT, cfg.dense_width, Activation::Softmax, rng);
        ClassifierModel {
            bilstm_layer_1,
            bilstm_layer_2,
            dense,
            dropout_rate: cfg.dropout_rate,
            head,
            scaler: ScalerParams {
                mins: vec![0.0; features],
                maxs: vec![1.0; features],
            },
            sequence_length,
            meta: ClassifierMeta {
                seed: cfg.seed,
                best_epoch: 0,
                best_val_accuracy: 0.0,
            },
        }
    }

    /// Structural consistency: three classes out, stacked widths chained,
    /// scaler matching the input width.
    pub fn validate(&self) -> Result<(), NnError> {
        let l1 = &self.bilstm_layer_1;
        let l2 = &self.bilstm_layer_2;
        if !l1.is_consistent() || !l2.is_consistent() {
            return Err(NnError::ShapeMismatch {
                context: "classifier BiLSTM parameter blocks",
                expected_rows: l1.hidden_size(),
                expected_cols: l1.input_size(),
                got_rows: 0,
                got_cols: 0,
            });
        }
        if l2.input_size() != 2 * l1.hidden_size() {
            return Err(NnError::ShapeMismatch {
                context: "classifier layer-2 input width",
                expected_rows: l2.hidden_size(),
                expected_cols: 2 * l1.hidden_size(),
                got_rows: l2.hidden_size(),
                got_cols: l2.input_size(),
            });
        }
        if self.dense.input_size() != 2 * l2.hidden_size() {
            return Err(NnError::ShapeMismatch {
                context: "classifier dense input width",
                expected_rows: self.dense.output_size(),
                expected_cols: 2 * l2.hidden_size(),
                got_rows: self.dense.output_size(),
                got_cols: self.dense.input_size(),
            });
        }
        if self.head.output_size() != CLASS_COUNT
            || self.head.input_size() != self.dense.output_size()
        {
            return Err(NnError::ShapeMismatch {
                context: "classifier softmax head",
                expected_rows: CLASS_COUNT,
                expected_cols: self.dense.output_size(),
                got_rows: self.head.output_size(),
                got_cols: self.head.input_size(),
            });
        }
        if self.scaler.feature_count() != l1.input_size() || !self.scaler.is_consistent() {
            return Err(NnError::ShapeMismatch {
                context: "classifier scaler",
                expected_rows: 1,
                expected_cols: l1.input_size(),
                got_rows: 1,
                got_cols: self.scaler.feature_count(),
            });
        }
        Ok(())
    }

    /// Softmax probabilities for a batch of pre-scaled windows, dropout
    /// disabled.
    fn probs_scaled(&self, xs: &[Matrix]) -> Result<Matrix, NnError> {
        let (l1_out, _) = self.bilstm_layer_1.forward(xs)?;
        let (l2_out, _) = self.bilstm_layer_2.forward(&l1_out)?;
        let last = l2_out.last().expect("nonempty sequence");
        let dense_cache = self.dense.forward(last)?;
        let head_cache = self.head.forward(&dense_cache.out)?;
        Ok(head_cache.out)
    }

    /// Predicted classes and probability triples; ties break toward the
    /// lowest class index, inference is deterministic.
    pub fn predict(
        &self,
        windows: &[SequenceWindow],
    ) -> Result<(Vec<u8>, Vec<[f64; CLASS_COUNT]>), ClassifierError> {
        let features = self.bilstm_layer_1.input_size();
        let mut labels = Vec::with_capacity(windows.len());
        let mut probs_out = Vec::with_capacity(windows.len());
        for chunk in windows.chunks(PREDICT_CHUNK) {
            for (index, w) in chunk.iter().enumerate() {
                if w.steps.shape() != (self.sequence_length, features) {
                    return Err(ClassifierError::NonUniformWindows {
                        index,
                        rows: self.sequence_length,
                        cols: features,
                        got_rows: w.steps.rows(),
                        got_cols: w.steps.cols(),
                    });
                }
            }
            let xs = gather_scaled_steps(chunk, self.sequence_length, &self.scaler);
            let probs = self.probs_scaled(&xs)?;
            for r in 0..probs.rows() {
                let row = probs.row(r);
                let mut best = 0usize;
                for c in 1..CLASS_COUNT {
                    if row[c] > row[best] {
                        best = c;
                    }
                }
                labels.push(best as u8);
                probs_out.push([row[0], row[1], row[2]]);
            }
        }
        Ok((labels, probs_out))
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for cell in [
            &self.bilstm_layer_1.fwd,
            &self.bilstm_layer_1.bwd,
            &self.bilstm_layer_2.fwd,
            &self.bilstm_layer_2.bwd,
        ] {
            flatten_lstm(cell, &mut out);
        }
        out.extend_from_slice(self.dense.weights.as_slice());
        out.extend_from_slice(&self.dense.bias);
        out.extend_from_slice(self.head.weights.as_slice());
        out.extend_from_slice(&self.head.bias);
        out
    }

    fn assign_from_flat(&mut self, src: &[f64]) {
        let mut cursor = 0usize;
        for cell in [
            &mut self.bilstm_layer_1.fwd,
            &mut self.bilstm_layer_1.bwd,
            &mut self.bilstm_layer_2.fwd,
            &mut self.bilstm_layer_2.bwd,
        ] {
            assign_lstm(cell, src, &mut cursor);
        }
        copy_into(self.dense.weights.as_mut_slice(), src, &mut cursor);
        copy_vec(&mut self.dense.bias, src, &mut cursor);
        copy_into(self.head.weights.as_mut_slice(), src, &mut cursor);
        copy_vec(&mut self.head.bias, src, &mut cursor);
        debug_assert_eq!(cursor, src.len());
    }
}

fn copy_into(dst: &mut [f64], src: &[f64], cursor: &mut usize) {
    dst.copy_from_slice(&src[*cursor..*cursor + dst.len()]);
    *cursor += dst.len();
}

fn copy_vec(dst: &mut [f64], src: &[f64], cursor: &mut usize) {
    copy_into(dst, src, cursor);
}

/// Flatten order within one cell: w_i, w_f, w_o, w_g, u_i, u_f, u_o, u_g,
/// b_i, b_f, b_o, b_g.
fn flatten_lstm(cell: &LstmCellParams, out: &mut Vec<f64>) {
    for m in [&cell.w_i, &cell.w_f, &cell.w_o, &cell.w_g, &cell.u_i, &cell.u_f, &cell.u_o, &cell.u_g]
    {
        out.extend_from_slice(m.as_slice());
    }
    for b in [&cell.b_i, &cell.b_f, &cell.b_o, &cell.b_g] {
        out.extend_from_slice(b);
    }
}

fn assign_lstm(cell: &mut LstmCellParams, src: &[f64], cursor: &mut usize) {
    for m in [
        &mut cell.w_i,
        &mut cell.w_f,
        &mut cell.w_o,
        &mut cell.w_g,
        &mut cell.u_i,
        &mut cell.u_f,
        &mut cell.u_o,
        &mut cell.u_g,
    ] {
        copy_into(m.as_mut_slice(), src, cursor);
    }
    for b in [&mut cell.b_i, &mut cell.b_f, &mut cell.b_o, &mut cell.b_g] {
        copy_vec(b, src, cursor);
    }
}

fn flatten_lstm_grads(grads: &LstmGrads, out: &mut Vec<f64>) {
    for m in [
        &grads.w_i,
        &grads.w_f,
        &grads.w_o,
        &grads.w_g,
        &grads.u_i,
        &grads.u_f,
        &grads.u_o,
        &grads.u_g,
    ] {
        out.extend_from_slice(m.as_slice());
    }
    for b in [&grads.b_i, &grads.b_f, &grads.b_o, &grads.b_g] {
        out.extend_from_slice(b);
    }
}

/// Stack window steps into one `batch × features` matrix per timestep,
/// scaling on the fly.
fn gather_scaled_steps(
    windows: &[SequenceWindow],
    sequence_length: usize,
    scaler: &ScalerParams,
) -> Vec<Matrix> {
    let features = scaler.feature_count();
    (0..sequence_length)
        .map(|t| {
            let mut step = Matrix::zeros(windows.len(), features);
            for (r, w) in windows.iter().enumerate() {
                let row = step.row_mut(r);
                row.copy_from_slice(w.steps.row(t));
                scaler.transform_row(row);
            }
            step
        })
        .collect()
}

struct ForwardResult {
    loss: f64,
    grads_flat: Vec<f64>,
}

/// One training step over a batch: forward, loss, full BPTT, gradients
/// flattened in the model's parameter order.
fn train_step(
    model: &ClassifierModel,
    xs: &[Matrix],
    targets: &Matrix,
    smoothing: f64,
    dropout_rng: &mut Rng,
) -> Result<ForwardResult, ClassifierError> {
    let steps = xs.len();
    let (l1_out, l1_cache) = model.bilstm_layer_1.forward(xs)?;
    let (l2_out, l2_cache) = model.bilstm_layer_2.forward(&l1_out)?;
    let last = &l2_out[steps - 1];
    let dense_cache = model.dense.forward(last)?;
    let (dropped, mask) = dropout_forward(
        &dense_cache.out,
        model.dropout_rate,
        DropoutMode::Train,
        dropout_rng,
    )?;
    let head_cache = model.head.forward(&dropped)?;
    let (loss, grad_logits) = cross_entropy_smoothed(targets, &head_cache.out, smoothing);

    let (head_grads, grad_dropped) = model.head.backward_from_pre(&head_cache, &grad_logits);
    let grad_dense_out = dropout_backward(&grad_dropped, &mask);
    let (dense_grads, grad_last) = model.dense.backward(&dense_cache, &grad_dense_out);

    let batch = targets.rows();
    let mut grad_l2_seq = vec![Matrix::zeros(batch, model.bilstm_layer_2.output_size()); steps];
    grad_l2_seq[steps - 1] = grad_last;
    let (l2_grads, grad_l1_seq) = model.bilstm_layer_2.backward(&l2_cache, &grad_l2_seq);
    let (l1_grads, _) = model.bilstm_layer_1.backward(&l1_cache, &grad_l1_seq);

    let mut grads_flat = Vec::new();
    flatten_lstm_grads(&l1_grads.fwd, &mut grads_flat);
    flatten_lstm_grads(&l1_grads.bwd, &mut grads_flat);
    flatten_lstm_grads(&l2_grads.fwd, &mut grads_flat);
    flatten_lstm_grads(&l2_grads.bwd, &mut grads_flat);
    grads_flat.extend_from_slice(dense_grads.weights.as_slice());
    grads_flat.extend_from_slice(&dense_grads.bias);
    grads_flat.extend_from_slice(head_grads.weights.as_slice());
    grads_flat.extend_from_slice(&head_grads.bias);

    Ok(ForwardResult { loss, grads_flat })
}

fn check_uniform_windows(windows: &[SequenceWindow]) -> Result<(usize, usize), ClassifierError> {
    let first = windows.first().ok_or(ClassifierError::NoWindows)?;
    let shape = first.steps.shape();
    for (index, w) in windows.iter().enumerate() {
        if w.steps.shape() != shape {
            return Err(ClassifierError::NonUniformWindows {
                index,
                rows: shape.0,
                cols: shape.1,
                got_rows: w.steps.rows(),
                got_cols: w.steps.cols(),
            });
        }
    }
    Ok(shape)
}

/// Train with a stratified train/validation/test split, checkpointing the
/// weights of the best validation epoch and stopping once `patience`
/// epochs pass without improvement.
///
/// Returns the model restored to its best epoch, the history, and the
/// indices of the held-out test windows.
#[allow(clippy::type_complexity)]
pub fn train_classifier(
    windows: &[SequenceWindow],
    cfg: &ClassifierTrainConfig,
) -> Result<(ClassifierModel, Vec<ClassifierEpoch>, Vec<usize>), ClassifierError> {
    cfg.validate()?;
    let (sequence_length, features) = check_uniform_windows(windows)?;
    let targets: Vec<u8> = windows.iter().map(|w| w.target_label).collect();
    for class in 0..CLASS_COUNT as u8 {
        if !targets.contains(&class) {
            return Err(ClassifierError::MissingClass(class));
        }
    }

    let ratios = [
        cfg.split_ratios.0,
        cfg.split_ratios.1,
        cfg.split_ratios.2,
    ];
    let parts = crate::features::split(
        &targets,
        &ratios,
        SplitMode::Stratified,
        derive_seed(cfg.seed, "split"),
    )?;
    let (train_idx, val_idx, test_idx) = (&parts[0], &parts[1], &parts[2]);

    // Scaler fitted on training windows only, without materializing the
    // step rows.
    let mut mins = vec![f64::INFINITY; features];
    let mut maxs = vec![f64::NEG_INFINITY; features];
    for &i in train_idx {
        let steps = &windows[i].steps;
        for t in 0..sequence_length {
            for (c, &x) in steps.row(t).iter().enumerate() {
                mins[c] = mins[c].min(x);
                maxs[c] = maxs[c].max(x);
            }
        }
    }
    let scaler = ScalerParams { mins, maxs };

    let mut init_rng = Rng::from_seed(derive_seed(cfg.seed, "init"));
    let mut model = ClassifierModel::new_untrained(features, sequence_length, cfg, &mut init_rng);
    model.scaler = scaler;

    let mut optimizer =
        Optimizer::new(OptimizerKind::AdamW, cfg.learning_rate).with_weight_decay(cfg.weight_decay);
    let mut shuffle_rng = Rng::from_seed(derive_seed(cfg.seed, "shuffle"));
    let mut dropout_rng = Rng::from_seed(derive_seed(cfg.seed, "dropout"));

    let val_windows: Vec<SequenceWindow> = val_idx.iter().map(|&i| windows[i].clone()).collect();
    let val_labels: Vec<u8> = val_idx.iter().map(|&i| targets[i]).collect();

    let mut history = Vec::new();
    let mut best_epoch = 0usize;
    let mut best_accuracy = f64::NEG_INFINITY;
    let mut best_params: Vec<f64> = model.flatten();

    let mut order: Vec<usize> = train_idx.clone();
    for epoch in 1..=cfg.max_epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for batch_idx in order.chunks(cfg.batch_size) {
            let batch: Vec<SequenceWindow> =
                batch_idx.iter().map(|&i| windows[i].clone()).collect();
            let xs = gather_scaled_steps(&batch, sequence_length, &model.scaler);
            let batch_targets = one_hot(
                &batch_idx.iter().map(|&i| targets[i]).collect::<Vec<_>>(),
                CLASS_COUNT,
            );
            let result = train_step(
                &model,
                &xs,
                &batch_targets,
                cfg.label_smoothing,
                &mut dropout_rng,
            )?;
            loss_sum += result.loss * batch_idx.len() as f64;

            let mut params = model.flatten();
            optimizer.step(&mut params, &result.grads_flat);
            model.assign_from_flat(&params);
        }
        let train_loss = loss_sum / train_idx.len() as f64;

        let (val_predictions, _) = model.predict(&val_windows)?;
        let correct = val_predictions
            .iter()
            .zip(&val_labels)
            .filter(|(p, t)| p == t)
            .count();
        let val_accuracy = correct as f64 / val_labels.len().max(1) as f64;
        history.push(ClassifierEpoch {
            epoch,
            train_loss,
            val_accuracy,
        });

        if val_accuracy > best_accuracy {
            best_accuracy = val_accuracy;
            best_epoch = epoch;
            best_params = model.flatten();
        }
        if epoch - best_epoch >= cfg.patience {
            break;
        }
    }

    model.assign_from_flat(&best_params);
    model.meta = ClassifierMeta {
        seed: cfg.seed,
        best_epoch,
        best_val_accuracy: best_accuracy,
    };
    Ok((model, history, test_idx.clone()))
}
