//! Binary FDI detector: a 4-input, 100-hidden-neuron network with one
//! sigmoid output, trained on the half-squared-error loss.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::{detector_matrix, DetectorRow, FeatureError, ScalerParams, SplitMode};
use crate::matrix::Matrix;
use crate::nn::{Activation, Dense, NnError, Optimizer, OptimizerKind};
use crate::rng::{derive_seed, Rng};

pub const INPUT_WIDTH: usize = 4;
pub const HIDDEN_WIDTH: usize = 100;
pub const OUTPUT_WIDTH: usize = 1;

const PREDICT_CHUNK: usize = 8192;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectorError {
    #[error("epochs must be at least 1")]
    ZeroEpochs,
    #[error("batch_size must be at least 1")]
    ZeroBatch,
    #[error("train_ratio must lie in (0, 1), got {0}")]
    BadTrainRatio(f64),
    #[error("need at least {minimum} rows, got {got}")]
    TooFewRows { minimum: usize, got: usize },
    #[error("training rows contain a single class; detection is undefined")]
    SingleClass,
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Training hyperparameters. The sweep overrides only `activation` and
/// `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    /// Fraction of rows used for training; the rest is the test split.
    pub train_ratio: f64,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for DetectorTrainConfig {
    fn default() -> Self {
        DetectorTrainConfig {
            epochs: 50,
            batch_size: 64,
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-3,
            train_ratio: 0.8,
            activation: Activation::ReLU,
            seed: 0,
        }
    }
}

impl DetectorTrainConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        if self.epochs == 0 {
            return Err(DetectorError::ZeroEpochs);
        }
        if self.batch_size == 0 {
            return Err(DetectorError::ZeroBatch);
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(DetectorError::BadTrainRatio(self.train_ratio));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub final_train_loss: f64,
    pub final_test_accuracy: Option<f64>,
}

/// One history row; `test_accuracy` is absent when training ran without
/// an evaluation split (sweep cells).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_accuracy: Option<f64>,
}

/// Trained detector with its embedded scaler and decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub hidden: Dense,
    pub output: Dense,
    pub scaler: ScalerParams,
    /// Scores strictly above this become label 1.
    pub threshold: f64,
    pub meta: DetectorMeta,
}

impl DetectorModel {
    /// Architecture lock: exactly 4 → 100 → 1, plus a 4-feature scaler.
    pub fn validate(&self) -> Result<(), NnError> {
        let checks = [
            ("detector hidden layer", &self.hidden, HIDDEN_WIDTH, INPUT_WIDTH),
            ("detector output layer", &self.output, OUTPUT_WIDTH, HIDDEN_WIDTH),
        ];
        for (context, layer, rows, cols) in checks {
            if layer.weights.shape() != (rows, cols)
                || !layer.weights.is_consistent()
                || layer.bias.len() != rows
            {
                return Err(NnError::ShapeMismatch {
                    context,
                    expected_rows: rows,
                    expected_cols: cols,
                    got_rows: layer.weights.rows(),
                    got_cols: layer.weights.cols(),
                });
            }
        }
        if self.scaler.feature_count() != INPUT_WIDTH || !self.scaler.is_consistent() {
            return Err(NnError::ShapeMismatch {
                context: "detector scaler",
                expected_rows: 1,
                expected_cols: INPUT_WIDTH,
                got_rows: 1,
                got_cols: self.scaler.feature_count(),
            });
        }
        Ok(())
    }

    /// Raw sigmoid scores for already scaled features.
    fn scores_scaled(&self, x: &Matrix) -> Result<Vec<f64>, NnError> {
        let hidden = self.hidden.forward(x)?;
        let out = self.output.forward(&hidden.out)?;
        Ok(out.out.as_slice().to_vec())
    }

    /// Predict labels and raw scores; label 1 iff `score > threshold`.
    pub fn predict(&self, rows: &[DetectorRow]) -> (Vec<u8>, Vec<f64>) {
        let mut labels = Vec::with_capacity(rows.len());
        let mut scores = Vec::with_capacity(rows.len());
        for chunk in rows.chunks(PREDICT_CHUNK) {
            let (mut x, _) = detector_matrix(chunk);
            self.scaler
                .transform(&mut x)
                .expect("detector scaler width is validated at construction");
            let chunk_scores = self
                .scores_scaled(&x)
                .expect("detector architecture is validated at construction");
            for s in chunk_scores {
                labels.push(u8::from(s > self.threshold));
                scores.push(s);
            }
        }
        (labels, scores)
    }
}

fn flatten_dense(layer: &Dense, out: &mut Vec<f64>) {
    out.extend_from_slice(layer.weights.as_slice());
    out.extend_from_slice(&layer.bias);
}

fn assign_dense(layer: &mut Dense, src: &[f64], cursor: &mut usize) {
    let w = layer.weights.as_mut_slice();
    w.copy_from_slice(&src[*cursor..*cursor + w.len()]);
    *cursor += w.len();
    let b = layer.bias.len();
    layer.bias.copy_from_slice(&src[*cursor..*cursor + b]);
    *cursor += b;
}

/// Fit a detector on `train` and optionally track accuracy on `eval`
/// after each epoch. `train` must already be the training partition.
pub fn fit_detector(
    train: &[DetectorRow],
    eval: Option<&[DetectorRow]>,
    cfg: &DetectorTrainConfig,
) -> Result<(DetectorModel, Vec<EpochStats>), DetectorError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(DetectorError::TooFewRows {
            minimum: 2,
            got: 0,
        });
    }
    let has_both = train.iter().any(|r| r.label == 0) && train.iter().any(|r| r.label != 0);
    if !has_both {
        return Err(DetectorError::SingleClass);
    }

    let (mut x_train, train_labels) = detector_matrix(train);
    let scaler = ScalerParams::fit(&x_train, &[true; INPUT_WIDTH])?;
    scaler.transform(&mut x_train)?;
    let y_train = Matrix::from_fn(train.len(), 1, |r, _| train_labels[r] as f64);

    let eval_scaled = match eval {
        Some(rows) => {
            let (mut x, labels) = detector_matrix(rows);
            scaler.transform(&mut x)?;
            Some((x, labels))
        }
        None => None,
    };

    let mut init_rng = Rng::from_seed(derive_seed(cfg.seed, "init"));
    let mut hidden = Dense::new(HIDDEN_WIDTH, INPUT_WIDTH, cfg.activation, &mut init_rng);
    let mut output = Dense::new(OUTPUT_WIDTH, HIDDEN_WIDTH, Activation::Sigmoid, &mut init_rng);

    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.learning_rate);
    let mut shuffle_rng = Rng::from_seed(derive_seed(cfg.seed, "shuffle"));
    let mut history = Vec::with_capacity(cfg.epochs);

    let mut params = Vec::new();
    let mut grads_flat = Vec::new();
    for epoch in 1..=cfg.epochs {
        let order = shuffle_rng.permutation(train.len());
        let mut loss_sum = 0.0;
        for batch_idx in order.chunks(cfg.batch_size) {
            let x = x_train.select_rows(batch_idx);
            let y = y_train.select_rows(batch_idx);
            let hidden_cache = hidden.forward(&x)?;
            let output_cache = output.forward(&hidden_cache.out)?;
            let (loss, grad_out) = crate::nn::mse_loss(&y, &output_cache.out);
            loss_sum += loss * batch_idx.len() as f64;

            let (output_grads, grad_hidden_out) = output.backward(&output_cache, &grad_out);
            let (hidden_grads, _) = hidden.backward(&hidden_cache, &grad_hidden_out);

            params.clear();
            flatten_dense(&hidden, &mut params);
            flatten_dense(&output, &mut params);
            grads_flat.clear();
            grads_flat.extend_from_slice(hidden_grads.weights.as_slice());
            grads_flat.extend_from_slice(&hidden_grads.bias);
            grads_flat.extend_from_slice(output_grads.weights.as_slice());
            grads_flat.extend_from_slice(&output_grads.bias);

            optimizer.step(&mut params, &grads_flat);
            let mut cursor = 0;
            assign_dense(&mut hidden, &params, &mut cursor);
            assign_dense(&mut output, &params, &mut cursor);
        }
        let train_loss = loss_sum / train.len() as f64;

        let test_accuracy = match &eval_scaled {
            Some((x, labels)) => {
                let mut correct = 0usize;
                let probe = DetectorModel {
                    hidden: hidden.clone(),
                    output: output.clone(),
                    scaler: scaler.clone(),
                    threshold: 0.5,
                    meta: DetectorMeta {
                        seed: cfg.seed,
                        epochs_run: epoch,
                        final_train_loss: train_loss,
                        final_test_accuracy: None,
                    },
                };
                for (start, chunk_labels) in
                    labels.chunks(PREDICT_CHUNK).enumerate().map(|(i, c)| (i * PREDICT_CHUNK, c))
                {
                    let rows: Vec<usize> = (start..start + chunk_labels.len()).collect();
                    let scores = probe.scores_scaled(&x.select_rows(&rows))?;
                    for (s, &label) in scores.iter().zip(chunk_labels) {
                        if u8::from(*s > 0.5) == label {
                            correct += 1;
                        }
                    }
                }
                Some(correct as f64 / labels.len() as f64)
            }
            None => None,
        };
        history.push(EpochStats {
            epoch,
            train_loss,
            test_accuracy,
        });
    }

    let last = history.last().expect("at least one epoch");
    let model = DetectorModel {
        hidden,
        output,
        scaler,
        threshold: 0.5,
        meta: DetectorMeta {
            seed: cfg.seed,
            epochs_run: cfg.epochs,
            final_train_loss: last.train_loss,
            final_test_accuracy: last.test_accuracy,
        },
    };
    Ok((model, history))
}

/// Split 80/20 (seeded shuffle), fit on the training side, and report
/// per-epoch accuracy on the held-out side.
#[allow(clippy::type_complexity)]
pub fn train_detector(
    rows: &[DetectorRow],
    cfg: &DetectorTrainConfig,
) -> Result<(DetectorModel, Vec<EpochStats>, Vec<usize>), DetectorError> {
    cfg.validate()?;
    if rows.len() < 100 {
        return Err(DetectorError::TooFewRows {
            minimum: 100,
            got: rows.len(),
        });
    }
    let labels: Vec<u8> = rows.iter().map(|r| r.label).collect();
    if !(labels.iter().any(|&l| l == 0) && labels.iter().any(|&l| l != 0)) {
        return Err(DetectorError::SingleClass);
    }
    let parts = crate::features::split(
        &labels,
        &[cfg.train_ratio, 1.0 - cfg.train_ratio],
        SplitMode::Shuffled,
        derive_seed(cfg.seed, "split"),
    )?;
    let train: Vec<DetectorRow> = parts[0].iter().map(|&i| rows[i]).collect();
    let test: Vec<DetectorRow> = parts[1].iter().map(|&i| rows[i]).collect();
    let (model, history) = fit_detector(&train, Some(&test), cfg)?;
    Ok((model, history, parts[1].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two well-separated energy populations; attack rows carry roughly
    /// ten times the normal consumption.
    fn separable_rows(n_per_class: usize, seed: u64) -> Vec<DetectorRow> {
        let mut rng = Rng::from_seed(seed);
        let mut rows = Vec::new();
        for i in 0..n_per_class * 2 {
            let attack = i % 2 == 1;
            let energy = if attack {
                rng.uniform(1.0, 2.0)
            } else {
                rng.uniform(0.1, 0.2)
            };
            let hour = rng.uniform(0.0, 24.0);
            rows.push(DetectorRow {
                energy_kwh: energy,
                cost: energy * 0.15,
                hour,
                day_of_month: 1 + (i % 28) as u32,
                label: u8::from(attack),
            });
        }
        rows
    }

    #[test]
    fn separable_toy_reaches_perfect_accuracy() {
        let rows = separable_rows(300, 8);
        let cfg = DetectorTrainConfig {
            epochs: 10,
            seed: 3,
            ..DetectorTrainConfig::default()
        };
        let (model, history, _) = train_detector(&rows, &cfg).unwrap();
        assert_eq!(history.len(), 10);
        let final_acc = history.last().unwrap().test_accuracy.unwrap();
        assert_eq!(final_acc, 1.0, "separable data must be fully detected");
        assert!(history.iter().all(|h| h.train_loss.is_finite()));
        assert!(history.last().unwrap().train_loss < history[0].train_loss);
        model.validate().unwrap();
    }

    #[test]
    fn zero_epochs_rejected() {
        let rows = separable_rows(100, 1);
        let cfg = DetectorTrainConfig {
            epochs: 0,
            ..DetectorTrainConfig::default()
        };
        assert_eq!(
            train_detector(&rows, &cfg).unwrap_err(),
            DetectorError::ZeroEpochs
        );
    }

    #[test]
    fn single_class_rejected() {
        let mut rows = separable_rows(100, 1);
        for r in &mut rows {
            r.label = 0;
        }
        let cfg = DetectorTrainConfig::default();
        assert_eq!(
            train_detector(&rows, &cfg).unwrap_err(),
            DetectorError::SingleClass
        );
    }

    #[test]
    fn too_few_rows_rejected() {
        let rows = separable_rows(10, 1);
        assert!(matches!(
            train_detector(&rows, &DetectorTrainConfig::default()).unwrap_err(),
            DetectorError::TooFewRows { minimum: 100, .. }
        ));
    }

    #[test]
    fn same_seed_reproduces_identical_weights() {
        let rows = separable_rows(150, 4);
        let cfg = DetectorTrainConfig {
            epochs: 3,
            seed: 11,
            ..DetectorTrainConfig::default()
        };
        let (a, _, _) = train_detector(&rows, &cfg).unwrap();
        let (b, _, _) = train_detector(&rows, &cfg).unwrap();
        assert_eq!(a.hidden.weights, b.hidden.weights);
        assert_eq!(a.output.weights, b.output.weights);
        assert_eq!(a.hidden.bias, b.hidden.bias);
        let (labels_a, scores_a) = a.predict(&rows);
        let (labels_b, scores_b) = b.predict(&rows);
        assert_eq!(labels_a, labels_b);
        assert_eq!(scores_a, scores_b);
    }

    #[test]
    fn scores_stay_in_open_unit_interval_and_predictions_repeat() {
        let rows = separable_rows(120, 5);
        let cfg = DetectorTrainConfig {
            epochs: 2,
            ..DetectorTrainConfig::default()
        };
        let (model, _, _) = train_detector(&rows, &cfg).unwrap();
        let (labels, scores) = model.predict(&rows);
        assert!(scores.iter().all(|&s| s > 0.0 && s < 1.0));
        let (labels2, scores2) = model.predict(&rows);
        assert_eq!(labels, labels2);
        assert_eq!(scores, scores2);
    }

    /// A zero-weight network emits exactly 0.5; the strict threshold maps
    /// that to label 0.
    #[test]
    fn boundary_score_maps_to_normal() {
        let model = DetectorModel {
            hidden: Dense {
                weights: Matrix::zeros(HIDDEN_WIDTH, INPUT_WIDTH),
                bias: vec![0.0; HIDDEN_WIDTH],
                activation: Activation::ReLU,
            },
            output: Dense {
                weights: Matrix::zeros(OUTPUT_WIDTH, HIDDEN_WIDTH),
                bias: vec![0.0; OUTPUT_WIDTH],
                activation: Activation::Sigmoid,
            },
            scaler: ScalerParams {
                mins: vec![0.0; INPUT_WIDTH],
                maxs: vec![1.0; INPUT_WIDTH],
            },
            threshold: 0.5,
            meta: DetectorMeta {
                seed: 0,
                epochs_run: 0,
                final_train_loss: 0.0,
                final_test_accuracy: None,
            },
        };
        let rows = separable_rows(5, 2);
        let (labels, scores) = model.predict(&rows);
        assert!(scores.iter().all(|&s| s == 0.5));
        assert!(labels.iter().all(|&l| l == 0));
    }
}
