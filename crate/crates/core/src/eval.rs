//! Evaluation metrics and the activation × training-size sweep.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::detector::{fit_detector, DetectorTrainConfig};
use crate::features::DetectorRow;
use crate::nn::Activation;
use crate::rng::{derive_seed, derive_seed_indexed, Rng};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("label sequences must be nonempty and of equal length ({truth} vs {predicted})")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("label {0} outside the {1}-class range")]
    LabelOutOfRange(u8, usize),
    #[error("requested training size {requested} exceeds the available pool of {available}")]
    SizeExceedsPool { requested: usize, available: usize },
    #[error("sweep sizes must be ascending")]
    SizesNotAscending,
    #[error("detector training failed: {0}")]
    Training(#[from] crate::detector::DetectorError),
}

/// Fraction of positions where the labels agree.
pub fn accuracy(truth: &[u8], predicted: &[u8]) -> Result<f64, EvalError> {
    if truth.is_empty() || truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    let correct = truth
        .iter()
        .zip(predicted)
        .filter(|(t, p)| t == p)
        .count();
    Ok(correct as f64 / truth.len() as f64)
}

/// Mean squared difference of the numeric labels. For 0/1 labels this is
/// exactly the misclassification rate.
pub fn label_mse(truth: &[u8], predicted: &[u8]) -> Result<f64, EvalError> {
    if truth.is_empty() || truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    let sum: f64 = truth
        .iter()
        .zip(predicted)
        .map(|(&t, &p)| {
            let d = t as f64 - p as f64;
            d * d
        })
        .sum();
    Ok(sum / truth.len() as f64)
}

/// K×K count table; entry `(i, j)` is "true class i predicted as j".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: usize,
    pub counts: Vec<Vec<u64>>,
    pub class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn col_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    /// Per-class `(precision, recall)`; `None` marks an undefined value
    /// (empty predicted column or empty true row) rather than zero.
    pub fn precision_recall(&self) -> Vec<(Option<f64>, Option<f64>)> {
        (0..self.classes)
            .map(|class| {
                let diag = self.counts[class][class] as f64;
                let col = self.col_sum(class);
                let row = self.row_sum(class);
                let precision = (col > 0).then(|| diag / col as f64);
                let recall = (row > 0).then(|| diag / row as f64);
                (precision, recall)
            })
            .collect()
    }
}

/// Count the confusion matrix for `classes` classes.
pub fn confusion(truth: &[u8], predicted: &[u8], classes: usize) -> Result<ConfusionMatrix, EvalError> {
    if truth.is_empty() || truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    let mut counts = vec![vec![0u64; classes]; classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t as usize >= classes {
            return Err(EvalError::LabelOutOfRange(t, classes));
        }
        if p as usize >= classes {
            return Err(EvalError::LabelOutOfRange(p, classes));
        }
        counts[t as usize][p as usize] += 1;
    }
    let class_names = (0..classes)
        .map(|c| match c {
            0 => String::from("normal"),
            1 => String::from("trapezoid"),
            2 => String::from("sigmoid"),
            other => {
                let mut name = String::from("class-");
                name.push((b'0' + (other as u8 % 10)) as char);
                name
            }
        })
        .collect();
    Ok(ConfusionMatrix {
        classes,
        counts,
        class_names,
    })
}

/// One cell of the activation sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub activation: Activation,
    pub train_size: usize,
    pub test_accuracy: f64,
}

/// Result of the activation × training-size experiment, all cells
/// evaluated on one fixed held-out set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub holdout_size: usize,
    pub seed: u64,
}

/// Train one fresh detector per `(activation, size)` cell and score it on
/// a fixed holdout.
///
/// The holdout is a seeded random subset sized `total - max(sizes)`,
/// capped at 20% of the data so small grids keep a sensible evaluation
/// set. Every cell derives its own seed, so the grid is deterministic
/// regardless of evaluation order; the same subsample serves all
/// activations at a given size.
pub fn activation_sweep(
    rows: &[DetectorRow],
    sizes: &[usize],
    activations: &[Activation],
    base_config: &DetectorTrainConfig,
    seed: u64,
) -> Result<SweepResult, EvalError> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::SizesNotAscending);
    }
    let max_size = *sizes.last().expect("at least one size");
    if max_size >= rows.len() {
        return Err(EvalError::SizeExceedsPool {
            requested: max_size,
            available: rows.len(),
        });
    }
    let holdout_size = (rows.len() - max_size).min(rows.len() / 5).max(1);

    let mut shuffle_rng = Rng::from_seed(derive_seed(seed, "holdout"));
    let perm = shuffle_rng.permutation(rows.len());
    let (pool_idx, holdout_idx) = perm.split_at(rows.len() - holdout_size);
    if max_size > pool_idx.len() {
        return Err(EvalError::SizeExceedsPool {
            requested: max_size,
            available: pool_idx.len(),
        });
    }
    let holdout: Vec<DetectorRow> = holdout_idx.iter().map(|&i| rows[i]).collect();
    let holdout_labels: Vec<u8> = holdout.iter().map(|r| r.label).collect();

    let mut cells = Vec::with_capacity(sizes.len() * activations.len());
    for &size in sizes {
        let mut sub_rng = Rng::from_seed(derive_seed_indexed(seed, "subsample", size as u64));
        let mut pool_perm: Vec<usize> = pool_idx.to_vec();
        sub_rng.shuffle(&mut pool_perm);
        let train: Vec<DetectorRow> = pool_perm[..size].iter().map(|&i| rows[i]).collect();
        for (a, &activation) in activations.iter().enumerate() {
            let mut cfg = base_config.clone();
            cfg.activation = activation;
            cfg.seed = derive_seed_indexed(seed, "cell", (size as u64) << 8 | a as u64);
            let model = fit_detector(&train, None, &cfg)?.0;
            let (predicted, _) = model.predict(&holdout);
            let test_accuracy = accuracy(&holdout_labels, &predicted)?;
            cells.push(SweepCell {
                activation,
                train_size: size,
                test_accuracy,
            });
        }
    }
    Ok(SweepResult {
        cells,
        holdout_size,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_matches_paper_detection_figure() {
        // 9,768 correct of 10,000 is the paper's 97.68% operating point.
        let truth: Vec<u8> = vec![0; 10_000];
        let mut predicted = truth.clone();
        for p in predicted.iter_mut().take(232) {
            *p = 1;
        }
        let acc = accuracy(&truth, &predicted).unwrap();
        assert!((acc - 0.9768).abs() < 1e-12);
        let mse = label_mse(&truth, &predicted).unwrap();
        assert!((mse - 0.0232).abs() < 1e-12);
        assert!((mse - (1.0 - acc)).abs() < 1e-15);
    }

    #[test]
    fn accuracy_trivial_cases() {
        let labels = [0u8, 1, 2, 1];
        assert_eq!(accuracy(&labels, &labels).unwrap(), 1.0);
        assert!(accuracy(&labels, &[0]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn accuracy_equals_confusion_trace_ratio() {
        let truth = [0u8, 1, 2, 2, 1, 0, 0, 2];
        let predicted = [0u8, 2, 2, 0, 1, 0, 1, 2];
        let acc = accuracy(&truth, &predicted).unwrap();
        let cm = confusion(&truth, &predicted, 3).unwrap();
        assert_eq!(acc, cm.trace() as f64 / cm.total() as f64);
    }

    #[test]
    fn label_mse_multiclass_squared_distance() {
        assert_eq!(label_mse(&[2], &[0]).unwrap(), 4.0);
        assert_eq!(label_mse(&[1, 1], &[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn binary_label_mse_is_accuracy_complement() {
        let mut rng = Rng::from_seed(3);
        let truth: Vec<u8> = (0..500).map(|_| (rng.next_u64() % 2) as u8).collect();
        let predicted: Vec<u8> = (0..500).map(|_| (rng.next_u64() % 2) as u8).collect();
        let acc = accuracy(&truth, &predicted).unwrap();
        let mse = label_mse(&truth, &predicted).unwrap();
        assert!((mse - (1.0 - acc)).abs() < 1e-15);
    }

    #[test]
    fn perfect_confusion_is_diagonal_with_unit_metrics() {
        let truth = [0u8, 1, 2, 0, 1, 2];
        let cm = confusion(&truth, &truth, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(cm.counts[i][j], if i == j { 2 } else { 0 });
            }
        }
        for (precision, recall) in cm.precision_recall() {
            assert_eq!(precision, Some(1.0));
            assert_eq!(recall, Some(1.0));
        }
    }

    /// Brute-force double-loop recount oracle.
    #[test]
    fn confusion_counts_match_naive_recount() {
        let mut rng = Rng::from_seed(9);
        let truth: Vec<u8> = (0..400).map(|_| (rng.next_u64() % 3) as u8).collect();
        let predicted: Vec<u8> = (0..400).map(|_| (rng.next_u64() % 3) as u8).collect();
        let cm = confusion(&truth, &predicted, 3).unwrap();
        for i in 0..3u8 {
            for j in 0..3u8 {
                let naive = truth
                    .iter()
                    .zip(&predicted)
                    .filter(|(&t, &p)| t == i && p == j)
                    .count() as u64;
                assert_eq!(cm.counts[i as usize][j as usize], naive);
            }
        }
        // Row sums are true-class counts; grand total is the sample count.
        for class in 0..3u8 {
            let true_count = truth.iter().filter(|&&t| t == class).count() as u64;
            assert_eq!(cm.row_sum(class as usize), true_count);
        }
        assert_eq!(cm.total(), 400);
    }

    #[test]
    fn paper_trapezoid_row_off_diagonal_rate() {
        // 264 off-diagonal of a 3,220-row class is the paper's 8.2%.
        let off_diagonal = 264.0f64;
        let row_total = 3220.0f64;
        assert!((off_diagonal / row_total - 0.082).abs() < 5e-4);
    }

    #[test]
    fn undefined_precision_is_none_not_zero() {
        // Nothing predicted as class 2: its precision is undefined.
        let truth = [0u8, 1, 2, 2];
        let predicted = [0u8, 1, 0, 1];
        let cm = confusion(&truth, &predicted, 3).unwrap();
        let pr = cm.precision_recall();
        assert_eq!(pr[2].0, None);
        assert_eq!(pr[2].1, Some(0.0));
    }

    #[test]
    fn confusion_rejects_out_of_range_labels() {
        assert!(matches!(
            confusion(&[3], &[0], 3).unwrap_err(),
            EvalError::LabelOutOfRange(3, 3)
        ));
    }
}
