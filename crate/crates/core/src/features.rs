//! Feature engineering for both models: the detector's 4-feature rows,
//! the classifier's engineered rows, min–max scaling, sliding windows,
//! and dataset splits.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::datagen::{MeterReading, TariffSchedule};
use crate::math;
use crate::matrix::Matrix;
use crate::rng::Rng;

/// Guard against division by zero-cost intervals.
pub const RATIO_EPSILON: f64 = 1e-9;

pub const DETECTOR_FEATURES: usize = 4;
pub const CLASSIFIER_FEATURES: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("cannot fit a scaler on an empty row set")]
    EmptyFit,
    #[error("scaler has {expected} features but rows have {got}")]
    FeatureWidthMismatch { expected: usize, got: usize },
    #[error("need more rows than the window length: {rows} rows, window {window}")]
    TooFewRowsForWindows { rows: usize, window: usize },
    #[error("split ratios must sum to 1, got {0}")]
    RatiosDoNotSumToOne(f64),
    #[error("split ratios must be nonnegative")]
    NegativeRatio,
}

/// Input row for the binary detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorRow {
    pub energy_kwh: f64,
    pub cost: f64,
    pub hour: f64,
    pub day_of_month: u32,
    pub label: u8,
}

impl DetectorRow {
    pub fn features(&self) -> [f64; DETECTOR_FEATURES] {
        [
            self.energy_kwh,
            self.cost,
            self.hour,
            self.day_of_month as f64,
        ]
    }
}

/// Engineered row for the classifier: raw time features plus cyclical
/// encodings, the energy-to-cost ratio, and a peak-hour indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierRow {
    pub energy_kwh: f64,
    pub cost: f64,
    pub hour: f64,
    pub day_of_month: u32,
    pub sin_hour: f64,
    pub cos_hour: f64,
    pub sin_day: f64,
    pub cos_day: f64,
    pub energy_cost_ratio: f64,
    pub peak_flag: u8,
    pub label: u8,
}

impl ClassifierRow {
    pub fn features(&self) -> [f64; CLASSIFIER_FEATURES] {
        [
            self.energy_kwh,
            self.cost,
            self.hour,
            self.day_of_month as f64,
            self.sin_hour,
            self.cos_hour,
            self.sin_day,
            self.cos_day,
            self.energy_cost_ratio,
            self.peak_flag as f64,
        ]
    }
}

/// One row per record, binary label, order preserved.
pub fn detector_features(dataset: &[MeterReading]) -> Vec<DetectorRow> {
    dataset
        .iter()
        .map(|rec| DetectorRow {
            energy_kwh: rec.energy_kwh,
            cost: rec.cost,
            hour: rec.hour,
            day_of_month: rec.day_of_month,
            label: rec.label_binary,
        })
        .collect()
}

/// One engineered row per record, multi-class label, order preserved.
pub fn classifier_features(
    dataset: &[MeterReading],
    tariff: &TariffSchedule,
) -> Vec<ClassifierRow> {
    dataset
        .iter()
        .map(|rec| {
            let hour_phase = 2.0 * math::PI * rec.hour / 24.0;
            let day_phase = 2.0 * math::PI * (rec.day_of_month as f64 - 1.0) / 31.0;
            ClassifierRow {
                energy_kwh: rec.energy_kwh,
                cost: rec.cost,
                hour: rec.hour,
                day_of_month: rec.day_of_month,
                sin_hour: math::sin(hour_phase),
                cos_hour: math::cos(hour_phase),
                sin_day: math::sin(day_phase),
                cos_day: math::cos(day_phase),
                energy_cost_ratio: rec.energy_kwh / (rec.cost + RATIO_EPSILON),
                peak_flag: u8::from(tariff.peak_window.contains(rec.hour)),
                label: rec.label_multiclass,
            }
        })
        .collect()
}

/// Stack detector rows into a feature matrix plus label vector.
pub fn detector_matrix(rows: &[DetectorRow]) -> (Matrix, Vec<u8>) {
    let mut m = Matrix::zeros(rows.len(), DETECTOR_FEATURES);
    let mut labels = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        m.row_mut(r).copy_from_slice(&row.features());
        labels.push(row.label);
    }
    (m, labels)
}

/// Stack classifier rows into a feature matrix plus label vector.
pub fn classifier_matrix(rows: &[ClassifierRow]) -> (Matrix, Vec<u8>) {
    let mut m = Matrix::zeros(rows.len(), CLASSIFIER_FEATURES);
    let mut labels = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        m.row_mut(r).copy_from_slice(&row.features());
        labels.push(row.label);
    }
    (m, labels)
}

/// Per-feature min–max bounds fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl ScalerParams {
    /// Fit on the given rows. Features where `mask` is false keep an
    /// identity mapping; constant features map to 0.
    pub fn fit(rows: &Matrix, mask: &[bool]) -> Result<Self, FeatureError> {
        if rows.rows() == 0 {
            return Err(FeatureError::EmptyFit);
        }
        if mask.len() != rows.cols() {
            return Err(FeatureError::FeatureWidthMismatch {
                expected: mask.len(),
                got: rows.cols(),
            });
        }
        let mut mins = vec![f64::INFINITY; rows.cols()];
        let mut maxs = vec![f64::NEG_INFINITY; rows.cols()];
        for r in 0..rows.rows() {
            for (c, &x) in rows.row(r).iter().enumerate() {
                mins[c] = mins[c].min(x);
                maxs[c] = maxs[c].max(x);
            }
        }
        for c in 0..rows.cols() {
            if !mask[c] {
                mins[c] = 0.0;
                maxs[c] = 1.0;
            }
        }
        Ok(ScalerParams { mins, maxs })
    }

    pub fn feature_count(&self) -> usize {
        self.mins.len()
    }

    /// Scale one row in place: `(x - min) / (max - min)`, with constant
    /// features mapped to 0. Values outside the fitted range are allowed
    /// to leave `[0, 1]`.
    pub fn transform_row(&self, row: &mut [f64]) {
        for (c, x) in row.iter_mut().enumerate() {
            let span = self.maxs[c] - self.mins[c];
            *x = if span == 0.0 {
                0.0
            } else {
                (*x - self.mins[c]) / span
            };
        }
    }

    pub fn transform(&self, rows: &mut Matrix) -> Result<(), FeatureError> {
        if rows.cols() != self.feature_count() {
            return Err(FeatureError::FeatureWidthMismatch {
                expected: self.feature_count(),
                got: rows.cols(),
            });
        }
        for r in 0..rows.rows() {
            self.transform_row(rows.row_mut(r));
        }
        Ok(())
    }

    /// Undo `transform_row`; constant features recover their fitted min.
    pub fn inverse_transform_row(&self, row: &mut [f64]) {
        for (c, x) in row.iter_mut().enumerate() {
            let span = self.maxs[c] - self.mins[c];
            *x = if span == 0.0 {
                self.mins[c]
            } else {
                self.mins[c] + *x * span
            };
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.mins.len() == self.maxs.len()
            && self.mins.iter().zip(&self.maxs).all(|(lo, hi)| hi >= lo)
    }
}

/// A fixed-length slice of consecutive rows predicting the label of the
/// row immediately after it.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceWindow {
    /// `L × F` feature matrix.
    pub steps: Matrix,
    pub target_label: u8,
}

/// Stride-1 windows: window `i` covers rows `[i, i+L)` and targets the
/// label of row `i+L`. Yields `N - L` windows.
pub fn make_windows(
    rows: &Matrix,
    labels: &[u8],
    window_len: usize,
) -> Result<Vec<SequenceWindow>, FeatureError> {
    let n = rows.rows();
    assert_eq!(n, labels.len(), "row/label length mismatch");
    if n <= window_len {
        return Err(FeatureError::TooFewRowsForWindows {
            rows: n,
            window: window_len,
        });
    }
    let mut out = Vec::with_capacity(n - window_len);
    for i in 0..n - window_len {
        let mut steps = Matrix::zeros(window_len, rows.cols());
        for t in 0..window_len {
            steps.row_mut(t).copy_from_slice(rows.row(i + t));
        }
        out.push(SequenceWindow {
            steps,
            target_label: labels[i + window_len],
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// One seeded permutation of all items.
    Shuffled,
    /// Per-class proportional allocation, each class shuffled separately.
    Stratified,
}

fn validate_ratios(ratios: &[f64]) -> Result<(), FeatureError> {
    if ratios.iter().any(|&r| r < 0.0) {
        return Err(FeatureError::NegativeRatio);
    }
    let sum: f64 = ratios.iter().sum();
    if math::abs(sum - 1.0) > 1e-9 {
        return Err(FeatureError::RatiosDoNotSumToOne(sum));
    }
    Ok(())
}

/// Cut points from cumulative rounded ratios; per-group sizes deviate
/// from the exact proportions by at most one item.
fn cut_points(n: usize, ratios: &[f64]) -> Vec<usize> {
    let mut cuts = Vec::with_capacity(ratios.len());
    let mut cum = 0.0;
    for &r in ratios {
        cum += r;
        cuts.push(libm::round(cum * n as f64) as usize);
    }
    *cuts.last_mut().unwrap() = n;
    cuts
}

/// Partition item indices `0..labels.len()` by the given ratios.
///
/// Returns one index list per ratio. Deterministic in the seed.
pub fn split(
    labels: &[u8],
    ratios: &[f64],
    mode: SplitMode,
    seed: u64,
) -> Result<Vec<Vec<usize>>, FeatureError> {
    validate_ratios(ratios)?;
    let mut rng = Rng::from_seed(seed);
    let mut partitions: Vec<Vec<usize>> = vec![Vec::new(); ratios.len()];
    match mode {
        SplitMode::Shuffled => {
            let perm = rng.permutation(labels.len());
            let cuts = cut_points(labels.len(), ratios);
            let mut start = 0;
            for (p, &end) in partitions.iter_mut().zip(&cuts) {
                p.extend_from_slice(&perm[start..end]);
                start = end;
            }
        }
        SplitMode::Stratified => {
            let mut classes: Vec<u8> = labels.to_vec();
            classes.sort_unstable();
            classes.dedup();
            for class in classes {
                let mut idx: Vec<usize> = labels
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l == class)
                    .map(|(i, _)| i)
                    .collect();
                rng.shuffle(&mut idx);
                let cuts = cut_points(idx.len(), ratios);
                let mut start = 0;
                for (p, &end) in partitions.iter_mut().zip(&cuts) {
                    p.extend_from_slice(&idx[start..end]);
                    start = end;
                }
            }
        }
    }
    Ok(partitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{self, AttackSpec, LoadModelConfig};

    fn reading(energy: f64, cost: f64, hour: f64, dom: u32, multi: u8) -> MeterReading {
        MeterReading {
            interval_index: (hour * 6.0) as u32,
            day_of_year: 1,
            day_of_month: dom,
            hour,
            energy_kwh: energy,
            price_per_kwh: if energy > 0.0 { cost / energy } else { 0.0 },
            cost,
            injected_delta_kwh: 0.0,
            label_multiclass: multi,
            label_binary: multi.min(1),
        }
    }

    #[test]
    fn detector_projection_preserves_fields_and_order() {
        let data = [reading(0.4, 0.10, 15.0, 12, 1)];
        let rows = detector_features(&data);
        assert_eq!(rows.len(), 1);
        let row = rows[0];
        assert_eq!(
            (row.energy_kwh, row.cost, row.hour, row.day_of_month, row.label),
            (0.4, 0.10, 15.0, 12, 1)
        );
        assert!(detector_features(&[]).is_empty());
    }

    #[test]
    fn detector_features_full_dataset_count() {
        let (records, _) = datagen::assemble_year(
            &LoadModelConfig::default(),
            &TariffSchedule::default(),
            &AttackSpec::trapezoid_defaults(),
            &AttackSpec::sigmoid_defaults(),
            42,
        )
        .unwrap();
        assert_eq!(detector_features(&records).len(), 52_560);
    }

    #[test]
    fn cyclical_encodings_at_quarter_points() {
        let tariff = TariffSchedule::default();
        let rows = classifier_features(
            &[reading(0.4, 0.04, 0.0, 1, 0), reading(0.4, 0.04, 6.0, 1, 0)],
            &tariff,
        );
        assert!((rows[0].sin_hour - 0.0).abs() < 1e-12);
        assert!((rows[0].cos_hour - 1.0).abs() < 1e-12);
        assert!((rows[1].sin_hour - 1.0).abs() < 1e-12);
        assert!((rows[1].cos_hour - 0.0).abs() < 1e-12);
        // Day 1 maps to phase 0.
        assert!((rows[0].sin_day - 0.0).abs() < 1e-12);
        assert!((rows[0].cos_day - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_and_peak_flag() {
        let tariff = TariffSchedule::default();
        let rows = classifier_features(
            &[reading(0.4, 0.04, 3.0, 5, 0), reading(0.4, 0.10, 15.0, 5, 1)],
            &tariff,
        );
        assert!((rows[0].energy_cost_ratio - 10.0).abs() < 1e-6);
        assert_eq!(rows[0].peak_flag, 0);
        assert_eq!(rows[1].peak_flag, 1);
        // Zero cost is guarded by the epsilon.
        let zero = classifier_features(&[reading(0.0, 0.0, 1.0, 5, 0)], &tariff);
        assert_eq!(zero[0].energy_cost_ratio, 0.0);
    }

    #[test]
    fn cyclical_identity_over_generated_year() {
        let (records, _) = datagen::assemble_year(
            &LoadModelConfig::default(),
            &TariffSchedule::default(),
            &AttackSpec::trapezoid_defaults(),
            &AttackSpec::sigmoid_defaults(),
            7,
        )
        .unwrap();
        let tariff = TariffSchedule::default();
        for row in classifier_features(&records, &tariff) {
            let h = row.sin_hour * row.sin_hour + row.cos_hour * row.cos_hour;
            let d = row.sin_day * row.sin_day + row.cos_day * row.cos_day;
            assert!((h - 1.0).abs() < 1e-12);
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaler_basic_and_degenerate() {
        let m = Matrix::from_vec(3, 2, alloc::vec![2.0, 5.0, 4.0, 5.0, 6.0, 5.0]);
        let scaler = ScalerParams::fit(&m, &[true, true]).unwrap();
        let mut scaled = m.clone();
        scaler.transform(&mut scaled).unwrap();
        assert_eq!(scaled.row(0)[0], 0.0);
        assert_eq!(scaled.row(1)[0], 0.5);
        assert_eq!(scaled.row(2)[0], 1.0);
        // Constant feature maps to 0.
        assert!(scaled.as_slice().iter().skip(1).step_by(2).all(|&x| x == 0.0));
    }

    #[test]
    fn scaler_round_trip_recovers_values() {
        let mut rng = Rng::from_seed(9);
        let m = Matrix::from_fn(40, 3, |_, _| rng.uniform(-5.0, 5.0));
        let scaler = ScalerParams::fit(&m, &[true, true, true]).unwrap();
        let mut scaled = m.clone();
        scaler.transform(&mut scaled).unwrap();
        // Training values land in [0, 1].
        assert!(scaled
            .as_slice()
            .iter()
            .all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        for r in 0..m.rows() {
            let mut row = scaled.row(r).to_vec();
            scaler.inverse_transform_row(&mut row);
            for (a, b) in row.iter().zip(m.row(r)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scaler_rejects_empty_and_masks_features() {
        assert_eq!(
            ScalerParams::fit(&Matrix::zeros(0, 2), &[true, true]).unwrap_err(),
            FeatureError::EmptyFit
        );
        let m = Matrix::from_vec(2, 2, alloc::vec![2.0, 7.0, 4.0, 9.0]);
        let scaler = ScalerParams::fit(&m, &[true, false]).unwrap();
        let mut scaled = m.clone();
        scaler.transform(&mut scaled).unwrap();
        // Unmasked feature passes through unchanged.
        assert_eq!(scaled.row(0)[1], 7.0);
        assert_eq!(scaled.row(1)[1], 9.0);
    }

    #[test]
    fn window_counts_and_targets() {
        let rows = Matrix::from_fn(100, 2, |r, c| (r * 2 + c) as f64);
        let labels: Vec<u8> = (0..100).map(|i| (i % 3) as u8).collect();
        let windows = make_windows(&rows, &labels, 8).unwrap();
        assert_eq!(windows.len(), 92);
        assert_eq!(windows[0].target_label, labels[8]);
        assert_eq!(windows[0].steps.row(0), rows.row(0));
        assert_eq!(windows[91].steps.row(7), rows.row(98));
        assert_eq!(windows[91].target_label, labels[99]);

        let nine = Matrix::from_fn(9, 2, |r, c| (r + c) as f64);
        let labels9: Vec<u8> = (0..9).map(|i| (i % 2) as u8).collect();
        let one = make_windows(&nine, &labels9, 8).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].target_label, labels9[8]);

        assert!(matches!(
            make_windows(&nine, &labels9, 9).unwrap_err(),
            FeatureError::TooFewRowsForWindows { .. }
        ));
    }

    #[test]
    fn window_count_law_holds_for_various_lengths() {
        for n in [9usize, 17, 40, 121] {
            let rows = Matrix::from_fn(n, 1, |r, _| r as f64);
            let labels: Vec<u8> = vec![0; n];
            for l in [1usize, 4, 8] {
                if n > l {
                    assert_eq!(make_windows(&rows, &labels, l).unwrap().len(), n - l);
                }
            }
        }
    }

    #[test]
    fn shuffled_split_sizes_and_determinism() {
        let labels = [0u8; 10];
        let parts = split(&labels, &[0.8, 0.2], SplitMode::Shuffled, 3).unwrap();
        assert_eq!(parts[0].len(), 8);
        assert_eq!(parts[1].len(), 2);
        let again = split(&labels, &[0.8, 0.2], SplitMode::Shuffled, 3).unwrap();
        assert_eq!(parts, again);
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn stratified_split_preserves_class_proportions() {
        let mut labels = vec![0u8; 100];
        labels.extend(vec![1u8; 100]);
        labels.extend(vec![2u8; 100]);
        let parts = split(&labels, &[0.7, 0.15, 0.15], SplitMode::Stratified, 5).unwrap();
        for (p, expected) in parts.iter().zip([210, 45, 45]) {
            assert_eq!(p.len(), expected);
        }
        for class in 0..3u8 {
            let per_class: Vec<usize> = parts
                .iter()
                .map(|p| p.iter().filter(|&&i| labels[i] == class).count())
                .collect();
            assert_eq!(per_class, vec![70, 15, 15]);
        }
    }

    #[test]
    fn stratified_split_deviation_at_most_one_per_class() {
        let mut labels = vec![0u8; 97];
        labels.extend(vec![1u8; 53]);
        labels.extend(vec![2u8; 11]);
        let ratios = [0.7, 0.15, 0.15];
        let parts = split(&labels, &ratios, SplitMode::Stratified, 8).unwrap();
        for class in [0u8, 1, 2] {
            let total = labels.iter().filter(|&&l| l == class).count() as f64;
            for (j, part) in parts.iter().enumerate() {
                let got = part.iter().filter(|&&i| labels[i] == class).count() as f64;
                assert!(
                    (got - ratios[j] * total).abs() <= 1.0 + 1e-9,
                    "class {class} part {j}: got {got}, expected ~{}",
                    ratios[j] * total
                );
            }
        }
    }

    #[test]
    fn split_rejects_bad_ratios() {
        assert!(matches!(
            split(&[0u8; 4], &[0.5, 0.4], SplitMode::Shuffled, 1).unwrap_err(),
            FeatureError::RatiosDoNotSumToOne(_)
        ));
    }
}
