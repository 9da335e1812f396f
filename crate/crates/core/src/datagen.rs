//! Synthetic year of residential smart-meter data with injected attacks.
//!
//! A seeded closed-form load model produces 10-minute readings for a
//! non-leap 365-day year (day 1 is a Monday). Time-of-use pricing is
//! applied on top, then the year is partitioned into three blocks: six
//! months untouched, three months with trapezoidal injections, three
//! months with sigmoid injections. Each record carries the injected delta
//! and dual labels (multi-class and binary).
//!
//! Reproducibility contract: generation is pure in `(config, seed)`. Every
//! day owns a child RNG stream derived as `day-<doy>` from its component
//! seed, so per-day work could run in any order without changing output.
//! Per-day draw order is documented on each injection function.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::rng::{derive_seed, derive_seed_indexed, Rng};

pub const INTERVALS_PER_DAY: usize = 144;
pub const DAYS_PER_YEAR: u32 = 365;
pub const HOURS_PER_INTERVAL: f64 = 24.0 / INTERVALS_PER_DAY as f64;

/// Day-of-year ranges (inclusive) of the three temporal blocks.
pub const NORMAL_BLOCK: (u32, u32) = (1, 181);
pub const TRAPEZOID_BLOCK: (u32, u32) = (182, 273);
pub const SIGMOID_BLOCK: (u32, u32) = (274, 365);

/// Spike onsets are drawn from this hour range, emulating evening EV
/// charging sessions.
const SPIKE_ONSET_HOURS: (f64, f64) = (18.0, 23.0);

const MONTH_LENGTHS: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatagenError {
    #[error("noise_sigma_kwh must be nonnegative, got {0}")]
    NegativeNoiseSigma(f64),
    #[error("{field} must be positive, got {got}")]
    NonPositiveWidth { field: &'static str, got: f64 },
    #[error("{field} must be nonnegative, got {got}")]
    NegativeAmplitude { field: &'static str, got: f64 },
    #[error("peak_rate {peak} must exceed offpeak_rate {offpeak}")]
    InvertedRates { peak: f64, offpeak: f64 },
    #[error("hour window [{start}, {end}) must satisfy 0 <= start < end <= 24")]
    BadHourWindow { start: f64, end: f64 },
    #[error("magnitude_range low {low} must not exceed high {high}")]
    BadMagnitudeRange { low: f64, high: f64 },
    #[error("ramp_fraction must lie in (0, 0.5), got {0}")]
    BadRampFraction(f64),
    #[error("ripple_period_intervals must be at least 1")]
    BadRipplePeriod,
    #[error("label_epsilon must be positive, got {0}")]
    BadLabelEpsilon(f64),
    #[error("spike_duration_intervals must be at least 1")]
    BadSpikeDuration,
    #[error("cannot place {count} spikes of {duration} intervals in the onset window")]
    SpikesDoNotFit { count: usize, duration: usize },
    #[error("attack kind {got:?} does not match the requested injection")]
    WrongAttackKind { got: AttackKind },
    #[error("expected one full day of {INTERVALS_PER_DAY} readings, got {0}")]
    NotOneDay(usize),
}

/// One 10-minute meter reading with injection bookkeeping and dual labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeterReading {
    /// Interval within the day, `0..144`.
    pub interval_index: u32,
    /// Day of year, `1..=365`.
    pub day_of_year: u32,
    /// Day of month, `1..=31`.
    pub day_of_month: u32,
    /// Interval start, in hours from midnight.
    pub hour: f64,
    /// Consumption over the interval, kWh. Never negative.
    pub energy_kwh: f64,
    pub price_per_kwh: f64,
    pub cost: f64,
    /// Energy added by the injection; 0 when unattacked.
    pub injected_delta_kwh: f64,
    /// 0 normal, 1 trapezoid, 2 sigmoid.
    pub label_multiclass: u8,
    /// 0 normal, 1 any attack.
    pub label_binary: u8,
}

/// One Gaussian diurnal bump of the load model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiurnalBump {
    pub center_hour: f64,
    pub amplitude_kwh: f64,
    pub width_hours: f64,
}

/// One half-cosine seasonal term, peaking at `center_doy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonalTerm {
    pub center_doy: u32,
    pub amplitude_kwh: f64,
}

/// Closed-form residential load model: base + two diurnal bumps + two
/// seasonal half-cosines + Gaussian noise, with a weekend multiplier on
/// the bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadModelConfig {
    pub base_kwh: f64,
    pub morning_peak: DiurnalBump,
    pub evening_peak: DiurnalBump,
    pub seasonal_summer: SeasonalTerm,
    pub seasonal_winter: SeasonalTerm,
    pub noise_sigma_kwh: f64,
    pub weekend_day_multiplier: f64,
    pub rng_seed: u64,
}

impl Default for LoadModelConfig {
    fn default() -> Self {
        LoadModelConfig {
            base_kwh: 0.05,
            morning_peak: DiurnalBump {
                center_hour: 7.5,
                amplitude_kwh: 0.15,
                width_hours: 1.5,
            },
            evening_peak: DiurnalBump {
                center_hour: 19.0,
                amplitude_kwh: 0.25,
                width_hours: 2.0,
            },
            seasonal_summer: SeasonalTerm {
                center_doy: 196,
                amplitude_kwh: 0.08,
            },
            seasonal_winter: SeasonalTerm {
                center_doy: 15,
                amplitude_kwh: 0.06,
            },
            noise_sigma_kwh: 0.02,
            weekend_day_multiplier: 1.10,
            rng_seed: 42,
        }
    }
}

impl LoadModelConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.noise_sigma_kwh < 0.0 {
            return Err(DatagenError::NegativeNoiseSigma(self.noise_sigma_kwh));
        }
        for (field, bump) in [
            ("morning_peak.width_hours", &self.morning_peak),
            ("evening_peak.width_hours", &self.evening_peak),
        ] {
            if bump.width_hours <= 0.0 {
                return Err(DatagenError::NonPositiveWidth {
                    field,
                    got: bump.width_hours,
                });
            }
        }
        for (field, amp) in [
            ("morning_peak.amplitude_kwh", self.morning_peak.amplitude_kwh),
            ("evening_peak.amplitude_kwh", self.evening_peak.amplitude_kwh),
            (
                "seasonal_summer.amplitude_kwh",
                self.seasonal_summer.amplitude_kwh,
            ),
            (
                "seasonal_winter.amplitude_kwh",
                self.seasonal_winter.amplitude_kwh,
            ),
        ] {
            if amp < 0.0 {
                return Err(DatagenError::NegativeAmplitude { field, got: amp });
            }
        }
        Ok(())
    }
}

/// Half-open hour-of-day range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourWindow {
    pub start: f64,
    pub end: f64,
}

impl HourWindow {
    pub fn new(start: f64, end: f64) -> Self {
        HourWindow { start, end }
    }

    pub fn contains(&self, hour: f64) -> bool {
        hour >= self.start && hour < self.end
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.start < 0.0 || self.end > 24.0 || self.start >= self.end {
            return Err(DatagenError::BadHourWindow {
                start: self.start,
                end: self.end,
            });
        }
        Ok(())
    }
}

/// Two-rate time-of-use tariff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffSchedule {
    pub offpeak_rate: f64,
    pub peak_rate: f64,
    pub peak_window: HourWindow,
}

impl Default for TariffSchedule {
    fn default() -> Self {
        TariffSchedule {
            offpeak_rate: 0.10,
            peak_rate: 0.25,
            peak_window: HourWindow::new(14.0, 20.0),
        }
    }
}

impl TariffSchedule {
    pub fn validate(&self) -> Result<(), DatagenError> {
        self.peak_window.validate()?;
        if self.peak_rate <= self.offpeak_rate {
            return Err(DatagenError::InvertedRates {
                peak: self.peak_rate,
                offpeak: self.offpeak_rate,
            });
        }
        Ok(())
    }

    pub fn rate_at(&self, hour: f64) -> f64 {
        if self.peak_window.contains(hour) {
            self.peak_rate
        } else {
            self.offpeak_rate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackKind {
    Trapezoid,
    Sigmoid,
}

/// Parameters of an injection campaign. Trapezoid-only and sigmoid-only
/// fields are ignored by the other kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Attacked hours within each day.
    pub window: HourWindow,
    /// Multiplicative amplitude range; one uniform draw per day.
    pub magnitude_range: (f64, f64),
    /// Trapezoid: fraction of the window spent on each ramp.
    pub ramp_fraction: f64,
    /// Trapezoid: ripple amplitude relative to the day's amplitude.
    pub ripple_relative_amplitude: f64,
    /// Trapezoid: ripple period, in flat-top intervals.
    pub ripple_period_intervals: usize,
    /// Sigmoid: logistic steepness per hour.
    pub steepness_k: f64,
    /// Sigmoid: evening spike events per day.
    pub spike_count_per_day: usize,
    /// Sigmoid: total energy of one spike, kWh.
    pub spike_energy_kwh: f64,
    /// Sigmoid: spike length in intervals.
    pub spike_duration_intervals: usize,
    /// Relative delta threshold for labeling a record as attacked.
    pub label_epsilon: f64,
    pub rng_seed: u64,
}

impl AttackSpec {
    /// Trapezoid defaults: flat top aligned with the default tariff peak.
    pub fn trapezoid_defaults() -> Self {
        AttackSpec {
            kind: AttackKind::Trapezoid,
            window: HourWindow::new(14.0, 20.0),
            magnitude_range: (0.3, 0.8),
            ramp_fraction: 0.2,
            ripple_relative_amplitude: 0.1,
            ripple_period_intervals: 6,
            steepness_k: 0.8,
            spike_count_per_day: 0,
            spike_energy_kwh: 0.0,
            spike_duration_intervals: 3,
            label_epsilon: 0.01,
            rng_seed: 7,
        }
    }

    /// Sigmoid defaults: slow logistic growth across most of the day plus
    /// evening spikes sized like an EV charger (7.2 kW over 10 minutes).
    pub fn sigmoid_defaults() -> Self {
        AttackSpec {
            kind: AttackKind::Sigmoid,
            window: HourWindow::new(6.0, 23.0),
            magnitude_range: (0.4, 0.8),
            ramp_fraction: 0.2,
            ripple_relative_amplitude: 0.0,
            ripple_period_intervals: 6,
            steepness_k: 2.0,
            spike_count_per_day: 2,
            spike_energy_kwh: 1.2,
            spike_duration_intervals: 3,
            label_epsilon: 0.01,
            rng_seed: 11,
        }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        self.window.validate()?;
        let (low, high) = self.magnitude_range;
        if low > high {
            return Err(DatagenError::BadMagnitudeRange { low, high });
        }
        if self.label_epsilon <= 0.0 {
            return Err(DatagenError::BadLabelEpsilon(self.label_epsilon));
        }
        match self.kind {
            AttackKind::Trapezoid => {
                if !(self.ramp_fraction > 0.0 && self.ramp_fraction < 0.5) {
                    return Err(DatagenError::BadRampFraction(self.ramp_fraction));
                }
                if self.ripple_period_intervals == 0 {
                    return Err(DatagenError::BadRipplePeriod);
                }
            }
            AttackKind::Sigmoid => {
                if self.spike_duration_intervals == 0 {
                    return Err(DatagenError::BadSpikeDuration);
                }
                let onset_slots = spike_onset_slots();
                if self.spike_count_per_day * self.spike_duration_intervals > onset_slots {
                    return Err(DatagenError::SpikesDoNotFit {
                        count: self.spike_count_per_day,
                        duration: self.spike_duration_intervals,
                    });
                }
            }
        }
        Ok(())
    }
}

fn spike_onset_slots() -> usize {
    (((SPIKE_ONSET_HOURS.1 - SPIKE_ONSET_HOURS.0) / HOURS_PER_INTERVAL) + 0.5) as usize
}

/// Seeds recorded in the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifestSeeds {
    pub master: u64,
    pub load: u64,
    pub trapezoid: u64,
    pub sigmoid: u64,
}

/// Inclusive day range of one temporal block together with its class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRange {
    pub class: u8,
    pub start_doy: u32,
    pub end_doy: u32,
}

/// Summary of an assembled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub total_records: usize,
    pub block_boundaries: [BlockRange; 3],
    /// Record counts by multi-class label.
    pub class_counts: [usize; 3],
    pub seeds: ManifestSeeds,
    /// FNV-1a over every config field, in declaration order.
    pub config_hash: u64,
}

/// Day of month for a day of year in the fixed non-leap calendar.
pub fn day_of_month(doy: u32) -> u32 {
    debug_assert!((1..=DAYS_PER_YEAR).contains(&doy));
    let mut remaining = doy;
    for len in MONTH_LENGTHS {
        if remaining <= len {
            return remaining;
        }
        remaining -= len;
    }
    unreachable!("day of year out of range")
}

/// Day 1 is a Monday; 6 and 0 modulo 7 are Saturday and Sunday.
pub fn is_weekend(doy: u32) -> bool {
    matches!(doy % 7, 6 | 0)
}

fn gauss_bump(hour: f64, bump: &DiurnalBump) -> f64 {
    let d = hour - bump.center_hour;
    bump.amplitude_kwh * math::exp(-(d * d) / (2.0 * bump.width_hours * bump.width_hours))
}

fn seasonal_component(doy: u32, term: &SeasonalTerm) -> f64 {
    let phase = 2.0 * math::PI * (doy as f64 - term.center_doy as f64) / DAYS_PER_YEAR as f64;
    term.amplitude_kwh * math::cos(phase).max(0.0)
}

/// Generate the seeded year-long baseline: 365 × 144 records with labels
/// 0 and prices unset.
///
/// Per day, the child stream `day-<doy>` of `config.rng_seed` supplies one
/// standard-normal draw per interval, in interval order.
pub fn generate_baseline(config: &LoadModelConfig) -> Result<Vec<MeterReading>, DatagenError> {
    config.validate()?;
    let mut out = Vec::with_capacity(DAYS_PER_YEAR as usize * INTERVALS_PER_DAY);
    for doy in 1..=DAYS_PER_YEAR {
        let mut rng = Rng::from_seed(derive_seed_indexed(config.rng_seed, "day", doy as u64));
        let bump_scale = if is_weekend(doy) {
            config.weekend_day_multiplier
        } else {
            1.0
        };
        let seasonal = seasonal_component(doy, &config.seasonal_summer)
            + seasonal_component(doy, &config.seasonal_winter);
        let dom = day_of_month(doy);
        for interval in 0..INTERVALS_PER_DAY {
            let hour = interval as f64 * HOURS_PER_INTERVAL;
            let bumps =
                gauss_bump(hour, &config.morning_peak) + gauss_bump(hour, &config.evening_peak);
            let noise = config.noise_sigma_kwh * rng.next_normal();
            let energy = (config.base_kwh + bump_scale * bumps + seasonal + noise).max(0.0);
            out.push(MeterReading {
                interval_index: interval as u32,
                day_of_year: doy,
                day_of_month: dom,
                hour,
                energy_kwh: energy,
                price_per_kwh: 0.0,
                cost: 0.0,
                injected_delta_kwh: 0.0,
                label_multiclass: 0,
                label_binary: 0,
            });
        }
    }
    Ok(out)
}

/// Fill `price_per_kwh` and `cost` from the tariff.
pub fn apply_tariff(
    readings: &mut [MeterReading],
    tariff: &TariffSchedule,
) -> Result<(), DatagenError> {
    tariff.validate()?;
    for rec in readings {
        rec.price_per_kwh = tariff.rate_at(rec.hour);
        rec.cost = rec.energy_kwh * rec.price_per_kwh;
    }
    Ok(())
}

/// Trapezoidal multiplier at hour `t` for a day amplitude `amplitude`,
/// before ripple. Zero outside the window.
fn trapezoid_multiplier(t: f64, window: &HourWindow, ramp_fraction: f64, amplitude: f64) -> f64 {
    if !window.contains(t) {
        return 0.0;
    }
    let ramp = ramp_fraction * (window.end - window.start);
    if t < window.start + ramp {
        amplitude * (t - window.start) / ramp
    } else if t < window.end - ramp {
        amplitude
    } else {
        amplitude * (window.end - t) / ramp
    }
}

/// Inject a trapezoidal attack into one priced day.
///
/// Draw order: a single uniform for the day's amplitude. The ripple rides
/// only on flat-top intervals, indexed from zero within the flat top.
/// Records outside the window are untouched.
pub fn inject_trapezoid(
    day: &mut [MeterReading],
    spec: &AttackSpec,
    rng: &mut Rng,
) -> Result<(), DatagenError> {
    if spec.kind != AttackKind::Trapezoid {
        return Err(DatagenError::WrongAttackKind { got: spec.kind });
    }
    spec.validate()?;
    if day.len() != INTERVALS_PER_DAY {
        return Err(DatagenError::NotOneDay(day.len()));
    }
    let amplitude = rng.uniform(spec.magnitude_range.0, spec.magnitude_range.1);
    let ramp = spec.ramp_fraction * (spec.window.end - spec.window.start);
    let flat = HourWindow::new(spec.window.start + ramp, spec.window.end - ramp);
    let mut flat_ordinal = 0usize;
    for rec in day {
        let t = rec.hour;
        if !spec.window.contains(t) {
            continue;
        }
        let mut m = trapezoid_multiplier(t, &spec.window, spec.ramp_fraction, amplitude);
        if flat.contains(t) {
            let phase =
                2.0 * math::PI * flat_ordinal as f64 / spec.ripple_period_intervals as f64;
            m += spec.ripple_relative_amplitude * amplitude * math::sin(phase);
            flat_ordinal += 1;
        }
        let injected = rec.energy_kwh * (1.0 + m);
        rec.injected_delta_kwh += injected - rec.energy_kwh;
        rec.energy_kwh = injected;
        rec.cost = rec.energy_kwh * rec.price_per_kwh;
    }
    Ok(())
}

/// Inject a sigmoid attack into one priced day.
///
/// Draw order: one uniform for the day's amplitude, then one onset draw
/// per spike (rejecting overlaps with already placed spikes). The
/// logistic component is monotone nondecreasing across the window; spikes
/// are added afterwards and may run past the onset range but are truncated
/// at day end.
pub fn inject_sigmoid(
    day: &mut [MeterReading],
    spec: &AttackSpec,
    rng: &mut Rng,
) -> Result<(), DatagenError> {
    if spec.kind != AttackKind::Sigmoid {
        return Err(DatagenError::WrongAttackKind { got: spec.kind });
    }
    spec.validate()?;
    if day.len() != INTERVALS_PER_DAY {
        return Err(DatagenError::NotOneDay(day.len()));
    }
    let amplitude = rng.uniform(spec.magnitude_range.0, spec.magnitude_range.1);
    let midpoint = 0.5 * (spec.window.start + spec.window.end);
    for rec in day.iter_mut() {
        let t = rec.hour;
        if !spec.window.contains(t) {
            continue;
        }
        let m = amplitude / (1.0 + math::exp(-spec.steepness_k * (t - midpoint)));
        let injected = rec.energy_kwh * (1.0 + m);
        rec.injected_delta_kwh += injected - rec.energy_kwh;
        rec.energy_kwh = injected;
        rec.cost = rec.energy_kwh * rec.price_per_kwh;
    }

    let onset_base = (SPIKE_ONSET_HOURS.0 / HOURS_PER_INTERVAL + 0.5) as usize;
    let onset_slots = spike_onset_slots();
    let mut starts: Vec<usize> = Vec::with_capacity(spec.spike_count_per_day);
    for _ in 0..spec.spike_count_per_day {
        let start = loop {
            let candidate = onset_base + rng.uniform_usize(onset_slots);
            let overlaps = starts.iter().any(|&s| {
                candidate < s + spec.spike_duration_intervals
                    && s < candidate + spec.spike_duration_intervals
            });
            if !overlaps {
                break candidate;
            }
        };
        starts.push(start);
    }
    let per_interval = spec.spike_energy_kwh / spec.spike_duration_intervals as f64;
    for &start in &starts {
        let end = (start + spec.spike_duration_intervals).min(INTERVALS_PER_DAY);
        for rec in &mut day[start..end] {
            rec.energy_kwh += per_interval;
            rec.injected_delta_kwh += per_interval;
            rec.cost = rec.energy_kwh * rec.price_per_kwh;
        }
    }
    Ok(())
}

/// Multi-class label of the block containing `doy`.
pub fn block_class(doy: u32) -> u8 {
    if doy <= NORMAL_BLOCK.1 {
        0
    } else if doy <= TRAPEZOID_BLOCK.1 {
        1
    } else {
        2
    }
}

fn fnv1a_u64(hash: &mut u64, value: u64) {
    const FNV_PRIME: u64 = 0x100000001b3;
    let mut v = value;
    for _ in 0..8 {
        *hash ^= v & 0xff;
        *hash = hash.wrapping_mul(FNV_PRIME);
        v >>= 8;
    }
}

fn fnv1a_f64(hash: &mut u64, value: f64) {
    fnv1a_u64(hash, value.to_bits());
}

/// Order-sensitive hash of the full generator configuration, recorded in
/// the manifest so datasets can be matched back to their configs.
pub fn config_snapshot_hash(
    load: &LoadModelConfig,
    tariff: &TariffSchedule,
    trapezoid: &AttackSpec,
    sigmoid: &AttackSpec,
) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    fnv1a_f64(&mut h, load.base_kwh);
    for bump in [&load.morning_peak, &load.evening_peak] {
        fnv1a_f64(&mut h, bump.center_hour);
        fnv1a_f64(&mut h, bump.amplitude_kwh);
        fnv1a_f64(&mut h, bump.width_hours);
    }
    for term in [&load.seasonal_summer, &load.seasonal_winter] {
        fnv1a_u64(&mut h, term.center_doy as u64);
        fnv1a_f64(&mut h, term.amplitude_kwh);
    }
    fnv1a_f64(&mut h, load.noise_sigma_kwh);
    fnv1a_f64(&mut h, load.weekend_day_multiplier);
    fnv1a_u64(&mut h, load.rng_seed);
    fnv1a_f64(&mut h, tariff.offpeak_rate);
    fnv1a_f64(&mut h, tariff.peak_rate);
    fnv1a_f64(&mut h, tariff.peak_window.start);
    fnv1a_f64(&mut h, tariff.peak_window.end);
    for spec in [trapezoid, sigmoid] {
        fnv1a_u64(
            &mut h,
            match spec.kind {
                AttackKind::Trapezoid => 1,
                AttackKind::Sigmoid => 2,
            },
        );
        fnv1a_f64(&mut h, spec.window.start);
        fnv1a_f64(&mut h, spec.window.end);
        fnv1a_f64(&mut h, spec.magnitude_range.0);
        fnv1a_f64(&mut h, spec.magnitude_range.1);
        fnv1a_f64(&mut h, spec.ramp_fraction);
        fnv1a_f64(&mut h, spec.ripple_relative_amplitude);
        fnv1a_u64(&mut h, spec.ripple_period_intervals as u64);
        fnv1a_f64(&mut h, spec.steepness_k);
        fnv1a_u64(&mut h, spec.spike_count_per_day as u64);
        fnv1a_f64(&mut h, spec.spike_energy_kwh);
        fnv1a_u64(&mut h, spec.spike_duration_intervals as u64);
        fnv1a_f64(&mut h, spec.label_epsilon);
        fnv1a_u64(&mut h, spec.rng_seed);
    }
    h
}

/// Generate, price, attack, and label a full year.
///
/// `master_seed` overrides the per-component seeds: the load model runs on
/// the child `load`, the injections on `trapezoid` / `sigmoid`, each split
/// further into `day-<doy>` streams. Labels are per interval: a record in
/// an attack block gets the block class only when its stored delta exceeds
/// `label_epsilon` of the pre-injection energy.
pub fn assemble_year(
    load_cfg: &LoadModelConfig,
    tariff: &TariffSchedule,
    trap_spec: &AttackSpec,
    sig_spec: &AttackSpec,
    master_seed: u64,
) -> Result<(Vec<MeterReading>, DatasetManifest), DatagenError> {
    tariff.validate()?;
    trap_spec.validate()?;
    sig_spec.validate()?;

    let seeds = ManifestSeeds {
        master: master_seed,
        load: derive_seed(master_seed, "load"),
        trapezoid: derive_seed(master_seed, "trapezoid"),
        sigmoid: derive_seed(master_seed, "sigmoid"),
    };
    let mut effective_load = load_cfg.clone();
    effective_load.rng_seed = seeds.load;

    let mut records = generate_baseline(&effective_load)?;
    apply_tariff(&mut records, tariff)?;

    for doy in TRAPEZOID_BLOCK.0..=TRAPEZOID_BLOCK.1 {
        let start = (doy as usize - 1) * INTERVALS_PER_DAY;
        let mut rng = Rng::from_seed(derive_seed_indexed(seeds.trapezoid, "day", doy as u64));
        inject_trapezoid(
            &mut records[start..start + INTERVALS_PER_DAY],
            trap_spec,
            &mut rng,
        )?;
    }
    for doy in SIGMOID_BLOCK.0..=SIGMOID_BLOCK.1 {
        let start = (doy as usize - 1) * INTERVALS_PER_DAY;
        let mut rng = Rng::from_seed(derive_seed_indexed(seeds.sigmoid, "day", doy as u64));
        inject_sigmoid(
            &mut records[start..start + INTERVALS_PER_DAY],
            sig_spec,
            &mut rng,
        )?;
    }

    let mut class_counts = [0usize; 3];
    for rec in &mut records {
        let class = block_class(rec.day_of_year);
        let epsilon = match class {
            1 => trap_spec.label_epsilon,
            2 => sig_spec.label_epsilon,
            _ => 0.0,
        };
        let original = rec.energy_kwh - rec.injected_delta_kwh;
        let attacked = class != 0
            && math::abs(rec.injected_delta_kwh) > epsilon * original.max(1e-6);
        rec.label_multiclass = if attacked { class } else { 0 };
        rec.label_binary = rec.label_multiclass.min(1);
        class_counts[rec.label_multiclass as usize] += 1;
    }

    let manifest = DatasetManifest {
        total_records: records.len(),
        block_boundaries: [
            BlockRange {
                class: 0,
                start_doy: NORMAL_BLOCK.0,
                end_doy: NORMAL_BLOCK.1,
            },
            BlockRange {
                class: 1,
                start_doy: TRAPEZOID_BLOCK.0,
                end_doy: TRAPEZOID_BLOCK.1,
            },
            BlockRange {
                class: 2,
                start_doy: SIGMOID_BLOCK.0,
                end_doy: SIGMOID_BLOCK.1,
            },
        ],
        class_counts,
        seeds,
        config_hash: config_snapshot_hash(load_cfg, tariff, trap_spec, sig_spec),
    };
    Ok((records, manifest))
}
