//! Sensing math and the acquisition-session simulator.
//!
//! The physical chain is: gas sensor in a voltage divider → ADC counts →
//! per-channel min-max normalization → network input. This module carries
//! that chain plus a small first-order simulator that stands in for the real
//! chamber when generating training data.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::data::{CompoundLabel, LabeledDataset, LabeledFrame, SensorFrame};
use crate::float;
use crate::net::{InputVector, INPUTS};

/// Canonical channel order for every frame, file and firmware array.
pub const CHANNEL_NAMES: [&str; INPUTS] = ["MQ-2", "MQ-135", "TGS2610", "TGS2611", "MQ-3"];

/// ADC resolution of the target board (Arduino Uno class).
pub const DEFAULT_ADC_BITS: u32 = 10;
/// ADC reference voltage of the target board.
pub const DEFAULT_ADC_REF_VOLTS: f64 = 5.0;
/// Divider supply voltage.
pub const DEFAULT_SUPPLY_VOLTS: f64 = 5.0;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SensingError {
    #[error("load voltage must be positive, got {v_rl} V")]
    NonPositiveLoadVoltage { v_rl: f64 },
    #[error("load voltage {v_rl} V exceeds supply {v_c} V")]
    LoadVoltageExceedsSupply { v_c: f64, v_rl: f64 },
    #[error("ADC resolution must be between 1 and 16 bits, got {bits}")]
    InvalidAdcBits { bits: u32 },
    #[error("raw count {raw} does not fit in {bits} ADC bits")]
    RawOutOfRange { raw: u16, bits: u32 },
    #[error("cannot fit a normalizer on an empty dataset")]
    EmptyDataset,
    #[error("channel {channel} is constant; min-max normalization is undefined")]
    DegenerateChannel { channel: &'static str },
    #[error("invalid acquisition protocol: {reason}")]
    InvalidProtocol { reason: &'static str },
}

/// Sensor resistance from the divider equation
/// `R_s = ((V_C − V_RL) / V_RL) · R_L`.
pub fn sensor_resistance(v_c: f64, v_rl: f64, r_l: f64) -> Result<f64, SensingError> {
    if !(v_rl > 0.0) {
        return Err(SensingError::NonPositiveLoadVoltage { v_rl });
    }
    if v_rl > v_c {
        return Err(SensingError::LoadVoltageExceedsSupply { v_c, v_rl });
    }
    Ok((v_c - v_rl) / v_rl * r_l)
}

/// ADC counts to volts: `raw · v_ref / (2^bits − 1)`.
pub fn adc_to_voltage(raw: u16, bits: u32, v_ref: f64) -> Result<f64, SensingError> {
    if bits == 0 || bits > 16 {
        return Err(SensingError::InvalidAdcBits { bits });
    }
    let full_scale = (1u32 << bits) - 1;
    if u32::from(raw) > full_scale {
        return Err(SensingError::RawOutOfRange { raw, bits });
    }
    Ok(f64::from(raw) * v_ref / f64::from(full_scale))
}

/// Per-channel min-max bounds fitted on training data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalizer {
    pub min: [f64; INPUTS],
    pub max: [f64; INPUTS],
}

impl Normalizer {
    /// A pass-through mapping over the whole 10-bit ADC range.
    pub fn full_scale() -> Self {
        Normalizer {
            min: [0.0; INPUTS],
            max: [1023.0; INPUTS],
        }
    }

    /// Every channel must have a strictly positive span and finite bounds.
    pub fn validate(&self) -> Result<(), SensingError> {
        for ch in 0..INPUTS {
            if !(self.min[ch].is_finite() && self.max[ch].is_finite())
                || self.max[ch] <= self.min[ch]
            {
                return Err(SensingError::DegenerateChannel {
                    channel: CHANNEL_NAMES[ch],
                });
            }
        }
        Ok(())
    }

    /// Map one raw frame to `[0, 1]^5`: `(raw − min) / (max − min)`, clamped
    /// so frames outside the fitted range cannot push the network out of its
    /// trained input domain.
    pub fn normalize(&self, frame: &SensorFrame) -> InputVector {
        let mut values = [0.0; INPUTS];
        for ch in 0..INPUTS {
            let x = (f64::from(frame.raw[ch]) - self.min[ch]) / (self.max[ch] - self.min[ch]);
            values[ch] = x.clamp(0.0, 1.0);
        }
        InputVector(values)
    }
}

/// Fit per-channel min/max over a set of frames.
pub fn fit_normalizer(frames: &[LabeledFrame]) -> Result<Normalizer, SensingError> {
    if frames.is_empty() {
        return Err(SensingError::EmptyDataset);
    }
    let mut min = [f64::INFINITY; INPUTS];
    let mut max = [f64::NEG_INFINITY; INPUTS];
    for labeled in frames {
        for ch in 0..INPUTS {
            let v = f64::from(labeled.frame.raw[ch]);
            min[ch] = min[ch].min(v);
            max[ch] = max[ch].max(v);
        }
    }
    let normalizer = Normalizer { min, max };
    normalizer.validate()?;
    Ok(normalizer)
}

/// Steady-state response of one compound on all five channels.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundProfile {
    pub label: CompoundLabel,
    /// Steady-state mean, ADC counts.
    pub mean: [f64; INPUTS],
    /// Gaussian noise per sample, ADC counts.
    pub stddev: [f64; INPUTS],
    /// First-order rise time constant toward the mean.
    pub rise_time_s: f64,
}

/// A timed session plan: per compound, warm up, capture, purge.
#[derive(Clone, Debug, PartialEq)]
pub struct AcquisitionProtocol {
    pub warmup_s: f64,
    pub capture_s: f64,
    pub purge_s: f64,
    pub sample_period_ms: u64,
    pub compounds: Vec<CompoundProfile>,
}

impl AcquisitionProtocol {
    pub fn validate(&self) -> Result<(), SensingError> {
        if !(self.warmup_s >= 0.0) || !(self.purge_s >= 0.0) {
            return Err(SensingError::InvalidProtocol {
                reason: "warmup_s and purge_s must be non-negative",
            });
        }
        if !(self.capture_s > 0.0) {
            return Err(SensingError::InvalidProtocol {
                reason: "capture_s must be positive",
            });
        }
        if self.sample_period_ms == 0 {
            return Err(SensingError::InvalidProtocol {
                reason: "sample_period_ms must be positive",
            });
        }
        if self.compounds.is_empty() {
            return Err(SensingError::InvalidProtocol {
                reason: "protocol needs at least one compound",
            });
        }
        for profile in &self.compounds {
            if profile.label == CompoundLabel::Unknown {
                return Err(SensingError::InvalidProtocol {
                    reason: "compound label must be a real compound",
                });
            }
            if !(profile.rise_time_s > 0.0) {
                return Err(SensingError::InvalidProtocol {
                    reason: "rise_time_s must be positive",
                });
            }
            for ch in 0..INPUTS {
                if !profile.mean[ch].is_finite()
                    || !(0.0..=1023.0).contains(&profile.mean[ch])
                {
                    return Err(SensingError::InvalidProtocol {
                        reason: "channel mean must lie within the 10-bit ADC range",
                    });
                }
                if !(profile.stddev[ch] >= 0.0) || !profile.stddev[ch].is_finite() {
                    return Err(SensingError::InvalidProtocol {
                        reason: "channel stddev must be finite and non-negative",
                    });
                }
            }
        }
        Ok(())
    }

    /// Captured frames per compound window:
    /// `floor(capture_s · 1000 / sample_period_ms)`.
    pub fn frames_per_window(&self) -> usize {
        float::floor(self.capture_s * 1000.0 / self.sample_period_ms as f64) as usize
    }
}

/// The stock three-compound session: lemon means are the per-channel averages
/// of a reference lemon capture; banana and grape are synthetic but kept at
/// least six noise sigmas away on MQ-2 so the classes are genuinely
/// separable. The 0.15 s rise puts even the first captured frame at 96% of
/// the profile mean, so that margin holds across the whole transient — a
/// slower rise would drag early lemon frames down into grape territory.
pub fn default_protocol() -> AcquisitionProtocol {
    AcquisitionProtocol {
        warmup_s: 600.0,
        capture_s: 300.0,
        purge_s: 300.0,
        sample_period_ms: 500,
        compounds: vec![
            CompoundProfile {
                label: CompoundLabel::Lemon,
                mean: [
                    1197.0 / 7.0,
                    531.0 / 7.0,
                    638.0 / 7.0,
                    646.0 / 7.0,
                    1099.0 / 7.0,
                ],
                stddev: [6.0, 3.0, 4.0, 2.0, 5.0],
                rise_time_s: 0.15,
            },
            CompoundProfile {
                label: CompoundLabel::Banana,
                mean: [240.0, 120.0, 140.0, 110.0, 90.0],
                stddev: [6.0, 3.0, 4.0, 2.0, 5.0],
                rise_time_s: 0.15,
            },
            CompoundProfile {
                label: CompoundLabel::Grape,
                mean: [110.0, 50.0, 60.0, 70.0, 210.0],
                stddev: [5.0, 2.0, 3.0, 2.0, 8.0],
                rise_time_s: 0.15,
            },
        ],
    }
}

/// Simulate a full session and return every captured frame, labeled, in
/// acquisition order.
///
/// Within a capture window the sensor rises from the purge baseline (0
/// counts) toward the profile mean along `1 − e^(−t/τ)`, with per-channel
/// gaussian noise on top; samples land one period apart starting one period
/// after the window opens. Output is deterministic for a given seed and
/// protocol.
pub fn simulate_acquisition(
    protocol: &AcquisitionProtocol,
    seed: u64,
) -> Result<LabeledDataset, SensingError> {
    protocol.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames_per_window = protocol.frames_per_window();
    let warmup_ms = float::round(protocol.warmup_s * 1000.0) as u64;
    let capture_ms = float::round(protocol.capture_s * 1000.0) as u64;
    let purge_ms = float::round(protocol.purge_s * 1000.0) as u64;
    let cycle_ms = warmup_ms + capture_ms + purge_ms;

    let mut frames = Vec::with_capacity(frames_per_window * protocol.compounds.len());
    for (c, profile) in protocol.compounds.iter().enumerate() {
        let window_start_ms = c as u64 * cycle_ms + warmup_ms;
        for k in 0..frames_per_window {
            let offset_ms = (k as u64 + 1) * protocol.sample_period_ms;
            let t_s = offset_ms as f64 / 1000.0;
            let rise = 1.0 - float::exp(-t_s / profile.rise_time_s);
            let mut raw = [0u16; INPUTS];
            for ch in 0..INPUTS {
                let mut value = profile.mean[ch] * rise;
                if profile.stddev[ch] > 0.0 {
                    // Guarded by validate(); stddev here is finite and > 0.
                    let noise = Normal::new(0.0, profile.stddev[ch]).unwrap();
                    value += noise.sample(&mut rng);
                }
                raw[ch] = float::round(value).clamp(0.0, 1023.0) as u16;
            }
            frames.push(LabeledFrame {
                frame: SensorFrame {
                    timestamp_ms: window_start_ms + offset_ms,
                    raw,
                },
                label: profile.label,
            });
        }
    }
    Ok(LabeledDataset::new(frames))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // A reference lemon capture: seven frames, canonical channel order.
    pub(crate) const LEMON_ROWS: [[u16; INPUTS]; 7] = [
        [138, 64, 68, 90, 111],
        [139, 64, 69, 90, 111],
        [167, 79, 93, 95, 123],
        [167, 77, 91, 95, 124],
        [168, 78, 91, 96, 129],
        [208, 84, 112, 90, 249],
        [210, 85, 114, 90, 252],
    ];

    fn lemon_frames() -> Vec<LabeledFrame> {
        LEMON_ROWS
            .iter()
            .enumerate()
            .map(|(i, raw)| LabeledFrame {
                frame: SensorFrame {
                    timestamp_ms: i as u64 * 500,
                    raw: *raw,
                },
                label: CompoundLabel::Lemon,
            })
            .collect()
    }

    #[test]
    fn resistance_matches_divider_equation() {
        // Near-saturated sensor: V_RL=4.999 of 5 V across a 10 kΩ load.
        let r = sensor_resistance(5.0, 4.999, 10_000.0).unwrap();
        assert_eq!(r, 2.0004000800166715);
        // Balanced divider: R_s equals R_L exactly.
        assert_eq!(sensor_resistance(5.0, 2.5, 10_000.0).unwrap(), 10_000.0);
    }

    #[test]
    fn resistance_rejects_unphysical_voltages() {
        assert_eq!(
            sensor_resistance(5.0, 0.0, 10_000.0),
            Err(SensingError::NonPositiveLoadVoltage { v_rl: 0.0 })
        );
        assert!(matches!(
            sensor_resistance(5.0, -0.1, 10_000.0),
            Err(SensingError::NonPositiveLoadVoltage { .. })
        ));
        assert!(matches!(
            sensor_resistance(5.0, 5.1, 10_000.0),
            Err(SensingError::LoadVoltageExceedsSupply { .. })
        ));
    }

    #[test]
    fn adc_matches_ten_bit_reference() {
        assert_eq!(adc_to_voltage(0, 10, 5.0).unwrap(), 0.0);
        assert_eq!(adc_to_voltage(1023, 10, 5.0).unwrap(), 5.0);
        assert_eq!(adc_to_voltage(138, 10, 5.0).unwrap(), 0.6744868035190615);
    }

    #[test]
    fn adc_rejects_bad_resolution_and_range() {
        assert_eq!(
            adc_to_voltage(1, 0, 5.0),
            Err(SensingError::InvalidAdcBits { bits: 0 })
        );
        assert_eq!(
            adc_to_voltage(1, 17, 5.0),
            Err(SensingError::InvalidAdcBits { bits: 17 })
        );
        assert_eq!(
            adc_to_voltage(1024, 10, 5.0),
            Err(SensingError::RawOutOfRange {
                raw: 1024,
                bits: 10
            })
        );
    }

    #[test]
    fn fit_normalizer_finds_channel_extremes() {
        let norm = fit_normalizer(&lemon_frames()).unwrap();
        assert_eq!(norm.min, [138.0, 64.0, 68.0, 90.0, 111.0]);
        assert_eq!(norm.max, [210.0, 85.0, 114.0, 96.0, 252.0]);
    }

    #[test]
    fn normalize_matches_reference_row() {
        let norm = fit_normalizer(&lemon_frames()).unwrap();
        let got = norm.normalize(&SensorFrame {
            timestamp_ms: 0,
            raw: [167, 79, 93, 95, 123],
        });
        let want = [
            0.4027777777777778,
            0.7142857142857143,
            0.5434782608695652,
            0.8333333333333334,
            0.0851063829787234,
        ];
        for ch in 0..INPUTS {
            assert!((got.0[ch] - want[ch]).abs() < 1e-15, "channel {ch}");
        }
    }

    #[test]
    fn normalize_clamps_out_of_range_frames() {
        let norm = fit_normalizer(&lemon_frames()).unwrap();
        let low = norm.normalize(&SensorFrame {
            timestamp_ms: 0,
            raw: [0, 0, 0, 0, 0],
        });
        let high = norm.normalize(&SensorFrame {
            timestamp_ms: 0,
            raw: [1023, 1023, 1023, 1023, 1023],
        });
        assert_eq!(low.0, [0.0; INPUTS]);
        assert_eq!(high.0, [1.0; INPUTS]);
    }

    #[test]
    fn fit_normalizer_rejects_constant_channel() {
        // TGS2611 stuck at 90 counts.
        let frames: Vec<LabeledFrame> = lemon_frames()
            .into_iter()
            .map(|mut l| {
                l.frame.raw[3] = 90;
                l
            })
            .collect();
        assert_eq!(
            fit_normalizer(&frames),
            Err(SensingError::DegenerateChannel { channel: "TGS2611" })
        );
        assert_eq!(fit_normalizer(&[]), Err(SensingError::EmptyDataset));
    }

    #[test]
    fn simulate_default_protocol_shape() {
        let protocol = default_protocol();
        assert_eq!(protocol.frames_per_window(), 600);
        let data = simulate_acquisition(&protocol, 42).unwrap();
        assert_eq!(data.len(), 1800);
        assert_eq!(data.class_counts(), [600, 600, 600]);
        // First lemon frame: one period after the warmup finishes.
        assert_eq!(data.frames[0].frame.timestamp_ms, 600_000 + 500);
        // Timestamps strictly increase across the whole session.
        for pair in data.frames.windows(2) {
            assert!(pair[0].frame.timestamp_ms < pair[1].frame.timestamp_ms);
        }
        // Second compound starts a full cycle later.
        assert_eq!(
            data.frames[600].frame.timestamp_ms,
            1_200_000 + 600_000 + 500
        );
    }

    #[test]
    fn simulate_partial_window_truncates() {
        let mut protocol = default_protocol();
        protocol.capture_s = 1.0;
        protocol.sample_period_ms = 500;
        assert_eq!(protocol.frames_per_window(), 2);
        let data = simulate_acquisition(&protocol, 0).unwrap();
        assert_eq!(data.len(), 6);
    }

    #[test]
    fn simulate_is_deterministic_per_seed() {
        let protocol = default_protocol();
        let a = simulate_acquisition(&protocol, 7).unwrap();
        let b = simulate_acquisition(&protocol, 7).unwrap();
        let c = simulate_acquisition(&protocol, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_fast_rise_reproduces_rounded_means() {
        let mut protocol = default_protocol();
        protocol.capture_s = 5.0;
        for profile in &mut protocol.compounds {
            profile.stddev = [0.0; INPUTS];
            profile.rise_time_s = 1e-9;
        }
        let data = simulate_acquisition(&protocol, 3).unwrap();
        for labeled in &data.frames {
            let profile = protocol
                .compounds
                .iter()
                .find(|p| p.label == labeled.label)
                .unwrap();
            for ch in 0..INPUTS {
                let want = crate::float::round(profile.mean[ch]) as u16;
                assert_eq!(labeled.frame.raw[ch], want);
            }
        }
    }

    #[test]
    fn simulate_rejects_bad_protocols() {
        let mut protocol = default_protocol();
        protocol.sample_period_ms = 0;
        assert!(matches!(
            simulate_acquisition(&protocol, 0),
            Err(SensingError::InvalidProtocol { .. })
        ));

        let mut protocol = default_protocol();
        protocol.compounds.clear();
        assert!(matches!(
            simulate_acquisition(&protocol, 0),
            Err(SensingError::InvalidProtocol { .. })
        ));

        let mut protocol = default_protocol();
        protocol.compounds[0].rise_time_s = 0.0;
        assert!(matches!(
            simulate_acquisition(&protocol, 0),
            Err(SensingError::InvalidProtocol { .. })
        ));
    }

    proptest! {
        #[test]
        fn normalize_always_lands_in_unit_cube(
            raw in proptest::array::uniform5(0u16..=1023),
        ) {
            let norm = fit_normalizer(&lemon_frames()).unwrap();
            let v = norm.normalize(&SensorFrame { timestamp_ms: 0, raw });
            for x in v.0 {
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }

        #[test]
        fn resistance_is_positive_inside_divider_range(
            v_rl in 0.01f64..4.99,
            r_l in 100.0f64..100_000.0,
        ) {
            let r = sensor_resistance(5.0, v_rl, r_l).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert!(r.is_finite());
        }
    }
}
