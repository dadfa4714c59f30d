//! Modulation classification and SNR estimation from an intercepted frame.
//!
//! The classifier thresholds a noise-corrected estimate of the C42
//! cumulant. C42 is additive over independent terms and vanishes for
//! Gaussian noise, so the raw moment combination already removes the AWGN
//! contribution; only the power normalization needs the receiver's
//! calibrated noise floor.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::Scenario;
use crate::mcs::Modulation;
use crate::signal::{theoretical_c42, IqFrame};

/// Shortest frame the classifier accepts.
pub const MIN_CLASSIFY_LEN: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("frame is empty")]
    EmptyFrame,
    #[error("frame of {len} samples is shorter than the minimum {min}")]
    FrameTooShort { len: usize, min: usize },
    #[error("mean received power does not exceed the noise floor")]
    SignalBelowNoise,
}

/// Configuration of the intercepting receiver's classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    /// Samples consumed per decision. 128 mirrors a short-capture
    /// receiver; the default 4096 makes the 16/64-QAM gap resolvable.
    pub frame_length: usize,
    /// Receiver noise power in watts, known from self-calibration.
    pub noise_power_w: f64,
    /// Decision thresholds on the C42 axis, strictly increasing.
    pub thresholds: [f64; 3],
}

impl ClassifierConfig {
    pub fn new(noise_power_w: f64) -> Self {
        ClassifierConfig {
            frame_length: 4096,
            noise_power_w,
            thresholds: default_thresholds(),
        }
    }

    pub fn for_scenario(scenario: &Scenario) -> Self {
        Self::new(scenario.noise_power_w())
    }
}

/// Midpoints of adjacent theoretical C42 values: (-1.5, -0.84, -0.6495...).
pub fn default_thresholds() -> [f64; 3] {
    let c: Vec<f64> = Modulation::ALL.iter().map(|&m| theoretical_c42(m)).collect();
    [
        (c[0] + c[1]) / 2.0,
        (c[1] + c[2]) / 2.0,
        (c[2] + c[3]) / 2.0,
    ]
}

/// SNR estimate in dB from total received power minus the known noise
/// floor: 10 log10((mean|r|^2 - N) / N).
pub fn estimate_snr_samples(samples: &[Complex64], noise_power_w: f64) -> Result<f64, ClassifyError> {
    if samples.is_empty() {
        return Err(ClassifyError::EmptyFrame);
    }
    let m21 = samples.iter().map(|r| r.norm_sqr()).sum::<f64>() / samples.len() as f64;
    if m21 <= noise_power_w {
        return Err(ClassifyError::SignalBelowNoise);
    }
    Ok(10.0 * ((m21 - noise_power_w) / noise_power_w).log10())
}

pub fn estimate_snr(frame: &IqFrame, noise_power_w: f64) -> Result<f64, ClassifyError> {
    estimate_snr_samples(&frame.samples, noise_power_w)
}

/// Noise-corrected sample estimate of the normalized C42 cumulant.
///
/// Computes the sample moments M20 = mean(r^2), M21 = mean(|r|^2),
/// M42 = mean(|r|^4); the combination M42 - |M20|^2 - 2 M21^2 estimates
/// the unnormalized cumulant of the signal alone (the Gaussian part
/// cancels), and dividing by the estimated signal power squared
/// (M21 - N)^2 normalizes it to the unit-power constellation value.
pub fn estimate_c42_samples(samples: &[Complex64], noise_power_w: f64) -> Result<f64, ClassifyError> {
    if samples.is_empty() {
        return Err(ClassifyError::EmptyFrame);
    }
    let n = samples.len() as f64;
    let mut m20 = Complex64::new(0.0, 0.0);
    let mut m21 = 0.0;
    let mut m42 = 0.0;
    for r in samples {
        let p = r.norm_sqr();
        m20 += r * r;
        m21 += p;
        m42 += p * p;
    }
    m20 /= n;
    m21 /= n;
    m42 /= n;
    let signal_power = m21 - noise_power_w;
    if signal_power <= 0.0 {
        return Err(ClassifyError::SignalBelowNoise);
    }
    Ok((m42 - m20.norm_sqr() - 2.0 * m21 * m21) / (signal_power * signal_power))
}

pub fn estimate_c42(frame: &IqFrame, noise_power_w: f64) -> Result<f64, ClassifyError> {
    estimate_c42_samples(&frame.samples, noise_power_w)
}

/// Thresholds the C42 estimate into one of the four modulation labels.
/// Boundaries belong to the higher-order class (half-open intervals).
pub fn classify(frame: &IqFrame, config: &ClassifierConfig) -> Result<Modulation, ClassifyError> {
    if frame.is_empty() {
        return Err(ClassifyError::EmptyFrame);
    }
    if frame.len() < MIN_CLASSIFY_LEN {
        return Err(ClassifyError::FrameTooShort {
            len: frame.len(),
            min: MIN_CLASSIFY_LEN,
        });
    }
    let c = estimate_c42(frame, config.noise_power_w)?;
    Ok(label_for_c42(c, &config.thresholds))
}

/// Maps a C42 estimate to a label. Threshold values themselves belong to
/// the higher-order class (half-open intervals).
pub fn label_for_c42(c42: f64, thresholds: &[f64; 3]) -> Modulation {
    if c42 < thresholds[0] {
        Modulation::Bpsk
    } else if c42 < thresholds[1] {
        Modulation::Qpsk
    } else if c42 < thresholds[2] {
        Modulation::Qam16
    } else {
        Modulation::Qam64
    }
}
