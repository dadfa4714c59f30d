//! Free-space LOS propagation, receiver noise, AWGN, and Friis-based
//! distance inversion.
//!
//! Public operations speak dB for SNR and path loss, and SI units (Hz, W,
//! m, K) for everything else. Internal math is linear.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::signal::IqFrame;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("distance must be positive and finite, got {0}")]
    InvalidDistance(f64),
    #[error("SNR must not be NaN")]
    InvalidSnr,
    #[error("cannot add noise to an empty frame")]
    EmptyFrame,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("scenario file {path}: {reason}")]
    ScenarioFile { path: String, reason: String },
}

/// Full link-budget and geometry context for one cell.
///
/// The base station (Alice) sits at the origin; `cell_radius_m` bounds the
/// served region. Antenna gains are linear power ratios (1.0 = 0 dBi).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub carrier_frequency_hz: f64,
    pub alice_tx_power_w: f64,
    pub bob_tx_power_w: f64,
    pub tx_antenna_gain: f64,
    pub rx_antenna_gain: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub temperature_k: f64,
    /// Far-field lower clamp for the Friis model.
    pub reference_distance_m: f64,
    pub cell_radius_m: f64,
}

impl Scenario {
    /// Scenario with the default receiver chain: 20 MHz bandwidth, 7 dB
    /// noise figure, 290 K, 0 dBi antennas, 1 m far-field clamp.
    pub fn new(
        carrier_frequency_hz: f64,
        alice_tx_power_w: f64,
        bob_tx_power_w: f64,
        cell_radius_m: f64,
    ) -> Result<Self, ChannelError> {
        let s = Scenario {
            carrier_frequency_hz,
            alice_tx_power_w,
            bob_tx_power_w,
            tx_antenna_gain: 1.0,
            rx_antenna_gain: 1.0,
            bandwidth_hz: 20e6,
            noise_figure_db: 7.0,
            temperature_k: 290.0,
            reference_distance_m: 1.0,
            cell_radius_m,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let positive = [
            ("carrier_frequency_hz", self.carrier_frequency_hz),
            ("alice_tx_power_w", self.alice_tx_power_w),
            ("bob_tx_power_w", self.bob_tx_power_w),
            ("tx_antenna_gain", self.tx_antenna_gain),
            ("rx_antenna_gain", self.rx_antenna_gain),
            ("bandwidth_hz", self.bandwidth_hz),
            ("temperature_k", self.temperature_k),
            ("reference_distance_m", self.reference_distance_m),
            ("cell_radius_m", self.cell_radius_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ChannelError::InvalidScenario(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !self.noise_figure_db.is_finite() {
            return Err(ChannelError::InvalidScenario(
                "noise_figure_db must be finite".into(),
            ));
        }
        if self.cell_radius_m <= self.reference_distance_m {
            return Err(ChannelError::InvalidScenario(format!(
                "cell_radius_m ({}) must exceed reference_distance_m ({})",
                self.cell_radius_m, self.reference_distance_m
            )));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    /// Receiver noise power in watts: k·T·B scaled by the noise figure.
    pub fn noise_power_w(&self) -> f64 {
        BOLTZMANN
            * self.temperature_k
            * self.bandwidth_hz
            * 10f64.powf(self.noise_figure_db / 10.0)
    }

    /// Received signal power at `distance_m` from a transmitter at
    /// `tx_power_w`, with the far-field clamp applied.
    pub fn rx_power_w(&self, tx_power_w: f64, distance_m: f64) -> f64 {
        let d = distance_m.max(self.reference_distance_m);
        let factor = self.wavelength_m() / (4.0 * PI * d);
        tx_power_w * self.tx_antenna_gain * self.rx_antenna_gain * factor * factor
    }

    /// Loads a scenario from a plain-text `key = value` file.
    ///
    /// Recognized keys: `frequency_hz`, `alice_tx_power_w`, `bob_tx_power_w`,
    /// `bandwidth_hz`, `noise_figure_db`, `temperature_k`,
    /// `reference_distance_m`, `cell_radius_m`, `tx_gain`, `rx_gain`.
    /// The first four of frequency/powers/cell radius are required; the rest
    /// fall back to the defaults of [`Scenario::new`]. `#` starts a comment.
    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<Self, ChannelError> {
        let path = path.as_ref();
        let err = |reason: String| ChannelError::ScenarioFile {
            path: path.display().to_string(),
            reason,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;

        let mut frequency = None;
        let mut alice = None;
        let mut bob = None;
        let mut cell = None;
        let mut bandwidth = 20e6;
        let mut nf = 7.0;
        let mut temp = 290.0;
        let mut reference = 1.0;
        let mut tx_gain = 1.0;
        let mut rx_gain = 1.0;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = match line.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => match line.split_once(char::is_whitespace) {
                    Some((k, v)) => (k.trim(), v.trim()),
                    None => {
                        return Err(err(format!("line {}: expected `key = value`", lineno + 1)))
                    }
                },
            };
            let value: f64 = value
                .parse()
                .map_err(|_| err(format!("line {}: `{value}` is not a number", lineno + 1)))?;
            match key {
                "frequency_hz" => frequency = Some(value),
                "alice_tx_power_w" => alice = Some(value),
                "bob_tx_power_w" => bob = Some(value),
                "bandwidth_hz" => bandwidth = value,
                "noise_figure_db" => nf = value,
                "temperature_k" => temp = value,
                "reference_distance_m" => reference = value,
                "cell_radius_m" => cell = Some(value),
                "tx_gain" => tx_gain = value,
                "rx_gain" => rx_gain = value,
                other => return Err(err(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }

        let require = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| err(format!("missing required key `{name}`")))
        };
        let s = Scenario {
            carrier_frequency_hz: require("frequency_hz", frequency)?,
            alice_tx_power_w: require("alice_tx_power_w", alice)?,
            bob_tx_power_w: require("bob_tx_power_w", bob)?,
            tx_antenna_gain: tx_gain,
            rx_antenna_gain: rx_gain,
            bandwidth_hz: bandwidth,
            noise_figure_db: nf,
            temperature_k: temp,
            reference_distance_m: reference,
            cell_radius_m: require("cell_radius_m", cell)?,
        };
        s.validate()?;
        Ok(s)
    }
}

/// A point in the cell plane; the base station is the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub const ORIGIN: Position2D = Position2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Position2D { x, y }
    }

    /// Distance from the origin (the base station).
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance_to(&self, other: Position2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Outcome of inverting the path-loss model from an SNR measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangedDistance {
    pub meters: f64,
    /// Set when the raw inverse fell below the far-field clamp and the
    /// result was floored at `reference_distance_m`.
    pub clamped: bool,
}

/// Free-space path loss in dB at `distance_m`, floored at the scenario's
/// far-field reference distance.
pub fn free_space_path_loss(distance_m: f64, scenario: &Scenario) -> Result<f64, ChannelError> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(ChannelError::InvalidDistance(distance_m));
    }
    let d = distance_m.max(scenario.reference_distance_m);
    Ok(20.0 * (4.0 * PI * d / scenario.wavelength_m()).log10())
}

/// Received SNR in dB at `distance_m` from a transmitter at `tx_power_w`.
pub fn snr_at(tx_power_w: f64, distance_m: f64, scenario: &Scenario) -> Result<f64, ChannelError> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(ChannelError::InvalidDistance(distance_m));
    }
    let p_rx = scenario.rx_power_w(tx_power_w, distance_m);
    Ok(10.0 * (p_rx / scenario.noise_power_w()).log10())
}

/// Inverts [`snr_at`]: the distance at which a transmitter at `tx_power_w`
/// is received at `snr_db`. Results below the far-field clamp are floored
/// at `reference_distance_m` and flagged.
pub fn snr_to_distance(
    snr_db: f64,
    tx_power_w: f64,
    scenario: &Scenario,
) -> Result<RangedDistance, ChannelError> {
    if snr_db.is_nan() {
        return Err(ChannelError::InvalidSnr);
    }
    let budget =
        tx_power_w * scenario.tx_antenna_gain * scenario.rx_antenna_gain / scenario.noise_power_w();
    let raw = scenario.wavelength_m() / (4.0 * PI) * budget.sqrt() * 10f64.powf(-snr_db / 20.0);
    if raw < scenario.reference_distance_m {
        Ok(RangedDistance {
            meters: scenario.reference_distance_m,
            clamped: true,
        })
    } else {
        Ok(RangedDistance {
            meters: raw,
            clamped: false,
        })
    }
}

/// Adds circularly-symmetric complex Gaussian noise with per-sample power
/// `10^(-snr_db/10)` to a unit-power frame. `snr_db = +inf` is a no-op.
pub fn apply_awgn<R: Rng>(
    frame: &IqFrame,
    snr_db: f64,
    rng: &mut R,
) -> Result<IqFrame, ChannelError> {
    if frame.samples.is_empty() {
        return Err(ChannelError::EmptyFrame);
    }
    if snr_db.is_nan() {
        return Err(ChannelError::InvalidSnr);
    }
    let mut out = frame.clone();
    out.nominal_snr_db = Some(snr_db);
    if snr_db == f64::INFINITY {
        return Ok(out);
    }
    let sigma = 10f64.powf(-snr_db / 20.0) / 2f64.sqrt();
    for s in &mut out.samples {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *s += Complex64::new(sigma * re, sigma * im);
    }
    Ok(out)
}

/// Scales a unit-power frame to `rx_power_w` and adds receiver noise of
/// `noise_power_w`, producing the frame as seen at a receiver's antenna
/// (physical units, so the receiver's calibrated noise floor applies).
pub fn receive<R: Rng>(
    frame: &IqFrame,
    rx_power_w: f64,
    noise_power_w: f64,
    rng: &mut R,
) -> Result<IqFrame, ChannelError> {
    if frame.samples.is_empty() {
        return Err(ChannelError::EmptyFrame);
    }
    let amp = rx_power_w.sqrt();
    let sigma = (noise_power_w / 2.0).sqrt();
    let samples = frame
        .samples
        .iter()
        .map(|s| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            s * amp + Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    Ok(IqFrame {
        samples,
        nominal_snr_db: Some(10.0 * (rx_power_w / noise_power_w).log10()),
        modulation: frame.modulation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::modulate;
    use crate::Modulation;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario_5ghz() -> Scenario {
        Scenario::new(5e9, 0.2, 0.1, 5_000.0).unwrap()
    }

    /// dB-budget route: same quantities assembled in the log domain.
    fn snr_budget_db(tx_power_w: f64, distance_m: f64, s: &Scenario) -> f64 {
        let p_dbm = 10.0 * (tx_power_w * 1e3).log10();
        let gains_db =
            10.0 * s.tx_antenna_gain.log10() + 10.0 * s.rx_antenna_gain.log10();
        let fspl_db = 20.0
            * ((4.0 * PI * distance_m.max(s.reference_distance_m)).ln()
                - s.wavelength_m().ln())
            / std::f64::consts::LN_10;
        let n_dbm = 10.0 * (s.noise_power_w() * 1e3).log10();
        p_dbm + gains_db - fspl_db - n_dbm
    }

    #[test]
    fn fspl_100m_5ghz() {
        let s = scenario_5ghz();
        // Closed form via the ln route as an independent oracle.
        let oracle = 20.0 / std::f64::consts::LN_10
            * (4.0 * PI * 100.0 * 5e9 / SPEED_OF_LIGHT).ln();
        let loss = free_space_path_loss(100.0, &s).unwrap();
        assert_relative_eq!(loss, oracle, max_relative = 1e-12);
        assert!((loss - 86.43).abs() < 0.01, "loss = {loss}");
    }

    #[test]
    fn fspl_unit_argument_is_zero() {
        let mut s = scenario_5ghz();
        s.reference_distance_m = s.wavelength_m() / (4.0 * PI);
        let loss = free_space_path_loss(s.reference_distance_m, &s).unwrap();
        assert!(loss.abs() < 1e-12, "loss = {loss}");
    }

    #[test]
    fn fspl_doubling_distance_adds_6db() {
        let s = scenario_5ghz();
        let l1 = free_space_path_loss(100.0, &s).unwrap();
        let l2 = free_space_path_loss(200.0, &s).unwrap();
        assert_relative_eq!(l2 - l1, 20.0 * 2f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn fspl_clamps_below_reference() {
        let s = scenario_5ghz();
        let at_ref = free_space_path_loss(s.reference_distance_m, &s).unwrap();
        let below = free_space_path_loss(0.01, &s).unwrap();
        assert_eq!(at_ref, below);
    }

    #[test]
    fn fspl_rejects_nonpositive_distance() {
        let s = scenario_5ghz();
        assert!(free_space_path_loss(0.0, &s).is_err());
        assert!(free_space_path_loss(-3.0, &s).is_err());
        assert!(free_space_path_loss(f64::NAN, &s).is_err());
    }

    #[test]
    fn fspl_monotone_in_distance_and_frequency() {
        let s = scenario_5ghz();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let d = 1.0 + i as f64 * 5.0;
            let l = free_space_path_loss(d, &s).unwrap();
            assert!(l >= prev);
            prev = l;
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let mut sf = scenario_5ghz();
            sf.carrier_frequency_hz = 1e9 + i as f64 * 1e8;
            let l = free_space_path_loss(250.0, &sf).unwrap();
            assert!(l >= prev);
            prev = l;
        }
    }

    #[test]
    fn snr_at_matches_db_budget() {
        let s = scenario_5ghz();
        // 200 mW at 100 m, 5 GHz, NF 7 dB, B 20 MHz.
        let snr = snr_at(0.2, 100.0, &s).unwrap();
        let oracle = snr_budget_db(0.2, 100.0, &s);
        assert_relative_eq!(snr, oracle, epsilon = 1e-9);
        assert!((snr - 30.548).abs() < 0.01, "snr = {snr}");
    }

    #[test]
    fn snr_at_distance_and_power_deltas() {
        let s = scenario_5ghz();
        let base = snr_at(0.2, 120.0, &s).unwrap();
        let twice_d = snr_at(0.2, 240.0, &s).unwrap();
        let twice_p = snr_at(0.4, 120.0, &s).unwrap();
        assert_relative_eq!(base - twice_d, 20.0 * 2f64.log10(), epsilon = 1e-10);
        assert_relative_eq!(twice_p - base, 10.0 * 2f64.log10(), epsilon = 1e-10);
    }

    #[test]
    fn snr_round_trip() {
        let s = scenario_5ghz();
        let snr = snr_at(0.2, 137.2, &s).unwrap();
        let d = snr_to_distance(snr, 0.2, &s).unwrap();
        assert!(!d.clamped);
        assert_relative_eq!(d.meters, 137.2, max_relative = 1e-9);
    }

    #[test]
    fn snr_to_distance_2db_is_about_2_68km() {
        let s = scenario_5ghz();
        let d = snr_to_distance(2.0, 0.2, &s).unwrap();
        // Inverted dB-budget oracle.
        let oracle = snr_budget_db(0.2, 1.0, &s); // snr at 1 m
        let expect = 10f64.powf((oracle - 2.0) / 20.0); // 1 m * 10^(drop/20)
        assert_relative_eq!(d.meters, expect, max_relative = 1e-9);
        assert!((d.meters / 1000.0 - 2.68).abs() < 0.01, "d = {} m", d.meters);
    }

    #[test]
    fn snr_to_distance_monotone_decreasing() {
        let s = scenario_5ghz();
        let mut prev = f64::INFINITY;
        for i in 0..500 {
            let snr = -5.0 + i as f64 * 0.1;
            let d = snr_to_distance(snr, 0.2, &s).unwrap().meters;
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn snr_to_distance_clamps_and_flags() {
        let s = scenario_5ghz();
        let at_ref = snr_at(0.2, s.reference_distance_m, &s).unwrap();
        let d = snr_to_distance(at_ref + 10.0, 0.2, &s).unwrap();
        assert!(d.clamped);
        assert_eq!(d.meters, s.reference_distance_m);
        let inf = snr_to_distance(f64::INFINITY, 0.2, &s).unwrap();
        assert!(inf.clamped);
    }

    #[test]
    fn awgn_infinite_snr_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frame = modulate(Modulation::Qpsk, 256, &mut rng).unwrap();
        let out = apply_awgn(&frame, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(frame.samples, out.samples);
    }

    #[test]
    fn awgn_rejects_empty_frame() {
        let frame = IqFrame {
            samples: vec![],
            nominal_snr_db: None,
            modulation: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            apply_awgn(&frame, 10.0, &mut rng),
            Err(ChannelError::EmptyFrame)
        );
    }

    #[test]
    fn awgn_is_deterministic_per_seed() {
        let mut mrng = ChaCha8Rng::seed_from_u64(3);
        let frame = modulate(Modulation::Qam16, 512, &mut mrng).unwrap();
        let a = apply_awgn(&frame, 12.0, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = apply_awgn(&frame, 12.0, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let c = apply_awgn(&frame, 12.0, &mut ChaCha8Rng::seed_from_u64(43)).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn awgn_empirical_snr_within_tolerance() {
        // Sample-statistics oracle: 1e6 samples, +-0.05 dB.
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let frame = modulate(Modulation::Qpsk, n, &mut rng).unwrap();
        let snr_db = 10.0;
        let noisy = apply_awgn(&frame, snr_db, &mut rng).unwrap();
        let noise_power: f64 = frame
            .samples
            .iter()
            .zip(&noisy.samples)
            .map(|(s, r)| (r - s).norm_sqr())
            .sum::<f64>()
            / n as f64;
        let signal_power: f64 =
            frame.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
        let measured = 10.0 * (signal_power / noise_power).log10();
        assert!((measured - snr_db).abs() < 0.05, "measured = {measured}");
    }

    #[test]
    fn awgn_component_variances_are_half_sigma_squared() {
        let n = 1_000_000usize;
        let snr_db = 6.0;
        let sigma2 = 10f64.powf(-snr_db / 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let frame = modulate(Modulation::Bpsk, n, &mut rng).unwrap();
        let noisy = apply_awgn(&frame, snr_db, &mut rng).unwrap();
        let (mut var_re, mut var_im) = (0.0, 0.0);
        for (s, r) in frame.samples.iter().zip(&noisy.samples) {
            let d = r - s;
            var_re += d.re * d.re;
            var_im += d.im * d.im;
        }
        var_re /= n as f64;
        var_im /= n as f64;
        // Var of a chi^2-like estimator: 3-sigma statistical bound.
        let bound = 3.0 * (2.0 / n as f64).sqrt() * sigma2 / 2.0;
        assert!((var_re - sigma2 / 2.0).abs() < bound, "var_re = {var_re}");
        assert!((var_im - sigma2 / 2.0).abs() < bound, "var_im = {var_im}");
    }

    #[test]
    fn receive_sets_nominal_snr_and_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frame = modulate(Modulation::Qpsk, 4096, &mut rng).unwrap();
        let s = scenario_5ghz();
        let n = s.noise_power_w();
        let p = n * 100.0; // 20 dB
        let rx = receive(&frame, p, n, &mut rng).unwrap();
        assert_relative_eq!(rx.nominal_snr_db.unwrap(), 20.0, epsilon = 1e-12);
        let power: f64 = rx.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / 4096.0;
        assert_relative_eq!(power, p + n, max_relative = 0.1);
    }

    #[test]
    fn scenario_validation_catches_bad_fields() {
        assert!(Scenario::new(0.0, 0.2, 0.1, 100.0).is_err());
        assert!(Scenario::new(5e9, -1.0, 0.1, 100.0).is_err());
        assert!(Scenario::new(5e9, 0.2, 0.1, 0.5).is_err()); // cell below clamp
    }

    #[test]
    fn scenario_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cell.cfg");
        fs::write(
            &path,
            "# test cell\nfrequency_hz = 28e9\nalice_tx_power_w = 0.2\n\
             bob_tx_power_w = 0.1\ncell_radius_m = 480\nnoise_figure_db = 5\n\
             tx_gain 2.0\n",
        )
        .unwrap();
        let s = Scenario::from_file(&path).unwrap();
        assert_eq!(s.carrier_frequency_hz, 28e9);
        assert_eq!(s.noise_figure_db, 5.0);
        assert_eq!(s.tx_antenna_gain, 2.0);
        assert_eq!(s.bandwidth_hz, 20e6);

        fs::write(&path, "frequency_hz = 28e9\n").unwrap();
        assert!(Scenario::from_file(&path).is_err());
        fs::write(&path, "frequency_hz = 28e9\nbogus_key = 1\n").unwrap();
        assert!(Scenario::from_file(&path).is_err());
    }

    #[test]
    fn position_basics() {
        let p = Position2D::new(3.0, 4.0);
        assert_eq!(p.norm(), 5.0);
        assert_eq!(p.distance_to(Position2D::ORIGIN), 5.0);
    }
}
