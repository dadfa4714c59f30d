//! Uplink phase: circular SNR-sweep localization inside the ring.
//!
//! The sniffer walks the circle of the ring's midpoint radius and keeps
//! the highest-SNR point as the initial estimate, then ranges the user
//! once by inverting the path-loss model and sweeps the circle of that
//! radius around the estimate, repeating the sweep (with best-SNR memory)
//! until the argmax stops moving. All measurements flow through
//! [`UplinkChannel`]; the search logic itself never reads the user's true
//! position.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::channel::{snr_at, snr_to_distance, ChannelError, Position2D, Scenario};
use crate::classifier::estimate_snr_samples;
use crate::doa::DoaEstimate;
use crate::pseudorange::Ring;
use crate::signal::Constellation;
use crate::Modulation;

/// Measurements cannot resolve ranges below the far-field clamp; treat
/// ranges within this factor of it as "at the floor".
const RANGE_FLOOR_SLACK: f64 = 1.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizeError {
    #[error("every sweep measurement was below the noise floor")]
    SweepFailed,
    #[error("invalid sweep parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Whether uplink SNR measurements are exact or frame-estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasurementMode {
    /// SNR computed exactly from geometry; verifies the search logic.
    Oracle,
    /// SNR estimated from a finite synthesized frame (default).
    Estimated,
}

impl std::str::FromStr for MeasurementMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "oracle" => Ok(MeasurementMode::Oracle),
            "estimated" => Ok(MeasurementMode::Estimated),
            other => Err(format!("unknown mode `{other}` (oracle|estimated)")),
        }
    }
}

/// Radius of the sniffer's first circle inside the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialRadiusRule {
    /// Midpoint radius (inner + outer) / 2 (default).
    Midpoint,
    /// Half the ring width (outer - inner) / 2, kept for comparison.
    HalfRingWidth,
}

/// Parameters of the uplink sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepParams {
    pub delta_theta_1_deg: f64,
    pub delta_theta_2_deg: f64,
    pub tolerance_m: f64,
    pub max_refinements: usize,
    pub measurement_frame_length: usize,
    pub mode: MeasurementMode,
    pub initial_radius_rule: InitialRadiusRule,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            delta_theta_1_deg: 1.0,
            delta_theta_2_deg: 1.0,
            tolerance_m: 0.5,
            max_refinements: 10,
            measurement_frame_length: 4096,
            mode: MeasurementMode::Estimated,
            initial_radius_rule: InitialRadiusRule::Midpoint,
        }
    }
}

impl SweepParams {
    pub fn validate(&self) -> Result<(), LocalizeError> {
        for (name, v) in [
            ("delta_theta_1_deg", self.delta_theta_1_deg),
            ("delta_theta_2_deg", self.delta_theta_2_deg),
        ] {
            if !(v > 0.0 && v <= 90.0) {
                return Err(LocalizeError::InvalidParams(format!(
                    "{name} must be in (0, 90], got {v}"
                )));
            }
        }
        if !(self.tolerance_m > 0.0) {
            return Err(LocalizeError::InvalidParams(format!(
                "tolerance_m must be positive, got {}",
                self.tolerance_m
            )));
        }
        if self.max_refinements < 1 {
            return Err(LocalizeError::InvalidParams(
                "max_refinements must be at least 1".into(),
            ));
        }
        if self.measurement_frame_length < 1 {
            return Err(LocalizeError::InvalidParams(
                "measurement_frame_length must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Full record of the sniffer's movement and measurements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationTrace {
    pub initial_estimate: Position2D,
    /// Best position after each refinement sweep.
    pub refinement_centers: Vec<Position2D>,
    /// Every position visited, in order (initial sweep, ranging stop,
    /// refinement sweeps, probes).
    pub visited: Vec<Position2D>,
    /// Measured SNR at each visited position (-inf when below noise).
    pub measured_snrs_db: Vec<f64>,
    /// Coarse range estimates, one per ranging measurement.
    pub coarse_ranges_m: Vec<f64>,
    pub final_estimate: Position2D,
    /// Filled by the experiment harness, never by the attacker path.
    pub distance_error_m: Option<f64>,
    pub steps_taken: usize,
    /// Bearing estimate details when the multi-antenna variant ran.
    pub doa: Option<DoaEstimate>,
}

/// Accumulates a trace across the phases of one localization run.
#[derive(Debug, Default)]
pub(crate) struct TraceBuilder {
    initial_estimate: Option<Position2D>,
    refinement_centers: Vec<Position2D>,
    visited: Vec<Position2D>,
    measured_snrs_db: Vec<f64>,
    coarse_ranges_m: Vec<f64>,
    final_estimate: Option<Position2D>,
    doa: Option<DoaEstimate>,
}

impl TraceBuilder {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push_measurement(&mut self, pos: Position2D, snr_db: f64) {
        self.visited.push(pos);
        self.measured_snrs_db.push(snr_db);
    }

    pub(crate) fn push_range(&mut self, meters: f64) {
        self.coarse_ranges_m.push(meters);
    }

    pub(crate) fn push_center(&mut self, pos: Position2D) {
        self.refinement_centers.push(pos);
    }

    pub(crate) fn set_initial(&mut self, pos: Position2D) {
        self.initial_estimate = Some(pos);
    }

    pub(crate) fn set_final(&mut self, pos: Position2D) {
        self.final_estimate = Some(pos);
    }

    pub(crate) fn set_doa(&mut self, doa: DoaEstimate) {
        self.doa = Some(doa);
    }

    pub(crate) fn finish(self) -> LocalizationTrace {
        let final_estimate = self
            .final_estimate
            .or(self.initial_estimate)
            .unwrap_or(Position2D::ORIGIN);
        LocalizationTrace {
            initial_estimate: self.initial_estimate.unwrap_or(final_estimate),
            refinement_centers: self.refinement_centers,
            steps_taken: self.visited.len(),
            visited: self.visited,
            measured_snrs_db: self.measured_snrs_db,
            coarse_ranges_m: self.coarse_ranges_m,
            final_estimate,
            distance_error_m: None,
            doa: self.doa,
        }
    }
}

/// The sniffer's view of the user's uplink: measurements depend on the
/// user's position only through received SNR. Uplink frames carry QPSK
/// symbols (the estimator uses only their power).
pub struct UplinkChannel<'a> {
    scenario: &'a Scenario,
    bob: Position2D,
    mode: MeasurementMode,
    frame_length: usize,
    rng: ChaCha8Rng,
    constellation: Constellation,
    measurements: usize,
}

impl<'a> UplinkChannel<'a> {
    pub fn new(scenario: &'a Scenario, bob: Position2D, params: &SweepParams, seed: u64) -> Self {
        UplinkChannel {
            scenario,
            bob,
            mode: params.mode,
            frame_length: params.measurement_frame_length,
            rng: ChaCha8Rng::seed_from_u64(seed),
            constellation: Constellation::for_modulation(Modulation::Qpsk),
            measurements: 0,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn tx_power_w(&self) -> f64 {
        self.scenario.bob_tx_power_w
    }

    /// Ground-truth user position; reachable only by measurement and
    /// snapshot synthesis, never by the search logic.
    pub(crate) fn target(&self) -> Position2D {
        self.bob
    }

    /// Number of measurements taken so far.
    pub fn measurements(&self) -> usize {
        self.measurements
    }

    /// Measured uplink SNR at `eve` in dB; -inf when the frame power does
    /// not clear the noise floor (the sweep records it and moves on).
    pub fn measure(&mut self, eve: Position2D) -> f64 {
        self.measurements += 1;
        let distance = eve
            .distance_to(self.bob)
            .max(self.scenario.reference_distance_m);
        let true_snr = snr_at(self.scenario.bob_tx_power_w, distance, self.scenario)
            .expect("distance is clamped positive");
        match self.mode {
            MeasurementMode::Oracle => true_snr,
            MeasurementMode::Estimated => {
                let rx_w = self.scenario.rx_power_w(self.scenario.bob_tx_power_w, distance);
                let noise_w = self.scenario.noise_power_w();
                let amp = rx_w.sqrt();
                let sigma = (noise_w / 2.0).sqrt();
                let n_points = self.constellation.points.len();
                let samples: Vec<Complex64> = (0..self.frame_length)
                    .map(|_| {
                        let s = self.constellation.points[self.rng.random_range(0..n_points)];
                        let re: f64 = StandardNormal.sample(&mut self.rng);
                        let im: f64 = StandardNormal.sample(&mut self.rng);
                        s * amp + Complex64::new(sigma * re, sigma * im)
                    })
                    .collect();
                estimate_snr_samples(&samples, noise_w).unwrap_or(f64::NEG_INFINITY)
            }
        }
    }
}

/// One uplink SNR measurement at `eve_position` of a user at
/// `bob_position`; `-inf` marks an undetectable frame.
pub fn measure_uplink_snr(
    eve_position: Position2D,
    bob_position: Position2D,
    scenario: &Scenario,
    params: &SweepParams,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut ch = UplinkChannel::new(scenario, bob_position, params, 0);
    std::mem::swap(&mut ch.rng, rng);
    let snr = ch.measure(eve_position);
    std::mem::swap(&mut ch.rng, rng);
    snr
}

/// Walks the circle of `radius` around `center` in steps of `step_deg`
/// starting at 0 degrees, measuring at every point. Returns the first
/// strict argmax, or None when every measurement was below noise.
fn sweep_circle(
    center: Position2D,
    radius: f64,
    step_deg: f64,
    ch: &mut UplinkChannel,
    tb: &mut TraceBuilder,
) -> Option<(Position2D, f64)> {
    let n = ((360.0 / step_deg).round() as usize).max(1);
    let mut best: Option<(Position2D, f64)> = None;
    for i in 0..n {
        let theta = (i as f64 * step_deg).to_radians();
        let pos = Position2D::new(
            center.x + radius * theta.cos(),
            center.y + radius * theta.sin(),
        );
        let snr = ch.measure(pos);
        tb.push_measurement(pos, snr);
        if snr.is_finite() && best.map_or(true, |(_, b)| snr > b) {
            best = Some((pos, snr));
        }
    }
    best
}

fn initial_radius(ring: &Ring, rule: InitialRadiusRule) -> f64 {
    match rule {
        InitialRadiusRule::Midpoint => ring.mid_radius_m(),
        InitialRadiusRule::HalfRingWidth => ring.width_m() / 2.0,
    }
}

/// Initial sweep: N = 360/delta_theta_1 points on the circle of the
/// ring's midpoint radius around the base station; returns the
/// highest-SNR position and its SNR (ties keep the first in angular
/// order).
pub fn initial_sweep(
    ring: &Ring,
    ch: &mut UplinkChannel,
    params: &SweepParams,
) -> Result<(Position2D, f64), LocalizeError> {
    params.validate()?;
    let mut tb = TraceBuilder::new();
    initial_sweep_into(ring, ch, params, &mut tb)
}

pub(crate) fn initial_sweep_into(
    ring: &Ring,
    ch: &mut UplinkChannel,
    params: &SweepParams,
    tb: &mut TraceBuilder,
) -> Result<(Position2D, f64), LocalizeError> {
    let radius = initial_radius(ring, params.initial_radius_rule);
    sweep_circle(
        Position2D::ORIGIN,
        radius,
        params.delta_theta_1_deg,
        ch,
        tb,
    )
    .ok_or(LocalizeError::SweepFailed)
}

/// Refinement: one coarse-ranging measurement at the initial estimate
/// gives the circle radius, then that circle is swept repeatedly with
/// best-SNR memory until the argmax position repeats (or the sweep budget
/// runs out). Ranging at or below the far-field clamp, or below the
/// tolerance, means the user is within measurement resolution and the
/// estimate is returned as-is.
pub fn refine(
    initial: Position2D,
    ch: &mut UplinkChannel,
    params: &SweepParams,
) -> Result<LocalizationTrace, LocalizeError> {
    params.validate()?;
    let mut tb = TraceBuilder::new();
    tb.set_initial(initial);
    refine_into(initial, ch, params, &mut tb)?;
    Ok(tb.finish())
}

pub(crate) fn refine_into(
    initial: Position2D,
    ch: &mut UplinkChannel,
    params: &SweepParams,
    tb: &mut TraceBuilder,
) -> Result<(), LocalizeError> {
    // Coarse ranging from the initial estimate.
    let snr_c = ch.measure(initial);
    tb.push_measurement(initial, snr_c);
    if !snr_c.is_finite() {
        // Undetectable uplink at the estimate: keep the estimate.
        tb.set_final(initial);
        return Ok(());
    }
    let range = snr_to_distance(snr_c, ch.tx_power_w(), ch.scenario())?;
    tb.push_range(range.meters);
    let floor = ch.scenario().reference_distance_m * RANGE_FLOOR_SLACK;
    if range.clamped || range.meters < params.tolerance_m || range.meters <= floor {
        tb.set_final(initial);
        return Ok(());
    }

    let mut best: Option<(Position2D, f64)> = None;
    let mut prev_argmax: Option<Position2D> = None;
    for _ in 0..params.max_refinements {
        let swept = sweep_circle(initial, range.meters, params.delta_theta_2_deg, ch, tb);
        let Some((pos, snr)) = swept else {
            continue;
        };
        if best.map_or(true, |(_, b)| snr > b) {
            best = Some((pos, snr));
        }
        tb.push_center(best.expect("just set").0);
        if prev_argmax == Some(pos) {
            break;
        }
        prev_argmax = Some(pos);
    }
    match best {
        Some((pos, _)) => {
            tb.set_final(pos);
            Ok(())
        }
        None => Err(LocalizeError::SweepFailed),
    }
}

/// Full single-antenna uplink localization: initial sweep plus
/// refinement, recorded in one trace.
pub fn localize_in_ring(
    ring: &Ring,
    ch: &mut UplinkChannel,
    params: &SweepParams,
) -> Result<LocalizationTrace, LocalizeError> {
    params.validate()?;
    let mut tb = TraceBuilder::new();
    let (initial, _snr) = initial_sweep_into(ring, ch, params, &mut tb)?;
    tb.set_initial(initial);
    refine_into(initial, ch, params, &mut tb)?;
    Ok(tb.finish())
}

/// Multi-user localization: one ring and one independent RNG stream per
/// user, derived from `base_seed` as `mix64(base_seed, ue_index)`. Users
/// sharing a ring share the same sweep geometry, so one physical pass
/// serves all of them; results are identical to independent runs with the
/// same derived seeds, and one user's failure does not abort the others.
pub fn localize_multi(
    rings: &[Ring],
    bob_positions: &[Position2D],
    scenario: &Scenario,
    params: &SweepParams,
    base_seed: u64,
) -> Vec<Result<LocalizationTrace, LocalizeError>> {
    rings
        .iter()
        .zip(bob_positions)
        .enumerate()
        .map(|(ue, (ring, &bob))| {
            let mut ch =
                UplinkChannel::new(scenario, bob, params, crate::harness::mix64(base_seed, ue as u64));
            localize_in_ring(ring, &mut ch, params)
        })
        .collect()
}
