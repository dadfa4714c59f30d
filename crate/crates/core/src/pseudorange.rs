//! Downlink phase: the base station's AMC decision, the sniffer's
//! interception and classification, and the mapping from the detected
//! modulation to a ring around the base station.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{snr_at, snr_to_distance, ChannelError, Position2D, Scenario};
use crate::classifier::{classify, ClassifierConfig, ClassifyError};
use crate::mcs::{select_mcs, snr_interval_for_modulation, McsError, McsTable, Modulation};
use crate::signal::{modulate, SignalError};

#[derive(Debug, Error)]
pub enum PseudorangeError {
    /// The served user's SNR is below the MCS table floor.
    #[error("user out of coverage: {0}")]
    OutOfCoverage(McsError),
    /// The sniffer could not extract a usable frame.
    #[error("failed interception: {0}")]
    FailedInterception(#[from] ClassifyError),
    /// The region maps entirely outside the cell (or is degenerate).
    #[error("empty region: ring [{inner_m:.3}, {outer_m:.3}] m{}", modulation.map(|m| format!(" for {m}")).unwrap_or_default())]
    EmptyRegion {
        modulation: Option<Modulation>,
        inner_m: f64,
        outer_m: f64,
    },
    #[error(transparent)]
    Mcs(McsError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Annulus around the base station: the pseudo-ranging output.
///
/// Contains distances in the closed interval `[inner, outer]`; adjacent
/// modulation rings share only their boundary circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ring {
    pub inner_m: f64,
    pub outer_m: f64,
}

impl Ring {
    pub fn new(inner_m: f64, outer_m: f64) -> Result<Self, PseudorangeError> {
        if !(inner_m.is_finite() && outer_m.is_finite() && 0.0 <= inner_m && inner_m < outer_m) {
            return Err(PseudorangeError::EmptyRegion {
                modulation: None,
                inner_m,
                outer_m,
            });
        }
        Ok(Ring { inner_m, outer_m })
    }

    pub fn width_m(&self) -> f64 {
        self.outer_m - self.inner_m
    }

    pub fn mid_radius_m(&self) -> f64 {
        (self.inner_m + self.outer_m) / 2.0
    }

    pub fn area_m2(&self) -> f64 {
        std::f64::consts::PI * (self.outer_m * self.outer_m - self.inner_m * self.inner_m)
    }

    pub fn contains_distance(&self, d: f64) -> bool {
        self.inner_m <= d && d <= self.outer_m
    }
}

/// Bookkeeping record of one downlink interception.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DownlinkObservation {
    pub true_modulation: Modulation,
    pub predicted_modulation: Modulation,
    /// Sniffer's downlink SNR (true value from geometry).
    pub eve_snr_db: f64,
    pub correct: bool,
}

/// Sniffer placement presets, as fractions of the cell radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvePreset {
    Near,
    Mid,
    Far,
}

impl EvePreset {
    pub const ALL: [EvePreset; 3] = [EvePreset::Near, EvePreset::Mid, EvePreset::Far];

    pub fn fraction(self) -> f64 {
        match self {
            EvePreset::Near => 0.10,
            EvePreset::Mid => 0.45,
            EvePreset::Far => 0.90,
        }
    }

    pub fn position(self, scenario: &Scenario) -> Position2D {
        Position2D::new(self.fraction() * scenario.cell_radius_m, 0.0)
    }

    pub fn label(self) -> &'static str {
        match self {
            EvePreset::Near => "near",
            EvePreset::Mid => "mid",
            EvePreset::Far => "far",
        }
    }
}

impl std::str::FromStr for EvePreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "near" => Ok(EvePreset::Near),
            "mid" => Ok(EvePreset::Mid),
            "far" => Ok(EvePreset::Far),
            other => Err(format!("unknown preset `{other}` (near|mid|far)")),
        }
    }
}

/// Maps a modulation to the annulus of distances where AMC would pick it.
///
/// The interval's upper SNR bound gives the inner radius; an unbounded
/// band (the top modulation) degenerates to a disk clipped at the
/// far-field clamp. The outer radius is clipped at the cell radius.
pub fn ring_for_modulation(
    m: Modulation,
    scenario: &Scenario,
    table: &McsTable,
) -> Result<Ring, PseudorangeError> {
    let interval = snr_interval_for_modulation(m, table).map_err(PseudorangeError::Mcs)?;
    let inner_m = match interval.hi_db {
        Some(hi) => snr_to_distance(hi, scenario.alice_tx_power_w, scenario)?.meters,
        None => scenario.reference_distance_m,
    };
    let outer_raw = snr_to_distance(interval.lo_db, scenario.alice_tx_power_w, scenario)?.meters;
    let outer_m = outer_raw.min(scenario.cell_radius_m);
    if inner_m >= outer_m {
        return Err(PseudorangeError::EmptyRegion {
            modulation: Some(m),
            inner_m,
            outer_m,
        });
    }
    Ok(Ring { inner_m, outer_m })
}

/// Simulates one downlink interception: the base station picks the MCS for
/// the user's true SNR and transmits; the sniffer receives the frame at its
/// own SNR, classifies it, and reverse-maps the label to a ring.
pub fn downlink_phase<R: Rng>(
    bob_position: Position2D,
    eve_position: Position2D,
    scenario: &Scenario,
    table: &McsTable,
    config: &ClassifierConfig,
    rng: &mut R,
) -> Result<(DownlinkObservation, Ring), PseudorangeError> {
    let bob_snr = snr_at(scenario.alice_tx_power_w, bob_position.norm(), scenario)?;
    let entry = select_mcs(bob_snr, table).map_err(PseudorangeError::OutOfCoverage)?;
    let true_modulation = entry.modulation;

    let frame = modulate(true_modulation, config.frame_length, rng)?;
    let eve_rx_w = scenario.rx_power_w(scenario.alice_tx_power_w, eve_position.norm());
    let noise_w = scenario.noise_power_w();
    let received = crate::channel::receive(&frame, eve_rx_w, noise_w, rng)?;
    let predicted_modulation = classify(&received, config)?;

    let ring = ring_for_modulation(predicted_modulation, scenario, table)?;
    Ok((
        DownlinkObservation {
            true_modulation,
            predicted_modulation,
            eve_snr_db: received.nominal_snr_db.expect("receive sets nominal snr"),
            correct: predicted_modulation == true_modulation,
        },
        ring,
    ))
}
