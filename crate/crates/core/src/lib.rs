//! Simulation library for a two-phase passive localization attack on
//! AMC-driven wireless links.
//!
//! Phase one intercepts the downlink, classifies the modulation, and maps
//! it through the public MCS table and the Friis model to an annulus
//! (ring) around the base station that must contain the user. Phase two
//! sweeps the uplink SNR along circles inside the ring to pin the user
//! down, optionally sharpened by a multi-antenna bearing estimate.
//!
//! Module map:
//! - [`channel`]: free-space propagation, noise, AWGN, Friis inversion
//! - [`mcs`]: the 802.11ac MCS table, AMC selection, reverse SNR map
//! - [`signal`]: constellations, random symbol frames, IQF1 captures
//! - [`classifier`]: cumulant-based modulation classification at the sniffer
//! - [`pseudorange`]: downlink phase, modulation-to-ring inference
//! - [`localize`]: uplink phase, circular SNR-sweep localization
//! - [`doa`]: uniform linear array snapshots and root-polynomial bearings
//! - [`harness`]: scenario presets, Monte-Carlo experiments, reports

pub mod channel;
pub mod classifier;
pub mod doa;
pub mod harness;
pub mod localize;
pub mod mcs;
pub mod pseudorange;
pub mod signal;

pub use channel::{Position2D, RangedDistance, Scenario};
pub use classifier::ClassifierConfig;
pub use harness::{
    AttackVariant, CompareReport, ExperimentConfig, ExperimentReport, ScenarioId, TrialRecord,
};
pub use localize::{LocalizationTrace, MeasurementMode, SweepParams};
pub use mcs::{McsEntry, McsTable, Modulation};
pub use pseudorange::{DownlinkObservation, EvePreset, Ring};
pub use signal::IqFrame;
