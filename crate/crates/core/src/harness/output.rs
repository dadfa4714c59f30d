//! Experiment artifact emission: trials.csv, summary.json, per-trial
//! traces, and the batch-classification CSV.
//!
//! Float columns use the shortest round-trip decimal form, so identical
//! runs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{
    AttackVariant, CompareReport, ExperimentConfig, ExperimentReport, HarnessError, TrialRecord,
};
use crate::classifier::{classify, estimate_c42, estimate_snr, ClassifierConfig};
use crate::mcs::Modulation;
use crate::signal::read_iqf1_file;

fn partial(dir: &Path, reason: impl std::fmt::Display) -> HarnessError {
    // Best-effort marker so downstream tooling can tell a truncated run
    // from a completed one.
    let _ = fs::write(dir.join("PARTIAL"), format!("{reason}\n"));
    HarnessError::PartialResults {
        out_dir: dir.display().to_string(),
        reason: reason.to_string(),
    }
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(super) fn write_experiment(
    dir: &Path,
    config: &ExperimentConfig,
    records: &[TrialRecord],
    report: &ExperimentReport,
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir.join("traces"))
        .map_err(|e| HarnessError::Config(format!("cannot create {}: {e}", dir.display())))?;

    write_trials_csv(&dir.join("trials.csv"), records).map_err(|e| partial(dir, e))?;
    write_json(&dir.join("summary.json"), report).map_err(|e| partial(dir, e))?;

    let multi = config.variant == AttackVariant::MultiUe;
    for r in records {
        let Some(trace) = &r.trace else { continue };
        let name = if multi {
            format!("trial_{}_ue{}.json", r.trial_id, r.ue_id)
        } else {
            format!("trial_{}.json", r.trial_id)
        };
        write_json(&dir.join("traces").join(name), trace).map_err(|e| partial(dir, e))?;
    }
    Ok(())
}

pub(super) fn write_compare(dir: &Path, report: &CompareReport) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)
        .map_err(|e| HarnessError::Config(format!("cannot create {}: {e}", dir.display())))?;
    write_json(&dir.join("compare_summary.json"), report).map_err(|e| partial(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let body = serde_json::to_vec_pretty(value).map_err(|e| e.to_string())?;
    fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))
}

pub(super) const TRIALS_CSV_HEADER: &[&str] = &[
    "trial_id",
    "ue_id",
    "bob_x_m",
    "bob_y_m",
    "bob_distance_m",
    "true_modulation",
    "predicted_modulation",
    "classification_correct",
    "eve_snr_db",
    "ring_inner_m",
    "ring_outer_m",
    "initial_x_m",
    "initial_y_m",
    "final_x_m",
    "final_y_m",
    "distance_error_m",
    "steps",
    "status",
];

fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<(), String> {
    let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(TRIALS_CSV_HEADER).map_err(|e| e.to_string())?;
    for r in records {
        let obs = r.observation.as_ref();
        let trace = r.trace.as_ref();
        w.write_record(&[
            r.trial_id.to_string(),
            r.ue_id.to_string(),
            r.bob_position.x.to_string(),
            r.bob_position.y.to_string(),
            r.bob_position.norm().to_string(),
            fmt_opt(obs.map(|o| o.true_modulation)),
            fmt_opt(obs.map(|o| o.predicted_modulation)),
            fmt_opt(obs.map(|o| o.correct)),
            fmt_opt(obs.map(|o| o.eve_snr_db)),
            fmt_opt(r.ring.map(|g| g.inner_m)),
            fmt_opt(r.ring.map(|g| g.outer_m)),
            fmt_opt(trace.map(|t| t.initial_estimate.x)),
            fmt_opt(trace.map(|t| t.initial_estimate.y)),
            fmt_opt(trace.map(|t| t.final_estimate.x)),
            fmt_opt(trace.map(|t| t.final_estimate.y)),
            fmt_opt(r.distance_error_m),
            fmt_opt(trace.map(|t| t.steps_taken)),
            r.status.csv_label(),
        ])
        .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

/// One row of the batch-classification output.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifyRow {
    pub frame_id: String,
    pub true_modulation: Option<Modulation>,
    pub predicted_modulation: Option<Modulation>,
    pub c42_estimate: Option<f64>,
    pub snr_estimate_db: Option<f64>,
    /// Populated when the frame could not be classified.
    pub error: Option<String>,
}

/// Classifies IQF1 capture files. Unreadable files are errors; frames
/// below the noise floor produce a row with the error recorded.
pub fn classify_files(
    paths: &[PathBuf],
    config: &ClassifierConfig,
) -> Result<Vec<ClassifyRow>, HarnessError> {
    let mut rows = Vec::with_capacity(paths.len());
    for path in paths {
        let frame = read_iqf1_file(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let frame_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let (predicted, error) = match classify(&frame, config) {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        };
        rows.push(ClassifyRow {
            frame_id,
            true_modulation: frame.modulation,
            predicted_modulation: predicted,
            c42_estimate: estimate_c42(&frame, config.noise_power_w).ok(),
            snr_estimate_db: estimate_snr(&frame, config.noise_power_w).ok(),
            error,
        });
    }
    Ok(rows)
}

pub fn write_classify_csv(rows: &[ClassifyRow], path: &Path) -> Result<(), HarnessError> {
    let render = || -> Result<(), String> {
        let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record([
            "frame_id",
            "true_mod",
            "predicted_mod",
            "c42_estimate",
            "snr_estimate_db",
            "error",
        ])
        .map_err(|e| e.to_string())?;
        for r in rows {
            w.write_record(&[
                r.frame_id.clone(),
                fmt_opt(r.true_modulation),
                fmt_opt(r.predicted_modulation),
                fmt_opt(r.c42_estimate),
                fmt_opt(r.snr_estimate_db),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(|e| e.to_string())?;
        }
        w.flush().map_err(|e| e.to_string())
    };
    render().map_err(HarnessError::Config)
}
