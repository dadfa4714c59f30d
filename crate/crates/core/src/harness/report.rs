//! Aggregate statistics over trial records.

use serde::Serialize;

use super::{AttackVariant, ExperimentConfig, TrialRecord, TrialStatus};

/// Distance-error summary; quantiles use the nearest-rank convention so
/// aggregation is invariant under trial reordering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorStats {
    pub count: usize,
    pub mean_m: Option<f64>,
    pub median_m: Option<f64>,
    pub p90_m: Option<f64>,
    pub max_m: Option<f64>,
}

impl ErrorStats {
    pub fn from_errors(errors: &[f64]) -> Self {
        if errors.is_empty() {
            return ErrorStats {
                count: 0,
                mean_m: None,
                median_m: None,
                p90_m: None,
                max_m: None,
            };
        }
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let rank = |q: f64| sorted[((q * n as f64).ceil() as usize).clamp(1, n) - 1];
        ErrorStats {
            count: n,
            mean_m: Some(sorted.iter().sum::<f64>() / n as f64),
            median_m: Some(rank(0.5)),
            p90_m: Some(rank(0.9)),
            max_m: Some(sorted[n - 1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationStats {
    /// Trials in which the sniffer attempted an interception.
    pub attempts: usize,
    /// Frames that produced a label.
    pub classified: usize,
    pub correct: usize,
    pub accuracy: Option<f64>,
    /// Frames lost below the sniffer's noise floor (counted separately,
    /// not as misclassifications).
    pub failed_interceptions: usize,
    /// Users placed outside coverage (no downlink to intercept).
    pub out_of_coverage: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo_m: f64,
    pub count: usize,
}

/// Aggregate report for one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub scenario_label: String,
    pub variant: AttackVariant,
    pub eve_preset: String,
    pub mode: String,
    pub num_trials: usize,
    pub master_seed: u64,
    pub classification: ClassificationStats,
    /// Error statistics per user index.
    pub per_ue_error: Vec<ErrorStats>,
    /// Error statistics over all users.
    pub overall_error: ErrorStats,
    /// 0.1 m bins over the observed errors (empty bins omitted).
    pub histogram: Vec<HistogramBin>,
    pub localization_failures: usize,
}

pub(super) fn aggregate(config: &ExperimentConfig, records: &[TrialRecord]) -> ExperimentReport {
    let mut attempts = 0;
    let mut classified = 0;
    let mut correct = 0;
    let mut failed_interceptions = 0;
    let mut out_of_coverage = 0;
    let mut localization_failures = 0;

    let num_users = records.iter().map(|r| r.ue_id + 1).max().unwrap_or(1);
    let mut per_ue: Vec<Vec<f64>> = vec![Vec::new(); num_users];
    let mut all = Vec::new();

    for r in records {
        match &r.status {
            TrialStatus::NoRing(reason) if reason == "out_of_coverage" => {
                out_of_coverage += 1;
                continue;
            }
            TrialStatus::NoRing(reason) if reason == "failed_interception" => {
                attempts += 1;
                failed_interceptions += 1;
                continue;
            }
            TrialStatus::NoRing(_) => {
                attempts += 1;
                continue;
            }
            TrialStatus::LocalizationFailed(_) => {
                localization_failures += 1;
            }
            TrialStatus::Ok => {}
        }
        attempts += 1;
        if let Some(obs) = &r.observation {
            classified += 1;
            if obs.correct {
                correct += 1;
            }
        }
        if let Some(err) = r.distance_error_m {
            per_ue[r.ue_id].push(err);
            all.push(err);
        }
    }

    let histogram = histogram_bins(&all, 0.1);
    ExperimentReport {
        scenario_label: config.scenario_label.clone(),
        variant: config.variant,
        eve_preset: config.eve_preset.label().to_string(),
        mode: format!("{:?}", config.sweep.mode).to_ascii_lowercase(),
        num_trials: config.num_trials,
        master_seed: config.master_seed,
        classification: ClassificationStats {
            attempts,
            classified,
            correct,
            accuracy: (classified > 0).then(|| correct as f64 / classified as f64),
            failed_interceptions,
            out_of_coverage,
        },
        per_ue_error: per_ue.iter().map(|v| ErrorStats::from_errors(v)).collect(),
        overall_error: ErrorStats::from_errors(&all),
        histogram,
        localization_failures,
    }
}

fn histogram_bins(errors: &[f64], width_m: f64) -> Vec<HistogramBin> {
    let mut counts = std::collections::BTreeMap::new();
    for &e in errors {
        let bin = (e / width_m).floor() as i64;
        *counts.entry(bin).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .map(|(bin, count)| HistogramBin {
            lo_m: bin as f64 * width_m,
            count,
        })
        .collect()
}

/// Side-by-side variant comparison on matched seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub single: ExperimentReport,
    pub multi_ue: ExperimentReport,
    pub ula: ExperimentReport,
    /// ULA mean error over single-antenna mean error.
    pub ula_to_single_mean_ratio: Option<f64>,
    /// Per-user mean errors in the multi-user run.
    pub multi_ue_per_user_mean_m: Vec<Option<f64>>,
    pub single_mean_m: Option<f64>,
}

pub(super) fn compare(
    single: ExperimentReport,
    multi_ue: ExperimentReport,
    ula: ExperimentReport,
) -> CompareReport {
    let ratio = match (ula.overall_error.mean_m, single.overall_error.mean_m) {
        (Some(u), Some(s)) if s > 0.0 => Some(u / s),
        _ => None,
    };
    CompareReport {
        ula_to_single_mean_ratio: ratio,
        multi_ue_per_user_mean_m: multi_ue.per_ue_error.iter().map(|e| e.mean_m).collect(),
        single_mean_m: single.overall_error.mean_m,
        single,
        multi_ue,
        ula,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_stats_nearest_rank() {
        let stats = ErrorStats::from_errors(&[3.0, 1.0, 2.0, 5.0, 4.0]);
        assert_eq!(stats.count, 5);
        assert_eq!(stats.mean_m, Some(3.0));
        assert_eq!(stats.median_m, Some(3.0));
        assert_eq!(stats.p90_m, Some(5.0));
        assert_eq!(stats.max_m, Some(5.0));
        let empty = ErrorStats::from_errors(&[]);
        assert_eq!(empty.count, 0);
        assert_eq!(empty.mean_m, None);
    }

    #[test]
    fn error_stats_invariant_under_reordering() {
        let a = [0.4, 1.7, 0.1, 2.2, 0.9, 1.1, 0.5];
        let mut b = a;
        b.reverse();
        assert_eq!(ErrorStats::from_errors(&a), ErrorStats::from_errors(&b));
    }

    #[test]
    fn histogram_uses_tenth_meter_bins() {
        let bins = histogram_bins(&[0.05, 0.07, 0.23, 1.0], 0.1);
        assert_eq!(
            bins,
            vec![
                HistogramBin { lo_m: 0.0, count: 2 },
                HistogramBin { lo_m: 0.2, count: 1 },
                HistogramBin { lo_m: 1.0, count: 1 },
            ]
        );
    }
}
