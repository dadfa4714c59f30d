//! Command-line driver for the passive localization attack simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 partial results.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use attack_sim_core::harness::{
    classify_files, compare_variants, preset_scenario, run_experiment, write_classify_csv,
    AttackVariant, ExperimentConfig, HarnessError, ScenarioId,
};
use attack_sim_core::localize::MeasurementMode;
use attack_sim_core::pseudorange::{ring_for_modulation, EvePreset};
use attack_sim_core::{ClassifierConfig, McsTable, Modulation, Scenario};

#[derive(Parser)]
#[command(
    name = "attack-sim",
    about = "Passive localization attack simulator: pseudo-ranging and uplink SNR-sweep localization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write trials.csv / summary.json / traces.
    Run(RunArgs),
    /// Classify IQF1 capture files and write a CSV of predictions.
    Classify(ClassifyArgs),
    /// Print the distance ring a detected modulation implies.
    Ring(RingArgs),
    /// Run the single, multi-ue, and ula variants on matched seeds.
    Compare(CompareArgs),
}

#[derive(Args)]
struct ScenarioArg {
    /// Preset id (a..h, k) or a path to a key-value scenario file.
    #[arg(long)]
    scenario: String,
    /// Optional custom MCS table CSV.
    #[arg(long)]
    mcs_table: Option<PathBuf>,
}

impl ScenarioArg {
    fn resolve(&self) -> anyhow::Result<(Scenario, String, McsTable)> {
        let (scenario, label) = match ScenarioId::from_str(&self.scenario) {
            Ok(id) => (preset_scenario(id), id.label().to_string()),
            Err(_) => {
                let path = PathBuf::from(&self.scenario);
                if !path.exists() {
                    anyhow::bail!(
                        "`{}` is neither a preset id (a..h, k) nor an existing file",
                        self.scenario
                    );
                }
                let s = Scenario::from_file(&path)?;
                let label = path
                    .file_stem()
                    .map(|v| v.to_string_lossy().into_owned())
                    .unwrap_or_else(|| self.scenario.clone());
                (s, label)
            }
        };
        let table = match &self.mcs_table {
            Some(path) => McsTable::from_csv_path(path)?,
            None => McsTable::default(),
        };
        Ok((scenario, label, table))
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    /// Attack variant: single | multi-ue | ula.
    #[arg(long, default_value = "single")]
    variant: AttackVariant,
    /// Monte-Carlo iterations.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Master seed; the whole run is a pure function of it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Measurement mode: oracle | estimated.
    #[arg(long, default_value = "estimated")]
    mode: MeasurementMode,
    /// Sniffer downlink placement: near | mid | far.
    #[arg(long, default_value = "near")]
    eve: EvePreset,
    /// Output directory for trials.csv, summary.json, traces/.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// IQF1 files (shell globs expand to multiple values); a literal
    /// `*` pattern is also accepted.
    #[arg(long, num_args = 1.., required = true)]
    frames: Vec<String>,
    /// Output CSV path.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Noise power in watts assumed by the classifier (receiver
    /// calibration); defaults to the thermal floor of a preset-d cell.
    #[arg(long)]
    noise_power_w: Option<f64>,
}

#[derive(Args)]
struct RingArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    /// Modulation: bpsk | qpsk | qam16 | qam64.
    #[arg(long)]
    modulation: Modulation,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "estimated")]
    mode: MeasurementMode,
    #[arg(long, default_value = "near")]
    eve: EvePreset,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<HarnessError>()
                .is_some_and(|h| matches!(h, HarnessError::PartialResults { .. }))
            {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let (scenario, label, table) = args.scenario.resolve()?;
            let mut config = ExperimentConfig::new(scenario, label);
            config.table = table;
            config.variant = args.variant;
            config.num_trials = args.trials;
            config.master_seed = args.seed;
            config.sweep.mode = args.mode;
            config.eve_preset = args.eve;
            config.out_dir = Some(args.out_dir.clone());
            let run = run_experiment(&config)?;
            println!("{}", serde_json::to_string_pretty(&run.report)?);
            eprintln!("wrote {}", args.out_dir.display());
            Ok(())
        }
        Command::Classify(args) => {
            let paths = expand_frame_args(&args.frames)?;
            if paths.is_empty() {
                anyhow::bail!("no frame files matched");
            }
            let noise = args
                .noise_power_w
                .unwrap_or_else(|| preset_scenario(ScenarioId::D).noise_power_w());
            let config = ClassifierConfig::new(noise);
            let rows = classify_files(&paths, &config)?;
            let failures = rows.iter().filter(|r| r.error.is_some()).count();
            write_classify_csv(&rows, &args.out)?;
            eprintln!(
                "classified {} frames ({} undecodable) -> {}",
                rows.len(),
                failures,
                args.out.display()
            );
            Ok(())
        }
        Command::Ring(args) => {
            let (scenario, label, table) = args.scenario.resolve()?;
            let ring = ring_for_modulation(args.modulation, &scenario, &table)?;
            println!(
                "scenario {label}: {} ring inner {:.3} m outer {:.3} m (width {:.3} m)",
                args.modulation,
                ring.inner_m,
                ring.outer_m,
                ring.width_m()
            );
            Ok(())
        }
        Command::Compare(args) => {
            let (scenario, label, table) = args.scenario.resolve()?;
            let mut config = ExperimentConfig::new(scenario, label);
            config.table = table;
            config.num_trials = args.trials;
            config.master_seed = args.seed;
            config.sweep.mode = args.mode;
            config.eve_preset = args.eve;
            config.out_dir = Some(args.out_dir.clone());
            let report = compare_variants(&config)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            eprintln!("wrote {}", args.out_dir.display());
            Ok(())
        }
    }
}

/// Shell-expanded lists pass through; a remaining `*` pattern (e.g. when
/// quoted) is matched against its parent directory with a simple
/// prefix/suffix rule.
fn expand_frame_args(frames: &[String]) -> anyhow::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for arg in frames {
        if let Some(star) = arg.find('*') {
            let (dir_part, pattern) = match arg[..star].rfind('/') {
                Some(slash) => (&arg[..slash], &arg[slash + 1..]),
                None => (".", arg.as_str()),
            };
            let (prefix, suffix) = pattern.split_once('*').expect("contains *");
            let mut matched: Vec<PathBuf> = std::fs::read_dir(dir_part)
                .map_err(|e| anyhow::anyhow!("{dir_part}: {e}"))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| {
                    p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with(prefix) && n.ends_with(suffix))
                })
                .collect();
            matched.sort();
            paths.extend(matched);
        } else {
            paths.push(PathBuf::from(arg));
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_the_documented_surface() {
        Cli::try_parse_from([
            "attack-sim", "run", "--scenario", "d", "--variant", "multi-ue", "--trials", "10",
            "--seed", "7", "--mode", "oracle", "--eve", "far", "--out-dir", "/tmp/x",
        ])
        .unwrap();
        Cli::try_parse_from(["attack-sim", "classify", "--frames", "a.iqf", "b.iqf"]).unwrap();
        Cli::try_parse_from(["attack-sim", "ring", "--modulation", "qam16", "--scenario", "k"])
            .unwrap();
        Cli::try_parse_from([
            "attack-sim", "compare", "--scenario", "a", "--trials", "5", "--seed", "3",
            "--out-dir", "/tmp/y",
        ])
        .unwrap();
        assert!(Cli::try_parse_from(["attack-sim", "run", "--scenario", "d"]).is_err());
    }
}
