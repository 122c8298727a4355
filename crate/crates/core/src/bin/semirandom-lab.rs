use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use semirandom_core::adversary::{apply_alt_adversary, apply_null_adversary, AdversarySpec};
use semirandom_core::detectors::{resolve_threshold, run_detector, DetectorSpec, ThresholdSource};
use semirandom_core::lab::{
    calibrate_threshold, domain, init_threads_from_env, regime_report, run_experiment, uniformity_audit,
    ExperimentConfig,
};
use semirandom_core::random::{sample_null, sample_planted, stream_rng, ModelParams, PlantedInstance};
use semirandom_core::{make_family, FamilySpec, LabError, Result};

/// Planted-subgraph detection lab. Thread count: SEMIRANDOM_THREADS.
#[derive(Parser)]
#[command(name = "semirandom-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Null,
    Alt,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an instance and write `<out>.edges` and `<out>.json`.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Pattern family as JSON, e.g. '{"kind":"clique","k":5}'.
        #[arg(long)]
        family: String,
        /// Sample from the null instead of the planted model.
        #[arg(long)]
        null: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Apply an adversary to an instance.
    Attack {
        #[arg(long)]
        instance: PathBuf,
        /// Adversary as JSON, e.g. '{"kind":"alt_stripper"}'.
        #[arg(long)]
        adversary: String,
        #[arg(long, value_enum)]
        side: Side,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run one detector on an instance and print the decision as JSON.
    Detect {
        #[arg(long)]
        instance: PathBuf,
        /// Detector as JSON, e.g. '{"kind":"count","threshold":{"source":"theoretical"}}'.
        #[arg(long)]
        detector: String,
        #[arg(long, default_value_t = 200)]
        calibration_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the calibrated threshold for an experiment config.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a full experiment config and write CSV + JSON.
    Risk {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output stem.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the regime report for a pattern.
    Report {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Uniformity audit of the copy-planting adversary.
    Audit {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn family(json: &str) -> Result<FamilySpec> {
    Ok(serde_json::from_str(json)?)
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { n, p, q, family: fam, null, out, seed } => {
            let params = ModelParams::from_family(n, p, q, family(&fam)?)?;
            let mut rng = stream_rng(seed, 0, 0);
            let mut inst = if null { sample_null(&params, &mut rng)? } else { sample_planted(&params, &mut rng)? };
            inst.seed = Some(seed);
            inst.write_files(&out)
        }
        Command::Attack { instance, adversary, side, out, seed } => {
            let spec: AdversarySpec = serde_json::from_str(&adversary)?;
            let mut inst = PlantedInstance::read_files(&instance)?;
            let mut rng = stream_rng(seed, domain::NULL_ADVERSARY, 0);
            inst.graph = match side {
                Side::Null => apply_null_adversary(&spec, &inst.graph, &mut rng)?,
                Side::Alt => {
                    if inst.is_null() {
                        return Err(LabError::Input("instance has no planted copy".into()));
                    }
                    apply_alt_adversary(&spec, &inst, &mut rng)?
                }
            };
            inst.write_files(&out)
        }
        Command::Detect { instance, detector, calibration_trials, seed } => {
            let spec: DetectorSpec = serde_json::from_str(&detector)?;
            let inst = PlantedInstance::read_files(&instance)?;
            spec.validate(&inst.params)?;
            let tau = match spec.threshold {
                ThresholdSource::Calibrated { alpha } => {
                    calibrate_threshold(&spec, &inst.params, alpha, calibration_trials, seed)?.tau
                }
                _ => resolve_threshold(&spec, &inst.params)?,
            };
            print_json(&run_detector(&spec, &inst.graph, &inst.params, tau)?)
        }
        Command::Calibrate { config, seed } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let alpha = cfg.alpha().ok_or_else(|| LabError::Config("detector threshold is not calibrated".into()))?;
            let mut out = Vec::new();
            for fam in cfg.families() {
                let params = cfg.params_for(&fam)?;
                let c = calibrate_threshold(&cfg.detector, &params, alpha, cfg.calibration_trials(), cfg.seed)?;
                out.push(serde_json::json!({
                    "family": fam.to_string(),
                    "alpha": alpha,
                    "tau": c.tau,
                    "trials": cfg.calibration_trials(),
                    "discarded": c.discarded,
                }));
            }
            print_json(&out)
        }
        Command::Risk { config, seed, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if out.is_some() {
                cfg.output = out;
            }
            print_json(&run_experiment(&cfg)?)
        }
        Command::Report { family: fam, n, p, q, seed: _ } => {
            let gamma = make_family(&family(&fam)?)?;
            print_json(&regime_report(&gamma, n, p, q)?)
        }
        Command::Audit { family: fam, n, q, trials, seed } => print_json(&uniformity_audit(&family(&fam)?, n, q, trials, seed)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                LabError::Config(_) | LabError::Input(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
