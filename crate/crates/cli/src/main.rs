//! `hqcnn`: synthesize device profiles, train, evaluate and report.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hqcnn_core::attribution::attribute_model;
use hqcnn_core::experiment::{
    accuracy, load_records, load_splits, persist, r2, run_experiment, table_rows, write_report,
    Checkpoint, ExperimentConfig,
};
use hqcnn_core::model::{derive_seed, evaluate};
use hqcnn_core::noise::{ProfileStats, Topology};
use hqcnn_core::transpile::{transpile_with, TranspileOptions};
use hqcnn_core::{LogicalCircuit, NoiseProfile, Task};

#[derive(Parser)]
#[command(
    name = "hqcnn",
    version,
    about = "Noise-adaptive hybrid quantum convolutional networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a device profile from calibration statistics on a coupling map.
    SynthNoise {
        #[arg(long)]
        stats: PathBuf,
        #[arg(long)]
        topology: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every trial of an experiment config and persist records and checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on one data split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact Shapley attribution of a checkpoint's head on one split.
    Shap {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summary tables and plots from a directory of experiment records.
    Report {
        #[arg(long)]
        records: PathBuf,
        /// Defaults to the parent of the records directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower a logical circuit onto a device profile and print it.
    Transpile {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        no_optimize: bool,
    },
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn split_data(ck: &Checkpoint, split: SplitArg) -> Result<hqcnn_core::data::Dataset> {
    let splits = load_splits(&ck.config)?;
    Ok(match split {
        SplitArg::Train => splits.train,
        SplitArg::Val => splits.val,
        SplitArg::Test => splits.test,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SynthNoise {
            stats,
            topology,
            seed,
            out,
        } => {
            let stats = ProfileStats::load(&stats)?;
            let topo = Topology::load(&topology)?;
            let profile = topo.synth(&stats, seed)?;
            write_file(&out, &profile.to_json()?)?;
            println!(
                "{}: {} qubits, {} couplers -> {}",
                profile.name(),
                profile.num_qubits(),
                profile.coupling_map().len(),
                out.display()
            );
        }
        Command::Train { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("runs"));
            eprintln!(
                "running {} ({} trials, {} epochs)",
                cfg.label(),
                cfg.trials,
                cfg.epochs
            );
            let record = run_experiment(&cfg)?;
            for path in persist(&record, &out)? {
                eprintln!("wrote {}", path.display());
            }
            for row in table_rows(std::slice::from_ref(&record)) {
                println!("{:5} {:8} {}", row.split, row.metric, row.formatted);
            }
        }
        Command::Eval {
            checkpoint,
            split,
            seed,
        } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let model = ck.model()?;
            let data = split_data(&ck, split)?;
            let ev = evaluate(&model, &data, seed)?;
            let (score_name, score) = match ck.config.task {
                Task::Classification => ("accuracy", accuracy(&ev.predictions, &data.y)?),
                Task::Regression => ("r2", r2(&ev.predictions, &data.y)?),
            };
            let loss_name = model.loss_kind();
            println!(
                "{}",
                serde_json::json!({
                    "checkpoint": checkpoint.display().to_string(),
                    "samples": data.len(),
                    "loss": loss_name,
                    "loss_value": ev.loss,
                    score_name: score,
                })
            );
        }
        Command::Shap {
            checkpoint,
            split,
            seed,
            out,
        } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let model = ck.model()?;
            if model.head().is_none() {
                bail!("{} has no classical head to attribute", ck.config.variant);
            }
            let data = split_data(&ck, split)?;
            let report = attribute_model(&model, &data.x, derive_seed(&[seed, ck.seed]))?;
            for (label, v) in report.labels.iter().zip(&report.mean_abs) {
                println!("{label}\t{v:.6}");
            }
            if let Some(out) = out {
                write_file(&out, &serde_json::to_string_pretty(&report)?)?;
            }
        }
        Command::Report { records, out } => {
            let recs = load_records(&records)?;
            let out = out.unwrap_or_else(|| {
                records
                    .parent()
                    .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
            });
            let files = write_report(&recs, &out)?;
            for p in files.tables.iter().chain(&files.plots) {
                println!("{}", p.display());
            }
        }
        Command::Transpile {
            circuit,
            profile,
            no_optimize,
        } => {
            let c = LogicalCircuit::load(&circuit)?;
            let p = NoiseProfile::load(&profile)?;
            let opts = TranspileOptions {
                optimize: !no_optimize,
                ..TranspileOptions::default()
            };
            print!("{}", transpile_with(&c, &p, opts)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
