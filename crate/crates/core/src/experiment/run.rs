use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibration::CalibrationSnapshot;
use super::config::ExperimentConfig;
use super::metrics::{accuracy, r2, MetricKind};
use crate::attribution::{attribute_model, AttributionReport};
use crate::data::{load_mnist_dir, mnist_splits, regression_splits, Splits, Task};
use crate::model::{
    derive_seed, evaluate, fit, EpochRecord, ExecConfig, FitConfig, HybridModel, ModelState,
};
use crate::noise::{NoiseProfile, ProfileStats, Topology};
use crate::{Error, Result};

const PROFILE_STREAM: u64 = 11;
const INIT_STREAM: u64 = 12;
const EVAL_STREAM: u64 = 13;
const SHAP_STREAM: u64 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub train_loss: f64,
    pub train_score: f64,
    pub val_loss: f64,
    pub test_loss: f64,
    pub test_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub profile: Option<String>,
    pub trace: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    /// Evaluated at the best epoch.
    pub metrics: TrialMetrics,
    pub calibration: Option<CalibrationSnapshot>,
    pub attribution: Option<AttributionReport>,
    pub state: ModelState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub label: String,
    pub config: ExperimentConfig,
    pub loss_metric: MetricKind,
    pub score_metric: MetricKind,
    pub trials: Vec<TrialRecord>,
}

impl ExperimentRecord {
    pub fn values(&self, pick: impl Fn(&TrialMetrics) -> f64) -> Vec<f64> {
        self.trials.iter().map(|t| pick(&t.metrics)).collect()
    }
}

/// A trained model plus what is needed to rebuild its data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: ExperimentConfig,
    pub trial: usize,
    pub seed: u64,
    pub state: ModelState,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn model(&self) -> Result<HybridModel> {
        HybridModel::from_state(self.state.clone())
    }
}

fn metric_kinds(task: Task) -> (MetricKind, MetricKind) {
    match task {
        Task::Classification => (MetricKind::Bce, MetricKind::Accuracy),
        Task::Regression => (MetricKind::Mse, MetricKind::R2),
    }
}

fn score(task: Task, y_hat: &[f64], y: &[f64]) -> Result<f64> {
    match task {
        Task::Classification => accuracy(y_hat, y),
        Task::Regression => r2(y_hat, y),
    }
}

/// Train/val/test data for a configuration. MNIST is read from the data directory.
pub fn load_splits(config: &ExperimentConfig) -> Result<Splits> {
    let [a, b, c] = config.split_sizes();
    match config.task {
        Task::Classification => {
            let raw = load_mnist_dir(&config.data_root())?;
            Ok(mnist_splits(&raw, config.num_qubits, (a, b, c), config.data_seed())?.0)
        }
        Task::Regression => regression_splits(config.num_qubits, (a, b, c), config.data_seed()),
    }
}

fn device_files(config: &ExperimentConfig) -> (PathBuf, PathBuf) {
    let root = config.data_root();
    (
        root.join("stats").join(format!("{}.json", config.device)),
        root.join("topology")
            .join(format!("{}.json", config.device)),
    )
}

/// Execution settings of one trial; the device profile is re-synthesized per trial.
pub fn trial_exec_config(config: &ExperimentConfig, trial: usize) -> Result<ExecConfig> {
    if config.is_noiseless() {
        return Ok(ExecConfig::ideal());
    }
    let profile = match &config.profile {
        Some(p) => NoiseProfile::load(p)?,
        None => {
            let (stats, topology) = device_files(config);
            let stats = ProfileStats::load(&stats)?;
            let topology = Topology::load(&topology)?;
            topology.synth(
                &stats,
                derive_seed(&[config.seed, PROFILE_STREAM, trial as u64]),
            )?
        }
    };
    Ok(ExecConfig::device(profile, config.shots()))
}

/// Initializes, trains and evaluates one trial.
pub fn run_trial(config: &ExperimentConfig, splits: &Splits, trial: usize) -> Result<TrialRecord> {
    let seed = derive_seed(&[config.seed, trial as u64]);
    let exec = trial_exec_config(config, trial)?;
    let mut model = HybridModel::new(
        config.num_qubits,
        config.variant,
        config.task,
        exec,
        derive_seed(&[seed, INIT_STREAM]),
    )?;
    let fit_cfg = FitConfig {
        epochs: config.epochs,
        batch_size: config.batch_size,
        learning_rate: config.learning_rate,
        seed,
    };
    let report = fit(&mut model, &splits.train, &splits.val, &fit_cfg)?;
    model.set_params(&report.best_params)?;

    let eval = |d, tag: u64| evaluate(&model, d, derive_seed(&[seed, EVAL_STREAM, tag]));
    let train = eval(&splits.train, 0)?;
    let val = eval(&splits.val, 1)?;
    let test = eval(&splits.test, 2)?;
    let metrics = TrialMetrics {
        train_loss: train.loss,
        train_score: score(config.task, &train.predictions, &splits.train.y)?,
        val_loss: val.loss,
        test_loss: test.loss,
        test_score: score(config.task, &test.predictions, &splits.test.y)?,
    };
    let (profile, calibration) = match &model.state().exec.backend {
        crate::model::Backend::Ideal => (None, None),
        crate::model::Backend::Device { profile } => (
            Some(profile.name().to_string()),
            Some(CalibrationSnapshot::from_circuit(model.circuit(), profile)?),
        ),
    };
    let attribution = if config.shap && model.head().is_some() {
        Some(attribute_model(
            &model,
            &splits.test.x,
            derive_seed(&[seed, SHAP_STREAM]),
        )?)
    } else {
        None
    };
    Ok(TrialRecord {
        trial,
        seed,
        profile,
        trace: report.trace,
        best_epoch: report.best_epoch,
        metrics,
        calibration,
        attribution,
        state: model.state().clone(),
    })
}

/// Runs every trial of `config` (concurrently) on shared data splits.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let splits = load_splits(config)?;
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &splits, t))
        .collect::<Result<Vec<_>>>()?;
    let (loss_metric, score_metric) = metric_kinds(config.task);
    Ok(ExperimentRecord {
        label: config.label(),
        config: config.clone(),
        loss_metric,
        score_metric,
        trials,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)?).map_err(|e| Error::io(path, e))
}

/// Writes `records/<label>.json` and one `checkpoints/<label>-trial<k>.json` per trial.
pub fn persist(record: &ExperimentRecord, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = vec![out_dir
        .join("records")
        .join(format!("{}.json", record.label))];
    write_json(&written[0], record)?;
    for t in &record.trials {
        let path = out_dir
            .join("checkpoints")
            .join(format!("{}-trial{}.json", record.label, t.trial));
        write_json(
            &path,
            &Checkpoint {
                config: record.config.clone(),
                trial: t.trial,
                seed: t.seed,
                state: t.state.clone(),
            },
        )?;
        written.push(path);
    }
    Ok(written)
}
