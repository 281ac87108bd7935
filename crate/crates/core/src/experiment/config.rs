use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::Variant;
use crate::data::{data_dir, Task};
use crate::{Error, Result};

/// Device name selecting exact noiseless simulation.
pub const NOISELESS: &str = "noiseless";

fn default_device() -> String {
    NOISELESS.into()
}
fn default_trials() -> usize {
    5
}
fn default_epochs() -> usize {
    30
}
fn default_batch() -> usize {
    10
}
fn default_lr() -> f64 {
    0.01
}
fn default_shots() -> u32 {
    256
}

/// One model family on one device, trained over several trials.
///
/// `device` is `"noiseless"` or the name of a statistics/topology pair under
/// `<data_dir>/stats/<device>.json` and `<data_dir>/topology/<device>.json`;
/// a fresh profile is synthesized for every trial unless `profile` pins one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub task: Task,
    pub num_qubits: usize,
    pub variant: Variant,
    #[serde(default = "default_device")]
    pub device: String,
    #[serde(default)]
    pub profile: Option<PathBuf>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Seed of the data split or regression sample; defaults to `seed`.
    #[serde(default)]
    pub data_seed: Option<u64>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    /// Shots per expectation on noisy devices; 0 reads exact values.
    #[serde(default = "default_shots")]
    pub shots: u32,
    /// Train/val/test sizes; defaults to 200/50/200 (classification) or 100/20/100.
    #[serde(default)]
    pub splits: Option<[usize; 3]>,
    /// Compute Shapley attributions on the test split.
    #[serde(default)]
    pub shap: bool,
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(task: Task, num_qubits: usize, variant: Variant, device: &str) -> Self {
        Self {
            name: None,
            task,
            num_qubits,
            variant,
            device: device.into(),
            profile: None,
            trials: default_trials(),
            seed: 0,
            data_seed: None,
            epochs: default_epochs(),
            batch_size: default_batch(),
            learning_rate: default_lr(),
            shots: default_shots(),
            splits: None,
            shap: false,
            data_dir: None,
            output_dir: None,
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            toml::from_str(text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("at least one trial is required".into()));
        }
        if !(2..=12).contains(&self.num_qubits) {
            return Err(Error::Config(format!(
                "{} qubits outside 2..=12",
                self.num_qubits
            )));
        }
        if self.batch_size == 0 || !(self.learning_rate > 0.0) {
            return Err(Error::Config(
                "batch size and learning rate must be positive".into(),
            ));
        }
        if self.device.is_empty() || self.device.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "invalid device name '{}'",
                self.device
            )));
        }
        if self.is_noiseless() && self.profile.is_some() {
            return Err(Error::Config(
                "a pinned profile needs a device name other than noiseless".into(),
            ));
        }
        let [a, b, c] = self.split_sizes();
        if a == 0 || b == 0 || c == 0 {
            return Err(Error::Config("every split needs samples".into()));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.device == NOISELESS
    }

    pub fn split_sizes(&self) -> [usize; 3] {
        self.splits.unwrap_or(match self.task {
            Task::Classification => [200, 50, 200],
            Task::Regression => [100, 20, 100],
        })
    }

    pub fn data_seed(&self) -> u64 {
        self.data_seed.unwrap_or(self.seed)
    }

    pub fn data_root(&self) -> PathBuf {
        self.data_dir.clone().unwrap_or_else(data_dir)
    }

    pub fn shots(&self) -> Option<u32> {
        (self.shots > 0 && !self.is_noiseless()).then_some(self.shots)
    }

    /// `{clf|reg}-{device}-{n}q-{variant}-s{seed}`, prefixed by `name` when set.
    pub fn label(&self) -> String {
        let task = match self.task {
            Task::Classification => "clf",
            Task::Regression => "reg",
        };
        let base = format!(
            "{task}-{}-{}q-{}-s{}",
            self.device, self.num_qubits, self.variant, self.seed
        );
        match &self.name {
            Some(name) => format!("{name}-{base}"),
            None => base,
        }
    }
}
