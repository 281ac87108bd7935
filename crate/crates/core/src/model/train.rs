use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::head::{Activation, ClassicalHead};
use super::hybrid::HybridModel;
use super::loss::LossKind;
use crate::data::{Dataset, Task};
use crate::{Error, Result};

/// Mixes seed components into one well-spread seed (splitmix64 steps).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

const TRAIN_STREAM: u64 = 1;
const VAL_STREAM: u64 = 2;
const SHUFFLE_STREAM: u64 = 3;

/// A parameterized predictor the training loop can optimize.
pub trait Trainable: Sync {
    fn num_params(&self) -> usize;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, params: &[f64]) -> Result<()>;
    fn loss_kind(&self) -> LossKind;
    fn task(&self) -> Task;
    fn predict(&self, x: &[f64], seed: u64) -> Result<f64>;
    /// `(loss, gradient)` at one sample.
    fn gradient(&self, x: &[f64], y: f64, seed: u64) -> Result<(f64, Vec<f64>)>;
}

impl Trainable for HybridModel {
    fn num_params(&self) -> usize {
        HybridModel::num_params(self)
    }

    fn params(&self) -> Vec<f64> {
        HybridModel::params(self)
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        HybridModel::set_params(self, params)
    }

    fn loss_kind(&self) -> LossKind {
        HybridModel::loss_kind(self)
    }

    fn task(&self) -> Task {
        HybridModel::task(self)
    }

    fn predict(&self, x: &[f64], seed: u64) -> Result<f64> {
        self.forward(x, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn gradient(&self, x: &[f64], y: f64, seed: u64) -> Result<(f64, Vec<f64>)> {
        let g = self.sample_gradient(x, y, &mut ChaCha8Rng::seed_from_u64(seed))?;
        Ok((g.loss, g.grad))
    }
}

/// A classical head trained directly on feature vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadModel {
    pub head: ClassicalHead,
    pub task: Task,
}

impl Trainable for HeadModel {
    fn num_params(&self) -> usize {
        self.head.num_weights()
    }

    fn params(&self) -> Vec<f64> {
        self.head.weights().to_vec()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.head = ClassicalHead::from_weights(
            self.head.inputs(),
            self.head.activation(),
            params.to_vec(),
        )?;
        Ok(())
    }

    fn loss_kind(&self) -> LossKind {
        LossKind::for_task(self.task)
    }

    fn task(&self) -> Task {
        self.task
    }

    fn predict(&self, x: &[f64], _seed: u64) -> Result<f64> {
        self.head.output(x)
    }

    fn gradient(&self, x: &[f64], y: f64, _seed: u64) -> Result<(f64, Vec<f64>)> {
        let loss = self.loss_kind();
        let c = self.head.forward(x)?;
        let act: Activation = self.head.activation();
        let d_logit = loss.derivative(c.output, y) * act.derivative_from_output(c.output);
        Ok((
            loss.value(c.output, y),
            self.head.backward(x, &c, d_logit).0,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 10,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean loss over the epoch's mini-batches, before each update.
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub trace: Vec<EpochRecord>,
    /// Epoch of the first minimum of the validation loss; `None` without training.
    pub best_epoch: Option<usize>,
    pub best_params: Vec<f64>,
}

/// Predictions with their mean loss.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<f64>,
    pub loss: f64,
}

/// Runs the model over `data`; sample `i` draws its shot noise from `derive_seed([seed, i])`.
pub fn evaluate<M: Trainable>(model: &M, data: &Dataset, seed: u64) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty split".into()));
    }
    let predictions = (0..data.len())
        .into_par_iter()
        .map(|i| model.predict(&data.x[i], derive_seed(&[seed, i as u64])))
        .collect::<Result<Vec<f64>>>()?;
    let loss = model.loss_kind().mean(&predictions, &data.y)?;
    Ok(Evaluation { predictions, loss })
}

/// Mini-batch ADAM over all parameters, keeping the parameters of the epoch
/// with the lowest validation loss.
///
/// The model is left at its final parameters; restore `best_params` to use
/// the selected epoch.
pub fn fit<M: Trainable>(
    model: &mut M,
    train: &Dataset,
    val: &Dataset,
    config: &FitConfig,
) -> Result<FitReport> {
    if train.is_empty() || val.is_empty() {
        return Err(Error::Data(
            "training needs non-empty train and validation splits".into(),
        ));
    }
    if train.task != model.task() || val.task != model.task() {
        return Err(Error::Data("dataset task does not match the model".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let mut report = FitReport {
        trace: Vec::with_capacity(config.epochs),
        best_epoch: None,
        best_params: model.params(),
    };
    let mut opt = Adam::new(model.num_params(), config.learning_rate);
    let mut best = f64::INFINITY;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=config.epochs {
        let e = epoch as u64;
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(&[
            config.seed,
            SHUFFLE_STREAM,
            e,
        ])));
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results = batch
                .par_iter()
                .map(|&i| {
                    model.gradient(
                        &train.x[i],
                        train.y[i],
                        derive_seed(&[config.seed, TRAIN_STREAM, e, i as u64]),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let mut grad = vec![0.0; model.num_params()];
            for (loss, g) in &results {
                loss_sum += loss;
                for (a, b) in grad.iter_mut().zip(g) {
                    *a += b / batch.len() as f64;
                }
            }
            let mut params = model.params();
            opt.step(&mut params, &grad)?;
            model.set_params(&params)?;
        }
        let val_loss = evaluate(&*model, val, derive_seed(&[config.seed, VAL_STREAM, e]))?.loss;
        report.trace.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_loss,
        });
        if val_loss < best {
            best = val_loss;
            report.best_epoch = Some(epoch);
            report.best_params = model.params();
        }
    }
    Ok(report)
}
