//! Classical head, hybrid quantum-classical model, ADAM and the training loop.

mod adam;
mod head;
mod hybrid;
mod loss;
mod train;

pub use crate::data::Task;
pub use adam::Adam;
pub use head::{Activation, ClassicalHead, HeadCache};
pub use hybrid::{Backend, ExecConfig, HybridModel, ModelState, DEFAULT_SHOTS};
pub use loss::{LossKind, BCE_CLIP};
pub use train::{
    derive_seed, evaluate, fit, EpochRecord, Evaluation, FitConfig, FitReport, HeadModel, Trainable,
};

impl LossKind {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Classification => LossKind::Bce,
            Task::Regression => LossKind::Mse,
        }
    }
}

impl Activation {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Classification => Activation::Sigmoid,
            Task::Regression => Activation::Tanh,
        }
    }
}
