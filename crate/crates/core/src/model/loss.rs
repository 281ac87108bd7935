use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const BCE_CLIP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Bce,
    Mse,
}

impl LossKind {
    /// Loss of a single prediction.
    pub fn value(self, y_hat: f64, y: f64) -> f64 {
        match self {
            LossKind::Bce => {
                let p = y_hat.clamp(BCE_CLIP, 1.0 - BCE_CLIP);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            }
            LossKind::Mse => (y - y_hat).powi(2),
        }
    }

    /// Derivative of [`value`](Self::value) in `y_hat`; zero where the clip is active.
    pub fn derivative(self, y_hat: f64, y: f64) -> f64 {
        match self {
            LossKind::Bce => {
                if !(BCE_CLIP..=1.0 - BCE_CLIP).contains(&y_hat) {
                    return 0.0;
                }
                -y / y_hat + (1.0 - y) / (1.0 - y_hat)
            }
            LossKind::Mse => 2.0 * (y_hat - y),
        }
    }

    /// Mean loss over a batch.
    pub fn mean(self, y_hat: &[f64], y: &[f64]) -> Result<f64> {
        if y_hat.len() != y.len() || y.is_empty() {
            return Err(Error::Dimension(format!(
                "{} predictions for {} targets",
                y_hat.len(),
                y.len()
            )));
        }
        Ok(y_hat
            .iter()
            .zip(y)
            .map(|(&p, &t)| self.value(p, t))
            .sum::<f64>()
            / y.len() as f64)
    }
}
