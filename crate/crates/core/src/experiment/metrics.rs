use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Bce,
    Mse,
    Accuracy,
    R2,
}

impl MetricKind {
    /// +1 when larger is better.
    pub fn sign(self) -> f64 {
        match self {
            MetricKind::Accuracy | MetricKind::R2 => 1.0,
            MetricKind::Bce | MetricKind::Mse => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Bce => "bce",
            MetricKind::Mse => "mse",
            MetricKind::Accuracy => "accuracy",
            MetricKind::R2 => "r2",
        }
    }
}

fn check_lengths(y_hat: &[f64], y: &[f64]) -> Result<()> {
    if y_hat.len() != y.len() || y.is_empty() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} targets",
            y_hat.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Percentage of predictions on the right side of 0.5; exactly 0.5 counts as class 1.
pub fn accuracy(y_hat: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(y_hat, y)?;
    let hits = y_hat
        .iter()
        .zip(y)
        .filter(|(&p, &t)| (if p >= 0.5 { 1.0 } else { 0.0 }) == t)
        .count();
    Ok(100.0 * hits as f64 / y.len() as f64)
}

/// Coefficient of determination.
pub fn r2(y_hat: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(y_hat, y)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|t| (t - mean).powi(2)).sum();
    if y.len() < 2 || ss_tot == 0.0 {
        return Err(Error::Data(
            "R² is undefined for targets without variance".into(),
        ));
    }
    let ss_res: f64 = y_hat.iter().zip(y).map(|(p, t)| (t - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Signed mean paired difference `s·mean(hybrid − baseline)` and the std of `s·(hybrid − baseline)`.
pub fn improvement(hybrid: &[f64], baseline: &[f64], kind: MetricKind) -> Result<(f64, f64)> {
    if hybrid.len() != baseline.len() || hybrid.is_empty() {
        return Err(Error::Dimension(format!(
            "{} hybrid runs paired with {} baseline runs",
            hybrid.len(),
            baseline.len()
        )));
    }
    let diffs: Vec<f64> = hybrid
        .iter()
        .zip(baseline)
        .map(|(h, b)| kind.sign() * (h - b))
        .collect();
    Ok(mean_std(&diffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0.9, 0.1], &[1.0, 0.0]).unwrap(), 100.0);
        assert_eq!(accuracy(&[0.1, 0.9], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(
            accuracy(&[0.9, 0.2, 0.4, 0.7], &[1.0, 0.0, 1.0, 0.0]).unwrap(),
            50.0
        );
        assert_eq!(accuracy(&[0.5], &[1.0]).unwrap(), 100.0);
        assert!(accuracy(&[0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn r2_examples() {
        let y = [0.1, -0.5, 0.9, 0.3];
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        let mean = y.iter().sum::<f64>() / 4.0;
        assert!(r2(&[mean; 4], &y).unwrap().abs() < 1e-15);
        assert!(r2(&[-0.9, 0.9, -0.9, -0.9], &y).unwrap() < 0.0);
        assert!(r2(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn improvement_examples() {
        assert_eq!(
            improvement(&[1.0, 2.0], &[1.0, 2.0], MetricKind::R2).unwrap(),
            (0.0, 0.0)
        );
        let (d, _) = improvement(&[0.3, 0.4], &[0.6, 0.7], MetricKind::Bce).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
        let (d, s) = improvement(&[90.0, 92.0], &[70.0, 68.0], MetricKind::Accuracy).unwrap();
        assert_eq!((d, s), (22.0, 2.0));
        assert!(improvement(&[1.0], &[1.0, 2.0], MetricKind::Mse).is_err());
    }

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[2.0, 4.0]), (3.0, 1.0));
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
    }
}
