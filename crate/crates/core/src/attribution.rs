//! Exact Shapley attribution of the classical head over measured features.
//!
//! The value function is the head's pre-sigmoid logit for classification and
//! its tanh output for regression; the reference point is the mean feature
//! vector of the analyzed set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{derive_seed, Activation, ClassicalHead, HybridModel};
use crate::{Error, Result};

/// Largest feature count handled by exhaustive coalition enumeration.
pub const MAX_SHAPLEY_FEATURES: usize = 16;

/// Shapley values of `value` at `x` relative to `baseline` by full enumeration.
pub fn shapley_values<F: Fn(&[f64]) -> f64>(
    value: F,
    x: &[f64],
    baseline: &[f64],
) -> Result<Vec<f64>> {
    let n = x.len();
    if baseline.len() != n {
        return Err(Error::Dimension(format!(
            "baseline has {} entries for {n} features",
            baseline.len()
        )));
    }
    if n > MAX_SHAPLEY_FEATURES {
        return Err(Error::Capacity(format!(
            "exact Shapley values over {n} features exceed the {MAX_SHAPLEY_FEATURES}-feature limit"
        )));
    }
    let mut point = baseline.to_vec();
    let v: Vec<f64> = (0..1usize << n)
        .map(|mask| {
            for i in 0..n {
                point[i] = if mask >> i & 1 == 1 {
                    x[i]
                } else {
                    baseline[i]
                };
            }
            value(&point)
        })
        .collect();
    // weight for a coalition of size s not containing i: s!(n-s-1)!/n!
    let mut weight = vec![0.0; n.max(1)];
    for (s, w) in weight.iter_mut().enumerate().take(n) {
        let mut c = 1.0 / n as f64;
        for k in 0..s {
            c *= (s - k) as f64 / (n - 1 - k) as f64;
        }
        *w = c;
    }
    let mut phi = vec![0.0; n];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        *p = (0..1usize << n)
            .filter(|m| m & bit == 0)
            .map(|m| weight[m.count_ones() as usize] * (v[m | bit] - v[m]))
            .sum();
    }
    Ok(phi)
}

/// Value the head is attributed in: logit for sigmoid heads, output for tanh heads.
pub fn head_value(head: &ClassicalHead, f: &[f64]) -> f64 {
    let c = head
        .forward(f)
        .expect("feature length checked by the caller");
    match head.activation() {
        Activation::Sigmoid => c.logit,
        Activation::Tanh => c.output,
    }
}

pub fn exact_shapley(head: &ClassicalHead, x: &[f64], baseline: &[f64]) -> Result<Vec<f64>> {
    if x.len() != head.inputs() {
        return Err(Error::Dimension(format!(
            "head takes {} features, got {}",
            head.inputs(),
            x.len()
        )));
    }
    shapley_values(|f| head_value(head, f), x, baseline)
}

/// Per-feature mean of the rows.
pub fn mean_baseline(samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Data("no samples to average".into()))?;
    let mut mean = vec![0.0; first.len()];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / samples.len() as f64;
        }
    }
    Ok(mean)
}

/// Shapley vectors for every sample and their mean absolute values.
pub fn mean_abs_shap(
    head: &ClassicalHead,
    samples: &[Vec<f64>],
    baseline: &[f64],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if baseline.len() != head.inputs() {
        return Err(Error::Dimension(format!(
            "baseline has {} entries for a head with {} inputs",
            baseline.len(),
            head.inputs()
        )));
    }
    let per_sample = samples
        .par_iter()
        .map(|x| exact_shapley(head, x, baseline))
        .collect::<Result<Vec<_>>>()?;
    let mut mean = vec![0.0; head.inputs()];
    for phi in &per_sample {
        for (m, p) in mean.iter_mut().zip(phi) {
            *m += p.abs() / per_sample.len().max(1) as f64;
        }
    }
    Ok((mean, per_sample))
}

/// Attribution of one trained model over one set of inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    /// Shallow to deep, as in the measurement plan.
    pub labels: Vec<String>,
    pub baseline: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub mean_abs: Vec<f64>,
}

/// Measures each input (shot noise from `derive_seed([seed, i])`) and attributes
/// the head's decision to the measured features.
pub fn attribute_model(
    model: &HybridModel,
    inputs: &[Vec<f64>],
    seed: u64,
) -> Result<AttributionReport> {
    let head = model
        .head()
        .ok_or_else(|| Error::Config("the baseline model has no head to attribute".into()))?;
    let features = inputs
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            model.features(
                x,
                &mut ChaCha8Rng::seed_from_u64(derive_seed(&[seed, i as u64])),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let baseline = mean_baseline(&features)?;
    let (mean_abs, samples) = mean_abs_shap(head, &features, &baseline)?;
    Ok(AttributionReport {
        labels: model.plan().feature_labels(),
        baseline,
        samples,
        mean_abs,
    })
}

/// Boxplot summary with Tukey whiskers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Most extreme values within 1.5·IQR of the quartiles.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("no values to summarize".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let (q1, median, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside: Vec<f64> = v
            .iter()
            .copied()
            .filter(|x| (lo..=hi).contains(x))
            .collect();
        Ok(Self {
            median,
            q1,
            q3,
            whisker_low: inside.first().copied().unwrap_or(median),
            whisker_high: inside.last().copied().unwrap_or(median),
            outliers: v.into_iter().filter(|x| !(lo..=hi).contains(x)).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub label: String,
    /// One mean-absolute value per trial.
    pub values: Vec<f64>,
    pub stats: BoxStats,
}

/// Cross-trial distribution of the mean absolute Shapley values.
pub fn aggregate_trials(reports: &[AttributionReport]) -> Result<Vec<FeatureSummary>> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Data("no attribution reports".into()))?;
    if reports
        .iter()
        .any(|r| r.labels != first.labels || r.mean_abs.len() != first.labels.len())
    {
        return Err(Error::Data(
            "attribution reports have different feature labels".into(),
        ));
    }
    first
        .labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let values: Vec<f64> = reports.iter().map(|r| r.mean_abs[i]).collect();
            Ok(FeatureSummary {
                label: label.clone(),
                stats: BoxStats::from_values(&values)?,
                values,
            })
        })
        .collect()
}

/// `feature,trial,mean_abs_shap` rows.
pub fn attribution_csv(reports: &[AttributionReport]) -> String {
    let mut out = String::from("feature,trial,mean_abs_shap\n");
    for (t, r) in reports.iter().enumerate() {
        for (label, v) in r.labels.iter().zip(&r.mean_abs) {
            out += &format!("{label},{t},{v}\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn linear(w: &[f64], b: f64) -> impl Fn(&[f64]) -> f64 + '_ {
        move |x| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b
    }

    fn random_head(m: usize, seed: u64, act: Activation) -> ClassicalHead {
        ClassicalHead::random(m, act, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn single_feature_is_the_full_difference() {
        let f = |x: &[f64]| x[0].powi(3) + 2.0;
        let phi = shapley_values(f, &[1.5], &[0.5]).unwrap();
        assert!((phi[0] - (1.5f64.powi(3) - 0.5f64.powi(3))).abs() < 1e-12);
    }

    #[test]
    fn linear_game_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let base: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = shapley_values(linear(&w, 0.7), &x, &base).unwrap();
        for i in 0..6 {
            assert!((phi[i] - w[i] * (x[i] - base[i])).abs() < 1e-12);
        }
        assert!(shapley_values(linear(&w, 0.0), &x, &base)
            .unwrap()
            .iter()
            .zip(&phi)
            .all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn baseline_point_gets_zero() {
        let h = random_head(4, 1, Activation::Sigmoid);
        let x = [0.3, -0.2, 0.8, 0.1];
        assert!(exact_shapley(&h, &x, &x)
            .unwrap()
            .iter()
            .all(|p| p.abs() < 1e-15));
        assert!(exact_shapley(&h, &x[..3], &x[..3]).is_err());
        assert!(shapley_values(|_| 0.0, &[0.0; 17], &[0.0; 17]).is_err());
    }

    #[test]
    fn efficiency() {
        for (act, seed) in [(Activation::Sigmoid, 2), (Activation::Tanh, 3)] {
            let h = random_head(9, seed, act);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let phi = exact_shapley(&h, &x, &b).unwrap();
            let total: f64 = phi.iter().sum();
            assert!((total - (head_value(&h, &x) - head_value(&h, &b))).abs() < 1e-8);
        }
    }

    #[test]
    fn symmetry_and_dummy() {
        // features 0 and 1 enter symmetrically; feature 2 has zero weights
        let mut h = ClassicalHead::zeros(3, Activation::Sigmoid);
        let mut w = h.weights().to_vec();
        for j in 0..9 {
            let a = 0.1 * (j as f64 + 1.0) * if j % 2 == 0 { 1.0 } else { -1.0 };
            w[3 * j] = a;
            w[3 * j + 1] = a;
            w[27 + j] = 0.05 * j as f64;
            w[36 + j] = 0.3 - 0.07 * j as f64;
        }
        w[45] = -0.2;
        h.weights_mut().copy_from_slice(&w);
        let phi = exact_shapley(&h, &[0.9, 0.9, 1.7], &[0.1, 0.1, -0.4]).unwrap();
        assert!((phi[0] - phi[1]).abs() < 1e-8);
        assert_eq!(phi[2], 0.0);
    }

    #[test]
    fn linearity_over_heads() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w1: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w2: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = vec![0.2; 5];
        let f1 = linear(&w1, 0.3);
        let f2 = linear(&w2, -0.1);
        let sum = shapley_values(|p| f1(p) + f2(p).tanh(), &x, &b).unwrap();
        let a = shapley_values(&f1, &x, &b).unwrap();
        let c = shapley_values(|p| f2(p).tanh(), &x, &b).unwrap();
        for i in 0..5 {
            assert!((sum[i] - a[i] - c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_abs_examples() {
        let h = ClassicalHead::zeros(2, Activation::Tanh);
        let samples = vec![vec![0.5, 1.0], vec![-0.3, 0.2]];
        assert_eq!(
            mean_abs_shap(&h, &samples, &[0.0, 0.0]).unwrap().0,
            vec![0.0, 0.0]
        );
        let h = random_head(2, 5, Activation::Sigmoid);
        let one = vec![vec![0.4, 0.6]];
        let base = mean_baseline(&one).unwrap();
        assert!(mean_abs_shap(&h, &one, &base)
            .unwrap()
            .0
            .iter()
            .all(|v| v.abs() < 1e-15));
        assert!(mean_abs_shap(&h, &one, &[0.0]).is_err());
    }

    #[test]
    fn linear_head_importances() {
        // unit mean absolute deviation around the baseline
        let w = [2.0, 1.0];
        let samples = vec![
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
        ];
        let base = mean_baseline(&samples).unwrap();
        let f = linear(&w, 0.0);
        let mut imp = [0.0; 2];
        for s in &samples {
            let phi = shapley_values(&f, s, &base).unwrap();
            for i in 0..2 {
                imp[i] += phi[i].abs() / 4.0;
            }
        }
        assert!((imp[0] - 2.0).abs() < 1e-12 && (imp[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_statistics() {
        let s = BoxStats::from_values(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (3.0, 2.0, 4.0));
        assert_eq!((s.whisker_low, s.whisker_high), (1.0, 5.0));
        assert!(s.outliers.is_empty());
        let same = BoxStats::from_values(&[0.7; 5]).unwrap();
        assert_eq!(same.q3 - same.q1, 0.0);
        let single = BoxStats::from_values(&[0.4]).unwrap();
        assert_eq!(
            (single.median, single.whisker_low, single.whisker_high),
            (0.4, 0.4, 0.4)
        );
        let out = BoxStats::from_values(&[1.0, 1.1, 1.2, 1.3, 9.0]).unwrap();
        assert_eq!(out.outliers, vec![9.0]);
        assert_eq!(out.whisker_high, 1.3);
    }

    #[test]
    fn aggregation_checks_labels() {
        let r = |labels: &[&str], v: &[f64]| AttributionReport {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            baseline: vec![0.0; v.len()],
            samples: vec![],
            mean_abs: v.to_vec(),
        };
        let a = r(&["<Z>_0", "<Z>_1"], &[0.5, 0.1]);
        let b = r(&["<Z>_0", "<Z>_1"], &[0.7, 0.2]);
        let agg = aggregate_trials(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(agg[0].values, vec![0.5, 0.7]);
        assert!((agg[1].stats.median - 0.15).abs() < 1e-15);
        assert!(aggregate_trials(&[a.clone(), r(&["<X>_0", "<Z>_1"], &[0.1, 0.1])]).is_err());
        let csv = attribution_csv(&[a, b]);
        assert_eq!(csv.lines().nth(3), Some("<Z>_0,1,0.7"));
    }
}
