use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dataset::{Dataset, Split, Splits, Task};
use crate::Result;

fn rescale(values: &mut [f64], lo: f64, hi: f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    for v in values {
        *v = if span > 0.0 {
            lo + (*v - min) / span * (hi - lo)
        } else {
            lo
        };
    }
}

/// `y = Σβᵢxᵢ + ε` with `x ~ N(0,1)`, `β ~ U(10,100)` and `ε ~ N(0, noise_std²)`.
///
/// Each feature column is min-max scaled to [0,π] and the targets to [−1,1]
/// over the whole sample. Returns the dataset and the coefficients.
pub fn make_regression(
    predictors: usize,
    samples: usize,
    seed: u64,
    noise_std: f64,
) -> Result<(Dataset, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: Vec<f64> = (0..predictors)
        .map(|_| rng.gen_range(10.0..100.0))
        .collect();
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(samples);
    let mut y = Vec::with_capacity(samples);
    for _ in 0..samples {
        let row: Vec<f64> = (0..predictors)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let eps: f64 = StandardNormal.sample(&mut rng);
        y.push(row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + noise_std * eps);
        x.push(row);
    }
    for j in 0..predictors {
        let mut col: Vec<f64> = x.iter().map(|r| r[j]).collect();
        rescale(&mut col, 0.0, std::f64::consts::PI);
        for (r, v) in x.iter_mut().zip(col) {
            r[j] = v;
        }
    }
    rescale(&mut y, -1.0, 1.0);
    Ok((Dataset::new(x, y, Split::All, Task::Regression)?, beta))
}

/// Consecutive train/val/test rows of one regression sample, e.g. `(100, 20, 100)`.
pub fn regression_splits(
    predictors: usize,
    sizes: (usize, usize, usize),
    seed: u64,
) -> Result<Splits> {
    let (a, b, c) = sizes;
    let (d, _) = make_regression(predictors, a + b + c, seed, 1.0)?;
    let idx: Vec<usize> = (0..a + b + c).collect();
    Ok(Splits {
        train: d.select(&idx[..a], Split::Train),
        val: d.select(&idx[a..a + b], Split::Val),
        test: d.select(&idx[a + b..], Split::Test),
    })
}
