use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Projection onto the leading principal components followed by min-max
/// scaling to [0,π] with training-set statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// One orthonormal row per component, in descending singular-value order.
    pub components: Vec<Vec<f64>>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl PcaModel {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    /// Centered projection, before scaling.
    pub fn project(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(row)
                    .zip(&self.mean)
                    .map(|((w, x), m)| w * (x - m))
                    .sum()
            })
            .collect()
    }
}

pub fn pca_fit(x: &[Vec<f64>], n: usize) -> Result<PcaModel> {
    let rows = x.len();
    let dim = x.first().map_or(0, Vec::len);
    if n == 0 || n > rows.min(dim) {
        return Err(Error::Data(format!(
            "cannot keep {n} components from {rows} samples of dimension {dim}"
        )));
    }
    let mut mean = vec![0.0; dim];
    for r in x {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / rows as f64;
        }
    }
    let centered = DMatrix::from_fn(rows, dim, |i, j| x[i][j] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Data("SVD did not converge".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let components = order[..n]
        .iter()
        .map(|&k| {
            let mut c: Vec<f64> = v_t.row(k).iter().copied().collect();
            let lead = c.iter().copied().fold(
                0.0f64,
                |best, v| if v.abs() > best.abs() { v } else { best },
            );
            if lead < 0.0 {
                c.iter_mut().for_each(|v| *v = -*v);
            }
            c
        })
        .collect();
    let mut model = PcaModel {
        mean,
        components,
        min: vec![f64::INFINITY; n],
        max: vec![f64::NEG_INFINITY; n],
    };
    for r in x {
        for (k, v) in model.project(r).into_iter().enumerate() {
            model.min[k] = model.min[k].min(v);
            model.max[k] = model.max[k].max(v);
        }
    }
    Ok(model)
}

/// Projects and rescales rows; values outside the training range are clamped.
pub fn pca_apply(model: &PcaModel, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|r| {
            model
                .project(r)
                .into_iter()
                .enumerate()
                .map(|(k, v)| {
                    let span = model.max[k] - model.min[k];
                    if span <= 0.0 {
                        0.0
                    } else {
                        ((v - model.min[k]) / span * std::f64::consts::PI)
                            .clamp(0.0, std::f64::consts::PI)
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_rows(rows: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn points_on_a_line() {
        let x: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, 2.0 * i as f64 + 1.0])
            .collect();
        let m = pca_fit(&x, 2).unwrap();
        let c0 = &m.components[0];
        assert!(
            (c0[0] - 1.0 / 5f64.sqrt()).abs() < 1e-12 && (c0[1] - 2.0 / 5f64.sqrt()).abs() < 1e-12
        );
        for r in &x {
            assert!(m.project(r)[1].abs() < 1e-12);
        }
    }

    #[test]
    fn train_range_is_zero_to_pi() {
        let x = random_rows(40, 6, 1);
        let m = pca_fit(&x, 3).unwrap();
        let z = pca_apply(&m, &x);
        for k in 0..3 {
            let col: Vec<f64> = z.iter().map(|r| r[k]).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(lo.abs() < 1e-12 && (hi - PI).abs() < 1e-12);
        }
        assert_eq!(z, pca_apply(&m, &x));
    }

    #[test]
    fn components_are_orthonormal_and_sorted() {
        let x = random_rows(30, 12, 2);
        let m = pca_fit(&x, 5).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                let dot: f64 = m.components[a]
                    .iter()
                    .zip(&m.components[b])
                    .map(|(p, q)| p * q)
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-8);
            }
            let lead =
                m.components[a]
                    .iter()
                    .copied()
                    .fold(0.0f64, |b, v| if v.abs() > b.abs() { v } else { b });
            assert!(lead > 0.0);
        }
        let var = |k: usize| x.iter().map(|r| m.project(r)[k].powi(2)).sum::<f64>();
        assert!((0..4).all(|k| var(k) >= var(k + 1) - 1e-12));
    }

    #[test]
    fn statistics_come_from_training_rows() {
        let train = random_rows(30, 5, 3);
        let other: Vec<Vec<f64>> = random_rows(30, 5, 4)
            .into_iter()
            .map(|r| r.iter().map(|v| 3.0 * v).collect())
            .collect();
        let m = pca_fit(&train, 2).unwrap();
        assert_ne!(m, pca_fit(&other, 2).unwrap());
        assert!(pca_apply(&m, &other)
            .iter()
            .flatten()
            .all(|v| (0.0..=PI).contains(v)));
        assert!(pca_fit(&train, 6).is_err());
        assert!(pca_fit(&train, 0).is_err());
    }
}
