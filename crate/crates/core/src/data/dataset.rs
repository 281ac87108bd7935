use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    /// Not yet split.
    All,
    Train,
    Val,
    Test,
}

/// Sample-major features with one target per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub split: Split,
    pub task: Task,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>, split: Split, task: Task) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Data(format!(
                "{} samples but {} targets",
                x.len(),
                y.len()
            )));
        }
        if let Some(first) = x.first() {
            if x.iter().any(|r| r.len() != first.len()) {
                return Err(Error::Data("rows have different lengths".into()));
            }
        }
        if task == Task::Classification && y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Data("classification labels must be 0 or 1".into()));
        }
        Ok(Self { x, y, split, task })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize], split: Split) -> Self {
        Self {
            x: indices.iter().map(|&i| self.x[i].clone()).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            split,
            task: self.task,
        }
    }

    pub fn count_label(&self, label: f64) -> usize {
        self.y.iter().filter(|&&v| v == label).count()
    }

    /// Per-feature mean.
    pub fn feature_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.num_features()];
        for row in &self.x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

/// Class-balanced, disjoint train/val/test subsets drawn with a seeded shuffle.
pub fn split_balanced(
    dataset: &Dataset,
    sizes: (usize, usize, usize),
    seed: u64,
) -> Result<Splits> {
    if dataset.task != Task::Classification {
        return Err(Error::Data(
            "balanced splits need a classification dataset".into(),
        ));
    }
    let (a, b, c) = sizes;
    if a % 2 != 0 || b % 2 != 0 || c % 2 != 0 {
        return Err(Error::Data(format!("split sizes {sizes:?} must be even")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<Vec<usize>> = [0.0, 1.0]
        .iter()
        .map(|&label| {
            (0..dataset.len())
                .filter(|&i| dataset.y[i] == label)
                .collect()
        })
        .collect();
    let need = (a + b + c) / 2;
    for (label, idx) in classes.iter_mut().enumerate() {
        if idx.len() < need {
            return Err(Error::Data(format!(
                "class {label} has {} samples, {need} needed",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
    }
    let mut start = 0;
    let mut take = |size: usize, split: Split, rng: &mut ChaCha8Rng| {
        let half = size / 2;
        let mut rows: Vec<usize> = classes
            .iter()
            .flat_map(|idx| idx[start..start + half].iter().copied())
            .collect();
        start += half;
        rows.shuffle(rng);
        dataset.select(&rows, split)
    };
    let train = take(a, Split::Train, &mut rng);
    let val = take(b, Split::Val, &mut rng);
    let test = take(c, Split::Test, &mut rng);
    Ok(Splits { train, val, test })
}
