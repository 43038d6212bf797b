use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, tags};
use crate::scalar::Scalar;

/// Labeled points stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<S> {
    pub dim: usize,
    pub features: Vec<S>,
    pub labels: Vec<usize>,
}

impl<S: Scalar> Dataset<S> {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut features = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            features.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            features,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Gaussian-blob classification problem: one isotropic cluster per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SyntheticTask<S> {
    pub num_classes: usize,
    pub input_dim: usize,
    /// Standard deviation of the class-centre coordinates.
    pub center_scale: S,
    /// Within-class standard deviation.
    pub spread: S,
    pub test_size: usize,
    pub seed: u64,
    pub class_centers: Vec<Vec<S>>,
}

impl<S: Scalar> SyntheticTask<S> {
    pub fn generate(
        num_classes: usize,
        input_dim: usize,
        center_scale: S,
        spread: S,
        test_size: usize,
        seed: u64,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::invalid("flsim.task.num_classes", "need at least 2 classes"));
        }
        if input_dim == 0 {
            return Err(Error::invalid("flsim.task.input_dim", "must be positive"));
        }
        if !(spread >= S::zero()) || !(center_scale > S::zero()) {
            return Err(Error::invalid("flsim.task", "spread must be >= 0 and center_scale > 0"));
        }
        let mut rng = stream(seed, &[tags::TASK_CENTERS]);
        let class_centers = (0..num_classes)
            .map(|_| {
                (0..input_dim)
                    .map(|_| center_scale * S::lit(rng.sample::<f64, _>(StandardNormal)))
                    .collect()
            })
            .collect();
        Ok(Self {
            num_classes,
            input_dim,
            center_scale,
            spread,
            test_size,
            seed,
            class_centers,
        })
    }

    /// `count` points with uniformly random classes from `rng`.
    pub fn sample<R: Rng>(&self, count: usize, rng: &mut R) -> Dataset<S> {
        let mut features = Vec::with_capacity(count * self.input_dim);
        let mut labels = Vec::with_capacity(count);
        for _ in 0..count {
            let y = rng.random_range(0..self.num_classes);
            for &c in &self.class_centers[y] {
                features.push(c + self.spread * S::lit(rng.sample::<f64, _>(StandardNormal)));
            }
            labels.push(y);
        }
        Dataset {
            dim: self.input_dim,
            features,
            labels,
        }
    }

    /// Held-out test set with clean labels.
    pub fn test_set(&self) -> Dataset<S> {
        self.sample(self.test_size, &mut stream(self.seed, &[tags::TEST_SET]))
    }

    /// Local dataset of client `n` with `capacity` points.
    pub fn client_data(&self, n: usize, capacity: usize) -> Dataset<S> {
        self.sample(capacity, &mut stream(self.seed, &[tags::CLIENT_DATA, n as u64]))
    }

    pub fn baseline_accuracy(&self) -> S {
        S::one() / S::count(self.num_classes as u64)
    }
}

/// Replaces each label, with probability `epsilon`, by a uniformly random different class.
pub fn flip_labels<S: Scalar>(dataset: &Dataset<S>, epsilon: S, num_classes: usize, seed: u64) -> Result<Dataset<S>> {
    let p = epsilon.to_f64_lossy();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("epsilon", format!("{p} is outside [0, 1]")));
    }
    if num_classes < 2 && p > 0.0 {
        return Err(Error::ImpossibleFlip {
            classes: num_classes,
            epsilon: p,
        });
    }
    let mut rng = stream(seed, &[tags::FLIP]);
    let mut out = dataset.clone();
    for y in out.labels.iter_mut() {
        if rng.random_bool(p) {
            let r = rng.random_range(0..num_classes - 1);
            *y = if r >= *y { r + 1 } else { r };
        }
    }
    Ok(out)
}
