use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::AccuracySample;
use crate::flsim::{flip_labels, Dataset, SyntheticTask};
use crate::model::StrategyProfile;
use crate::rng::{derive_seed, stream, tags};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SimConfig<S> {
    pub rounds: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub local_lr: S,
    pub global_lr: S,
    pub seed: u64,
}

impl<S: Scalar> SimConfig<S> {
    pub fn new(seed: u64) -> Self {
        Self {
            rounds: 30,
            local_epochs: 5,
            batch_size: 64,
            local_lr: S::lit(0.1),
            global_lr: S::one(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.local_epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid(
                "flsim.sim",
                "rounds, local_epochs and batch_size must be positive",
            ));
        }
        if !(self.local_lr > S::zero()) || !(self.global_lr > S::zero()) {
            return Err(Error::invalid("flsim.sim", "learning rates must be positive"));
        }
        Ok(())
    }
}

/// Linear softmax classifier; row `k` of `weights` scores class `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel<S> {
    pub classes: usize,
    pub dim: usize,
    pub weights: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> SoftmaxModel<S> {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self {
            classes,
            dim,
            weights: vec![S::zero(); classes * dim],
            bias: vec![S::zero(); classes],
        }
    }

    fn logits(&self, x: &[S], out: &mut [S]) {
        for (k, o) in out.iter_mut().enumerate() {
            let w = &self.weights[k * self.dim..(k + 1) * self.dim];
            *o = w.iter().zip(x).fold(self.bias[k], |acc, (&a, &b)| acc + a * b);
        }
    }

    pub fn predict(&self, x: &[S]) -> usize {
        let mut z = vec![S::zero(); self.classes];
        self.logits(x, &mut z);
        let mut best = 0;
        for k in 1..self.classes {
            if z[k] > z[best] {
                best = k;
            }
        }
        best
    }

    pub fn accuracy(&self, data: &Dataset<S>) -> S {
        if data.is_empty() {
            return S::zero();
        }
        let correct = (0..data.len())
            .filter(|&i| self.predict(data.row(i)) == data.labels[i])
            .count();
        S::count(correct as u64) / S::count(data.len() as u64)
    }

    /// One SGD step on the mean cross-entropy of the rows in `batch`.
    fn sgd_step(&mut self, data: &Dataset<S>, batch: &[usize], lr: S) {
        let mut gw = vec![S::zero(); self.weights.len()];
        let mut gb = vec![S::zero(); self.classes];
        let mut p = vec![S::zero(); self.classes];
        for &i in batch {
            let x = data.row(i);
            self.logits(x, &mut p);
            let max = p.iter().copied().fold(S::neg_infinity(), S::max);
            let mut sum = S::zero();
            for v in p.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for (k, v) in p.iter_mut().enumerate() {
                *v /= sum;
                if k == data.labels[i] {
                    *v -= S::one();
                }
                gb[k] += *v;
                for (g, &xj) in gw[k * self.dim..(k + 1) * self.dim].iter_mut().zip(x) {
                    *g += *v * xj;
                }
            }
        }
        let scale = lr / S::count(batch.len() as u64);
        for (w, g) in self.weights.iter_mut().zip(&gw) {
            *w -= scale * *g;
        }
        for (b, g) in self.bias.iter_mut().zip(&gb) {
            *b -= scale * *g;
        }
    }
}

/// One client's training data for a run.
#[derive(Debug, Clone)]
pub struct SimClient<S> {
    /// Full local dataset; training uses a random subset of `s_n` rows.
    pub dataset: Dataset<S>,
    pub s_n: usize,
    pub epsilon: S,
}

/// Minibatch SGD for `local_epochs` epochs starting from `global`.
pub fn local_update<S: Scalar>(
    global: &SoftmaxModel<S>,
    data: &Dataset<S>,
    config: &SimConfig<S>,
    shuffle_seed: u64,
) -> SoftmaxModel<S> {
    let mut model = global.clone();
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..config.local_epochs {
        order.shuffle(&mut stream(shuffle_seed, &[epoch as u64]));
        for batch in order.chunks(config.batch_size) {
            model.sgd_step(data, batch, config.local_lr);
        }
    }
    model
}

/// `Σ_n weight_n · model_n`; weights are expected to sum to one.
pub fn aggregate<S: Scalar>(models: &[SoftmaxModel<S>], weights: &[S]) -> SoftmaxModel<S> {
    let first = &models[0];
    let mut out = SoftmaxModel::zeros(first.classes, first.dim);
    for (m, &w) in models.iter().zip(weights) {
        for (o, &v) in out.weights.iter_mut().zip(&m.weights) {
            *o += w * v;
        }
        for (o, &v) in out.bias.iter_mut().zip(&m.bias) {
            *o += w * v;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainingRun<S> {
    /// Clean test accuracy after each round.
    pub accuracy: Vec<S>,
    pub model: SoftmaxModel<S>,
}

/// Each client's noisy training subset for a run seeded with `seed`.
///
/// The subset is a prefix of a seeded random permutation of the client's data,
/// and flips are drawn in that order, so within one seed a smaller subset is
/// contained in a larger one with the same labels.
pub fn training_subsets<S: Scalar>(
    task: &SyntheticTask<S>,
    clients: &[SimClient<S>],
    seed: u64,
) -> Result<Vec<Dataset<S>>> {
    clients
        .iter()
        .enumerate()
        .map(|(n, c)| {
            if c.s_n > c.dataset.len() {
                return Err(Error::CapacityExceeded {
                    client: n + 1,
                    value: c.s_n as u64,
                    capacity: c.dataset.len() as u64,
                });
            }
            let mut idx: Vec<usize> = (0..c.dataset.len()).collect();
            idx.shuffle(&mut stream(seed, &[tags::SUBSET, n as u64]));
            idx.truncate(c.s_n);
            let subset = c.dataset.select(&idx);
            flip_labels(
                &subset,
                c.epsilon,
                task.num_classes,
                derive_seed(seed, &[tags::FLIP, n as u64]),
            )
        })
        .collect()
}

/// Weighted FedAvg over `config.rounds` rounds; returns test accuracy per round.
///
/// With no data contributed the trajectory stays at the `1/C` baseline.
pub fn train_fedavg<S: Scalar>(
    task: &SyntheticTask<S>,
    clients: &[SimClient<S>],
    config: &SimConfig<S>,
) -> Result<TrainingRun<S>> {
    config.validate()?;
    let test = task.test_set();
    let mut global = SoftmaxModel::zeros(task.num_classes, task.input_dim);
    let total: usize = clients.iter().map(|c| c.s_n).sum();
    if total == 0 {
        return Ok(TrainingRun {
            accuracy: vec![task.baseline_accuracy(); config.rounds],
            model: global,
        });
    }
    let subsets = training_subsets(task, clients, config.seed)?;
    let active: Vec<usize> = (0..clients.len()).filter(|&n| clients[n].s_n > 0).collect();
    let weights: Vec<S> = active
        .iter()
        .map(|&n| S::count(clients[n].s_n as u64) / S::count(total as u64))
        .collect();

    let mut accuracy = Vec::with_capacity(config.rounds);
    for round in 0..config.rounds {
        let locals: Vec<SoftmaxModel<S>> = active
            .iter()
            .map(|&n| {
                let seed = derive_seed(config.seed, &[tags::SHUFFLE, n as u64, round as u64]);
                local_update(&global, &subsets[n], config, seed)
            })
            .collect();
        let averaged = aggregate(&locals, &weights);
        if config.global_lr == S::one() {
            global = averaged;
        } else {
            for (g, a) in global.weights.iter_mut().zip(&averaged.weights) {
                *g += config.global_lr * (*a - *g);
            }
            for (g, a) in global.bias.iter_mut().zip(&averaged.bias) {
                *g += config.global_lr * (*a - *g);
            }
        }
        accuracy.push(global.accuracy(&test));
    }
    Ok(TrainingRun {
        accuracy,
        model: global,
    })
}

/// One point of a sample-generation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GridSetting<S> {
    pub s: StrategyProfile,
    pub eps: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome<S> {
    /// Final-round accuracy averaged over the repeats.
    pub sample: AccuracySample<S>,
    /// Per-round accuracy averaged over the repeats.
    pub trajectory: Vec<S>,
}

/// Trains once per grid point and repeat, averaging over repeats.
///
/// Repeat `r` uses the same seed at every grid point, so differences between
/// points are not confounded by subset or shuffle randomness.
pub fn generate_samples<S: Scalar>(
    task: &SyntheticTask<S>,
    capacities: &[usize],
    grid: &[GridSetting<S>],
    config: &SimConfig<S>,
    repeats: usize,
) -> Result<Vec<GridOutcome<S>>> {
    if grid.is_empty() {
        return Err(Error::invalid("flsim.grid", "grid must not be empty"));
    }
    if repeats == 0 {
        return Err(Error::invalid("flsim.repeats", "must be at least 1"));
    }
    let datasets: Vec<Dataset<S>> = capacities
        .iter()
        .enumerate()
        .map(|(n, &cap)| task.client_data(n, cap))
        .collect();
    for (g, setting) in grid.iter().enumerate() {
        if setting.s.len() != capacities.len() || setting.eps.len() != capacities.len() {
            return Err(Error::LengthMismatch {
                what: "grid setting",
                expected: capacities.len(),
                got: setting.s.len().min(setting.eps.len()),
            });
        }
        if let Some(n) = (0..capacities.len()).find(|&n| setting.s.get(n) as usize > capacities[n]) {
            return Err(Error::invalid(
                format!("flsim.grid[{g}].s[{n}]"),
                format!("exceeds capacity {}", capacities[n]),
            ));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..repeats).map(move |r| (g, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(g, r)| {
            let setting = &grid[g];
            let clients: Vec<SimClient<S>> = datasets
                .iter()
                .enumerate()
                .map(|(n, d)| SimClient {
                    dataset: d.clone(),
                    s_n: setting.s.get(n) as usize,
                    epsilon: setting.eps[n],
                })
                .collect();
            let cfg = SimConfig {
                seed: derive_seed(config.seed, &[r as u64]),
                ..config.clone()
            };
            train_fedavg(task, &clients, &cfg).map(|run| run.accuracy)
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = S::count(repeats as u64);
    Ok(grid
        .iter()
        .enumerate()
        .map(|(g, setting)| {
            let mut mean = vec![S::zero(); config.rounds];
            for run in &runs[g * repeats..(g + 1) * repeats] {
                for (m, &a) in mean.iter_mut().zip(run) {
                    *m += a;
                }
            }
            mean.iter_mut().for_each(|m| *m /= reps);
            let last = *mean.last().expect("rounds > 0");
            GridOutcome {
                sample: AccuracySample::new(setting.s.clone(), setting.eps.clone(), last),
                trajectory: mean,
            }
        })
        .collect())
}
