//! Desk-scale federated averaging with label-flip noise on synthetic data.
//!
//! Clients train a linear softmax classifier on Gaussian blobs; the server
//! averages the local models weighted by contribution size and scores the
//! global model on a clean held-out set.

mod task;
mod train;

pub use task::{flip_labels, Dataset, SyntheticTask};
pub use train::{
    aggregate, generate_samples, local_update, train_fedavg, training_subsets, GridOutcome, GridSetting, SimClient,
    SimConfig, SoftmaxModel, TrainingRun,
};
