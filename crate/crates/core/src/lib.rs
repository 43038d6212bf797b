//! Incentive mechanisms for data contribution in cross-silo federated learning.
//!
//! Clients choose how many data points to contribute to a jointly trained
//! model. The model's profit is split by an allocation mechanism (egalitarian,
//! linearly proportional, leave-one-out or Shapley value) and each client pays
//! a privacy cost for what it contributes. This crate evaluates that game,
//! finds pure Nash equilibria by best-response dynamics, fits the surrogate
//! accuracy surface from training runs, and ships a small FedAvg simulator
//! with label noise that produces those runs.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.

// Negated comparisons are how NaN gets rejected in input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod fit;
pub mod flsim;
pub mod mechanisms;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod solver;

mod linalg;

pub use error::{Error, Result};
pub use mechanisms::Mechanism;
pub use model::StrategyProfile;
pub use scalar::Scalar;

pub type ClientProfile = model::ClientProfile<f64>;
pub type AccuracyModel = model::AccuracyModel<f64>;
pub type Surrogate = model::Surrogate<f64>;
pub type ProfitModel = model::ProfitModel<f64>;
pub type PrivacyCostModel = model::PrivacyCostModel<f64>;
pub type GameSpec = model::GameSpec<f64>;
pub type SolverSettings = solver::SolverSettings<f64>;
pub type EquilibriumReport = solver::EquilibriumReport<f64>;
pub type NashVerdict = solver::NashVerdict<f64>;
pub type ContributionIndices = mechanisms::ContributionIndices<f64>;
pub type ProfitShares = mechanisms::ProfitShares<f64>;
pub type AccuracySample = fit::AccuracySample<f64>;
pub type FitResult = fit::FitResult<f64>;
pub type SyntheticTask = flsim::SyntheticTask<f64>;
pub type SimConfig = flsim::SimConfig<f64>;

pub type GameSpec32 = model::GameSpec<f32>;
pub type EquilibriumReport32 = solver::EquilibriumReport<f32>;
