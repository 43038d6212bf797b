//! Best-response dynamics over the integer strategy grid, exhaustive Nash
//! verification, and parameter sweeps.

mod dynamics;
mod settings;
mod sweep;
mod verify;

pub use dynamics::{best_response, best_response_with_payoff, solve, EquilibriumReport, TrajectoryPoint};
pub use settings::{GridStep, SolverSettings, UpdateScheme};
pub use sweep::{apply_param, sweep, SweepParam, SweepPoint};
pub use verify::{verify_nash, Deviation, NashVerdict};
