use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StrategyProfile;
use crate::scalar::Scalar;

/// How clients see each other's updates within one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateScheme {
    /// Every client responds to the profile from the previous round.
    #[default]
    Jacobi,
    /// Clients respond in index order and see updates made earlier in the round.
    GaussSeidel,
}

impl fmt::Display for UpdateScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateScheme::Jacobi => "jacobi",
            UpdateScheme::GaussSeidel => "gauss_seidel",
        })
    }
}

impl FromStr for UpdateScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "jacobi" => Ok(UpdateScheme::Jacobi),
            "gauss_seidel" | "gaussseidel" => Ok(UpdateScheme::GaussSeidel),
            other => Err(format!("unknown scheme `{other}` (expected jacobi or gauss_seidel)")),
        }
    }
}

/// Stride of the best-response search grid.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridStep {
    /// `max(1, D_n / 200)` per client.
    #[default]
    Auto,
    Uniform(u64),
    PerClient(Vec<u64>),
}

impl GridStep {
    pub fn step_for(&self, client: usize, capacity: u64) -> u64 {
        match self {
            GridStep::Auto => (capacity / 200).max(1),
            GridStep::Uniform(s) => *s,
            GridStep::PerClient(v) => v[client],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SolverSettings<S> {
    pub initial: StrategyProfile,
    /// Convergence threshold on `max_n |s_n(t) − s_n(t−1)|`.
    pub tau: S,
    pub max_iters: usize,
    pub grid_step: GridStep,
    pub scheme: UpdateScheme,
    /// Whether `s_n = 0` is part of the search grid.
    pub include_zero: bool,
    /// Absolute payoff slack allowed by the equilibrium check.
    pub nash_tolerance: S,
}

impl<S: Scalar> SolverSettings<S> {
    pub fn defaults(clients: usize) -> Self {
        Self {
            initial: StrategyProfile::zeros(clients),
            tau: S::zero(),
            max_iters: 100,
            grid_step: GridStep::Auto,
            scheme: UpdateScheme::Jacobi,
            include_zero: true,
            nash_tolerance: S::lit(1e-9),
        }
    }

    pub fn validate(&self, capacities: &[u64]) -> Result<()> {
        if self.initial.len() != capacities.len() {
            return Err(Error::LengthMismatch {
                what: "solver.initial",
                expected: capacities.len(),
                got: self.initial.len(),
            });
        }
        for (i, (&s, &d)) in self.initial.iter().zip(capacities).enumerate() {
            if s > d {
                return Err(Error::invalid(
                    format!("solver.initial[{i}]"),
                    format!("{s} exceeds capacity {d}"),
                ));
            }
        }
        if !(self.tau >= S::zero()) || !self.tau.is_finite() {
            return Err(Error::invalid("solver.tau", "must be finite and non-negative"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("solver.max_iters", "must be at least 1"));
        }
        if !(self.nash_tolerance >= S::zero()) {
            return Err(Error::invalid("solver.nash_tolerance", "must be non-negative"));
        }
        match &self.grid_step {
            GridStep::Auto => {}
            GridStep::Uniform(0) => {
                return Err(Error::invalid("solver.grid_step", "must be at least 1"));
            }
            GridStep::Uniform(_) => {}
            GridStep::PerClient(v) => {
                if v.len() != capacities.len() {
                    return Err(Error::LengthMismatch {
                        what: "solver.grid_step",
                        expected: capacities.len(),
                        got: v.len(),
                    });
                }
                if let Some(i) = v.iter().position(|&s| s == 0) {
                    return Err(Error::invalid(format!("solver.grid_step[{i}]"), "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Candidate contributions for client `n`: `{0?, step, 2·step, …} ∪ {capacity}`.
    pub fn search_set(&self, n: usize, capacity: u64) -> Vec<u64> {
        let step = self.grid_step.step_for(n, capacity).max(1);
        let mut set = Vec::with_capacity((capacity / step) as usize + 2);
        if self.include_zero || capacity == 0 {
            set.push(0);
        }
        let mut v = step;
        while v <= capacity {
            set.push(v);
            v += step;
        }
        if set.last() != Some(&capacity) {
            set.push(capacity);
        }
        set
    }
}
