//! Domain types of the data-contribution game and the economic primitives:
//! accuracy, profit, privacy cost and per-client payoff.

mod accuracy;
mod economics;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use accuracy::{eval_accuracy, AccuracyCache, AccuracyModel, Surrogate};
pub use economics::{eval_privacy_cost, eval_profit, PrivacyCostModel, ProfitModel};

use crate::error::{Error, Result};
use crate::mechanisms::{self, ContributionIndices, Mechanism, ProfitShares};
use crate::scalar::Scalar;
use crate::solver::SolverSettings;

/// Default upper bound on the client count for exact Shapley enumeration.
pub const DEFAULT_COALITION_CAP: usize = 12;

/// Exogenous parameters of one client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ClientProfile<S> {
    /// 1-based client index.
    pub id: usize,
    /// Label-noise rate in `[0, 1]`.
    pub epsilon: S,
    /// Maximum number of data points the client can contribute.
    pub capacity: u64,
    /// Privacy cost per unit of `f(s_n)`.
    pub privacy_sensitivity: S,
}

impl<S: Scalar> ClientProfile<S> {
    pub fn new(id: usize, epsilon: S, capacity: u64, privacy_sensitivity: S) -> Result<Self> {
        let c = Self {
            id,
            epsilon,
            capacity,
            privacy_sensitivity,
        };
        c.validate("client")?;
        Ok(c)
    }

    pub(crate) fn validate(&self, path: &str) -> Result<()> {
        if !(self.epsilon >= S::zero() && self.epsilon <= S::one()) {
            return Err(Error::invalid(
                format!("{path}.epsilon"),
                format!("{} is outside [0, 1]", self.epsilon),
            ));
        }
        if !(self.privacy_sensitivity >= S::zero()) || !self.privacy_sensitivity.is_finite() {
            return Err(Error::invalid(
                format!("{path}.privacy_sensitivity"),
                format!("{} must be finite and non-negative", self.privacy_sensitivity),
            ));
        }
        Ok(())
    }
}

/// Data-contribution levels `s_n` of all clients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<u64>);

impl StrategyProfile {
    pub fn new(contributions: Vec<u64>) -> Self {
        Self(contributions)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u64> {
        self.0.iter()
    }

    pub fn get(&self, n: usize) -> u64 {
        self.0[n]
    }

    /// Copy of the profile with client `n` playing `value`.
    pub fn with(&self, n: usize, value: u64) -> Self {
        let mut v = self.0.clone();
        v[n] = value;
        Self(v)
    }

    pub fn set(&mut self, n: usize, value: u64) {
        self.0[n] = value;
    }

    /// Profile restricted to the members of `mask`; non-members play 0.
    pub fn masked(&self, mask: usize) -> Self {
        Self(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &s)| if mask & (1 << i) != 0 { s } else { 0 })
                .collect(),
        )
    }

    /// Largest per-client absolute change between two profiles of equal length.
    pub fn max_abs_diff(&self, other: &Self) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.abs_diff(*b))
            .max()
            .unwrap_or(0)
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }
}

impl From<Vec<u64>> for StrategyProfile {
    fn from(v: Vec<u64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// A complete game instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GameSpec<S> {
    pub clients: Vec<ClientProfile<S>>,
    pub mechanism: Mechanism,
    pub accuracy: AccuracyModel<S>,
    pub profit: ProfitModel<S>,
    pub privacy: PrivacyCostModel<S>,
    pub solver: SolverSettings<S>,
    pub coalition_cap: usize,
}

impl<S: Scalar> GameSpec<S> {
    /// Builds a spec with default solver settings and validates it.
    pub fn new(
        clients: Vec<ClientProfile<S>>,
        mechanism: Mechanism,
        accuracy: AccuracyModel<S>,
        profit: ProfitModel<S>,
        privacy: PrivacyCostModel<S>,
    ) -> Result<Self> {
        let n = clients.len();
        let spec = Self {
            clients,
            mechanism,
            accuracy,
            profit,
            privacy,
            solver: SolverSettings::defaults(n),
            coalition_cap: DEFAULT_COALITION_CAP,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_solver(mut self, solver: SolverSettings<S>) -> Result<Self> {
        self.solver = solver;
        self.validate()?;
        Ok(self)
    }

    pub fn num_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn noise_rates(&self) -> Vec<S> {
        self.clients.iter().map(|c| c.epsilon).collect()
    }

    pub fn capacities(&self) -> Vec<u64> {
        self.clients.iter().map(|c| c.capacity).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.clients.len();
        if n == 0 {
            return Err(Error::invalid("clients", "at least one client is required"));
        }
        for (i, c) in self.clients.iter().enumerate() {
            c.validate(&format!("clients[{i}]"))?;
        }
        self.accuracy.validate(n)?;
        self.profit.validate()?;
        self.privacy.validate()?;
        self.solver.validate(&self.capacities())?;
        if self.mechanism == Mechanism::Sv && n > self.coalition_cap {
            return Err(Error::CoalitionCap {
                clients: n,
                cap: self.coalition_cap,
            });
        }
        Ok(())
    }

    /// Checks that `s` has one entry per client and respects every capacity.
    pub fn check_profile(&self, s: &StrategyProfile) -> Result<()> {
        if s.len() != self.clients.len() {
            return Err(Error::LengthMismatch {
                what: "strategy profile",
                expected: self.clients.len(),
                got: s.len(),
            });
        }
        for (c, &sn) in self.clients.iter().zip(s.iter()) {
            if sn > c.capacity {
                return Err(Error::CapacityExceeded {
                    client: c.id,
                    value: sn,
                    capacity: c.capacity,
                });
            }
        }
        Ok(())
    }
}

/// Everything the game assigns to one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ProfileOutcome<S> {
    pub accuracy: S,
    pub profit: S,
    pub indices: ContributionIndices<S>,
    pub shares: ProfitShares<S>,
    pub costs: Vec<S>,
    pub payoffs: Vec<S>,
}

/// Evaluates accuracy, shares, costs and payoffs of all clients at `s`.
pub fn evaluate_profile<S: Scalar>(
    spec: &GameSpec<S>,
    s: &StrategyProfile,
    cache: &mut AccuracyCache<S>,
) -> Result<ProfileOutcome<S>> {
    spec.check_profile(s)?;
    let eps = spec.noise_rates();
    let accuracy = cache.get(&spec.accuracy, s, &eps)?;
    let profit = eval_profit(&spec.profit, accuracy);
    let indices = mechanisms::indices_with_cache(spec, s, cache)?;
    let shares = mechanisms::shares(&indices);
    let costs = spec
        .clients
        .iter()
        .zip(s.iter())
        .map(|(c, &sn)| eval_privacy_cost(&spec.privacy, c, sn))
        .collect::<Result<Vec<_>>>()?;
    let payoffs = shares
        .shares
        .iter()
        .zip(&costs)
        .map(|(&g, &c)| g * profit - c)
        .collect();
    Ok(ProfileOutcome {
        accuracy,
        profit,
        indices,
        shares,
        costs,
        payoffs,
    })
}

/// Payoff `g_n·Π(A) − C_n(s_n)` of client `n` (0-based) at profile `s`.
pub fn eval_payoff<S: Scalar>(spec: &GameSpec<S>, s: &StrategyProfile, n: usize) -> Result<S> {
    payoff_with_cache(spec, s, n, &mut AccuracyCache::new())
}

pub(crate) fn payoff_with_cache<S: Scalar>(
    spec: &GameSpec<S>,
    s: &StrategyProfile,
    n: usize,
    cache: &mut AccuracyCache<S>,
) -> Result<S> {
    if n >= spec.num_clients() {
        return Err(Error::ClientIndex {
            index: n,
            count: spec.num_clients(),
        });
    }
    let out = evaluate_profile(spec, s, cache)?;
    Ok(out.payoffs[n])
}
