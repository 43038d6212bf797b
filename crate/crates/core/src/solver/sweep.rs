use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GameSpec;
use crate::scalar::Scalar;
use crate::solver::{solve, EquilibriumReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Epsilon,
    Mu,
    Capacity,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Epsilon => "epsilon",
            SweepParam::Mu => "mu",
            SweepParam::Capacity => "capacity",
        })
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "epsilon" | "eps" => Ok(SweepParam::Epsilon),
            "mu" | "privacy_sensitivity" => Ok(SweepParam::Mu),
            "capacity" | "d" => Ok(SweepParam::Capacity),
            other => Err(format!(
                "unknown sweep parameter `{other}` (expected epsilon, mu or capacity)"
            )),
        }
    }
}

#[derive(Debug)]
pub struct SweepPoint<S> {
    pub value: S,
    pub report: Result<EquilibriumReport<S>>,
}

/// Copy of `template` with `param` set to `value` for the listed (0-based) clients.
///
/// Initial contributions above a reduced capacity are clamped to it.
pub fn apply_param<S: Scalar>(
    template: &GameSpec<S>,
    param: SweepParam,
    clients: &[usize],
    value: S,
) -> Result<GameSpec<S>> {
    let mut spec = template.clone();
    for &n in clients {
        if n >= spec.num_clients() {
            return Err(Error::ClientIndex {
                index: n,
                count: spec.num_clients(),
            });
        }
        let client = &mut spec.clients[n];
        match param {
            SweepParam::Epsilon => client.epsilon = value,
            SweepParam::Mu => client.privacy_sensitivity = value,
            SweepParam::Capacity => {
                if !(value >= S::zero()) || value.fract() != S::zero() {
                    return Err(Error::invalid(
                        format!("clients[{n}].capacity"),
                        format!("sweep value {value} is not a non-negative integer"),
                    ));
                }
                let cap = value
                    .to_u64()
                    .ok_or_else(|| Error::invalid(format!("clients[{n}].capacity"), format!("{value} out of range")))?;
                client.capacity = cap;
                let init = spec.solver.initial.get(n).min(cap);
                spec.solver.initial.set(n, init);
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// Solves the game once per value, all with the template's initial profile and settings.
pub fn sweep<S: Scalar>(
    template: &GameSpec<S>,
    param: SweepParam,
    clients: &[usize],
    values: &[S],
) -> Vec<SweepPoint<S>> {
    values
        .par_iter()
        .map(|&value| SweepPoint {
            value,
            report: apply_param(template, param, clients, value).and_then(|spec| solve(&spec)),
        })
        .collect()
}
