//! Profit-allocation mechanisms: contribution indices and their normalisation
//! into profit shares.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AccuracyCache, GameSpec, StrategyProfile};
use crate::scalar::Scalar;

/// Denominators at or below this fall back to an equal split.
pub const SHARE_FALLBACK_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    /// Egalitarian: every client gets `1/N`.
    #[serde(rename = "EG", alias = "eg")]
    Eg,
    /// Linearly proportional to clean contribution `(1 − ε_n)·s_n`.
    #[serde(rename = "LP", alias = "lp")]
    Lp,
    /// Leave-one-out accuracy drop.
    #[serde(rename = "LOO", alias = "loo")]
    Loo,
    /// Exact Shapley value of the accuracy game.
    #[serde(rename = "SV", alias = "sv")]
    Sv,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [Mechanism::Eg, Mechanism::Lp, Mechanism::Loo, Mechanism::Sv];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Eg => "EG",
            Mechanism::Lp => "LP",
            Mechanism::Loo => "LOO",
            Mechanism::Sv => "SV",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "EG" => Ok(Mechanism::Eg),
            "LP" => Ok(Mechanism::Lp),
            "LOO" => Ok(Mechanism::Loo),
            "SV" => Ok(Mechanism::Sv),
            other => Err(format!("unknown mechanism `{other}` (expected EG, LP, LOO or SV)")),
        }
    }
}

/// Raw contribution indices `I_n`. Kept alongside the shares for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ContributionIndices<S> {
    pub mechanism: Mechanism,
    pub indices: Vec<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ProfitShares<S> {
    pub shares: Vec<S>,
    /// The clipped index sum was degenerate and the profit was split equally.
    pub fallback_used: bool,
}

pub fn index_eg<S: Scalar>(n: usize) -> ContributionIndices<S> {
    let share = S::one() / S::count(n as u64);
    ContributionIndices {
        mechanism: Mechanism::Eg,
        indices: vec![share; n],
    }
}

pub fn index_lp<S: Scalar>(s: &StrategyProfile, eps: &[S]) -> Result<ContributionIndices<S>> {
    if s.len() != eps.len() {
        return Err(Error::LengthMismatch {
            what: "noise rates",
            expected: s.len(),
            got: eps.len(),
        });
    }
    Ok(ContributionIndices {
        mechanism: Mechanism::Lp,
        indices: s
            .iter()
            .zip(eps)
            .map(|(&sn, &e)| (S::one() - e) * S::count(sn))
            .collect(),
    })
}

pub fn index_loo<S: Scalar>(spec: &GameSpec<S>, s: &StrategyProfile) -> Result<ContributionIndices<S>> {
    loo_with_cache(spec, s, &mut AccuracyCache::new())
}

pub fn index_sv<S: Scalar>(spec: &GameSpec<S>, s: &StrategyProfile) -> Result<ContributionIndices<S>> {
    sv_with_cache(spec, s, &mut AccuracyCache::new())
}

fn loo_with_cache<S: Scalar>(
    spec: &GameSpec<S>,
    s: &StrategyProfile,
    cache: &mut AccuracyCache<S>,
) -> Result<ContributionIndices<S>> {
    let eps = spec.noise_rates();
    let full = cache.get(&spec.accuracy, s, &eps)?;
    let indices = (0..s.len())
        .map(|n| {
            if s.get(n) == 0 {
                return Ok(S::zero());
            }
            let without = cache.get(&spec.accuracy, &s.with(n, 0), &eps)?;
            Ok(full - without)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContributionIndices {
        mechanism: Mechanism::Loo,
        indices,
    })
}

fn sv_with_cache<S: Scalar>(
    spec: &GameSpec<S>,
    s: &StrategyProfile,
    cache: &mut AccuracyCache<S>,
) -> Result<ContributionIndices<S>> {
    let n = s.len();
    if n > spec.coalition_cap {
        return Err(Error::CoalitionCap {
            clients: n,
            cap: spec.coalition_cap,
        });
    }
    let eps = spec.noise_rates();
    let values = (0..1usize << n)
        .map(|mask| cache.get(&spec.accuracy, &s.masked(mask), &eps))
        .collect::<Result<Vec<_>>>()?;

    // weight[k] = 1 / (N · C(N−1, k))
    let mut weight = Vec::with_capacity(n);
    let mut binom = 1.0f64;
    for k in 0..n {
        weight.push(S::lit(1.0 / (n as f64 * binom)));
        binom = binom * (n - 1 - k) as f64 / (k + 1) as f64;
    }

    let indices = (0..n)
        .map(|client| {
            let bit = 1usize << client;
            (0..1usize << n)
                .filter(|mask| mask & bit == 0)
                .fold(S::zero(), |acc, mask| {
                    let size = mask.count_ones() as usize;
                    acc + (values[mask | bit] - values[mask]) * weight[size]
                })
        })
        .collect();
    Ok(ContributionIndices {
        mechanism: Mechanism::Sv,
        indices,
    })
}

/// Indices under the spec's mechanism, sharing accuracy evaluations through `cache`.
pub fn indices_with_cache<S: Scalar>(
    spec: &GameSpec<S>,
    s: &StrategyProfile,
    cache: &mut AccuracyCache<S>,
) -> Result<ContributionIndices<S>> {
    match spec.mechanism {
        Mechanism::Eg => Ok(index_eg(s.len())),
        Mechanism::Lp => index_lp(s, &spec.noise_rates()),
        Mechanism::Loo => loo_with_cache(spec, s, cache),
        Mechanism::Sv => sv_with_cache(spec, s, cache),
    }
}

/// Clips negative indices to zero and normalises; an all-zero result splits equally.
pub fn shares<S: Scalar>(indices: &ContributionIndices<S>) -> ProfitShares<S> {
    let clipped: Vec<S> = indices.indices.iter().map(|&i| i.max(S::zero())).collect();
    let total: S = clipped.iter().copied().fold(S::zero(), |a, b| a + b);
    if !(total > S::lit(SHARE_FALLBACK_EPS)) {
        let n = clipped.len();
        return ProfitShares {
            shares: vec![S::one() / S::count(n as u64); n],
            fallback_used: true,
        };
    }
    ProfitShares {
        shares: clipped.into_iter().map(|c| c / total).collect(),
        fallback_used: false,
    }
}
