use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{payoff_with_cache, AccuracyCache, GameSpec, StrategyProfile};
use crate::scalar::Scalar;

/// A unilateral deviation and the payoff it gains (negative if it loses).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Deviation<S> {
    /// 1-based client id.
    pub client: usize,
    pub from: u64,
    pub to: u64,
    pub gain: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct NashVerdict<S> {
    pub is_nash: bool,
    /// Deviation with the largest gain over all clients and grid points; `None`
    /// when no client has an alternative strategy.
    pub best_deviation: Option<Deviation<S>>,
    pub tolerance: S,
}

/// Checks every unilateral deviation on each client's search grid.
///
/// `s` is a Nash equilibrium iff no deviation gains more than `tolerance`.
pub fn verify_nash<S: Scalar>(spec: &GameSpec<S>, s: &StrategyProfile, tolerance: S) -> Result<NashVerdict<S>> {
    spec.check_profile(s)?;
    let per_client = (0..spec.num_clients())
        .into_par_iter()
        .map(|n| -> Result<Option<Deviation<S>>> {
            let mut cache = AccuracyCache::new();
            let current = payoff_with_cache(spec, s, n, &mut cache)?;
            let mut best: Option<Deviation<S>> = None;
            for alt in spec.solver.search_set(n, spec.clients[n].capacity) {
                if alt == s.get(n) {
                    continue;
                }
                let gain = payoff_with_cache(spec, &s.with(n, alt), n, &mut cache)? - current;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Deviation {
                        client: spec.clients[n].id,
                        from: s.get(n),
                        to: alt,
                        gain,
                    });
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;

    let best_deviation = per_client
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<Deviation<S>>, d| match acc {
            Some(a) if !(d.gain > a.gain) => Some(a),
            _ => Some(d),
        });
    let is_nash = best_deviation.as_ref().is_none_or(|d| d.gain <= tolerance);
    Ok(NashVerdict {
        is_nash,
        best_deviation,
        tolerance,
    })
}
