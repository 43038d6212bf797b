use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate_profile, payoff_with_cache, AccuracyCache, GameSpec, ProfileOutcome, StrategyProfile};
use crate::scalar::Scalar;
use crate::solver::{verify_nash, NashVerdict, UpdateScheme};

/// One row of the best-response trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TrajectoryPoint<S> {
    pub iteration: usize,
    pub profile: StrategyProfile,
    pub payoffs: Vec<S>,
    pub accuracy: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct EquilibriumReport<S> {
    #[serde(rename = "final")]
    pub final_profile: StrategyProfile,
    /// Starts with the initial profile; one entry per completed round after that.
    pub trajectory: Vec<TrajectoryPoint<S>>,
    pub converged: bool,
    pub iterations: usize,
    pub nash: NashVerdict<S>,
    pub outcome: ProfileOutcome<S>,
}

/// Smallest maximiser of client `n`'s payoff over its search grid, with the payoff attained.
pub fn best_response_with_payoff<S: Scalar>(
    spec: &GameSpec<S>,
    s_others: &StrategyProfile,
    n: usize,
) -> Result<(u64, S)> {
    if n >= spec.num_clients() {
        return Err(Error::ClientIndex {
            index: n,
            count: spec.num_clients(),
        });
    }
    let capacity = spec.clients[n].capacity;
    // Coalitions that exclude `n` are shared by every candidate.
    let mut cache = AccuracyCache::new();
    let mut best: Option<(u64, S)> = None;
    for candidate in spec.solver.search_set(n, capacity) {
        let u = payoff_with_cache(spec, &s_others.with(n, candidate), n, &mut cache)?;
        match best {
            Some((_, b)) if !(u > b) => {}
            _ => best = Some((candidate, u)),
        }
    }
    Ok(best.expect("search set always contains the capacity"))
}

/// Best response: the smallest `argmax` of `U_n(·, s_{−n})` over the search grid.
pub fn best_response<S: Scalar>(spec: &GameSpec<S>, s_others: &StrategyProfile, n: usize) -> Result<u64> {
    best_response_with_payoff(spec, s_others, n).map(|(s, _)| s)
}

fn trajectory_point<S: Scalar>(
    spec: &GameSpec<S>,
    iteration: usize,
    s: &StrategyProfile,
) -> Result<TrajectoryPoint<S>> {
    let out = evaluate_profile(spec, s, &mut AccuracyCache::new())?;
    Ok(TrajectoryPoint {
        iteration,
        profile: s.clone(),
        payoffs: out.payoffs,
        accuracy: out.accuracy,
    })
}

/// Runs best-response dynamics from `spec.solver.initial` until the largest
/// per-client change is at most `tau` or `max_iters` rounds have run.
pub fn solve<S: Scalar>(spec: &GameSpec<S>) -> Result<EquilibriumReport<S>> {
    spec.validate()?;
    let settings = &spec.solver;
    let n = spec.num_clients();
    let mut current = settings.initial.clone();
    let mut trajectory = vec![trajectory_point(spec, 0, &current)?];
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=settings.max_iters {
        let next = match settings.scheme {
            UpdateScheme::Jacobi => StrategyProfile::new(
                (0..n)
                    .into_par_iter()
                    .map(|i| best_response(spec, &current, i))
                    .collect::<Result<Vec<_>>>()?,
            ),
            UpdateScheme::GaussSeidel => {
                let mut work = current.clone();
                for i in 0..n {
                    let br = best_response(spec, &work, i)?;
                    work.set(i, br);
                }
                work
            }
        };
        iterations = t;
        let delta = next.max_abs_diff(&current);
        trajectory.push(trajectory_point(spec, t, &next)?);
        current = next;
        log::trace!("round {t}: {current} (max change {delta})");
        if S::count(delta) <= settings.tau {
            converged = true;
            break;
        }
    }

    let nash = verify_nash(spec, &current, settings.nash_tolerance)?;
    let outcome = evaluate_profile(spec, &current, &mut AccuracyCache::new())?;
    if !converged {
        log::info!(
            "best-response dynamics did not converge within {} rounds",
            settings.max_iters
        );
    }
    Ok(EquilibriumReport {
        final_profile: current,
        trajectory,
        converged,
        iterations,
        nash,
        outcome,
    })
}
