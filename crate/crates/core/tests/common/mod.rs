//! Random game generators shared by the integration tests.
#![allow(dead_code)]

use fedcontrib::model::{AccuracyModel, ClientProfile, GameSpec, PrivacyCostModel, ProfitModel, Surrogate};
use fedcontrib::solver::{GridStep, SolverSettings, UpdateScheme};
use fedcontrib::{Mechanism, StrategyProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn clients(eps: &[f64], caps: &[u64], mu: &[f64]) -> Vec<ClientProfile<f64>> {
    (0..eps.len())
        .map(|i| ClientProfile::new(i + 1, eps[i], caps[i], mu[i]).unwrap())
        .collect()
}

pub fn spec(
    clients: Vec<ClientProfile<f64>>,
    mechanism: Mechanism,
    accuracy: AccuracyModel<f64>,
    profit: ProfitModel<f64>,
) -> GameSpec<f64> {
    GameSpec::new(clients, mechanism, accuracy, profit, PrivacyCostModel::Linear).unwrap()
}

pub fn settings(n: usize, step: u64, scheme: UpdateScheme) -> SolverSettings<f64> {
    SolverSettings {
        grid_step: GridStep::Uniform(step),
        scheme,
        ..SolverSettings::defaults(n)
    }
}

/// The clean surrogate used by the five-client scenarios: concave and
/// increasing over `[0, 5·10⁴]`, from the `0.1` baseline to about `0.79`.
pub fn reference_surrogate(gamma: f64) -> Surrogate<f64> {
    Surrogate {
        alpha: [0.15, 0.002, 1.0, 0.0, 0.1],
        gamma,
        baseline: 0.1,
    }
}

/// Five clients with `D_n = 10⁴`, the reference surrogate (`γ = 0.5`), convex profit
/// `β₁A²` and linear cost, searched on a stride-50 grid with Gauss–Seidel updates.
pub fn five_client_game(mechanism: Mechanism, eps: &[f64], mu: &[f64], beta1: f64) -> GameSpec<f64> {
    let s = spec(
        clients(eps, &[10_000; 5], mu),
        mechanism,
        AccuracyModel::Surrogate(reference_surrogate(0.5)),
        ProfitModel::quadratic(beta1, 0.0),
    );
    s.with_solver(settings(5, 50, UpdateScheme::GaussSeidel)).unwrap()
}

/// Random member of the five-client family.
pub fn random_five_client_game(seed: u64) -> GameSpec<f64> {
    let mut r = rng(seed);
    let mechanism = Mechanism::ALL[r.random_range(0..4)];
    let eps: Vec<f64> = (0..5).map(|_| r.random_range(0..=5) as f64 / 10.0).collect();
    let mu: Vec<f64> = (0..5).map(|_| r.random_range(0.1..0.9)).collect();
    let beta1 = r.random_range(60_000.0..100_000.0);
    five_client_game(mechanism, &eps, &mu, beta1)
}

/// Random coalition-table accuracy with `values[0] = baseline`, entries in `[0, 1]`.
pub fn random_table(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..1usize << n).map(|_| r.random_range(0.0..1.0)).collect();
    v[0] = r.random_range(0.0..0.2);
    v
}

pub fn random_profile(r: &mut ChaCha8Rng, caps: &[u64]) -> StrategyProfile {
    StrategyProfile::new(caps.iter().map(|&d| r.random_range(0..=d)).collect())
}

/// Numerical check of the structural assumptions on a small game, over a
/// sample of opponent profiles: accuracy concave and non-decreasing in each
/// `s_n` (1), allocated profit `g_n·Π` concave in `s_n` (2). The privacy cost
/// is convex by construction (3). With `quality`, also checks that accuracy
/// and share are non-increasing in `ε_n` with non-increasing marginals in `s_n` (4).
pub fn satisfies_assumptions(spec: &GameSpec<f64>, r: &mut ChaCha8Rng, samples: usize, quality: bool) -> bool {
    use fedcontrib::mechanisms::{indices_with_cache, shares};
    use fedcontrib::model::{eval_accuracy, eval_profit, AccuracyCache};

    let n = spec.num_clients();
    let caps = spec.capacities();
    let tol = 1e-12;
    let allocated = |spec: &GameSpec<f64>, s: &StrategyProfile, k: usize| -> (f64, f64, f64) {
        let eps = spec.noise_rates();
        let a = eval_accuracy(&spec.accuracy, s, &eps).unwrap();
        let idx = indices_with_cache(spec, s, &mut AccuracyCache::new()).unwrap();
        let g = shares(&idx).shares[k];
        (a, g, g * eval_profit(&spec.profit, a))
    };
    let concave = |v: &[f64]| {
        v.windows(3)
            .all(|w| w[2] - 2.0 * w[1] + w[0] <= tol * (1.0 + w[1].abs()))
    };
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0] - tol);

    for k in 0..n {
        for t in 0..samples {
            let base = if t == 0 {
                StrategyProfile::zeros(n)
            } else {
                random_profile(r, &caps)
            };
            let path: Vec<(f64, f64, f64)> = (0..=caps[k]).map(|x| allocated(spec, &base.with(k, x), k)).collect();
            let acc: Vec<f64> = path.iter().map(|p| p.0).collect();
            let profit: Vec<f64> = path.iter().map(|p| p.2).collect();
            if !increasing(&acc) || !concave(&acc) || !concave(&profit) {
                return false;
            }
            if quality {
                let e = spec.clients[k].epsilon;
                let mut noisier = spec.clone();
                noisier.clients[k].epsilon = (e + 0.05).min(1.0);
                let worse: Vec<(f64, f64, f64)> = (0..=caps[k])
                    .map(|x| allocated(&noisier, &base.with(k, x), k))
                    .collect();
                for x in 0..path.len() {
                    if worse[x].0 > path[x].0 + tol || worse[x].1 > path[x].1 + tol {
                        return false;
                    }
                    if x > 0 {
                        let da = (worse[x].0 - worse[x - 1].0) - (path[x].0 - path[x - 1].0);
                        let dg = (worse[x].1 - worse[x - 1].1) - (path[x].1 - path[x - 1].1);
                        if da > tol || dg > tol {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Random small game (2–4 clients, capacities ≤ 25, unit grid) for the
/// comparative-statics batteries. Not filtered; see [`satisfies_assumptions`].
pub fn random_small_game(r: &mut ChaCha8Rng) -> GameSpec<f64> {
    let n = r.random_range(2..=4);
    let caps: Vec<u64> = (0..n).map(|_| r.random_range(5..=25)).collect();
    let eps: Vec<f64> = (0..n).map(|_| r.random_range(0.0..0.5)).collect();
    let mu: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    let mechanism = Mechanism::ALL[r.random_range(0..4)];
    let accuracy = match r.random_range(0..3) {
        0 => {
            let alpha: [f64; 5] = [
                r.random_range(0.05..0.3),
                r.random_range(0.01..0.5),
                r.random_range(0.5..2.0),
                r.random_range(0.0..1e-3),
                r.random_range(0.1..0.3),
            ];
            let baseline = (alpha[0] * alpha[2].ln() + alpha[4]).clamp(0.0, 1.0);
            AccuracyModel::Surrogate(Surrogate {
                alpha,
                gamma: r.random_range(0.0..0.5),
                baseline,
            })
        }
        1 => AccuracyModel::Power {
            scale: r.random_range(0.02..0.15),
            exponent: r.random_range(0.3..1.0),
            baseline: r.random_range(0.0..0.2),
        },
        _ => AccuracyModel::Additive {
            weights: (0..n).map(|_| r.random_range(0.0..0.8 / (n as f64 * 25.0))).collect(),
            baseline: r.random_range(0.0..0.2),
        },
    };
    let profit = if r.random_bool(0.5) {
        ProfitModel::Affine {
            slope: r.random_range(5.0..60.0),
            intercept: 0.0,
        }
    } else {
        ProfitModel::quadratic(r.random_range(5.0..60.0), 0.0)
    };
    let privacy = if r.random_bool(0.5) {
        PrivacyCostModel::Linear
    } else {
        PrivacyCostModel::Power {
            exponent: r.random_range(1.0..2.0),
        }
    };
    let spec = GameSpec::new(clients(&eps, &caps, &mu), mechanism, accuracy, profit, privacy).unwrap();
    spec.with_solver(settings(n, 1, UpdateScheme::GaussSeidel)).unwrap()
}
