//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any failure.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::*;
use fedcontrib::cli;
use fedcontrib::fit::{fit, weighted_rmse, AccuracySample, FitOptions};
use fedcontrib::flsim::generate_samples;
use fedcontrib::mechanisms::{index_loo, index_sv};
use fedcontrib::model::{eval_accuracy, eval_payoff, AccuracyModel, GameSpec, ProfitModel, Surrogate};
use fedcontrib::solver::{apply_param, solve, sweep, verify_nash, SweepParam, UpdateScheme};
use fedcontrib::{config::Config, Mechanism, StrategyProfile};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn under(elapsed: Duration, secs: u64) -> bool {
    elapsed < Duration::from_secs(secs)
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

// ---- 1. Shapley axioms ----------------------------------------------------

fn swap_bits(mask: usize, i: usize, j: usize) -> usize {
    let (bi, bj) = ((mask >> i) & 1, (mask >> j) & 1);
    if bi == bj {
        mask
    } else {
        mask ^ (1 << i) ^ (1 << j)
    }
}

/// A random instance where clients 0 and 1 are interchangeable and client
/// `n−1` is a dummy; with two clients only one of the two roles is planted.
fn axiom_instance(r: &mut ChaCha8Rng, n: usize, kind: usize, pair: bool) -> (GameSpec<f64>, StrategyProfile) {
    let caps = vec![100; n];
    let pair = pair || n > 2;
    let has_dummy = !pair || n > 2;
    let mut eps: Vec<f64> = (0..n).map(|_| r.random_range(0.0..0.5)).collect();
    let mut s: Vec<u64> = (0..n).map(|_| r.random_range(1..=100)).collect();
    if pair {
        eps[1] = eps[0];
        s[1] = s[0];
    }
    let dummy = n - 1;
    let accuracy = match kind {
        0 => {
            let mut v = random_table(r, n);
            for m in 0..v.len() {
                let t = swap_bits(m, 0, 1);
                if pair && t > m {
                    let avg = 0.5 * (v[m] + v[t]);
                    v[m] = avg;
                    v[t] = avg;
                }
            }
            for m in 0..v.len() {
                if has_dummy && m & (1 << dummy) != 0 {
                    v[m] = v[m ^ (1 << dummy)];
                }
            }
            AccuracyModel::Coalition { values: v }
        }
        1 => {
            let mut w: Vec<f64> = (0..n).map(|_| r.random_range(0.0..0.8 / (100.0 * n as f64))).collect();
            if pair {
                w[1] = w[0];
            }
            if has_dummy {
                w[dummy] = 0.0;
            }
            AccuracyModel::Additive {
                weights: w,
                baseline: r.random_range(0.0..0.2),
            }
        }
        _ => {
            // The dummy contributes nothing, so it is not a member of any coalition.
            if has_dummy {
                s[dummy] = 0;
            }
            AccuracyModel::Surrogate(Surrogate {
                alpha: [
                    r.random_range(0.05..0.2),
                    r.random_range(0.001..0.1),
                    r.random_range(0.5..2.0),
                    r.random_range(0.0..1e-4),
                    r.random_range(0.0..0.3),
                ],
                gamma: r.random_range(0.0..0.5),
                baseline: r.random_range(0.0..0.2),
            })
        }
    };
    let spec = spec(
        clients(&eps, &caps, &vec![0.1; n]),
        Mechanism::Sv,
        accuracy,
        ProfitModel::quadratic(1.0, 0.0),
    );
    (spec, StrategyProfile::new(s))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = [0.0f64; 3];
    let mut count = 0;
    for n in 2..=8 {
        for kind in 0..3 {
            for i in 0..10 {
                let pair = i % 2 == 0;
                let (spec, s) = axiom_instance(&mut r, n, kind, pair);
                let phi = index_sv(&spec, &s).unwrap().indices;
                let full = eval_accuracy(&spec.accuracy, &s, &spec.noise_rates()).unwrap();
                let efficiency = (phi.iter().sum::<f64>() - (full - spec.accuracy.baseline())).abs();
                worst[0] = worst[0].max(efficiency);
                if pair || n > 2 {
                    worst[1] = worst[1].max((phi[0] - phi[1]).abs());
                }
                if !pair || n > 2 {
                    worst[2] = worst[2].max(phi[n - 1].abs());
                }
                count += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst.iter().all(|&w| w <= 1e-9) && under(elapsed, 10),
        format!(
            "{count} instances, N = 2..8; max error efficiency {:.1e}, symmetry {:.1e}, dummy {:.1e} ({elapsed:.2?})",
            worst[0], worst[1], worst[2]
        ),
    )
}

// ---- 2. SV = LOO on additive models ---------------------------------------

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(2..=8);
        let caps = vec![1000; n];
        let weights: Vec<f64> = (0..n).map(|_| r.random_range(0.0..0.8 / (1000.0 * n as f64))).collect();
        let accuracy = AccuracyModel::Additive {
            weights,
            baseline: r.random_range(0.0..0.2),
        };
        let eps: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let spec = spec(
            clients(&eps, &caps, &vec![0.1; n]),
            Mechanism::Sv,
            accuracy,
            ProfitModel::quadratic(1.0, 0.0),
        );
        let s = random_profile(&mut r, &caps);
        let sv = index_sv(&spec, &s).unwrap().indices;
        let loo = index_loo(&spec, &s).unwrap().indices;
        for (a, b) in sv.iter().zip(&loo) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("100 additive instances, max |SV − LOO| = {worst:.1e}"),
    )
}

// ---- 3. brute-force Nash oracle -------------------------------------------

fn random_two_client_game(r: &mut ChaCha8Rng) -> GameSpec<f64> {
    let caps: Vec<u64> = (0..2).map(|_| r.random_range(1..=30)).collect();
    let eps: Vec<f64> = (0..2).map(|_| r.random_range(0.0..0.5)).collect();
    let mu: Vec<f64> = (0..2).map(|_| r.random_range(0.01..1.0)).collect();
    let accuracy = match r.random_range(0..4) {
        0 => AccuracyModel::Surrogate(Surrogate {
            alpha: [
                r.random_range(0.05..0.3),
                r.random_range(0.01..0.5),
                1.0,
                0.0,
                r.random_range(0.0..0.3),
            ],
            gamma: r.random_range(0.0..0.5),
            baseline: r.random_range(0.0..0.2),
        }),
        1 => AccuracyModel::Power {
            scale: r.random_range(0.02..0.15),
            exponent: r.random_range(0.3..1.0),
            baseline: r.random_range(0.0..0.2),
        },
        2 => AccuracyModel::Additive {
            weights: (0..2).map(|_| r.random_range(0.0..0.01)).collect(),
            baseline: r.random_range(0.0..0.2),
        },
        _ => AccuracyModel::Coalition {
            values: random_table(r, 2),
        },
    };
    let profit = if r.random_bool(0.5) {
        ProfitModel::Affine {
            slope: r.random_range(1.0..40.0),
            intercept: 0.0,
        }
    } else {
        ProfitModel::quadratic(r.random_range(1.0..40.0), 0.0)
    };
    let mechanism = Mechanism::ALL[r.random_range(0..4)];
    let g = spec(clients(&eps, &caps, &mu), mechanism, accuracy, profit);
    g.with_solver(settings(2, 1, UpdateScheme::Jacobi)).unwrap()
}

/// Joint-profile enumeration: `ne[a][b]` iff neither client gains by deviating.
fn enumerate_equilibria(spec: &GameSpec<f64>) -> Vec<Vec<bool>> {
    let (d0, d1) = (spec.clients[0].capacity as usize, spec.clients[1].capacity as usize);
    let mut u = vec![vec![[0.0f64; 2]; d1 + 1]; d0 + 1];
    for a in 0..=d0 {
        for b in 0..=d1 {
            let s = StrategyProfile::new(vec![a as u64, b as u64]);
            u[a][b] = [eval_payoff(spec, &s, 0).unwrap(), eval_payoff(spec, &s, 1).unwrap()];
        }
    }
    let tol = spec.solver.nash_tolerance;
    (0..=d0)
        .map(|a| {
            (0..=d1)
                .map(|b| {
                    let best0 = (0..=d0).map(|x| u[x][b][0]).fold(f64::NEG_INFINITY, f64::max);
                    let best1 = (0..=d1).map(|y| u[a][y][1]).fold(f64::NEG_INFINITY, f64::max);
                    best0 - u[a][b][0] <= tol && best1 - u[a][b][1] <= tol
                })
                .collect()
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3);
    let mut converged = 0;
    let mut solver_failures = 0;
    let mut mismatches = 0;
    let mut checked = 0;
    for _ in 0..50 {
        let spec = random_two_client_game(&mut r);
        let ne = enumerate_equilibria(&spec);
        let report = solve(&spec).unwrap();
        if report.converged {
            converged += 1;
            let (a, b) = (
                report.final_profile.get(0) as usize,
                report.final_profile.get(1) as usize,
            );
            if !report.nash.is_nash || !ne[a][b] {
                solver_failures += 1;
            }
        }
        for (a, row) in ne.iter().enumerate() {
            for (b, &is_ne) in row.iter().enumerate() {
                let s = StrategyProfile::new(vec![a as u64, b as u64]);
                let verdict = verify_nash(&spec, &s, spec.solver.nash_tolerance).unwrap();
                checked += 1;
                if verdict.is_nash != is_ne {
                    mismatches += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        solver_failures == 0 && mismatches == 0 && converged > 0 && under(elapsed, 60),
        format!(
            "50 games: {converged} converged, {solver_failures} converged outputs failing; \
             verify_nash vs enumeration on {checked} profiles: {mismatches} mismatches ({elapsed:.2?})"
        ),
    )
}

// ---- 4. convergence speed -------------------------------------------------

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut fast = 0;
    let mut worst = 0;
    let mut failed = Vec::new();
    for seed in 0..100 {
        let r = solve(&random_five_client_game(seed)).unwrap();
        if r.converged && r.iterations <= 10 {
            fast += 1;
        }
        if !r.converged {
            failed.push(seed);
        }
        worst = worst.max(r.iterations);
    }
    outcome(
        fast >= 95 && failed.is_empty() && worst <= 50,
        format!(
            "{fast}/100 seeds within 10 iterations, slowest {worst}, non-converged {failed:?} ({:.2?})",
            start.elapsed()
        ),
    )
}

// ---- 5/6. comparative statics batteries -----------------------------------

/// Equilibrium `s_k*` along a sweep, or `None` if any point fails to converge.
fn statics(spec: &GameSpec<f64>, param: SweepParam, k: usize, values: &[f64]) -> Option<Vec<u64>> {
    values
        .iter()
        .map(|&v| {
            let r = solve(&apply_param(spec, param, &[k], v).unwrap()).unwrap();
            (r.converged && r.nash.is_nash).then(|| r.final_profile.get(k))
        })
        .collect()
}

struct Battery {
    specs: usize,
    sweeps: usize,
    violations: usize,
    rejected_assumptions: usize,
    rejected_convergence: usize,
}

fn battery(seed: u64, quality: bool) -> Battery {
    let mut r = rng(seed);
    let mut b = Battery {
        specs: 0,
        sweeps: 0,
        violations: 0,
        rejected_assumptions: 0,
        rejected_convergence: 0,
    };
    while b.specs < 200 {
        let spec = random_small_game(&mut r);
        if !satisfies_assumptions(&spec, &mut r, 6, quality) {
            b.rejected_assumptions += 1;
            continue;
        }
        let k = r.random_range(0..spec.num_clients());
        let d = spec.clients[k].capacity as f64;
        let plan: Vec<(SweepParam, Vec<f64>, bool)> = if quality {
            vec![(SweepParam::Epsilon, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5], false)]
        } else {
            vec![
                (SweepParam::Mu, vec![0.05, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5], false),
                (
                    SweepParam::Capacity,
                    vec![(d / 4.0).floor(), (d / 2.0).floor(), d, (1.5 * d).floor(), 2.0 * d],
                    true,
                ),
            ]
        };
        let Some(paths) = plan
            .iter()
            .map(|(p, values, up)| statics(&spec, *p, k, values).map(|s| (s, *up)))
            .collect::<Option<Vec<_>>>()
        else {
            b.rejected_convergence += 1;
            continue;
        };
        b.specs += 1;
        for (stars, up) in paths {
            b.sweeps += 1;
            let monotone = stars.windows(2).all(|w| if up { w[1] >= w[0] } else { w[1] <= w[0] });
            if !monotone {
                b.violations += 1;
            }
        }
    }
    b
}

fn battery_outcome(b: Battery, what: &str, start: Instant) -> Outcome {
    outcome(
        b.violations == 0,
        format!(
            "{} specs, {} {what} sweeps, {} violations (skipped {} specs failing the assumptions, {} with a non-converging sweep point) ({:.2?})",
            b.specs,
            b.sweeps,
            b.violations,
            b.rejected_assumptions,
            b.rejected_convergence,
            start.elapsed()
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    battery_outcome(battery(5, false), "mu/capacity", start)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    battery_outcome(battery(6, true), "epsilon", start)
}

// ---- 7/8. sweep scenarios --------------------------------------------------

fn scenario(name: &str) -> GameSpec<f64> {
    Config::from_path(configs().join(name)).unwrap().game_spec().unwrap()
}

fn swept_profiles(spec: &GameSpec<f64>, param: SweepParam, values: &[f64]) -> Vec<(f64, StrategyProfile, Vec<f64>)> {
    sweep(spec, param, &[0, 1, 2], values)
        .into_iter()
        .map(|p| {
            let r = p.report.unwrap();
            assert!(
                r.converged && r.nash.is_nash,
                "no equilibrium at {} = {}",
                param,
                p.value
            );
            (p.value, r.final_profile, r.outcome.shares.shares)
        })
        .collect()
}

fn non_increasing_for(points: &[(f64, StrategyProfile, Vec<f64>)], clients: &[usize]) -> bool {
    clients
        .iter()
        .all(|&n| points.windows(2).all(|w| w[1].1.get(n) <= w[0].1.get(n)))
}

fn clean_dominate(s: &StrategyProfile) -> bool {
    let lowest_clean = s.get(3).min(s.get(4));
    (0..3).all(|n| s.get(n) <= lowest_clean)
}

fn criterion_7() -> Outcome {
    let base = scenario("quality_sweep.toml");
    let values = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let mut notes = Vec::new();
    let mut pass = true;
    for m in [Mechanism::Lp, Mechanism::Loo, Mechanism::Sv] {
        let spec = GameSpec {
            mechanism: m,
            ..base.clone()
        };
        let pts = swept_profiles(&spec, SweepParam::Epsilon, &values);
        let dec = non_increasing_for(&pts, &[0, 1, 2]);
        let dom = pts.iter().filter(|p| p.0 > 0.0).all(|p| clean_dominate(&p.1));
        pass &= dec && dom;
        let stars: Vec<u64> = pts.iter().map(|p| p.1.get(0)).collect();
        notes.push(format!("{m}: s1* {stars:?} dec={dec} clean>=noisy={dom}"));
    }
    let eg = GameSpec {
        mechanism: Mechanism::Eg,
        ..base
    };
    let eg_equal = swept_profiles(&eg, SweepParam::Epsilon, &values)
        .iter()
        .all(|p| p.2.iter().all(|&g| (g - 0.2).abs() < 1e-15));
    pass &= eg_equal;
    notes.push(format!("EG shares all 1/5: {eg_equal}"));
    outcome(pass, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let base = scenario("privacy_sweep.toml");
    let values = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut notes = Vec::new();
    let mut pass = true;
    for m in Mechanism::ALL {
        let spec = GameSpec {
            mechanism: m,
            ..base.clone()
        };
        let pts = swept_profiles(&spec, SweepParam::Mu, &values);
        let dec = non_increasing_for(&pts, &[0, 1, 2]);
        let dom = pts
            .iter()
            .filter(|p| p.0 == 0.5 || p.0 == 0.9)
            .all(|p| clean_dominate(&p.1));
        pass &= dec && dom;
        let stars: Vec<u64> = pts.iter().map(|p| p.1.get(0)).collect();
        notes.push(format!("{m}: s1* {stars:?} dec={dec} 4-5>=1-3={dom}"));
    }
    outcome(pass, notes.join("; "))
}

// ---- 9. fit quality -------------------------------------------------------

fn fit_samples(r: &mut ChaCha8Rng, alpha: [f64; 5], gamma: f64, sigma: f64) -> Vec<AccuracySample<f64>> {
    let truth = Surrogate {
        alpha,
        gamma,
        baseline: 0.1,
    };
    let model = AccuracyModel::Surrogate(truth);
    let mut out = Vec::new();
    for k in 1..=10u64 {
        let each = 200 * k;
        let s = StrategyProfile::new(vec![each; 5]);
        out.push((s, vec![0.0; 5]));
    }
    for k in 0..10 {
        let s = StrategyProfile::new((0..5).map(|_| r.random_range(200..=2000)).collect());
        let eps = (0..5).map(|_| (r.random_range(0..=5) as f64) / 10.0).collect();
        out.push((s, eps));
        let _ = k;
    }
    out.into_iter()
        .map(|(s, eps)| {
            let clean = eval_accuracy(&model, &s, &eps).unwrap();
            let noise = if sigma > 0.0 {
                sigma * r.sample::<f64, _>(rand_distr::StandardNormal)
            } else {
                0.0
            };
            AccuracySample::new(s, eps, (clean + noise).clamp(0.0, 1.0))
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let alpha = [0.15, 0.002, 1.0, 1e-6, 0.1];
    let gamma = 0.4;
    let opts = FitOptions::default();
    let exact = fit_samples(&mut rng(9), alpha, gamma, 0.0);
    let f = fit(&exact, &opts).unwrap();
    let exact_rmse = weighted_rmse(&f.alpha, f.gamma, &exact).unwrap();
    let mut total = 0.0;
    for seed in 0..20 {
        let noisy = fit_samples(&mut rng(900 + seed), alpha, gamma, 0.01);
        total += fit(&noisy, &opts).unwrap().rmse;
    }
    let mean = total / 20.0;
    let elapsed = start.elapsed();
    outcome(
        exact_rmse < 1e-6 && mean <= 0.02 && under(elapsed, 30),
        format!("noiseless rmse {exact_rmse:.2e}, mean rmse at sigma 0.01 over 20 seeds {mean:.4} ({elapsed:.2?})"),
    )
}

// ---- 10. simulator trends -------------------------------------------------

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let config = Config::from_path(configs().join("flsim_trends.toml")).unwrap();
    let fl = config.flsim::<f64>().unwrap();
    let outcomes = generate_samples(&fl.task, &fl.capacities, &fl.grid, &fl.sim, fl.repeats).unwrap();
    // Clean points form the data curve; every point at 100 samples per client
    // forms the noise curve, sharing its clean end with the data curve.
    let data: Vec<(f64, f64)> = outcomes
        .iter()
        .filter(|o| o.sample.is_clean())
        .map(|o| (o.sample.s.total() as f64, o.sample.observed_accuracy))
        .collect();
    let noise: Vec<(f64, f64)> = outcomes
        .iter()
        .filter(|o| o.sample.s.total() == 500)
        .map(|o| (o.sample.eps[0], o.sample.observed_accuracy))
        .collect();
    let (dx, dy): (Vec<f64>, Vec<f64>) = data.iter().cloned().unzip();
    let (nx, ny): (Vec<f64>, Vec<f64>) = noise.iter().cloned().unzip();
    let rho_data = spearman(&dx, &dy);
    let rho_noise = spearman(&nx, &ny);
    let interior = dy.len().saturating_sub(2);
    let concave = dy.windows(3).filter(|w| w[2] - 2.0 * w[1] + w[0] <= 0.0).count();
    let frac = concave as f64 / interior.max(1) as f64;
    let elapsed = start.elapsed();
    outcome(
        rho_data >= 0.9 && frac >= 0.7 && rho_noise <= -0.9 && under(elapsed, 300),
        format!(
            "data: spearman {rho_data:.3}, concave at {concave}/{interior} interior points; noise: spearman {rho_noise:.3} ({elapsed:.2?})"
        ),
    )
}

// ---- 11. determinism ------------------------------------------------------

fn run_cli(args: &[&str]) -> i32 {
    cli::run(std::iter::once("fedcontrib").chain(args.iter().copied()))
}

fn result_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn criterion_11() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = |name: &str| configs().join(name).to_string_lossy().into_owned();
    let quality = cfg("quality_sweep.toml");
    let flsim = cfg("flsim_small.toml");
    let summary = tmp
        .path()
        .join("solve-a")
        .join("summary.json")
        .to_string_lossy()
        .into_owned();
    let samples = tmp
        .path()
        .join("flsim-a")
        .join("samples.csv")
        .to_string_lossy()
        .into_owned();
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("solve", vec!["solve".into(), "--config".into(), quality.clone()]),
        (
            "sweep",
            [
                "sweep",
                "--config",
                &quality,
                "--param",
                "epsilon",
                "--clients",
                "1,2,3",
                "--values",
                "0,0.25,0.5",
            ]
            .map(String::from)
            .to_vec(),
        ),
        ("flsim", vec!["flsim".into(), "--config".into(), flsim.clone()]),
        ("fit", vec!["fit".into(), "--samples".into(), samples.clone()]),
        (
            "verify",
            vec![
                "verify".into(),
                "--config".into(),
                quality.clone(),
                "--profile-file".into(),
                summary,
            ],
        ),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        let mut codes = Vec::new();
        for run in ["a", "b"] {
            let out = tmp.path().join(format!("{name}-{run}"));
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            let out_str = out.to_string_lossy().into_owned();
            full.extend(["--out", &out_str]);
            codes.push(run_cli(&full));
            outputs.push(result_files(&out));
        }
        let same = outputs[0] == outputs[1] && !outputs[0].is_empty();
        let ok = same && codes.iter().all(|&c| c == 0);
        pass &= ok;
        notes.push(format!(
            "{name}: {} file(s) identical={same} exit={codes:?}",
            outputs[0].len()
        ));
    }
    outcome(pass, notes.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 Shapley axioms", criterion_1),
        ("2 SV = LOO on additive models", criterion_2),
        ("3 brute-force Nash oracle", criterion_3),
        ("4 convergence speed", criterion_4),
        ("5 monotonicity in mu and capacity", criterion_5),
        ("6 monotonicity in epsilon", criterion_6),
        ("7 quality-sweep scenario", criterion_7),
        ("8 privacy-sweep scenario", criterion_8),
        ("9 fit quality", criterion_9),
        ("10 simulator trends", criterion_10),
        ("11 determinism", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let o = f();
        println!(
            "[{}] criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failures += 1;
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
