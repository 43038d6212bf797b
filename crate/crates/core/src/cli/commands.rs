use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Config, FlsimSettings};
use crate::error::{Error, Result};
use crate::fit::{fit, FitOptions, FitResult};
use crate::flsim::{generate_samples, GridSetting};
use crate::mechanisms::Mechanism;
use crate::model::{evaluate_profile, AccuracyCache, GameSpec, StrategyProfile};
use crate::solver::{solve, sweep, verify_nash, EquilibriumReport, GridStep, NashVerdict};

use super::output::{numbered, write_atomic, write_json, RunManifest, Table};
use super::samples::{read_samples, samples_table};
use super::{
    Command, FitArgs, FlsimArgs, GameOverrides, SolveArgs, SweepArgs, VerifyArgs, EXIT_NOT_CONVERGED, EXIT_OK,
};

/// Contents of `summary.json` written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub mechanism: Mechanism,
    pub seed: u64,
    pub report: EquilibriumReport<f64>,
}

/// One line of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub client: usize,
    pub swept: bool,
    pub s_star: u64,
    pub payoff: f64,
    pub share: f64,
    pub accuracy: f64,
    pub converged: bool,
    pub is_nash: bool,
    pub retrained_accuracy: Option<f64>,
}

/// Contents of `verify.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub profile: StrategyProfile,
    pub payoffs: Vec<f64>,
    pub verdict: NashVerdict<f64>,
}

pub(super) fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Flsim(a) => cmd_flsim(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<Config> {
    let mut config = Config::from_path(path)?;
    if let Some(seed) = seed {
        config.raw.seed = seed;
    }
    Ok(config)
}

fn game(config: &Config, overrides: &GameOverrides) -> Result<GameSpec<f64>> {
    let mut spec = config.game_spec::<f64>()?;
    if let Some(m) = overrides.mechanism {
        spec.mechanism = m;
    }
    if let Some(s) = overrides.scheme {
        spec.solver.scheme = s;
    }
    if let Some(k) = overrides.grid_step {
        spec.solver.grid_step = GridStep::Uniform(k);
    }
    if overrides.include_zero {
        spec.solver.include_zero = true;
    }
    if overrides.no_zero {
        spec.solver.include_zero = false;
    }
    spec.validate()?;
    Ok(spec)
}

fn trajectory_table(report: &EquilibriumReport<f64>, n: usize) -> Table {
    let header = std::iter::once("iteration".to_string())
        .chain(numbered("s", n))
        .chain(numbered("payoff", n))
        .chain(["accuracy".to_string()]);
    let mut table = Table::new(header);
    for p in &report.trajectory {
        table.row(
            std::iter::once(p.iteration.to_string())
                .chain(p.profile.iter().map(u64::to_string))
                .chain(p.payoffs.iter().map(f64::to_string))
                .chain([p.accuracy.to_string()]),
        );
    }
    table
}

fn shares_table(spec: &GameSpec<f64>, report: &EquilibriumReport<f64>) -> Table {
    let out = &report.outcome;
    let mut table = Table::new(["client", "s", "epsilon", "mu", "index", "share", "cost", "payoff"]);
    for (n, c) in spec.clients.iter().enumerate() {
        table.row([
            c.id.to_string(),
            report.final_profile.get(n).to_string(),
            c.epsilon.to_string(),
            c.privacy_sensitivity.to_string(),
            out.indices.indices[n].to_string(),
            out.shares.shares[n].to_string(),
            out.costs[n].to_string(),
            out.payoffs[n].to_string(),
        ]);
    }
    table
}

fn status_code(report: &EquilibriumReport<f64>) -> i32 {
    if report.converged && report.nash.is_nash {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let config = load(&args.config, args.seed)?;
    let mut manifest = RunManifest::new("solve", Some(&args.config), &args.out, Some(config.seed()));
    manifest.stage("parse");
    let spec = game(&config, &args.overrides)?;
    manifest.stage("solve");
    let report = solve(&spec)?;
    manifest.stage("write");
    let n = spec.num_clients();
    trajectory_table(&report, n).save(&manifest.file("trajectory.csv"))?;
    shares_table(&spec, &report).save(&manifest.file("shares.csv"))?;
    let summary = SolveSummary {
        mechanism: spec.mechanism,
        seed: config.seed(),
        report,
    };
    write_json(&manifest.file("summary.json"), &summary)?;
    manifest.save()?;

    let r = &summary.report;
    println!(
        "{} equilibrium {} after {} iteration(s): converged={} nash={} accuracy={:.6}",
        spec.mechanism, r.final_profile, r.iterations, r.converged, r.nash.is_nash, r.outcome.accuracy
    );
    if !r.converged {
        eprintln!(
            "best-response dynamics did not converge within {} rounds",
            spec.solver.max_iters
        );
    } else if !r.nash.is_nash {
        eprintln!(
            "converged profile is not a Nash equilibrium at tolerance {}",
            r.nash.tolerance
        );
    }
    Ok(status_code(r))
}

/// Equilibrium profiles mapped into the simulator and retrained.
fn retrain(fl: &FlsimSettings<f64>, specs: &[(GameSpec<f64>, StrategyProfile)]) -> Result<Vec<f64>> {
    let grid = specs
        .iter()
        .map(|(spec, s)| {
            if s.len() != fl.capacities.len() {
                return Err(Error::LengthMismatch {
                    what: "flsim.capacities",
                    expected: s.len(),
                    got: fl.capacities.len(),
                });
            }
            let scaled = s
                .iter()
                .zip(&fl.capacities)
                .map(|(&v, &cap)| ((v as f64 * fl.contribution_scale).round() as u64).min(cap as u64))
                .collect();
            Ok(GridSetting {
                s: StrategyProfile::new(scaled),
                eps: spec.noise_rates(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes = generate_samples(&fl.task, &fl.capacities, &grid, &fl.sim, fl.repeats)?;
    Ok(outcomes.iter().map(|o| o.sample.observed_accuracy).collect())
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let config = load(&args.config, args.seed)?;
    let mut manifest = RunManifest::new("sweep", Some(&args.config), &args.out, Some(config.seed()));
    manifest.stage("parse");
    let template = game(&config, &args.overrides)?;
    let n = template.num_clients();
    let clients = args
        .clients
        .iter()
        .map(|&id| {
            if id == 0 || id > n {
                Err(Error::invalid(
                    "--clients",
                    format!("client id {id} is outside 1..={n}"),
                ))
            } else {
                Ok(id - 1)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let flsim = if args.retrain {
        Some(config.flsim::<f64>()?)
    } else {
        None
    };

    manifest.stage("solve");
    let points = sweep(&template, args.param, &clients, &args.values);
    let mut solved = Vec::with_capacity(points.len());
    for p in points {
        let report = p
            .report
            .map_err(|e| Error::invalid(format!("sweep value {}", p.value), e.to_string()))?;
        let spec = crate::solver::apply_param(&template, args.param, &clients, p.value)?;
        solved.push((p.value, spec, report));
    }

    let retrained = match &flsim {
        Some(fl) => {
            manifest.stage("retrain");
            let jobs: Vec<_> = solved
                .iter()
                .map(|(_, spec, r)| (spec.clone(), r.final_profile.clone()))
                .collect();
            Some(retrain(fl, &jobs)?)
        }
        None => None,
    };

    manifest.stage("write");
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (k, (value, _, report)) in solved.iter().enumerate() {
        for m in 0..n {
            rows.push(SweepRow {
                value: *value,
                client: m + 1,
                swept: clients.contains(&m),
                s_star: report.final_profile.get(m),
                payoff: report.outcome.payoffs[m],
                share: report.outcome.shares.shares[m],
                accuracy: report.outcome.accuracy,
                converged: report.converged,
                is_nash: report.nash.is_nash,
                retrained_accuracy: retrained.as_ref().map(|r| r[k]),
            });
        }
        summary.push(serde_json::json!({
            "value": value,
            "final": report.final_profile,
            "iterations": report.iterations,
            "converged": report.converged,
            "nash": report.nash,
        }));
    }
    sweep_table(&rows, retrained.is_some()).save(&manifest.file("sweep.csv"))?;
    write_json(
        &manifest.file("sweep_summary.json"),
        &serde_json::json!({
            "param": args.param.to_string(),
            "clients": args.clients,
            "mechanism": template.mechanism,
            "points": summary,
        }),
    )?;
    manifest.save()?;

    let failed = solved.iter().filter(|(_, _, r)| status_code(r) != EXIT_OK).count();
    println!(
        "swept {} over {} value(s); {} without a verified equilibrium",
        args.param,
        solved.len(),
        failed
    );
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn sweep_table(rows: &[SweepRow], retrained: bool) -> Table {
    let mut header = vec![
        "value",
        "client",
        "swept",
        "s_star",
        "payoff",
        "share",
        "accuracy",
        "converged",
        "is_nash",
    ];
    if retrained {
        header.push("retrained_accuracy");
    }
    let mut table = Table::new(header);
    for r in rows {
        let mut fields = vec![
            r.value.to_string(),
            r.client.to_string(),
            r.swept.to_string(),
            r.s_star.to_string(),
            r.payoff.to_string(),
            r.share.to_string(),
            r.accuracy.to_string(),
            r.converged.to_string(),
            r.is_nash.to_string(),
        ];
        if let Some(a) = r.retrained_accuracy {
            fields.push(a.to_string());
        }
        table.row(fields);
    }
    table
}

#[derive(Serialize)]
struct FragmentAccuracy {
    variant: &'static str,
    alpha: [f64; 5],
    gamma: f64,
    baseline: f64,
}

#[derive(Serialize)]
struct Fragment {
    accuracy: FragmentAccuracy,
}

/// Config fragment holding the fitted `[accuracy]` section.
pub fn accuracy_fragment(result: &FitResult<f64>, baseline: f64) -> String {
    let body = toml::to_string(&Fragment {
        accuracy: FragmentAccuracy {
            variant: "surrogate",
            alpha: result.alpha,
            gamma: result.gamma,
            baseline,
        },
    })
    .expect("plain floats serialize");
    format!(
        "# fitted surrogate: rmse = {}, converged = {}, {} clean / {} noisy samples\n{body}",
        result.rmse, result.converged, result.clean_samples, result.noisy_samples
    )
}

fn cmd_fit(args: FitArgs) -> Result<i32> {
    let seed = match (&args.config, args.seed) {
        (_, Some(s)) => Some(s),
        (Some(p), None) => Some(Config::from_path(p)?.seed()),
        (None, None) => None,
    };
    if !(0.0..=1.0).contains(&args.baseline) {
        return Err(Error::invalid("--baseline", "must lie in [0, 1]"));
    }
    let mut manifest = RunManifest::new("fit", args.config.as_deref(), &args.out, seed);
    manifest.stage("read");
    let samples = read_samples::<f64>(&args.samples)?;
    manifest.stage("fit");
    let result = fit(&samples, &FitOptions::default())?;
    manifest.stage("write");
    write_atomic(
        &manifest.file("accuracy.toml"),
        accuracy_fragment(&result, args.baseline).as_bytes(),
    )?;
    write_json(&manifest.file("fit.json"), &result)?;
    manifest.save()?;
    println!(
        "alpha = {:?}, gamma = {}, rmse = {:e} ({} levels, converged={})",
        result.alpha, result.gamma, result.rmse, result.iterations, result.converged
    );
    Ok(EXIT_OK)
}

fn cmd_flsim(args: FlsimArgs) -> Result<i32> {
    let config = load(&args.config, args.seed)?;
    let mut manifest = RunManifest::new("flsim", Some(&args.config), &args.out, Some(config.seed()));
    manifest.stage("setup");
    let fl = config.flsim::<f64>()?;
    if fl.grid.is_empty() {
        return Err(Error::Config {
            path: "flsim.grid".into(),
            line: None,
            message: "at least one grid point is required".into(),
        });
    }
    manifest.stage("train");
    let outcomes = generate_samples(&fl.task, &fl.capacities, &fl.grid, &fl.sim, fl.repeats)?;
    manifest.stage("write");
    let samples: Vec<_> = outcomes.iter().map(|o| o.sample.clone()).collect();
    samples_table(&samples).save(&manifest.file("samples.csv"))?;

    let n = fl.capacities.len();
    let header = ["point".to_string(), "round".to_string(), "accuracy".to_string()]
        .into_iter()
        .chain(numbered("s", n))
        .chain(numbered("eps", n));
    let mut traj = Table::new(header);
    for (g, o) in outcomes.iter().enumerate() {
        for (r, a) in o.trajectory.iter().enumerate() {
            traj.row(
                [g.to_string(), (r + 1).to_string(), a.to_string()]
                    .into_iter()
                    .chain(o.sample.s.iter().map(u64::to_string))
                    .chain(o.sample.eps.iter().map(f64::to_string)),
            );
        }
    }
    traj.save(&manifest.file("trajectories.csv"))?;
    manifest.save()?;
    println!("wrote {} sample(s) from {} run(s) each", samples.len(), fl.repeats);
    Ok(EXIT_OK)
}

fn read_profile(path: &Path) -> Result<StrategyProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let format_err = |message: String| Error::Format {
        path: path.display().to_string(),
        message,
    };
    if text.trim_start().starts_with('{') {
        let summary: SolveSummary = serde_json::from_str(&text).map_err(|e| format_err(e.to_string()))?;
        return Ok(summary.report.final_profile);
    }
    text.split([',', '\n', ' ', '\t'])
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format_err(format!("`{t}` is not a non-negative integer")))
        })
        .collect::<Result<Vec<_>>>()
        .map(StrategyProfile::new)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let config = load(&args.config, args.seed)?;
    let mut manifest = RunManifest::new("verify", Some(&args.config), &args.out, Some(config.seed()));
    manifest.stage("parse");
    let spec = game(&config, &args.overrides)?;
    let profile = match (&args.profile, &args.profile_file) {
        (Some(p), _) => StrategyProfile::new(p.clone()),
        (None, Some(path)) => read_profile(path)?,
        (None, None) => return Err(Error::invalid("--profile", "pass --profile or --profile-file")),
    };
    let tolerance = args.tolerance.unwrap_or(spec.solver.nash_tolerance);
    if !(tolerance >= 0.0) {
        return Err(Error::invalid("--tolerance", "must be non-negative"));
    }
    manifest.stage("verify");
    let verdict = verify_nash(&spec, &profile, tolerance)?;
    let outcome = evaluate_profile(&spec, &profile, &mut AccuracyCache::new())?;
    manifest.stage("write");
    let report = VerifyReport {
        profile,
        payoffs: outcome.payoffs,
        verdict,
    };
    write_json(&manifest.file("verify.json"), &report)?;
    manifest.save()?;

    println!("profile {}: nash = {}", report.profile, report.verdict.is_nash);
    if let Some(d) = &report.verdict.best_deviation {
        println!(
            "worst deviation: client {} from {} to {} gains {:e}",
            d.client, d.from, d.to, d.gain
        );
    }
    Ok(if report.verdict.is_nash {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}
