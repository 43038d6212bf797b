//! TOML configuration schema.
//!
//! ```toml
//! seed = 7                      # required
//! mechanism = "LP"              # EG | LP | LOO | SV
//! coalition_cap = 12            # optional
//!
//! [[clients]]
//! epsilon = 0.1
//! capacity = 10000
//! privacy_sensitivity = 0.4     # alias: mu
//!
//! [accuracy]
//! variant = "surrogate"         # surrogate | additive | power | coalition
//! alpha = [0.13, 0.01, 1.0, 0.0, 0.1]
//! gamma = 0.5
//! baseline = 0.1
//!
//! [profit]
//! form = "quadratic"            # quadratic (beta1, beta2) | affine (slope, intercept)
//! beta1 = 20000.0
//! beta2 = 0.0                   # optional, default 0
//!
//! [privacy]
//! form = "linear"               # linear | power (exponent >= 1)
//!
//! [solver]
//! initial = "zero"              # "zero" | "capacity" | [s_1, ..., s_N]
//! tau = 0
//! max_iters = 100
//! grid_step = "auto"            # "auto" | k | [k_1, ..., k_N]
//! scheme = "jacobi"             # jacobi | gauss_seidel
//! include_zero = true
//! nash_tolerance = 1e-9
//!
//! [flsim]                       # only needed by `flsim` and `sweep --retrain`
//! num_classes = 10
//! ...
//! ```
//!
//! Unknown keys are rejected; every error carries the key path and, when it
//! can be located, the line.

use std::path::Path;

use serde::Deserialize;
use toml::de::{DeTable, DeValue};

use crate::error::{Error, Result};
use crate::flsim::{GridSetting, SimConfig, SyntheticTask};
use crate::mechanisms::Mechanism;
use crate::model::{
    AccuracyModel, ClientProfile, GameSpec, PrivacyCostModel, ProfitModel, StrategyProfile, Surrogate,
    DEFAULT_COALITION_CAP,
};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::solver::{GridStep, SolverSettings, UpdateScheme};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: u64,
    pub mechanism: Option<String>,
    pub coalition_cap: Option<usize>,
    pub clients: Option<Vec<RawClient>>,
    pub accuracy: Option<RawAccuracy>,
    pub profit: Option<RawProfit>,
    pub privacy: Option<RawPrivacy>,
    pub solver: Option<RawSolver>,
    pub flsim: Option<RawFlsim>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawClient {
    pub epsilon: f64,
    pub capacity: u64,
    #[serde(alias = "mu")]
    pub privacy_sensitivity: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAccuracy {
    pub variant: String,
    pub alpha: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub baseline: Option<f64>,
    pub weights: Option<Vec<f64>>,
    pub scale: Option<f64>,
    pub exponent: Option<f64>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProfit {
    pub form: Option<String>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPrivacy {
    pub form: Option<String>,
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawProfile {
    Named(String),
    Explicit(Vec<u64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawGridStep {
    Named(String),
    Uniform(u64),
    PerClient(Vec<u64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolver {
    pub initial: Option<RawProfile>,
    pub tau: Option<f64>,
    pub max_iters: Option<usize>,
    pub grid_step: Option<RawGridStep>,
    pub scheme: Option<String>,
    pub include_zero: Option<bool>,
    pub nash_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFlsim {
    pub num_classes: usize,
    pub input_dim: usize,
    pub center_scale: f64,
    pub spread: f64,
    pub test_size: usize,
    pub rounds: Option<usize>,
    pub local_epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub local_lr: Option<f64>,
    pub global_lr: Option<f64>,
    pub repeats: Option<usize>,
    /// Local dataset size per client.
    pub capacities: Vec<usize>,
    /// Game contributions are multiplied by this before training (`sweep --retrain`).
    pub contribution_scale: Option<f64>,
    pub grid: Option<Vec<RawGridPoint>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGridPoint {
    pub s: Vec<u64>,
    pub eps: Vec<f64>,
}

/// Simulator settings resolved from `[flsim]`.
#[derive(Debug, Clone)]
pub struct FlsimSettings<S> {
    pub task: SyntheticTask<S>,
    pub sim: SimConfig<S>,
    pub repeats: usize,
    pub capacities: Vec<usize>,
    pub contribution_scale: S,
    pub grid: Vec<GridSetting<S>>,
}

/// A parsed config file together with its source text for error locations.
#[derive(Debug, Clone)]
pub struct Config {
    pub raw: RawConfig,
    text: String,
}

impl Config {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
            path: "<document>".into(),
            line: e.span().map(|s| line_at(text, s.start)),
            message: e.message().to_string(),
        })?;
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config {
                line: inner
                    .span()
                    .map(|s| line_at(text, s.start))
                    .or_else(|| locate(text, &path)),
                path,
                message: inner.message().to_string(),
            }
        })?;
        Ok(Self {
            raw,
            text: text.to_string(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.raw.seed
    }

    fn err(&self, path: impl Into<String>, message: impl Into<String>) -> Error {
        let path = path.into();
        Error::Config {
            line: locate(&self.text, &path),
            path,
            message: message.into(),
        }
    }

    /// Re-labels a validation error from the domain layer with its config location.
    fn relabel(&self, e: Error) -> Error {
        match e {
            Error::Invalid { path, message } => {
                let path = if path.starts_with("clients")
                    || path.starts_with("solver")
                    || path.starts_with("accuracy")
                    || path.starts_with("profit")
                    || path.starts_with("privacy")
                {
                    path
                } else {
                    format!("accuracy.{path}")
                };
                self.err(path, message)
            }
            Error::ModelDomain { param, value, reason } => {
                self.err(format!("accuracy.{param}"), format!("{value}: {reason}"))
            }
            Error::LengthMismatch { what, expected, got } => {
                self.err(what, format!("expected {expected} entries, got {got}"))
            }
            Error::CoalitionCap { clients, cap } => self.err(
                "coalition_cap",
                format!("SV enumerates 2^N coalitions; {clients} clients exceed the cap of {cap}"),
            ),
            other => other,
        }
    }

    pub fn game_spec<S: Scalar>(&self) -> Result<GameSpec<S>> {
        let raw = &self.raw;
        let clients_raw = raw
            .clients
            .as_ref()
            .ok_or_else(|| self.err("clients", "missing section"))?;
        if clients_raw.is_empty() {
            return Err(self.err("clients", "at least one client is required"));
        }
        let clients = clients_raw
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let client = ClientProfile {
                    id: i + 1,
                    epsilon: S::lit(c.epsilon),
                    capacity: c.capacity,
                    privacy_sensitivity: S::lit(c.privacy_sensitivity),
                };
                client
                    .validate(&format!("clients[{i}]"))
                    .map(|_| client)
                    .map_err(|e| self.relabel(e))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = clients.len();

        let mechanism: Mechanism = raw
            .mechanism
            .as_deref()
            .ok_or_else(|| self.err("mechanism", "missing key"))?
            .parse()
            .map_err(|m: String| self.err("mechanism", m))?;

        let accuracy = self.accuracy::<S>()?;
        let profit = self.profit::<S>()?;
        let privacy = self.privacy::<S>()?;
        let capacities: Vec<u64> = clients.iter().map(|c| c.capacity).collect();
        let solver = self.solver::<S>(&capacities)?;

        let spec = GameSpec {
            clients,
            mechanism,
            accuracy,
            profit,
            privacy,
            solver,
            coalition_cap: raw.coalition_cap.unwrap_or(DEFAULT_COALITION_CAP),
        };
        debug_assert_eq!(spec.num_clients(), n);
        spec.validate().map_err(|e| self.relabel(e))?;
        Ok(spec)
    }

    fn accuracy<S: Scalar>(&self) -> Result<AccuracyModel<S>> {
        let a = self
            .raw
            .accuracy
            .as_ref()
            .ok_or_else(|| self.err("accuracy", "missing section"))?;
        let allowed: &[&str] = match a.variant.as_str() {
            "surrogate" => &["alpha", "gamma", "baseline"],
            "additive" => &["weights", "baseline"],
            "power" => &["scale", "exponent", "baseline"],
            "coalition" => &["values"],
            other => {
                return Err(self.err(
                    "accuracy.variant",
                    format!("unknown variant `{other}` (expected surrogate, additive, power or coalition)"),
                ))
            }
        };
        let present = [
            ("alpha", a.alpha.is_some()),
            ("gamma", a.gamma.is_some()),
            ("baseline", a.baseline.is_some()),
            ("weights", a.weights.is_some()),
            ("scale", a.scale.is_some()),
            ("exponent", a.exponent.is_some()),
            ("values", a.values.is_some()),
        ];
        if let Some((key, _)) = present.iter().find(|(k, p)| *p && !allowed.contains(k)) {
            return Err(self.err(
                format!("accuracy.{key}"),
                format!("not a parameter of the `{}` variant", a.variant),
            ));
        }
        let need = |key: &str, v: Option<f64>| v.ok_or_else(|| self.err(format!("accuracy.{key}"), "missing key"));
        let baseline = || need("baseline", a.baseline).map(S::lit);
        Ok(match a.variant.as_str() {
            "surrogate" => {
                let alpha = a
                    .alpha
                    .as_ref()
                    .ok_or_else(|| self.err("accuracy.alpha", "missing key"))?;
                if alpha.len() != 5 {
                    return Err(self.err("accuracy.alpha", format!("expected 5 values, got {}", alpha.len())));
                }
                AccuracyModel::Surrogate(Surrogate {
                    alpha: [
                        S::lit(alpha[0]),
                        S::lit(alpha[1]),
                        S::lit(alpha[2]),
                        S::lit(alpha[3]),
                        S::lit(alpha[4]),
                    ],
                    gamma: S::lit(need("gamma", a.gamma)?),
                    baseline: baseline()?,
                })
            }
            "additive" => AccuracyModel::Additive {
                weights: a
                    .weights
                    .as_ref()
                    .ok_or_else(|| self.err("accuracy.weights", "missing key"))?
                    .iter()
                    .map(|&w| S::lit(w))
                    .collect(),
                baseline: baseline()?,
            },
            "power" => AccuracyModel::Power {
                scale: S::lit(need("scale", a.scale)?),
                exponent: S::lit(need("exponent", a.exponent)?),
                baseline: baseline()?,
            },
            _ => AccuracyModel::Coalition {
                values: a
                    .values
                    .as_ref()
                    .ok_or_else(|| self.err("accuracy.values", "missing key"))?
                    .iter()
                    .map(|&v| S::lit(v))
                    .collect(),
            },
        })
    }

    fn profit<S: Scalar>(&self) -> Result<ProfitModel<S>> {
        let p = self
            .raw
            .profit
            .as_ref()
            .ok_or_else(|| self.err("profit", "missing section"))?;
        let need = |key: &str, v: Option<f64>| v.ok_or_else(|| self.err(format!("profit.{key}"), "missing key"));
        let model = match p.form.as_deref().unwrap_or("quadratic") {
            "quadratic" => {
                if p.slope.is_some() || p.intercept.is_some() {
                    return Err(self.err("profit", "slope/intercept belong to the affine form"));
                }
                ProfitModel::Quadratic {
                    beta1: S::lit(need("beta1", p.beta1)?),
                    beta2: S::lit(p.beta2.unwrap_or(0.0)),
                }
            }
            "affine" => {
                if p.beta1.is_some() || p.beta2.is_some() {
                    return Err(self.err("profit", "beta1/beta2 belong to the quadratic form"));
                }
                ProfitModel::Affine {
                    slope: S::lit(need("slope", p.slope)?),
                    intercept: S::lit(p.intercept.unwrap_or(0.0)),
                }
            }
            other => {
                return Err(self.err(
                    "profit.form",
                    format!("unknown form `{other}` (expected quadratic or affine)"),
                ))
            }
        };
        model.validate().map_err(|e| match e {
            Error::Invalid { path, message } => self.err(format!("profit.{path}"), message),
            other => other,
        })?;
        Ok(model)
    }

    fn privacy<S: Scalar>(&self) -> Result<PrivacyCostModel<S>> {
        let Some(p) = self.raw.privacy.as_ref() else {
            return Ok(PrivacyCostModel::Linear);
        };
        match p.form.as_deref().unwrap_or("linear") {
            "linear" => {
                if p.exponent.is_some() {
                    return Err(self.err("privacy.exponent", "only valid with form = \"power\""));
                }
                Ok(PrivacyCostModel::Linear)
            }
            "power" => {
                let exponent = p.exponent.ok_or_else(|| self.err("privacy.exponent", "missing key"))?;
                let m = PrivacyCostModel::Power {
                    exponent: S::lit(exponent),
                };
                m.validate().map_err(|e| self.relabel(e))?;
                Ok(m)
            }
            other => Err(self.err(
                "privacy.form",
                format!("unknown form `{other}` (expected linear or power)"),
            )),
        }
    }

    fn solver<S: Scalar>(&self, capacities: &[u64]) -> Result<SolverSettings<S>> {
        let n = capacities.len();
        let mut st = SolverSettings::defaults(n);
        let default = RawSolver::default();
        let r = self.raw.solver.as_ref().unwrap_or(&default);
        if let Some(init) = &r.initial {
            st.initial = match init {
                RawProfile::Named(name) if name == "zero" => StrategyProfile::zeros(n),
                RawProfile::Named(name) if name == "capacity" => StrategyProfile::new(capacities.to_vec()),
                RawProfile::Named(other) => {
                    return Err(self.err(
                        "solver.initial",
                        format!("unknown profile `{other}` (expected \"zero\", \"capacity\" or a list)"),
                    ))
                }
                RawProfile::Explicit(v) => StrategyProfile::new(v.clone()),
            };
        }
        if let Some(t) = r.tau {
            st.tau = S::lit(t);
        }
        if let Some(m) = r.max_iters {
            st.max_iters = m;
        }
        if let Some(g) = &r.grid_step {
            st.grid_step = match g {
                RawGridStep::Named(name) if name == "auto" => GridStep::Auto,
                RawGridStep::Named(other) => {
                    return Err(self.err("solver.grid_step", format!("unknown value `{other}`")))
                }
                RawGridStep::Uniform(k) => GridStep::Uniform(*k),
                RawGridStep::PerClient(v) => GridStep::PerClient(v.clone()),
            };
        }
        if let Some(s) = &r.scheme {
            st.scheme = s.parse::<UpdateScheme>().map_err(|m| self.err("solver.scheme", m))?;
        }
        if let Some(z) = r.include_zero {
            st.include_zero = z;
        }
        if let Some(t) = r.nash_tolerance {
            st.nash_tolerance = S::lit(t);
        }
        st.validate(capacities).map_err(|e| self.relabel(e))?;
        Ok(st)
    }

    pub fn flsim<S: Scalar>(&self) -> Result<FlsimSettings<S>> {
        let f = self
            .raw
            .flsim
            .as_ref()
            .ok_or_else(|| self.err("flsim", "missing section"))?;
        let task = SyntheticTask::generate(
            f.num_classes,
            f.input_dim,
            S::lit(f.center_scale),
            S::lit(f.spread),
            f.test_size,
            derive_seed(self.raw.seed, &[0x7a5c]),
        )
        .map_err(|e| match e {
            Error::Invalid { message, .. } => self.err("flsim", message),
            other => other,
        })?;
        let mut sim = SimConfig::new(self.raw.seed);
        if let Some(v) = f.rounds {
            sim.rounds = v;
        }
        if let Some(v) = f.local_epochs {
            sim.local_epochs = v;
        }
        if let Some(v) = f.batch_size {
            sim.batch_size = v;
        }
        if let Some(v) = f.local_lr {
            sim.local_lr = S::lit(v);
        }
        if let Some(v) = f.global_lr {
            sim.global_lr = S::lit(v);
        }
        sim.validate().map_err(|e| match e {
            Error::Invalid { message, .. } => self.err("flsim", message),
            other => other,
        })?;
        let clients = f.capacities.len();
        let mut grid = Vec::new();
        for (g, p) in f.grid.iter().flatten().enumerate() {
            if p.s.len() != clients || p.eps.len() != clients {
                return Err(self.err(
                    format!("flsim.grid[{g}]"),
                    format!("expected {clients} entries in s and eps"),
                ));
            }
            if let Some(i) = p.eps.iter().position(|e| !(0.0..=1.0).contains(e)) {
                return Err(self.err(format!("flsim.grid[{g}].eps[{i}]"), "must lie in [0, 1]"));
            }
            if let Some(i) = (0..clients).find(|&i| p.s[i] as usize > f.capacities[i]) {
                return Err(self.err(
                    format!("flsim.grid[{g}].s[{i}]"),
                    format!("exceeds capacity {}", f.capacities[i]),
                ));
            }
            grid.push(GridSetting {
                s: StrategyProfile::new(p.s.clone()),
                eps: p.eps.iter().map(|&e| S::lit(e)).collect(),
            });
        }
        let scale = f.contribution_scale.unwrap_or(1.0);
        if !(scale > 0.0) {
            return Err(self.err("flsim.contribution_scale", "must be positive"));
        }
        Ok(FlsimSettings {
            task,
            sim,
            repeats: f.repeats.unwrap_or(3),
            capacities: f.capacities.clone(),
            contribution_scale: S::lit(scale),
            grid,
        })
    }
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line of the value at a dotted/indexed key path such as `clients[2].epsilon`.
fn locate(text: &str, path: &str) -> Option<usize> {
    let root = DeValue::Table(DeTable::parse(text).ok()?.into_inner());
    let mut node = &root;
    let mut start = None;
    for segment in path.split('.') {
        let (key, rest) = match segment.find('[') {
            Some(i) => (&segment[..i], &segment[i..]),
            None => (segment, ""),
        };
        if !key.is_empty() {
            let child = node.get(key)?;
            start = Some(child.span().start);
            node = child.get_ref();
        }
        for idx in rest.split(['[', ']']).filter(|s| !s.is_empty()) {
            let child = node.get(idx.parse::<usize>().ok()?)?;
            start = Some(child.span().start);
            node = child.get_ref();
        }
    }
    start.map(|s| line_at(text, s))
}
