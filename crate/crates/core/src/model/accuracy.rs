use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StrategyProfile;
use crate::scalar::Scalar;

/// Closed-form stand-in for trained-model accuracy.
///
/// Clean accuracy is `a1·ln(a2·S + a3) + a4·S + a5` in the total contribution
/// `S`; label noise subtracts `gamma` times the contribution-weighted mean
/// noise rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Surrogate<S> {
    pub alpha: [S; 5],
    pub gamma: S,
    pub baseline: S,
}

impl<S: Scalar> Surrogate<S> {
    /// Unclamped clean accuracy at total contribution `total`.
    pub fn clean(&self, total: S) -> Result<S> {
        let [a1, a2, a3, a4, a5] = self.alpha;
        let arg = a2 * total + a3;
        if !(arg > S::zero()) {
            return Err(Error::ModelDomain {
                param: "alpha2*total+alpha3".into(),
                value: arg.to_f64_lossy(),
                reason: "log argument must be positive",
            });
        }
        Ok(a1 * arg.ln() + a4 * total + a5)
    }

    /// Contribution-weighted mean noise rate `Σ ε_n s_n / Σ s_n`; zero when nothing is contributed.
    pub fn weighted_noise(s: &StrategyProfile, eps: &[S]) -> S {
        let total = s.total();
        if total == 0 {
            return S::zero();
        }
        let num: S = s
            .iter()
            .zip(eps)
            .map(|(&sn, &e)| e * S::count(sn))
            .fold(S::zero(), |acc, x| acc + x);
        num / S::count(total)
    }

    fn raw(&self, s: &StrategyProfile, eps: &[S]) -> Result<S> {
        let clean = self.clean(S::count(s.total()))?;
        Ok(clean - self.gamma * Self::weighted_noise(s, eps))
    }
}

/// Accuracy as a function of the contribution profile and the noise rates.
///
/// `Surrogate` is the fitted closed form. The other variants are stubs with
/// exactly known structure, used to pin down mechanism and solver behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub enum AccuracyModel<S> {
    Surrogate(Surrogate<S>),
    /// `baseline + Σ weights[n]·s_n`.
    Additive {
        weights: Vec<S>,
        baseline: S,
    },
    /// `baseline + scale·(Σ s_n)^exponent`.
    Power {
        scale: S,
        exponent: S,
        baseline: S,
    },
    /// Table indexed by the bitmask of clients with `s_n > 0`; entry 0 is the empty coalition.
    Coalition {
        values: Vec<S>,
    },
}

impl<S: Scalar> AccuracyModel<S> {
    pub fn baseline(&self) -> S {
        match self {
            AccuracyModel::Surrogate(m) => m.baseline,
            AccuracyModel::Additive { baseline, .. } | AccuracyModel::Power { baseline, .. } => *baseline,
            AccuracyModel::Coalition { values } => values.first().copied().unwrap_or_default(),
        }
    }

    /// Checks parameters against a game with `clients` players.
    pub fn validate(&self, clients: usize) -> Result<()> {
        let finite = |name: &str, v: S| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::ModelDomain {
                    param: name.to_string(),
                    value: v.to_f64_lossy(),
                    reason: "must be finite",
                })
            }
        };
        let unit = |name: &str, v: S| -> Result<()> {
            finite(name, v)?;
            if v < S::zero() || v > S::one() {
                return Err(Error::invalid(name, "must lie in [0, 1]"));
            }
            Ok(())
        };
        match self {
            AccuracyModel::Surrogate(m) => {
                for (i, a) in m.alpha.iter().enumerate() {
                    finite(&format!("alpha{}", i + 1), *a)?;
                }
                finite("gamma", m.gamma)?;
                if m.gamma < S::zero() {
                    return Err(Error::invalid("gamma", "must be non-negative"));
                }
                unit("baseline", m.baseline)?;
                if !(m.alpha[2] > S::zero()) {
                    return Err(Error::ModelDomain {
                        param: "alpha3".into(),
                        value: m.alpha[2].to_f64_lossy(),
                        reason: "log argument at zero contribution must be positive",
                    });
                }
                if m.alpha[1] < S::zero() {
                    return Err(Error::ModelDomain {
                        param: "alpha2".into(),
                        value: m.alpha[1].to_f64_lossy(),
                        reason: "must be non-negative",
                    });
                }
            }
            AccuracyModel::Additive { weights, baseline } => {
                if weights.len() != clients {
                    return Err(Error::LengthMismatch {
                        what: "additive weights",
                        expected: clients,
                        got: weights.len(),
                    });
                }
                for (i, w) in weights.iter().enumerate() {
                    finite(&format!("weights[{i}]"), *w)?;
                }
                unit("baseline", *baseline)?;
            }
            AccuracyModel::Power {
                scale,
                exponent,
                baseline,
            } => {
                finite("scale", *scale)?;
                finite("exponent", *exponent)?;
                if !(*exponent > S::zero()) {
                    return Err(Error::invalid("exponent", "must be positive"));
                }
                unit("baseline", *baseline)?;
            }
            AccuracyModel::Coalition { values } => {
                let expected = 1usize.checked_shl(clients as u32).unwrap_or(0);
                if values.len() != expected {
                    return Err(Error::LengthMismatch {
                        what: "coalition table",
                        expected,
                        got: values.len(),
                    });
                }
                for (i, v) in values.iter().enumerate() {
                    unit(&format!("values[{i}]"), *v)?;
                }
            }
        }
        Ok(())
    }

    fn raw(&self, s: &StrategyProfile, eps: &[S]) -> Result<S> {
        match self {
            AccuracyModel::Surrogate(m) => m.raw(s, eps),
            AccuracyModel::Additive { weights, baseline } => Ok(s
                .iter()
                .zip(weights)
                .fold(*baseline, |acc, (&sn, &w)| acc + w * S::count(sn))),
            AccuracyModel::Power {
                scale,
                exponent,
                baseline,
            } => Ok(*baseline + *scale * S::count(s.total()).powf(*exponent)),
            AccuracyModel::Coalition { values } => {
                let mask = s
                    .iter()
                    .enumerate()
                    .filter(|(_, &sn)| sn > 0)
                    .fold(0usize, |m, (i, _)| m | (1 << i));
                values.get(mask).copied().ok_or(Error::LengthMismatch {
                    what: "coalition table",
                    expected: mask + 1,
                    got: values.len(),
                })
            }
        }
    }
}

/// Global model accuracy at profile `s` with noise rates `eps`, clamped to `[0, 1]`.
///
/// A profile with zero total contribution evaluates to the model's baseline.
pub fn eval_accuracy<S: Scalar>(model: &AccuracyModel<S>, s: &StrategyProfile, eps: &[S]) -> Result<S> {
    if eps.len() != s.len() {
        return Err(Error::LengthMismatch {
            what: "noise rates",
            expected: s.len(),
            got: eps.len(),
        });
    }
    if s.total() == 0 {
        return Ok(model.baseline());
    }
    let raw = model.raw(s, eps)?;
    if !raw.is_finite() {
        return Err(Error::ModelDomain {
            param: "accuracy".into(),
            value: raw.to_f64_lossy(),
            reason: "evaluated to a non-finite value",
        });
    }
    if raw < S::zero() || raw > S::one() {
        log::debug!("accuracy {raw} clamped to [0, 1] at profile {s}");
        return Ok(raw.max(S::zero()).min(S::one()));
    }
    Ok(raw)
}

/// Memo of accuracy evaluations keyed on the full contribution vector.
///
/// Noise rates are fixed for the lifetime of a cache.
#[derive(Debug, Default)]
pub struct AccuracyCache<S> {
    values: HashMap<Vec<u64>, S>,
}

impl<S: Scalar> AccuracyCache<S> {
    pub fn new() -> Self {
        Self { values: HashMap::new() }
    }

    pub fn get(&mut self, model: &AccuracyModel<S>, s: &StrategyProfile, eps: &[S]) -> Result<S> {
        if let Some(v) = self.values.get(s.as_slice()) {
            return Ok(*v);
        }
        let v = eval_accuracy(model, s, eps)?;
        self.values.insert(s.as_slice().to_vec(), v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
