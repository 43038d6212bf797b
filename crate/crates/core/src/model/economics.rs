use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ClientProfile;
use crate::scalar::Scalar;

/// Total profit as a function of global accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub enum ProfitModel<S> {
    /// `beta1·A² + beta2`, convex and non-decreasing on `[0, 1]` for `beta1 ≥ 0`.
    Quadratic { beta1: S, beta2: S },
    /// `slope·A + intercept`; used by stub games.
    Affine { slope: S, intercept: S },
}

impl<S: Scalar> ProfitModel<S> {
    pub fn quadratic(beta1: S, beta2: S) -> Self {
        ProfitModel::Quadratic { beta1, beta2 }
    }

    pub fn validate(&self) -> Result<()> {
        let (lead, offset, name) = match self {
            ProfitModel::Quadratic { beta1, beta2 } => (*beta1, *beta2, "beta1"),
            ProfitModel::Affine { slope, intercept } => (*slope, *intercept, "slope"),
        };
        if !lead.is_finite() || !offset.is_finite() {
            return Err(Error::invalid("profit", "parameters must be finite"));
        }
        if lead < S::zero() {
            return Err(Error::invalid(
                name,
                "must be non-negative so profit is non-decreasing in accuracy",
            ));
        }
        Ok(())
    }
}

pub fn eval_profit<S: Scalar>(profit: &ProfitModel<S>, accuracy: S) -> S {
    match profit {
        ProfitModel::Quadratic { beta1, beta2 } => *beta1 * accuracy * accuracy + *beta2,
        ProfitModel::Affine { slope, intercept } => *slope * accuracy + *intercept,
    }
}

/// Shape `f` of the privacy cost `μ_n·f(s_n)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub enum PrivacyCostModel<S> {
    #[default]
    Linear,
    /// `f(s) = s^exponent` with `exponent ≥ 1`.
    Power { exponent: S },
}

impl<S: Scalar> PrivacyCostModel<S> {
    pub fn validate(&self) -> Result<()> {
        if let PrivacyCostModel::Power { exponent } = self {
            if !exponent.is_finite() || *exponent < S::one() {
                return Err(Error::invalid(
                    "privacy.exponent",
                    "must be finite and at least 1 (convex cost)",
                ));
            }
        }
        Ok(())
    }

    fn shape(&self, s: u64) -> S {
        match self {
            PrivacyCostModel::Linear => S::count(s),
            PrivacyCostModel::Power { exponent } => S::count(s).powf(*exponent),
        }
    }
}

pub fn eval_privacy_cost<S: Scalar>(privacy: &PrivacyCostModel<S>, client: &ClientProfile<S>, s_n: u64) -> Result<S> {
    if s_n > client.capacity {
        return Err(Error::CapacityExceeded {
            client: client.id,
            value: s_n,
            capacity: client.capacity,
        });
    }
    Ok(client.privacy_sensitivity * privacy.shape(s_n))
}
