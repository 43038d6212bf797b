//! Least-squares fit of the surrogate accuracy surface.
//!
//! The clean part `a1·ln(a2·S + a3) + a4·S + a5` is linear in `(a1, a4, a5)`
//! once `(a2, a3)` is fixed. Since `a1·ln(a2·S + a3) = a1·ln a3 + a1·ln(1 + (a2/a3)·S)`
//! and `a5` absorbs the constant, only the ratio `a2/a3` is identifiable: the
//! fit searches it on a refining log-spaced grid, solves the linear part exactly
//! at every point, and reports `a3` at 1 whenever the bounds allow. The noise
//! coefficient `gamma` then has a closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::weighted_lstsq;
use crate::model::{AccuracyModel, StrategyProfile, Surrogate};
use crate::scalar::Scalar;

/// Number of surrogate parameters; also the minimum count of distinct totals.
pub const FIT_PARAMETERS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct AccuracySample<S> {
    pub s: StrategyProfile,
    pub eps: Vec<S>,
    pub observed_accuracy: S,
    pub weight: S,
}

impl<S: Scalar> AccuracySample<S> {
    pub fn new(s: StrategyProfile, eps: Vec<S>, observed_accuracy: S) -> Self {
        Self {
            s,
            eps,
            observed_accuracy,
            weight: S::one(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.eps.iter().all(|&e| e == S::zero())
    }

    fn validate(&self, i: usize) -> Result<()> {
        if self.eps.len() != self.s.len() {
            return Err(Error::LengthMismatch {
                what: "sample noise rates",
                expected: self.s.len(),
                got: self.eps.len(),
            });
        }
        if !(self.observed_accuracy >= S::zero() && self.observed_accuracy <= S::one()) {
            return Err(Error::invalid(format!("samples[{i}].accuracy"), "must lie in [0, 1]"));
        }
        if !(self.weight > S::zero()) || !self.weight.is_finite() {
            return Err(Error::invalid(
                format!("samples[{i}].weight"),
                "must be positive and finite",
            ));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e >= S::zero() && **e <= S::one())) {
            return Err(Error::invalid(
                format!("samples[{i}].eps"),
                format!("{e} is outside [0, 1]"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct FitOptions<S> {
    pub alpha2_bounds: (S, S),
    pub alpha3_bounds: (S, S),
    /// Points of the initial grid over `log10(a2/a3)`.
    pub coarse_points: usize,
    /// Points of each refinement grid.
    pub refine_points: usize,
    pub min_levels: usize,
    pub max_levels: usize,
    /// Relative objective decrease below which a refinement level counts as stalled.
    pub rel_tol: S,
}

impl<S: Scalar> Default for FitOptions<S> {
    fn default() -> Self {
        Self {
            alpha2_bounds: (S::lit(1e-8), S::lit(10.0)),
            alpha3_bounds: (S::lit(1e-6), S::lit(1e3)),
            coarse_points: 181,
            refine_points: 21,
            min_levels: 3,
            max_levels: 200,
            rel_tol: S::lit(1e-10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct CleanFit<S> {
    pub alpha: [S; 5],
    pub rmse: S,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GammaFit<S> {
    pub gamma: S,
    /// The unconstrained estimate was negative and was clamped to zero.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct FitResult<S> {
    pub alpha: [S; 5],
    pub gamma: S,
    pub rmse: S,
    pub iterations: usize,
    pub converged: bool,
    pub gamma_clamped: bool,
    pub clean_samples: usize,
    pub noisy_samples: usize,
}

impl<S: Scalar> FitResult<S> {
    pub fn surrogate(&self, baseline: S) -> Surrogate<S> {
        Surrogate {
            alpha: self.alpha,
            gamma: self.gamma,
            baseline,
        }
    }

    pub fn accuracy_model(&self, baseline: S) -> AccuracyModel<S> {
        AccuracyModel::Surrogate(self.surrogate(baseline))
    }
}

/// Unclamped surrogate prediction for one sample.
pub fn predict<S: Scalar>(alpha: &[S; 5], gamma: S, sample: &AccuracySample<S>) -> Result<S> {
    let m = Surrogate {
        alpha: *alpha,
        gamma,
        baseline: S::zero(),
    };
    Ok(m.clean(S::count(sample.s.total()))? - gamma * Surrogate::weighted_noise(&sample.s, &sample.eps))
}

/// Weighted root-mean-square residual `sqrt(Σ w r² / Σ w)`.
pub fn weighted_rmse<S: Scalar>(alpha: &[S; 5], gamma: S, samples: &[AccuracySample<S>]) -> Result<S> {
    let mut num = S::zero();
    let mut den = S::zero();
    for smp in samples {
        let r = predict(alpha, gamma, smp)? - smp.observed_accuracy;
        num += smp.weight * r * r;
        den += smp.weight;
    }
    Ok((num / den).sqrt())
}

type Bounds<S> = ((S, S), (S, S));

struct Cell<S> {
    log_ratio: S,
    rss: S,
    alpha: [S; 5],
}

/// Splits `log10(a2/a3)` into `(log10 a2, log10 a3)`, preferring `a3 = 1`.
fn split_ratio<S: Scalar>(log_ratio: S, (lo2, hi2): (S, S), (lo3, hi3): (S, S)) -> (S, S) {
    let log_a3 = S::zero().max(lo3).min(hi3);
    let log_a2 = log_ratio + log_a3;
    if log_a2 > hi2 {
        (hi2, hi2 - log_ratio)
    } else if log_a2 < lo2 {
        (lo2, lo2 - log_ratio)
    } else {
        (log_a2, log_a3)
    }
}

/// Exact linear fit at one ratio, scored by the residuals of the final
/// parameters so that cancellation-prone solutions do not look better than they are.
fn solve_cell<S: Scalar>(totals: &[S], y: &[S], w: &[S], log_ratio: S, bounds: Bounds<S>) -> Option<Cell<S>> {
    let ratio = S::lit(10.0).powf(log_ratio);
    let rows: Vec<Vec<S>> = totals.iter().map(|&t| vec![(ratio * t).ln_1p(), t, S::one()]).collect();
    let coef = weighted_lstsq(&rows, y, w, S::lit(1e12))?;
    let alpha = assemble(log_ratio, [coef[0], coef[1], coef[2]], bounds);
    // Terms above 1/√ε cancel with rounding errors above √ε; such fits live in
    // the quadratic limit of the model and are not representable in `alpha`.
    let limit = S::one() / S::epsilon().sqrt();
    let mut rss = S::zero();
    for ((&t, &yi), &wi) in totals.iter().zip(y).zip(w) {
        let terms = [alpha[0] * (alpha[1] * t + alpha[2]).ln(), alpha[3] * t, alpha[4]];
        if terms.iter().any(|v| !(v.abs() <= limit)) {
            return None;
        }
        let r = terms[0] + terms[1] + terms[2] - yi;
        rss += wi * r * r;
    }
    if !rss.is_finite() {
        return None;
    }
    Some(Cell { log_ratio, rss, alpha })
}

/// Full parameter vector from a ratio and the linear coefficients of
/// `(ln(1 + ratio·S), S, 1)`, moving `a1·ln(a3)` into `a5`.
fn assemble<S: Scalar>(log_ratio: S, coef: [S; 3], (b2, b3): Bounds<S>) -> [S; 5] {
    let ten = S::lit(10.0);
    let (log_a2, log_a3) = split_ratio(log_ratio, b2, b3);
    let a3 = ten.powf(log_a3);
    [coef[0], ten.powf(log_a2), a3, coef[1], coef[2] - coef[0] * a3.ln()]
}

fn axis<S: Scalar>(lo: S, hi: S, points: usize) -> Vec<S> {
    if points <= 1 || !(hi > lo) {
        return vec![lo];
    }
    let step = (hi - lo) / S::count(points as u64 - 1);
    (0..points).map(|i| lo + step * S::count(i as u64)).collect()
}

/// Best point of `grid`, first on ties.
fn best_on_grid<S: Scalar>(totals: &[S], y: &[S], w: &[S], grid: &[S], bounds: Bounds<S>) -> Option<Cell<S>> {
    grid.par_iter()
        .map(|&r| solve_cell(totals, y, w, r, bounds))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None, |best: Option<Cell<S>>, c| match best {
            Some(b) if !(c.rss < b.rss) => Some(b),
            _ => Some(c),
        })
}

/// Fits `(a1, …, a5)` to noise-free samples.
pub fn fit_clean<S: Scalar>(samples: &[AccuracySample<S>], opts: &FitOptions<S>) -> Result<CleanFit<S>> {
    for (i, smp) in samples.iter().enumerate() {
        smp.validate(i)?;
        if !smp.is_clean() {
            return Err(Error::invalid(
                format!("samples[{i}].eps"),
                "clean fit requires every noise rate to be zero",
            ));
        }
    }
    let mut totals_sorted: Vec<u64> = samples.iter().map(|s| s.s.total()).collect();
    totals_sorted.sort_unstable();
    totals_sorted.dedup();
    if totals_sorted.len() < FIT_PARAMETERS {
        return Err(Error::Underdetermined(format!(
            "{} sample(s) with {} distinct total contribution(s); need at least {FIT_PARAMETERS}",
            samples.len(),
            totals_sorted.len()
        )));
    }

    let totals: Vec<S> = samples.iter().map(|s| S::count(s.s.total())).collect();
    let y: Vec<S> = samples.iter().map(|s| s.observed_accuracy).collect();
    let w: Vec<S> = samples.iter().map(|s| s.weight).collect();

    let b2 = (opts.alpha2_bounds.0.log10(), opts.alpha2_bounds.1.log10());
    let b3 = (opts.alpha3_bounds.0.log10(), opts.alpha3_bounds.1.log10());
    let (lo, hi) = (b2.0 - b3.1, b2.1 - b3.0);
    let mut grid = axis(lo, hi, opts.coarse_points);
    let mut best = best_on_grid(&totals, &y, &w, &grid, (b2, b3)).ok_or_else(|| {
        Error::Conditioning(format!(
            "no (alpha2, alpha3) gives a well-conditioned linear system; {} samples, {} distinct totals",
            samples.len(),
            totals_sorted.len()
        ))
    })?;

    let spacing = |g: &[S]| if g.len() > 1 { g[1] - g[0] } else { S::zero() };
    let mut h = spacing(&grid);
    let mut levels = 0;
    let mut stalled = 0;
    let mut converged = false;
    let tiny = S::lit(1e-300).max(S::min_positive_value());
    while levels < opts.max_levels {
        levels += 1;
        grid = axis(
            (best.log_ratio - h).max(lo),
            (best.log_ratio + h).min(hi),
            opts.refine_points,
        );
        h = spacing(&grid);
        let prev = best.rss;
        if let Some(c) = best_on_grid(&totals, &y, &w, &grid, (b2, b3)) {
            if c.rss < best.rss {
                best = c;
            }
        }
        let rel = (prev - best.rss) / prev.max(tiny);
        stalled = if rel < opts.rel_tol { stalled + 1 } else { 0 };
        let collapsed = h.abs() < S::lit(1e-12);
        if levels >= opts.min_levels && (stalled >= 3 || collapsed || best.rss <= tiny) {
            converged = true;
            break;
        }
    }

    let alpha = best.alpha;
    let rmse = weighted_rmse(&alpha, S::zero(), samples)?;
    Ok(CleanFit {
        alpha,
        rmse,
        iterations: levels,
        converged,
    })
}

/// Closed-form weighted least squares for `gamma` with `alpha` held fixed.
pub fn fit_gamma<S: Scalar>(samples: &[AccuracySample<S>], alpha: &[S; 5]) -> Result<GammaFit<S>> {
    let mut num = S::zero();
    let mut den = S::zero();
    for (i, smp) in samples.iter().enumerate() {
        smp.validate(i)?;
        let z = Surrogate::weighted_noise(&smp.s, &smp.eps);
        let r = predict(alpha, S::zero(), smp)? - smp.observed_accuracy;
        num += smp.weight * z * r;
        den += smp.weight * z * z;
    }
    if !(den > S::zero()) {
        return Err(Error::DegenerateRegressor(
            "every sample has zero contribution-weighted noise; gamma is unidentifiable".into(),
        ));
    }
    let gamma = num / den;
    if gamma < S::zero() {
        log::warn!("fitted gamma {gamma} is negative (noise appears to help); clamping to 0");
        return Ok(GammaFit {
            gamma: S::zero(),
            clamped: true,
        });
    }
    Ok(GammaFit { gamma, clamped: false })
}

/// Two-stage fit: clean samples determine `alpha`, noisy ones `gamma`.
///
/// Without noisy samples `gamma` is left at zero.
pub fn fit<S: Scalar>(samples: &[AccuracySample<S>], opts: &FitOptions<S>) -> Result<FitResult<S>> {
    let (clean, noisy): (Vec<_>, Vec<_>) = samples.iter().cloned().partition(|s| s.is_clean());
    let clean_fit = fit_clean(&clean, opts)?;
    let gamma_fit = if noisy.is_empty() {
        log::warn!("no noisy samples; gamma fixed at 0");
        GammaFit {
            gamma: S::zero(),
            clamped: false,
        }
    } else {
        fit_gamma(&noisy, &clean_fit.alpha)?
    };
    let rmse = weighted_rmse(&clean_fit.alpha, gamma_fit.gamma, samples)?;
    Ok(FitResult {
        alpha: clean_fit.alpha,
        gamma: gamma_fit.gamma,
        rmse,
        iterations: clean_fit.iterations,
        converged: clean_fit.converged,
        gamma_clamped: gamma_fit.clamped,
        clean_samples: clean.len(),
        noisy_samples: noisy.len(),
    })
}
