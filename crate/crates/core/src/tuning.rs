//! Leave-one-out selection of `(λ, σ²)`.
//!
//! Every fold is fitted once per `λ`; `σ²` only rescales the predictive
//! variance, so the inner `σ²` sweep reuses the same prediction. Per-fold
//! choices are averaged in fold order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{Learner, PredictiveDistribution};
use crate::metrics;
use crate::ridge::fit_ridge;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid {
    lambdas: Vec<f64>,
    noise_variances: Vec<f64>,
}

impl TuningGrid {
    /// Sorts and deduplicates both lists; every value must be positive and finite.
    pub fn new(mut lambdas: Vec<f64>, mut noise_variances: Vec<f64>) -> Result<Self> {
        for (name, list) in [("lambda", &mut lambdas), ("noise variance", &mut noise_variances)] {
            if list.is_empty() {
                return Err(Error::InvalidParameter(format!("empty {name} grid")));
            }
            if let Some(bad) = list.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "{name} grid values must be positive and finite, got {bad}"
                )));
            }
            list.sort_by(f64::total_cmp);
            list.dedup();
        }
        Ok(Self {
            lambdas,
            noise_variances,
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn noise_variances(&self) -> &[f64] {
        &self.noise_variances
    }
}

impl Default for TuningGrid {
    /// λ: 25 log-spaced points on [1e-9, 1e3]; σ²: 11 on [1e-3, 1e2].
    fn default() -> Self {
        Self::new(log_space(-9.0, 3.0, 25), log_space(-3.0, 2.0, 11)).expect("static grid")
    }
}

/// `count` points `10^e` with `e` evenly spaced over `[lo_exp, hi_exp]`.
pub fn log_space(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo_exp)],
        _ => (0..count)
            .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SquaredError,
    LogLoss,
}

impl Loss {
    /// Loss used for a learner when none is given: squared error for Ridge
    /// ERM, log-loss for the probabilistic learners.
    pub fn default_for(learner: Learner) -> Self {
        match learner {
            Learner::RidgeErm => Loss::SquaredError,
            _ => Loss::LogLoss,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Loss::SquaredError => "squared_error",
            Loss::LogLoss => "log_loss",
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared_error" | "squared" | "mse" => Ok(Loss::SquaredError),
            "log_loss" | "log" => Ok(Loss::LogLoss),
            other => Err(Error::InvalidParameter(format!("unknown loss {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldChoice {
    pub fold: usize,
    pub lambda: f64,
    pub noise_variance: f64,
    pub validation_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub lambda: f64,
    pub noise_variance: f64,
    pub per_fold: Vec<FoldChoice>,
}

/// Leave-one-out grid search.
///
/// For each held-out sample the minimizing grid pair is recorded; ties go to
/// the smaller `λ`, then the smaller `σ²`. The result is the arithmetic mean
/// of the per-fold choices.
///
/// Squared error does not depend on `σ²`, so with [`Loss::SquaredError`] each
/// fold's `σ²` is its squared validation residual at the chosen `λ`, floored
/// at the smallest grid `σ²`. pNML has no `λ`; its folds always report 0.
pub fn leave_one_out_tune(data: &Dataset, grid: &TuningGrid, learner: Learner, loss: Loss) -> Result<TuningResult> {
    let n = data.n_samples();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let lambdas: Vec<f64> = match learner.fixed_lambda() {
        Some(l) => vec![l],
        None => grid.lambdas.clone(),
    };

    let per_fold = (0..n)
        .map(|fold| tune_fold(data, fold, &lambdas, &grid.noise_variances, learner, loss))
        .collect::<Result<Vec<_>>>()?;

    let k = per_fold.len() as f64;
    Ok(TuningResult {
        lambda: per_fold.iter().map(|c| c.lambda).sum::<f64>() / k,
        noise_variance: per_fold.iter().map(|c| c.noise_variance).sum::<f64>() / k,
        per_fold,
    })
}

fn tune_fold(
    data: &Dataset,
    fold: usize,
    lambdas: &[f64],
    noise_variances: &[f64],
    learner: Learner,
    loss: Loss,
) -> Result<FoldChoice> {
    let train = data.without_sample(fold)?;
    let x = data.sample(fold);
    let y = data.label(fold);

    let mut best: Option<FoldChoice> = None;
    let mut consider = |lambda: f64, noise_variance: f64, value: f64| {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        if best.is_none_or(|b| value < b.validation_loss) {
            best = Some(FoldChoice {
                fold,
                lambda,
                noise_variance,
                validation_loss: value,
            });
        }
    };

    for &lambda in lambdas {
        let model = fit_ridge(&train, lambda, 1.0)?;
        let unit: PredictiveDistribution = learner.predict(&model, &x)?;
        match loss {
            Loss::SquaredError => consider(lambda, noise_variances[0], metrics::squared_error(&unit, y)),
            Loss::LogLoss => {
                for &s2 in noise_variances {
                    let dist = unit.scale_variance(s2)?;
                    consider(lambda, s2, metrics::log_loss(&dist, y));
                }
            }
        }
    }

    let mut choice = best.expect("grids are nonempty");
    if loss == Loss::SquaredError {
        choice.noise_variance = choice.validation_loss.max(noise_variances[0]);
    }
    Ok(choice)
}
