//! Predictive learners built on a fitted [`RidgeModel`]: Ridge ERM, the
//! Bayesian predictive, pNML and pNML with ridge luckiness (LpNML).
//!
//! The genie is the ridge learner refitted on the training set plus the test
//! point with a hypothesized label `y`. With the Gaussian luckiness
//! `w(θ) = exp{−λ‖θ‖²/(2σ²)}`, the genie's luckiness-weighted density is a
//! scaled Gaussian in `y`:
//!
//! ```text
//! p_θy(y|x)·w(θy) = c/√(2πσ²) · exp{−(y − θ̂ᵀx + μ̂)² / (2σ̂²)}
//!
//! μ̂  = λ K θ̂ᵀPx / (1 + λ xᵀP²x)
//! σ̂² = σ² K² / (1 + λ xᵀP²x)
//! log c = [ (λ θ̂ᵀPx)² / (1 + λ xᵀP²x) − λ‖θ̂‖² ] / (2σ²)
//! K  = 1 + xᵀPx
//! ```
//!
//! Normalizing over `y` gives the LpNML `N(θ̂ᵀx − μ̂, σ̂²)` and the min-max
//! regret `Γ = log c + ½ log(σ̂²/σ²)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ridge::{fit_ridge, forms_with_px, RidgeModel};

/// Univariate Gaussian predictive distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution {
    pub mean: f64,
    pub variance: f64,
}

impl PredictiveDistribution {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::NumericalFailure(format!("predictive mean is {mean}")));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::NumericalFailure(format!(
                "predictive variance must be positive and finite, got {variance}"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn log_density(&self, y: f64) -> f64 {
        let r = y - self.mean;
        -0.5 * (2.0 * PI * self.variance).ln() - r * r / (2.0 * self.variance)
    }

    pub fn density(&self, y: f64) -> f64 {
        self.log_density(y).exp()
    }

    /// Same distribution with the variance multiplied by `factor`.
    pub(crate) fn scale_variance(&self, factor: f64) -> Result<Self> {
        Self::new(self.mean, self.variance * factor)
    }
}

/// Per-test-point constants of the luckiness-weighted genie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpnmlConstants {
    /// `μ̂`, the genie's deviation from the Ridge ERM prediction.
    pub mu_shift: f64,
    /// `σ̂²`
    pub variance: f64,
    /// `log c`
    pub log_c: f64,
    /// `K_λ = 1 + xᵀP_λx`
    pub k_lambda: f64,
}

pub fn ridge_erm_predict(model: &RidgeModel, x: &DVector<f64>) -> Result<PredictiveDistribution> {
    model.check_input(x)?;
    PredictiveDistribution::new(model.theta_hat().dot(x), model.noise_variance())
}

/// Bayesian predictive with mean equal to Ridge ERM and variance `σ²K_λ`.
pub fn bayesian_predict(model: &RidgeModel, x: &DVector<f64>) -> Result<PredictiveDistribution> {
    model.check_input(x)?;
    let (forms, _) = forms_with_px(model, x);
    PredictiveDistribution::new(model.theta_hat().dot(x), model.noise_variance() * forms.k_lambda)
}

/// Genie parameters by the recursive least squares update
/// `θ̂_y = θ̂_λ + P_λx/K_λ · (y − θ̂_λᵀx)`.
pub fn genie_fit(model: &RidgeModel, x: &DVector<f64>, y: f64) -> Result<DVector<f64>> {
    model.check_input(x)?;
    let (forms, px) = forms_with_px(model, x);
    let innovation = y - model.theta_hat().dot(x);
    Ok(model.theta_hat() + px * (innovation / forms.k_lambda))
}

/// Genie parameters by refitting ridge on the training set augmented with `(x, y)`.
///
/// This is the slow reference path for [`genie_fit`].
pub fn genie_fit_refit(model: &RidgeModel, data: &Dataset, x: &DVector<f64>, y: f64) -> Result<DVector<f64>> {
    model.check_input(x)?;
    let augmented = data.with_sample(x, y)?;
    Ok(fit_ridge(&augmented, model.lambda(), model.noise_variance())?
        .theta_hat()
        .clone())
}

/// `log[p_θy(y|x)·w(θy)]` evaluated directly from the recursive genie parameters.
pub fn genie_weighted_log_density(model: &RidgeModel, x: &DVector<f64>, y: f64) -> Result<f64> {
    let theta_y = genie_fit(model, x, y)?;
    Ok(weighted_log_density_at(model, &theta_y, x, y))
}

pub fn genie_weighted_density(model: &RidgeModel, x: &DVector<f64>, y: f64) -> Result<f64> {
    genie_weighted_log_density(model, x, y).map(f64::exp)
}

pub(crate) fn weighted_log_density_at(model: &RidgeModel, theta: &DVector<f64>, x: &DVector<f64>, y: f64) -> f64 {
    let s2 = model.noise_variance();
    let r = y - theta.dot(x);
    -0.5 * (2.0 * PI * s2).ln() - (r * r + model.lambda() * theta.norm_squared()) / (2.0 * s2)
}

/// `log[p_θy(y|x)·w(θy)]` from the closed-form constants instead of refitting.
pub fn genie_weighted_log_density_closed_form(model: &RidgeModel, x: &DVector<f64>, y: f64) -> Result<f64> {
    let c = lpnml_constants(model, x)?;
    let r = y - model.theta_hat().dot(x) + c.mu_shift;
    Ok(c.log_c - 0.5 * (2.0 * PI * model.noise_variance()).ln() - r * r / (2.0 * c.variance))
}

pub fn lpnml_constants(model: &RidgeModel, x: &DVector<f64>) -> Result<LpnmlConstants> {
    model.check_input(x)?;
    let (forms, px) = forms_with_px(model, x);
    let lambda = model.lambda();
    let s2 = model.noise_variance();
    let theta = model.theta_hat();

    let theta_px = theta.dot(&px);
    let denom = 1.0 + lambda * forms.x_p2_x;
    let k = forms.k_lambda;
    let mu_shift = lambda * k * theta_px / denom;
    let variance = s2 * k * k / denom;
    let lt = lambda * theta_px;
    let log_c = (lt * lt / denom - lambda * theta.norm_squared()) / (2.0 * s2);

    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::NumericalFailure(format!("LpNML variance is {variance}")));
    }
    Ok(LpnmlConstants {
        mu_shift,
        variance,
        log_c,
        k_lambda: k,
    })
}

/// LpNML predictive `N(θ̂_λᵀx − μ̂, σ̂²)`.
pub fn lpnml_predict(model: &RidgeModel, x: &DVector<f64>) -> Result<PredictiveDistribution> {
    let c = lpnml_constants(model, x)?;
    PredictiveDistribution::new(model.theta_hat().dot(x) - c.mu_shift, c.variance)
}

/// pNML for the unregularized, under-parameterized case:
/// `N(θ̂ᵀx, σ²(1 + xᵀ(X_NᵀX_N)⁻¹x)²)`.
///
/// The model must be fitted with `λ = 0`; that fit already fails with
/// [`Error::SingularMatrix`] when the normalizer would diverge.
pub fn pnml_predict(model: &RidgeModel, x: &DVector<f64>) -> Result<PredictiveDistribution> {
    if model.lambda() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "pNML needs a model fitted with lambda = 0, got {}",
            model.lambda()
        )));
    }
    model.check_input(x)?;
    let (forms, _) = forms_with_px(model, x);
    let k = forms.k_lambda;
    PredictiveDistribution::new(model.theta_hat().dot(x), model.noise_variance() * k * k)
}

/// Min-max regret `Γ = log c + ½ log(σ̂²/σ²)`.
pub fn minmax_regret(model: &RidgeModel, x: &DVector<f64>) -> Result<f64> {
    let c = lpnml_constants(model, x)?;
    Ok(c.log_c + 0.5 * (c.variance / model.noise_variance()).ln())
}

/// Learner selector used by tuning, benchmarking and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    RidgeErm,
    Bayesian,
    Pnml,
    Lpnml,
}

impl Learner {
    pub const ALL: [Learner; 4] = [Learner::RidgeErm, Learner::Bayesian, Learner::Pnml, Learner::Lpnml];

    pub fn predict(self, model: &RidgeModel, x: &DVector<f64>) -> Result<PredictiveDistribution> {
        match self {
            Learner::RidgeErm => ridge_erm_predict(model, x),
            Learner::Bayesian => bayesian_predict(model, x),
            Learner::Pnml => pnml_predict(model, x),
            Learner::Lpnml => lpnml_predict(model, x),
        }
    }

    /// pNML has no regularization knob.
    pub fn fixed_lambda(self) -> Option<f64> {
        match self {
            Learner::Pnml => Some(0.0),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Learner::RidgeErm => "ridge",
            Learner::Bayesian => "bayes",
            Learner::Pnml => "pnml",
            Learner::Lpnml => "lpnml",
        }
    }
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ridge" | "ridge_erm" => Ok(Learner::RidgeErm),
            "bayes" | "bayesian" => Ok(Learner::Bayesian),
            "pnml" => Ok(Learner::Pnml),
            "lpnml" => Ok(Learner::Lpnml),
            other => Err(Error::InvalidParameter(format!("unknown learner {other:?}"))),
        }
    }
}
