//! Synthetic experiments: polynomial-feature fitting and the
//! learnable/null subspace study.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{bayesian_predict, lpnml_constants, lpnml_predict, ridge_erm_predict};
use crate::ridge::{eigendecompose, fit_ridge};

/// Confidence bands are `mean ± BAND_STDS·std`.
pub const BAND_STDS: f64 = 2.0;

/// Tolerance factor for the "LpNML matches" flags in summaries.
pub const MATCH_TOLERANCE: f64 = 1e-6;

/// Labels in the subspace study are standard Gaussian times this.
const SUBSPACE_LABEL_SCALE: f64 = 10.0;

/// Row `i` is `[1, t_i, t_i², …, t_i^degree]`.
pub fn polynomial_design(t: &[f64], degree: usize) -> DMatrix<f64> {
    DMatrix::from_fn(t.len(), degree + 1, |i, j| t[i].powi(j as i32))
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonzero(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialExperimentSpec {
    pub n_train: usize,
    pub degree: usize,
    pub lambda: f64,
    /// Evaluation grid size over `[-1, 1]`.
    pub eval_points: usize,
    pub noise_variance: f64,
    pub seed: u64,
}

impl Default for PolynomialExperimentSpec {
    fn default() -> Self {
        Self {
            n_train: 6,
            degree: 10,
            lambda: 1e-3,
            eval_points: 201,
            noise_variance: 1.0,
            seed: 0,
        }
    }
}

impl PolynomialExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        nonzero("n_train", self.n_train)?;
        positive("lambda", self.lambda)?;
        positive("noise variance", self.noise_variance)?;
        if self.eval_points < 2 {
            return Err(Error::InvalidParameter("eval_points must be at least 2".into()));
        }
        Ok(())
    }

    /// `eval_points` evenly spaced values covering `[-1, 1]`.
    pub fn eval_grid(&self) -> Vec<f64> {
        let last = (self.eval_points - 1) as f64;
        (0..self.eval_points).map(|i| -1.0 + 2.0 * i as f64 / last).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRow {
    pub t: f64,
    pub ridge_mean: f64,
    pub bayes_mean: f64,
    pub bayes_var: f64,
    pub lpnml_mean: f64,
    pub lpnml_var: f64,
}

impl PolynomialRow {
    pub fn bayes_band(&self) -> (f64, f64) {
        band(self.bayes_mean, self.bayes_var)
    }

    pub fn lpnml_band(&self) -> (f64, f64) {
        band(self.lpnml_mean, self.lpnml_var)
    }
}

fn band(mean: f64, variance: f64) -> (f64, f64) {
    let w = BAND_STDS * variance.sqrt();
    (mean - w, mean + w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialExperiment {
    pub spec: PolynomialExperimentSpec,
    pub train_t: Vec<f64>,
    pub train_y: Vec<f64>,
    pub rows: Vec<PolynomialRow>,
}

impl PolynomialExperiment {
    /// Largest `|lpnml_mean − bayes_mean|` over the grid divided by the range
    /// of `bayes_mean` over the grid.
    pub fn lpnml_bayes_deviation(&self) -> f64 {
        let (lo, hi) = min_max(self.rows.iter().map(|r| r.bayes_mean));
        let dev = self
            .rows
            .iter()
            .map(|r| (r.lpnml_mean - r.bayes_mean).abs())
            .fold(0.0, f64::max);
        dev / (hi - lo)
    }
}

/// Draws `n_train` points with `t` and `y` independently uniform on
/// `[-1, 1]`, then evaluates every learner on the grid.
pub fn run_polynomial_experiment(spec: &PolynomialExperimentSpec) -> Result<PolynomialExperiment> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed);
    let mut draws = (0..2 * spec.n_train).map(|_| rng.random_range(-1.0..=1.0));
    let train_t: Vec<f64> = draws.by_ref().take(spec.n_train).collect();
    let train_y: Vec<f64> = draws.collect();
    polynomial_experiment_on(spec, train_t, train_y)
}

/// Same evaluation on caller-supplied training points.
pub fn polynomial_experiment_on(
    spec: &PolynomialExperimentSpec,
    train_t: Vec<f64>,
    train_y: Vec<f64>,
) -> Result<PolynomialExperiment> {
    spec.validate()?;
    if train_t.len() != train_y.len() {
        return Err(Error::dims("polynomial training labels", train_t.len(), train_y.len()));
    }
    let data = Dataset::new(
        polynomial_design(&train_t, spec.degree),
        DVector::from_column_slice(&train_y),
    )?;
    let model = fit_ridge(&data, spec.lambda, spec.noise_variance)?;

    let grid = spec.eval_grid();
    let design = polynomial_design(&grid, spec.degree);
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let x = design.row(i).transpose();
            let ridge = ridge_erm_predict(&model, &x)?;
            let bayes = bayesian_predict(&model, &x)?;
            let lpnml = lpnml_predict(&model, &x)?;
            Ok(PolynomialRow {
                t,
                ridge_mean: ridge.mean,
                bayes_mean: bayes.mean,
                bayes_var: bayes.variance,
                lpnml_mean: lpnml.mean,
                lpnml_var: lpnml.variance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolynomialExperiment {
        spec: *spec,
        train_t,
        train_y,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceExperimentSpec {
    pub n_train: usize,
    pub n_features: usize,
    pub lambda: f64,
    /// Test points per scenario.
    pub n_test: usize,
    pub noise_variance: f64,
    pub seed: u64,
}

impl Default for SubspaceExperimentSpec {
    fn default() -> Self {
        Self {
            n_train: 40,
            n_features: 100,
            lambda: 1e-9,
            n_test: 10_000,
            noise_variance: 1.0,
            seed: 0,
        }
    }
}

impl SubspaceExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        nonzero("n_train", self.n_train)?;
        nonzero("n_test", self.n_test)?;
        positive("lambda", self.lambda)?;
        positive("noise variance", self.noise_variance)?;
        if self.n_features <= self.n_train {
            return Err(Error::InvalidParameter(format!(
                "subspace study needs more features than samples, got M={} N={}",
                self.n_features, self.n_train
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Span of eigenvectors above the rank threshold.
    Learnable,
    /// Span of eigenvectors at or below it.
    Null,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Learnable => "learnable",
            Scenario::Null => "null",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspacePoint {
    pub ridge: f64,
    pub lpnml_mean: f64,
    pub lpnml_variance: f64,
    pub norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceExperiment {
    pub spec: SubspaceExperimentSpec,
    pub rank: usize,
    pub learnable: Vec<SubspacePoint>,
    pub null: Vec<SubspacePoint>,
}

/// Scale and agreement statistics of a [`SubspaceExperiment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSummary {
    pub rank: usize,
    pub learnable_max_abs_ridge: f64,
    /// `max |lpnml − ridge| / max |ridge|` over learnable points.
    pub learnable_max_deviation: f64,
    /// Largest per-point `|lpnml − ridge| / |ridge|`.
    pub learnable_max_pointwise_rel_deviation: f64,
    pub null_ridge_min: f64,
    pub null_ridge_max: f64,
    pub null_max_abs_ridge: f64,
    pub null_max_abs_lpnml: f64,
    /// `max |lpnml| / max |ridge|` over null points.
    pub null_lpnml_ratio: f64,
    /// Largest relative error of `σ̂² = σ²(1 + ‖x‖²/λ)` over null points.
    pub null_variance_identity_error: f64,
    /// Null ridge range divided by the largest learnable `|lpnml − ridge|`.
    pub scale_separation: f64,
    pub learnable_matches_ridge: bool,
    pub null_lpnml_is_zero: bool,
}

impl SubspaceExperiment {
    pub fn points(&self, scenario: Scenario) -> &[SubspacePoint] {
        match scenario {
            Scenario::Learnable => &self.learnable,
            Scenario::Null => &self.null,
        }
    }

    pub fn summary(&self) -> SubspaceSummary {
        let abs_max = |it: &mut dyn Iterator<Item = f64>| it.map(f64::abs).fold(0.0, f64::max);
        let learnable_max_abs_ridge = abs_max(&mut self.learnable.iter().map(|p| p.ridge));
        let learnable_dev = abs_max(&mut self.learnable.iter().map(|p| p.lpnml_mean - p.ridge));
        let pointwise = self
            .learnable
            .iter()
            .map(|p| (p.lpnml_mean - p.ridge).abs() / p.ridge.abs())
            .fold(0.0, f64::max);
        let (null_ridge_min, null_ridge_max) = min_max(self.null.iter().map(|p| p.ridge));
        let null_max_abs_ridge = abs_max(&mut self.null.iter().map(|p| p.ridge));
        let null_max_abs_lpnml = abs_max(&mut self.null.iter().map(|p| p.lpnml_mean));
        let s2 = self.spec.noise_variance;
        let variance_err = self
            .null
            .iter()
            .map(|p| {
                let expected = s2 * (1.0 + p.norm_sq / self.spec.lambda);
                (p.lpnml_variance - expected).abs() / expected
            })
            .fold(0.0, f64::max);

        let learnable_max_deviation = learnable_dev / learnable_max_abs_ridge;
        let null_lpnml_ratio = null_max_abs_lpnml / null_max_abs_ridge;
        SubspaceSummary {
            rank: self.rank,
            learnable_max_abs_ridge,
            learnable_max_deviation,
            learnable_max_pointwise_rel_deviation: pointwise,
            null_ridge_min,
            null_ridge_max,
            null_max_abs_ridge,
            null_max_abs_lpnml,
            null_lpnml_ratio,
            null_variance_identity_error: variance_err,
            scale_separation: (null_ridge_max - null_ridge_min) / learnable_dev,
            learnable_matches_ridge: learnable_max_deviation <= MATCH_TOLERANCE,
            null_lpnml_is_zero: null_lpnml_ratio <= MATCH_TOLERANCE,
        }
    }
}

/// Gaussian design and labels; test points are unit random combinations of
/// the chosen eigenvectors scaled by a uniform factor in `[1, 10]`.
pub fn run_subspace_experiment(spec: &SubspaceExperimentSpec) -> Result<SubspaceExperiment> {
    spec.validate()?;
    let (n, m) = (spec.n_train, spec.n_features);
    let mut rng = rng_for(spec.seed);
    let features = DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let labels = DVector::from_fn(n, |_, _| SUBSPACE_LABEL_SCALE * rng.sample::<f64, _>(StandardNormal));
    let data = Dataset::new(features, labels)?;

    let basis = eigendecompose(&data)?;
    let model = fit_ridge(&data, spec.lambda, spec.noise_variance)?;

    let mut scenario = |u: DMatrix<f64>| -> Result<Vec<SubspacePoint>> {
        (0..spec.n_test)
            .map(|_| {
                let x = random_point_in(&u, &mut rng);
                let ridge = ridge_erm_predict(&model, &x)?.mean;
                let lp = lpnml_predict(&model, &x)?;
                Ok(SubspacePoint {
                    ridge,
                    lpnml_mean: lp.mean,
                    lpnml_variance: lpnml_constants(&model, &x)?.variance,
                    norm_sq: x.norm_squared(),
                })
            })
            .collect()
    };
    let learnable = scenario(basis.learnable_basis())?;
    let null = scenario(basis.null_basis())?;
    Ok(SubspaceExperiment {
        spec: *spec,
        rank: basis.rank(),
        learnable,
        null,
    })
}

fn random_point_in(u: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let mut c = DVector::from_fn(u.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    c /= c.norm();
    let scale = rng.random_range(1.0..=10.0);
    u * c * scale
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}
