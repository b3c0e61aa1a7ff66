//! Split, standardize, tune and evaluate learners over repeated splits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::{apply_standardizer, fit_standardizer, split, SplitRule, Standardizer};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{Learner, PredictiveDistribution};
use crate::metrics::{logloss_reduction, mse_reduction_percent, EvalReport, TestMetrics};
use crate::ridge::{fit_ridge, RidgeModel};
use crate::tuning::{leave_one_out_tune, Loss, TuningGrid};

/// Predictions of one learner for every test row, in row order.
pub fn predict_all(model: &RidgeModel, learner: Learner, test: &Dataset) -> Result<Vec<PredictiveDistribution>> {
    (0..test.n_samples())
        .map(|i| learner.predict(model, &test.sample(i)))
        .collect()
}

pub fn evaluate_model(model: &RidgeModel, learner: Learner, test: &Dataset) -> Result<TestMetrics> {
    let preds = predict_all(model, learner, test)?;
    let pairs: Vec<_> = preds.into_iter().zip(test.labels().iter().copied()).collect();
    TestMetrics::from_predictions(&pairs)
}

/// Fits on `train` with fixed hyperparameters and scores on `test`.
pub fn evaluate(train: &Dataset, test: &Dataset, learner: Learner, lambda: f64, noise_variance: f64) -> Result<TestMetrics> {
    let lambda = learner.fixed_lambda().unwrap_or(lambda);
    evaluate_model(&fit_ridge(train, lambda, noise_variance)?, learner, test)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub rule: SplitRule,
    pub repetitions: usize,
    pub seed: u64,
    pub learners: Vec<Learner>,
    pub grid: TuningGrid,
    /// Tuning loss for every learner; `None` picks [`Loss::default_for`].
    pub loss: Option<Loss>,
    pub standardize_features: bool,
    pub standardize_labels: bool,
    pub add_intercept: bool,
    /// Drop learners that hit a singular fit instead of failing the run.
    pub skip_singular: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            rule: SplitRule::Random { test_fraction: 0.2 },
            repetitions: 1,
            seed: 0,
            learners: Learner::ALL.to_vec(),
            grid: TuningGrid::default(),
            loss: None,
            standardize_features: true,
            standardize_labels: true,
            add_intercept: false,
            skip_singular: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub lambda: f64,
    pub noise_variance: f64,
    pub metrics: TestMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerReport {
    pub learner: Learner,
    pub loss: Loss,
    pub report: EvalReport,
    /// Relative to Ridge ERM; absent when ridge was not run.
    pub mse_reduction_percent: Option<f64>,
    pub log_loss_reduction: Option<f64>,
    pub repetitions: Vec<RepetitionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedLearner {
    pub learner: Learner,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub n_train: usize,
    pub n_test: usize,
    pub learners: Vec<LearnerReport>,
    pub skipped: Vec<SkippedLearner>,
}

/// Split for one repetition, scaled by training statistics only.
pub fn prepare_split(data: &Dataset, config: &BenchmarkConfig, repetition: usize) -> Result<(Dataset, Dataset)> {
    let (train, test) = split(data, &config.rule, config.seed.wrapping_add(repetition as u64))?;
    let scaler = if config.standardize_features {
        let s = fit_standardizer(&train)?;
        if config.standardize_labels {
            s
        } else {
            s.without_label_scaling()
        }
    } else {
        let mut s = Standardizer::identity(train.n_features());
        if config.standardize_labels {
            let fitted = fit_standardizer(&train)?;
            s.label_mean = fitted.label_mean;
            s.label_scale = fitted.label_scale;
        }
        s
    };
    let (train, test) = (apply_standardizer(&scaler, &train)?, apply_standardizer(&scaler, &test)?);
    Ok(if config.add_intercept {
        (train.with_intercept(), test.with_intercept())
    } else {
        (train, test)
    })
}

/// Runs every configured learner over `config.repetitions` splits.
///
/// Learners are processed in order within a repetition and share fitted
/// models keyed by `(λ, σ²)`.
pub fn run_benchmark(data: &Dataset, config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if config.repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    if config.learners.is_empty() {
        return Err(Error::InvalidParameter("no learners selected".into()));
    }

    let mut per_learner: Vec<(Learner, Vec<RepetitionResult>)> =
        config.learners.iter().map(|l| (*l, Vec::new())).collect();
    let mut skipped: Vec<SkippedLearner> = Vec::new();
    let mut dims = (0, 0);

    for rep in 0..config.repetitions {
        let (train, test) = prepare_split(data, config, rep)?;
        dims = (train.n_samples(), test.n_samples());
        let mut cache: HashMap<(u64, u64), RidgeModel> = HashMap::new();

        for (learner, results) in per_learner.iter_mut() {
            if skipped.iter().any(|s| s.learner == *learner) {
                continue;
            }
            let loss = config.loss.unwrap_or(Loss::default_for(*learner));
            let outcome = leave_one_out_tune(&train, &config.grid, *learner, loss).and_then(|tuned| {
                let key = (tuned.lambda.to_bits(), tuned.noise_variance.to_bits());
                let model = match cache.get(&key) {
                    Some(m) => m,
                    None => {
                        let m = fit_ridge(&train, tuned.lambda, tuned.noise_variance)?;
                        cache.entry(key).or_insert(m)
                    }
                };
                Ok(RepetitionResult {
                    repetition: rep,
                    lambda: tuned.lambda,
                    noise_variance: tuned.noise_variance,
                    metrics: evaluate_model(model, *learner, &test)?,
                })
            });
            match outcome {
                Ok(r) => results.push(r),
                Err(Error::SingularMatrix(reason)) if config.skip_singular => {
                    skipped.push(SkippedLearner {
                        learner: *learner,
                        reason,
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }

    let mut learners = Vec::new();
    for (learner, reps) in per_learner {
        if skipped.iter().any(|s| s.learner == learner) {
            continue;
        }
        let metrics: Vec<TestMetrics> = reps.iter().map(|r| r.metrics).collect();
        learners.push(LearnerReport {
            learner,
            loss: config.loss.unwrap_or(Loss::default_for(learner)),
            report: EvalReport::aggregate(&metrics)?,
            mse_reduction_percent: None,
            log_loss_reduction: None,
            repetitions: reps,
        });
    }
    if let Some(base) = learners.iter().find(|r| r.learner == Learner::RidgeErm).map(|r| r.report) {
        for r in &mut learners {
            r.mse_reduction_percent = Some(mse_reduction_percent(r.report.mse, base.mse)?);
            r.log_loss_reduction = Some(logloss_reduction(base.mean_log_loss, r.report.mean_log_loss));
        }
    }

    Ok(BenchmarkReport {
        n_train: dims.0,
        n_test: dims.1,
        learners,
        skipped,
    })
}
