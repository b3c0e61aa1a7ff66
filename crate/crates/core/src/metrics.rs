//! Evaluation metrics and reduction statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::PredictiveDistribution;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

/// Squared error of the point prediction (the predictive mean).
pub fn squared_error(dist: &PredictiveDistribution, y: f64) -> f64 {
    let r = y - dist.mean;
    r * r
}

/// Gaussian log-loss `−log q(y|x)`.
pub fn log_loss(dist: &PredictiveDistribution, y: f64) -> f64 {
    -dist.log_density(y)
}

/// `100·(1 − mse_lpnml/mse_ridge)`.
pub fn mse_reduction_percent(mse_lpnml: f64, mse_ridge: f64) -> Result<f64> {
    if mse_ridge == 0.0 {
        return Err(Error::DivisionByZero("baseline MSE is zero"));
    }
    if mse_ridge.is_nan() || mse_ridge <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "baseline MSE must be positive, got {mse_ridge}"
        )));
    }
    Ok(100.0 * (1.0 - mse_lpnml / mse_ridge))
}

/// Log-loss reduction, `baseline − lpnml`.
pub fn logloss_reduction(baseline: f64, lpnml: f64) -> f64 {
    baseline - lpnml
}

/// Mean and normal-approximation 95% half-width (`1.96·s/√k`, sample std).
pub fn confidence_interval_95(values: &[f64]) -> Result<(f64, f64)> {
    let k = values.len();
    if k < 2 {
        return Err(Error::InsufficientData { needed: 2, got: k });
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Ok((mean, Z_95 * (var / k as f64).sqrt()))
}

/// Metrics of one learner on one test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestMetrics {
    pub mse: f64,
    pub mean_log_loss: f64,
    pub n_test: usize,
}

impl TestMetrics {
    pub fn from_predictions(pairs: &[(PredictiveDistribution, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let n = pairs.len() as f64;
        let mse = pairs.iter().map(|(d, y)| squared_error(d, *y)).sum::<f64>() / n;
        let mean_log_loss = pairs.iter().map(|(d, y)| log_loss(d, *y)).sum::<f64>() / n;
        Ok(Self {
            mse,
            mean_log_loss,
            n_test: pairs.len(),
        })
    }
}

/// Metrics aggregated over repetitions (train/test splits).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mse: f64,
    pub rmse: f64,
    pub mean_log_loss: f64,
    /// Test samples per repetition.
    pub n_test: usize,
    pub repetitions: usize,
    pub mse_ci95_halfwidth: f64,
    pub log_loss_ci95_halfwidth: f64,
}

impl EvalReport {
    /// Averages per-repetition metrics. With a single repetition the
    /// half-widths are 0.
    pub fn aggregate(reps: &[TestMetrics]) -> Result<Self> {
        let first = reps.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
        if let Some(bad) = reps.iter().find(|r| r.n_test != first.n_test) {
            return Err(Error::dims("repetition test size", first.n_test, bad.n_test));
        }
        let mses: Vec<f64> = reps.iter().map(|r| r.mse).collect();
        let losses: Vec<f64> = reps.iter().map(|r| r.mean_log_loss).collect();
        let ((mse, mse_hw), (ll, ll_hw)) = if reps.len() >= 2 {
            (confidence_interval_95(&mses)?, confidence_interval_95(&losses)?)
        } else {
            ((mses[0], 0.0), (losses[0], 0.0))
        };
        Ok(Self {
            mse,
            rmse: mse.sqrt(),
            mean_log_loss: ll,
            n_test: first.n_test,
            repetitions: reps.len(),
            mse_ci95_halfwidth: mse_hw,
            log_loss_ci95_halfwidth: ll_hw,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dist(mean: f64, variance: f64) -> PredictiveDistribution {
        PredictiveDistribution::new(mean, variance).unwrap()
    }

    #[test]
    fn squared_error_examples() {
        assert_eq!(squared_error(&dist(1.0, 1.0), 1.0), 0.0);
        assert_eq!(squared_error(&dist(0.0, 1.0), 2.0), 4.0);
    }

    #[test]
    fn log_loss_examples() {
        let half_log_2pi = 0.5 * (2.0 * PI).ln();
        assert!((log_loss(&dist(0.0, 1.0), 0.0) - 0.918_938_533_204_672_7).abs() < 1e-12);
        assert!((log_loss(&dist(0.0, 1.0), 1.0) - (half_log_2pi + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn log_loss_matches_quadrature_normalized_density() {
        use crate::test_support::rng;
        use rand::Rng;
        use rand_distr::StandardNormal;

        let (mean, var): (f64, f64) = (0.4, 2.3);
        let sd = var.sqrt();
        let unnormalized = |y: f64| (-(y - mean) * (y - mean) / (2.0 * var)).exp();
        let (lo, hi, n) = (mean - 12.0 * sd, mean + 12.0 * sd, 20_001);
        let h = (hi - lo) / (n - 1) as f64;
        let z: f64 = (0..n)
            .map(|i| {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                w * unnormalized(lo + i as f64 * h)
            })
            .sum::<f64>()
            * h;

        let mut r = rng(1);
        let ys: Vec<f64> = (0..500).map(|_| mean + sd * r.sample::<f64, _>(StandardNormal)).collect();
        let oracle = ys.iter().map(|&y| -(unnormalized(y) / z).ln()).sum::<f64>() / ys.len() as f64;
        let d = dist(mean, var);
        let got = ys.iter().map(|&y| log_loss(&d, y)).sum::<f64>() / ys.len() as f64;
        assert!((got - oracle).abs() < 1e-10);
    }

    #[test]
    fn log_loss_minimized_at_label() {
        let y = 0.37;
        let best = (-200..=200)
            .map(|i| y + i as f64 * 0.01)
            .min_by(|a, b| log_loss(&dist(*a, 0.5), y).total_cmp(&log_loss(&dist(*b, 0.5), y)))
            .unwrap();
        assert!((best - y).abs() < 1e-12);
    }

    #[test]
    fn reduction_examples() {
        let pct = mse_reduction_percent(1.41, 1.76).unwrap();
        assert_eq!(format!("{pct:.1}"), "19.9");
        assert!((pct - 20.0).abs() < 0.15);
        assert_eq!(mse_reduction_percent(1.3, 1.3).unwrap(), 0.0);
        assert_eq!(mse_reduction_percent(0.5, 1.0).unwrap(), 50.0);
        assert!(matches!(mse_reduction_percent(1.0, 0.0), Err(Error::DivisionByZero(_))));

        assert!((logloss_reduction(8.86, 2.64) - 6.22).abs() < 1e-12);
        assert_eq!(logloss_reduction(1.0, 1.0), 0.0);
        assert_eq!(logloss_reduction(1.0, 1.5), -0.5);
    }

    #[test]
    fn confidence_interval_examples() {
        assert_eq!(confidence_interval_95(&[2.0, 2.0, 2.0]).unwrap(), (2.0, 0.0));
        assert_eq!(confidence_interval_95(&[-3.0, 3.0]).unwrap().0, 0.0);
        assert!(confidence_interval_95(&[1.0]).is_err());

        let xs = [0.3, 1.9, -0.4, 2.2, 0.8];
        let (m, hw) = confidence_interval_95(&xs).unwrap();
        // two-pass oracle
        let mean: f64 = xs.iter().sum::<f64>() / 5.0;
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        assert!((m - mean).abs() < 1e-15);
        assert!((hw - 1.96 * (ss / 4.0).sqrt() / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn report_invariants() {
        let reps = [
            TestMetrics { mse: 1.0, mean_log_loss: 1.5, n_test: 4 },
            TestMetrics { mse: 2.0, mean_log_loss: 2.5, n_test: 4 },
        ];
        let r = EvalReport::aggregate(&reps).unwrap();
        assert!((r.rmse * r.rmse - r.mse).abs() <= 1e-12 * r.mse);
        assert_eq!(r.n_test, 4);
        assert_eq!(r.repetitions, 2);
        let single = EvalReport::aggregate(&reps[..1]).unwrap();
        assert_eq!(single.mse_ci95_halfwidth, 0.0);
    }
}
