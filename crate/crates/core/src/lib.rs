//! Ridge regression learners with predictive distributions: Ridge ERM,
//! Bayesian, pNML and pNML with a ridge luckiness function (LpNML).

pub mod benchmark;
pub mod cli;
pub mod data;
pub mod dataset;
pub mod error;
pub mod learners;
pub mod metrics;
pub mod ridge;
pub mod synth;
pub mod tuning;

pub use nalgebra;

#[cfg(test)]
mod test_support;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use learners::{
    bayesian_predict, genie_fit, genie_weighted_density, lpnml_constants, lpnml_predict, minmax_regret, pnml_predict,
    ridge_erm_predict, Learner, LpnmlConstants, PredictiveDistribution,
};
pub use ridge::{eigendecompose, fit_ridge, quadratic_forms, EigenBasis, QuadraticForms, RidgeModel};
pub use tuning::{leave_one_out_tune, Loss, TuningGrid, TuningResult};
