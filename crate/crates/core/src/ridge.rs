//! Ridge fitting and the shared linear-algebra kernel.
//!
//! Everything downstream works from the regularized inverse correlation
//! `P_λ = (X_NᵀX_N + λI)⁻¹`, which is materialized once per fit from the
//! eigendecomposition of the empirical correlation matrix. Eigenvalues at or
//! below [`RANK_TOLERANCE`] times the largest one are clamped to zero, so
//! `P_λ` acts as exactly `1/λ` on the numerical null space of the training
//! design.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Relative eigenvalue cut separating the learnable subspace from the zero subspace.
pub const RANK_TOLERANCE: f64 = 1e-10;

const INVERSE_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Eigenvectors `u_m` and eigenvalues `h_m²` of `X_NᵀX_N`, sorted by
/// nonincreasing eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl EigenBasis {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Columns are the orthonormal eigenvectors.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Eigenvalues at or below this value belong to the zero subspace.
    pub fn rank_threshold(&self) -> f64 {
        RANK_TOLERANCE * self.eigenvalues.get(0).copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues strictly above the rank threshold.
    pub fn rank(&self) -> usize {
        let cut = self.rank_threshold();
        self.eigenvalues.iter().take_while(|&&h| h > cut).count()
    }

    /// Eigenvectors spanning the learnable (large-eigenvalue) subspace.
    pub fn learnable_basis(&self) -> DMatrix<f64> {
        self.eigenvectors.columns(0, self.rank()).into_owned()
    }

    /// Eigenvectors spanning the zero subspace.
    pub fn null_basis(&self) -> DMatrix<f64> {
        let rank = self.rank();
        self.eigenvectors
            .columns(rank, self.eigenvectors.ncols() - rank)
            .into_owned()
    }

    /// `Σ h_m² u_m u_mᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.eigenvectors.nrows(), self.eigenvectors.ncols(), |i, j| {
            self.eigenvectors[(i, j)] * self.eigenvalues[j]
        });
        &scaled * self.eigenvectors.transpose()
    }
}

/// Eigendecomposition of the empirical correlation matrix `X_NᵀX_N`.
pub fn eigendecompose(data: &Dataset) -> Result<EigenBasis> {
    decompose_gram(data.features().tr_mul(data.features()))
}

fn decompose_gram(gram: DMatrix<f64>) -> Result<EigenBasis> {
    let dim = gram.nrows();
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 1000 * dim.max(1))
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    // Negative eigenvalues of a Gram matrix are rounding noise.
    let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&k| eig.eigenvalues[k].max(0.0)));
    let eigenvectors = eig.eigenvectors.select_columns(&order);
    Ok(EigenBasis {
        eigenvalues,
        eigenvectors,
    })
}

/// Fitted ridge state shared by every learner.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    lambda: f64,
    noise_variance: f64,
    theta_hat: DVector<f64>,
    p_lambda: DMatrix<f64>,
    training_dims: (usize, usize),
}

impl RidgeModel {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// `θ̂_λ`.
    pub fn theta_hat(&self) -> &DVector<f64> {
        &self.theta_hat
    }

    /// `P_λ = (X_NᵀX_N + λI)⁻¹`.
    pub fn p_lambda(&self) -> &DMatrix<f64> {
        &self.p_lambda
    }

    /// `(N, M)` of the training design.
    pub fn training_dims(&self) -> (usize, usize) {
        self.training_dims
    }

    pub fn n_features(&self) -> usize {
        self.training_dims.1
    }

    /// Same fit with a different noise variance. `σ²` never enters `θ̂_λ` or `P_λ`.
    pub fn with_noise_variance(&self, noise_variance: f64) -> Result<Self> {
        check_noise_variance(noise_variance)?;
        Ok(Self {
            noise_variance,
            ..self.clone()
        })
    }

    pub(crate) fn check_input(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(Error::dims("test vector", self.n_features(), x.len()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("test vector contains non-finite entries".into()));
        }
        Ok(())
    }
}

fn check_noise_variance(noise_variance: f64) -> Result<()> {
    if !(noise_variance.is_finite() && noise_variance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive and finite, got {noise_variance}"
        )));
    }
    Ok(())
}

/// Ridge ERM: `θ̂_λ = (X_NᵀX_N + λI)⁻¹ X_NᵀY_N`.
///
/// `lambda = 0` is accepted only when the smallest eigenvalue of `X_NᵀX_N`
/// exceeds [`RANK_TOLERANCE`] times the largest; otherwise the fit fails with
/// [`Error::SingularMatrix`].
pub fn fit_ridge(data: &Dataset, lambda: f64, noise_variance: f64) -> Result<RidgeModel> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative and finite, got {lambda}"
        )));
    }
    check_noise_variance(noise_variance)?;

    let x = data.features();
    let gram = x.tr_mul(x);
    let xty = x.tr_mul(data.labels());
    let basis = decompose_gram(gram.clone())?;

    let dim = data.n_features();
    let cut = basis.rank_threshold();
    let largest = basis.eigenvalues.get(0).copied().unwrap_or(0.0);
    let rank = basis.rank();
    if lambda == 0.0 && (largest <= 0.0 || rank < dim) {
        return Err(Error::SingularMatrix(format!(
            "X^T X has rank {rank} < {dim} at the {RANK_TOLERANCE:e} relative cut; lambda = 0 needs an invertible correlation matrix"
        )));
    }

    let inv_diag: Vec<f64> = basis
        .eigenvalues
        .iter()
        .map(|&h| {
            let h = if h > cut { h } else { 0.0 };
            1.0 / (h + lambda)
        })
        .collect();
    let u = &basis.eigenvectors;
    let scaled = DMatrix::from_fn(dim, dim, |i, j| u[(i, j)] * inv_diag[j]);
    let p = &scaled * u.transpose();
    let p_lambda = (&p + p.transpose()) * 0.5;
    let theta_hat = &p_lambda * xty;

    let mut regularized = gram;
    for i in 0..dim {
        regularized[(i, i)] += lambda;
    }
    let residual = (&p_lambda * &regularized - DMatrix::identity(dim, dim)).norm();
    let scale = p_lambda.norm() * regularized.norm();
    if residual.is_nan() || residual > INVERSE_RESIDUAL_TOLERANCE * scale {
        return Err(Error::NumericalFailure(format!(
            "regularized inverse residual {residual:e} exceeds tolerance (scale {scale:e})"
        )));
    }

    Ok(RidgeModel {
        lambda,
        noise_variance,
        theta_hat,
        p_lambda,
        training_dims: (data.n_samples(), dim),
    })
}

/// Quadratic forms of a test vector against `P_λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForms {
    /// `xᵀP_λx`
    pub x_p_x: f64,
    /// `xᵀP_λ²x = ‖P_λx‖²`
    pub x_p2_x: f64,
    /// `K_λ = 1 + xᵀP_λx`
    pub k_lambda: f64,
}

pub fn quadratic_forms(model: &RidgeModel, x: &DVector<f64>) -> Result<QuadraticForms> {
    model.check_input(x)?;
    Ok(forms_with_px(model, x).0)
}

pub(crate) fn forms_with_px(model: &RidgeModel, x: &DVector<f64>) -> (QuadraticForms, DVector<f64>) {
    let px = &model.p_lambda * x;
    let x_p_x = x.dot(&px).max(0.0);
    let x_p2_x = px.norm_squared();
    (
        QuadraticForms {
            x_p_x,
            x_p2_x,
            k_lambda: 1.0 + x_p_x,
        },
        px,
    )
}
