#![allow(dead_code)]

use lpnml::nalgebra::{DMatrix, DVector};
use lpnml::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(r: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| r.sample(StandardNormal))
}

pub fn gaussian_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

pub fn gaussian_dataset(r: &mut ChaCha8Rng, n: usize, m: usize) -> Dataset {
    let x = gaussian_matrix(r, n, m);
    let y = gaussian_vector(r, n);
    Dataset::new(x, y).unwrap()
}

pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Trapezoid rule with `n` points on `[lo, hi]`.
pub fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / (n - 1) as f64;
    let inner: f64 = (1..n - 1).map(|i| f(lo + i as f64 * h)).sum();
    h * (inner + 0.5 * (f(lo) + f(hi)))
}

/// Independent ridge solve through a Cholesky factorization of the normal
/// equations.
pub fn normal_equations_theta(data: &Dataset, lambda: f64) -> DVector<f64> {
    let x = data.features();
    let m = x.ncols();
    let a = x.transpose() * x + DMatrix::identity(m, m) * lambda;
    let b = x.transpose() * data.labels();
    a.cholesky().expect("positive definite").solve(&b)
}
