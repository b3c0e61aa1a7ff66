use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(r: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| r.sample(StandardNormal))
}

pub fn random_dataset(r: &mut ChaCha8Rng, n: usize, dim: usize) -> Dataset {
    let x = DMatrix::from_fn(n, dim, |_, _| r.sample(StandardNormal));
    let y = random_vector(r, n);
    Dataset::new(x, y).unwrap()
}

pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
