mod common;

use common::{gaussian_dataset, gaussian_vector, normal_equations_theta, rel_err, rng, trapezoid};
use lpnml::data::{split_indices, SplitRule, TrainSide};
use lpnml::learners::{bayesian_predict, genie_weighted_log_density, lpnml_constants, pnml_predict, ridge_erm_predict};
use lpnml::nalgebra::{DMatrix, DVector};
use lpnml::{eigendecompose, fit_ridge, leave_one_out_tune, lpnml_predict, minmax_regret, quadratic_forms, Dataset, Learner, Loss, TuningGrid};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=25, 1usize..=30, any::<u64>())
}

fn lambda() -> impl Strategy<Value = f64> {
    (-6.0f64..=1.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ridge_solves_the_normal_equations((n, m, seed) in shape(), l in (-3.0f64..=1.0).prop_map(|e| 10f64.powf(e))) {
        let data = gaussian_dataset(&mut rng(seed), n, m);
        let model = fit_ridge(&data, l, 1.0).unwrap();
        let x = data.features();
        let a = x.transpose() * x + DMatrix::identity(m, m) * l;
        let b = x.transpose() * data.labels();
        let residual = (&a * model.theta_hat() - &b).norm() / (a.norm() * model.theta_hat().norm() + b.norm());
        prop_assert!(residual <= 1e-8, "residual {residual:e}");
        prop_assert!(rel_err(model.theta_hat(), &normal_equations_theta(&data, l)) <= 1e-6);
    }

    #[test]
    fn shrinkage_is_monotone((n, m, seed) in shape(), l in lambda(), factor in 1.5f64..100.0) {
        let data = gaussian_dataset(&mut rng(seed), n, m);
        let small = fit_ridge(&data, l, 1.0).unwrap().theta_hat().norm();
        let large = fit_ridge(&data, l * factor, 1.0).unwrap().theta_hat().norm();
        prop_assert!(large <= small * (1.0 + 1e-10), "{large} > {small}");
    }

    #[test]
    fn eigen_basis_invariants((n, m, seed) in shape()) {
        let data = gaussian_dataset(&mut rng(seed), n, m);
        let basis = eigendecompose(&data).unwrap();
        let gram = data.features().transpose() * data.features();
        let recon = (basis.reconstruct() - &gram).norm() / gram.norm().max(f64::MIN_POSITIVE);
        prop_assert!(recon <= 1e-8, "reconstruction {recon:e}");
        let u = basis.eigenvectors();
        let ortho = (u.transpose() * u - DMatrix::identity(m, m)).amax();
        prop_assert!(ortho <= 1e-10, "orthonormality {ortho:e}");
        let h = basis.eigenvalues();
        prop_assert!(h.as_slice().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(basis.rank() <= n.min(m));
    }

    #[test]
    fn quadratic_forms_are_consistent((n, m, seed) in shape(), l in lambda()) {
        let mut r = rng(seed);
        let data = gaussian_dataset(&mut r, n, m);
        let model = fit_ridge(&data, l, 1.0).unwrap();
        let x = gaussian_vector(&mut r, m);
        let q = quadratic_forms(&model, &x).unwrap();
        let px = model.p_lambda() * &x;
        prop_assert!(q.x_p_x >= 0.0 && q.x_p2_x >= 0.0 && q.k_lambda >= 1.0);
        prop_assert!((q.x_p2_x - px.norm_squared()).abs() <= 1e-12 * px.norm_squared());
    }

    #[test]
    fn lpnml_density_is_normalized((n, m, seed) in shape(), l in lambda(), s2 in 0.1f64..10.0) {
        let mut r = rng(seed);
        let data = gaussian_dataset(&mut r, n, m);
        let model = fit_ridge(&data, l, s2).unwrap();
        let x = gaussian_vector(&mut r, m);
        let q = lpnml_predict(&model, &x).unwrap();
        let mass = trapezoid(|y| q.density(y), q.mean - 12.0 * q.std_dev(), q.mean + 12.0 * q.std_dev(), 20_001);
        prop_assert!((mass - 1.0).abs() <= 1e-6, "mass {mass}");
    }

    #[test]
    fn regret_is_constant_in_the_label((n, m, seed) in shape(), l in lambda(), s2 in 0.1f64..10.0) {
        let mut r = rng(seed);
        let data = gaussian_dataset(&mut r, n, m);
        let model = fit_ridge(&data, l, s2).unwrap();
        let x = gaussian_vector(&mut r, m);
        let q = lpnml_predict(&model, &x).unwrap();
        let gamma = minmax_regret(&model, &x).unwrap();
        for k in 0..101 {
            let y = q.mean + q.std_dev() * (-6.0 + 0.12 * k as f64);
            let regret = genie_weighted_log_density(&model, &x, y).unwrap() - q.log_density(y);
            prop_assert!((regret - gamma).abs() <= 1e-8, "regret {regret} vs {gamma}");
        }
    }

    /// A zero training column makes its basis vector an exact null direction.
    #[test]
    fn exact_null_space((n, m, seed) in (1usize..=20, 2usize..=20, any::<u64>()), l in lambda(), s2 in 0.1f64..10.0, scale in 0.1f64..10.0) {
        let mut r = rng(seed);
        let mut data = gaussian_dataset(&mut r, n, m);
        let j = (seed as usize) % m;
        let mut x_mat = data.features().clone();
        x_mat.column_mut(j).fill(0.0);
        data = Dataset::new(x_mat, data.labels().clone()).unwrap();
        let model = fit_ridge(&data, l, s2).unwrap();
        let mut x = DVector::zeros(m);
        x[j] = scale;
        prop_assert_eq!((data.features() * &x).amax(), 0.0);

        let q = lpnml_predict(&model, &x).unwrap();
        prop_assert!(q.mean.abs() <= 1e-10 * model.theta_hat().norm() * x.norm(), "mean {}", q.mean);
        let expected = s2 * (1.0 + x.norm_squared() / l);
        prop_assert!((q.variance - expected).abs() <= 1e-10 * expected, "variance {} vs {expected}", q.variance);
    }

    #[test]
    fn largest_eigenvalue_subspace((n, m, seed) in shape(), l in (-6.0f64..=-1.0).prop_map(|e| 10f64.powf(e))) {
        let mut r = rng(seed);
        let data = gaussian_dataset(&mut r, n, m);
        let model = fit_ridge(&data, l, 1.0).unwrap();
        let basis = eigendecompose(&data).unwrap();
        let strong: Vec<usize> = (0..m).filter(|&i| basis.eigenvalues()[i] >= 100.0 * l).collect();
        prop_assume!(!strong.is_empty());
        let coeffs = gaussian_vector(&mut r, strong.len());
        let mut x = DVector::zeros(m);
        for (c, &i) in coeffs.iter().zip(&strong) {
            x += basis.eigenvectors().column(i) * *c;
        }
        x /= x.norm();
        let h_min2 = strong.iter().map(|&i| basis.eigenvalues()[i]).fold(f64::INFINITY, f64::min);

        let c = lpnml_constants(&model, &x).unwrap();
        // the factor K is needed: without it the inequality has counterexamples
        let spectral = basis.eigenvalues()[0].sqrt();
        let bound = c.k_lambda * l * data.labels().norm() * spectral * x.norm() / (h_min2 + l).powi(2);
        prop_assert!(c.mu_shift.abs() <= bound, "|mu| {:e} > bound {bound:e}", c.mu_shift);
        let ratio = c.variance;
        prop_assert!(ratio >= 1.0 - 1e-12 && ratio <= c.k_lambda.powi(2) * (1.0 + 1e-12));
    }

    #[test]
    fn lpnml_tends_to_pnml((m, extra, seed) in (1usize..=10, 2usize..=20, any::<u64>()), s2 in 0.1f64..10.0) {
        let mut r = rng(seed);
        let data = gaussian_dataset(&mut r, m + extra, m);
        let x = gaussian_vector(&mut r, m);
        let p = pnml_predict(&fit_ridge(&data, 0.0, s2).unwrap(), &x).unwrap();
        let q = lpnml_predict(&fit_ridge(&data, 1e-12, s2).unwrap(), &x).unwrap();
        prop_assert!((q.mean - p.mean).abs() <= 1e-4 * p.mean.abs().max(1e-12));
        prop_assert!((q.variance - p.variance).abs() <= 1e-4 * p.variance);
    }

    #[test]
    fn bayes_and_ridge_means_coincide((n, m, seed) in shape(), l in lambda(), s2 in 0.1f64..10.0) {
        let mut r = rng(seed);
        let data = gaussian_dataset(&mut r, n, m);
        let model = fit_ridge(&data, l, s2).unwrap();
        let x = gaussian_vector(&mut r, m);
        prop_assert_eq!(
            bayesian_predict(&model, &x).unwrap().mean.to_bits(),
            ridge_erm_predict(&model, &x).unwrap().mean.to_bits()
        );
    }

    #[test]
    fn tuning_average_ignores_sample_order(seed in any::<u64>(), rotate in 1usize..8) {
        let mut r = rng(seed);
        let data = gaussian_dataset(&mut r, 8, 3);
        let order: Vec<usize> = (0..8).map(|i| (i + rotate) % 8).collect();
        let permuted = data.select_rows(&order).unwrap();
        let grid = TuningGrid::new(vec![0.01, 0.1, 1.0], vec![0.1, 1.0]).unwrap();
        let a = leave_one_out_tune(&data, &grid, Learner::Lpnml, Loss::LogLoss).unwrap();
        let b = leave_one_out_tune(&permuted, &grid, Learner::Lpnml, Loss::LogLoss).unwrap();
        prop_assert!((a.lambda - b.lambda).abs() <= 1e-12 * a.lambda);
        prop_assert!((a.noise_variance - b.noise_variance).abs() <= 1e-12 * a.noise_variance);
    }

    #[test]
    fn split_is_a_partition(n in 2usize..60, fraction in 0.05f64..0.95, seed in any::<u64>(), threshold in -1.0f64..1.0) {
        let data = gaussian_dataset(&mut rng(seed), n, 2);
        let rules = [
            Some(SplitRule::random(fraction).unwrap()),
            Some(SplitRule::threshold(0, threshold, TrainSide::Below).unwrap()),
        ];
        for rule in rules.iter().flatten() {
            let Ok((train, test)) = split_indices(&data, rule, seed) else { continue };
            prop_assert!(!train.is_empty() && !test.is_empty());
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
