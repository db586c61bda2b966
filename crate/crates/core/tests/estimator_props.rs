use malpha::estimators::{
    estimate_student_t, residual_general_malpha, residual_regular_malpha,
    student_t_plugin_residual, sufficient_stats, PopulationMoments,
};
use malpha::family::MAlphaFamily;
use malpha::quadrature::{integrate, QuadConfig};
use malpha::studentt::{self, pack_theta, StudentTRegularFamily};
use malpha::{AlphaOrder, Error, SampleBatch, StudentTParams};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn batch_strategy() -> impl Strategy<Value = SampleBatch> {
    (1usize..=3, 5usize..=50).prop_flat_map(|(d, n)| {
        prop::collection::vec(-50.0f64..50.0, d * n)
            .prop_map(move |v| SampleBatch::from_columns(DMatrix::from_vec(d, n, v)).unwrap())
    })
}

fn valid_alphas(d: usize) -> Vec<f64> {
    let bound = d as f64 / (d as f64 + 2.0);
    [0.5, 0.7, 0.9].into_iter().filter(|&a| a > bound).collect()
}

/// Two-pass mean and covariance, summing in plain index order.
fn naive_moments(batch: &SampleBatch) -> (DVector<f64>, DMatrix<f64>) {
    let (d, n) = (batch.dim(), batch.len());
    let m = batch.matrix();
    let mean = DVector::from_fn(d, |i, _| (0..n).map(|l| m[(i, l)]).sum::<f64>() / n as f64);
    let cov = DMatrix::from_fn(d, d, |i, j| {
        (0..n)
            .map(|l| (m[(i, l)] - mean[i]) * (m[(j, l)] - mean[j]))
            .sum::<f64>()
            / n as f64
    });
    (mean, cov)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn estimate_is_sample_mean_and_biased_covariance(batch in batch_strategy()) {
        let (mean, cov) = naive_moments(&batch);
        let alphas = valid_alphas(batch.dim());
        let first = estimate_student_t(&batch, alphas[0]).unwrap();
        let scale = 1.0 + cov.amax();
        prop_assert!((&first.mu_hat - &mean).amax() <= 1e-13 * (1.0 + mean.amax()));
        prop_assert!((&first.sigma_hat - &cov).amax() <= 1e-12 * scale);
        prop_assert_eq!(&first.sigma_hat, &first.sigma_hat.transpose());
        for &a in &alphas[1..] {
            let e = estimate_student_t(&batch, a).unwrap();
            prop_assert_eq!(&e.mu_hat, &first.mu_hat);
            prop_assert_eq!(&e.sigma_hat, &first.sigma_hat);
        }
    }

    #[test]
    fn alpha_outside_the_family_is_rejected(batch in batch_strategy()) {
        let d = batch.dim();
        let bound = d as f64 / (d as f64 + 2.0);
        let is_bound_error = matches!(
            estimate_student_t(&batch, bound),
            Err(Error::AlphaBelowStudentBound { .. })
        );
        prop_assert!(is_bound_error);
        prop_assert!(estimate_student_t(&batch, 1.5).is_err());
    }

    #[test]
    fn plugin_residual_vanishes(batch in batch_strategy()) {
        for a in valid_alphas(batch.dim()) {
            let est = estimate_student_t(&batch, a).unwrap();
            prop_assume!(!est.singular);
            let r = student_t_plugin_residual(&est, &batch).unwrap();
            prop_assert!(r.norm <= 1e-10, "norm {}", r.norm);
        }
    }

    #[test]
    fn translation_and_scaling_equivariance(
        batch in batch_strategy(),
        shift in prop::collection::vec(-20.0f64..20.0, 3),
        c in prop_oneof![-4.0f64..-0.25, 0.25f64..4.0],
    ) {
        let d = batch.dim();
        let t = DVector::from_column_slice(&shift[..d]);
        let a = valid_alphas(d)[0];
        let base = estimate_student_t(&batch, a).unwrap();
        let moved = estimate_student_t(&batch.translated(&t), a).unwrap();
        let tol = 1e-10 * (1.0 + base.sigma_hat.amax() + base.mu_hat.amax() + 20.0);
        prop_assert!((&moved.mu_hat - (&base.mu_hat + &t)).amax() <= tol);
        prop_assert!((&moved.sigma_hat - &base.sigma_hat).amax() <= tol * (1.0 + base.mu_hat.amax()));
        let scaled = estimate_student_t(&batch.scaled(c), a).unwrap();
        prop_assert!((&scaled.mu_hat - &base.mu_hat * c).amax() <= tol * c.abs());
        prop_assert!((&scaled.sigma_hat - &base.sigma_hat * (c * c)).amax() <= tol * c * c);
    }

    #[test]
    fn general_and_regular_residuals_vanish_together(
        batch in batch_strategy(),
        bump in prop::collection::vec(-0.3f64..0.3, 12),
    ) {
        let d = batch.dim();
        let a = valid_alphas(d)[0];
        let est = estimate_student_t(&batch, a).unwrap();
        prop_assume!(!est.singular);
        let params = est.to_params().unwrap();
        let family = StudentTRegularFamily::new(params.order());
        let stats = sufficient_stats(&batch, &family, a).unwrap();
        let theta = pack_theta(&params);
        let pop = |theta: &DVector<f64>| PopulationMoments {
            mean_f: family.population_moments(theta).unwrap(),
            mean_q_pow: 1.0,
        };
        let scale = 1.0 + est.sigma_hat.amax() + est.mu_hat.norm_squared();
        let reg = residual_regular_malpha(&family, &theta, &stats, &pop(&theta)).unwrap();
        let gen = residual_general_malpha(&family, &theta, &stats, &pop(&theta)).unwrap();
        prop_assert!(reg.norm <= 1e-10 * scale);
        prop_assert!(gen.norm <= 1e-9 * scale);

        // move the mean only, so the precision block stays positive definite
        let mut moved = theta.clone();
        for i in 0..d {
            moved[i] += bump[i] * (1.0 + est.sigma_hat[(i, i)].sqrt());
        }
        prop_assume!((0..d).any(|i| bump[i].abs() > 0.05));
        let reg = residual_regular_malpha(&family, &moved, &stats, &pop(&moved)).unwrap();
        let gen = residual_general_malpha(&family, &moved, &stats, &pop(&moved)).unwrap();
        prop_assert!(reg.norm > 1e-6);
        prop_assert!(gen.norm > 1e-12);
    }
}

#[test]
fn population_stats_as_sample_stats_give_zero_residual() {
    let p = StudentTParams::new(
        0.8,
        DVector::from_vec(vec![0.5, -1.0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]),
    )
    .unwrap();
    let family = StudentTRegularFamily::new(p.order());
    let theta = pack_theta(&p);
    let mean_f = family.population_moments(&theta).unwrap();
    let stats = malpha::estimators::SufficientStats {
        mean_x: p.mu().clone(),
        mean_xxt: p.sigma() + p.mu() * p.mu().transpose(),
        mean_f: mean_f.clone(),
        mean_q_pow: 1.0,
    };
    let pop = PopulationMoments {
        mean_f,
        mean_q_pow: 1.0,
    };
    assert_eq!(
        residual_regular_malpha(&family, &theta, &stats, &pop)
            .unwrap()
            .norm,
        0.0
    );
    assert_eq!(
        residual_general_malpha(&family, &theta, &stats, &pop)
            .unwrap()
            .norm,
        0.0
    );
}

/// `E[x]` and `E[x^2]` under the univariate density by quadrature.
fn quadrature_moments(p: &StudentTParams) -> DVector<f64> {
    let cfg = QuadConfig::with_tolerance(1e-14, 1e-12);
    let dens = |x: f64| studentt::density(p, &DVector::from_element(1, x));
    let m1 = integrate(|x| x * dens(x), f64::NEG_INFINITY, f64::INFINITY, &cfg)
        .unwrap()
        .value;
    let m2 = integrate(|x| x * x * dens(x), f64::NEG_INFINITY, f64::INFINITY, &cfg)
        .unwrap()
        .value;
    DVector::from_vec(vec![m1, m2])
}

#[test]
fn perturbed_residuals_match_quadrature_moments() {
    let batch =
        SampleBatch::from_scalars(&[4.6, 4.7, 6.0, 7.0, 8.2, 8.6, 8.7, 8.8, 8.9, 9.0]).unwrap();
    let alpha = 0.7;
    let est = estimate_student_t(&batch, alpha).unwrap();
    let p = StudentTParams::univariate(alpha, est.mu_hat[0] + 0.1, est.sigma_hat[(0, 0)]).unwrap();
    let family = StudentTRegularFamily::new(AlphaOrder::student_t(alpha, 1).unwrap());
    let theta = pack_theta(&p);
    let stats = sufficient_stats(&batch, &family, alpha).unwrap();
    let analytic = PopulationMoments {
        mean_f: family.population_moments(&theta).unwrap(),
        mean_q_pow: 1.0,
    };
    let quad = PopulationMoments {
        mean_f: quadrature_moments(&p),
        mean_q_pow: 1.0,
    };
    let reg_a = residual_regular_malpha(&family, &theta, &stats, &analytic).unwrap();
    let reg_q = residual_regular_malpha(&family, &theta, &stats, &quad).unwrap();
    assert!(reg_a.norm > 0.05);
    assert!((&reg_a.residuals - &reg_q.residuals).amax() < 1e-6);
    assert!((reg_a.residuals[0] - 0.1).abs() < 1e-12);

    // independent assembly of the general residual from the Jacobian
    let gen_a = residual_general_malpha(&family, &theta, &stats, &analytic).unwrap();
    let gen_q = residual_general_malpha(&family, &theta, &stats, &quad).unwrap();
    assert!((&gen_a.residuals - &gen_q.residuals).amax() < 1e-6);
    let w = family.w(&theta);
    let jac = family.w_jacobian(&theta);
    let manual = jac.tr_mul(&quad.mean_f) / (1.0 + w.dot(&quad.mean_f))
        - jac.tr_mul(&stats.mean_f) / (1.0 + w.dot(&stats.mean_f));
    assert!((&gen_q.residuals - manual).amax() < 1e-12);
    assert!(gen_a.norm > 1e-3);
}
