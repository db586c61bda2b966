use malpha::divergence::{generalized_log_likelihood, i_alpha, kl, DistributionHandle, Extended};
use malpha::quadrature::QuadConfig;
use malpha::{SampleBatch, StudentTParams};
use proptest::prelude::*;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn finite(v: Extended) -> f64 {
    v.finite().expect("finite divergence")
}

#[test]
fn gaussian_pair_limits_to_kl() {
    let p = DistributionHandle::normal(0.0, 1.0).unwrap();
    let q = DistributionHandle::normal(0.5, 1.0).unwrap();
    let kl_pq = finite(kl(&p, &q, &cfg()).unwrap());
    assert!((kl_pq - 0.125).abs() < 1e-9);
    for a in [1.0 - 1e-3, 1.0 + 1e-3] {
        let v = finite(i_alpha(&p, &q, a, &cfg()).unwrap());
        assert!((v - kl_pq).abs() <= 5e-3, "alpha {a}: {v}");
    }
}

#[test]
fn bernoulli_pair_limits_to_kl() {
    let p = DistributionHandle::bernoulli(0.3).unwrap();
    let q = DistributionHandle::bernoulli(0.6).unwrap();
    let want = 0.3 * (0.3f64 / 0.6).ln() + 0.7 * (0.7f64 / 0.4).ln();
    assert!((finite(kl(&p, &q, &cfg()).unwrap()) - want).abs() < 1e-14);
    for a in [1.0 - 1e-3, 1.0 + 1e-3] {
        assert!((finite(i_alpha(&p, &q, a, &cfg()).unwrap()) - want).abs() <= 5e-3);
    }
}

#[test]
fn equal_variance_gaussians_have_alpha_free_divergence() {
    // int p q^(a-1) = (2 pi s^2)^((1-a)/2) a^(-1/2) exp(-(a-1) m^2 / (2 a s^2)) and
    // int p^a = int q^a = (2 pi s^2)^((1-a)/2) a^(-1/2), so I_a = m^2 / (2 s^2).
    let (m, s) = (0.7, 1.3);
    let p = DistributionHandle::normal(0.0, s).unwrap();
    let q = DistributionHandle::normal(m, s).unwrap();
    let want = m * m / (2.0 * s * s);
    for a in [0.3, 0.5, 0.8, 2.0, 3.0] {
        let got = finite(i_alpha(&p, &q, a, &cfg()).unwrap());
        assert!((got - want).abs() < 1e-8, "alpha {a}: {got} vs {want}");
    }
}

#[test]
fn self_divergence_is_zero() {
    let handles = [
        DistributionHandle::normal(1.0, 2.0).unwrap(),
        DistributionHandle::student_t(&StudentTParams::univariate(0.7, 0.0, 1.0).unwrap()).unwrap(),
        DistributionHandle::student_t(&StudentTParams::univariate(2.0, 0.0, 1.0).unwrap()).unwrap(),
        DistributionHandle::discrete(vec![0.1, 0.2, 0.7]).unwrap(),
    ];
    for h in &handles {
        for a in [0.5, 0.999, 1.001, 2.0] {
            assert!(finite(i_alpha(h, h, a, &cfg()).unwrap()).abs() <= 1e-9);
        }
    }
}

#[test]
fn disjoint_support_is_infinite() {
    let p = DistributionHandle::discrete(vec![1.0, 0.0]).unwrap();
    let q = DistributionHandle::discrete(vec![0.0, 1.0]).unwrap();
    assert_eq!(kl(&p, &q, &cfg()).unwrap(), Extended::PosInfinity);
    assert_eq!(i_alpha(&p, &q, 2.0, &cfg()).unwrap(), Extended::PosInfinity);
}

#[test]
fn likelihood_is_maximized_near_the_sample_for_compact_model() {
    let batch = SampleBatch::from_scalars(&[0.2, -0.4, 0.1, 0.5]).unwrap();
    let at = |mu: f64| {
        let p = StudentTParams::univariate(2.0, mu, 1.0).unwrap();
        generalized_log_likelihood(&p, &batch, 2.0, &cfg()).unwrap()
    };
    assert!(at(0.1) > at(1.5));
    assert_eq!(at(40.0), Extended::NegInfinity);
}

proptest! {
    #[test]
    fn discrete_divergences_are_nonnegative(
        raw_p in prop::collection::vec(0.01f64..1.0, 2..6),
        raw_q in prop::collection::vec(0.01f64..1.0, 6),
        a in prop_oneof![0.1f64..0.99, 1.01f64..5.0],
    ) {
        let k = raw_p.len();
        let norm = |v: &[f64]| {
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let p = DistributionHandle::discrete(norm(&raw_p)).unwrap();
        let q = DistributionHandle::discrete(norm(&raw_q[..k])).unwrap();
        prop_assert!(finite(i_alpha(&p, &q, a, &cfg()).unwrap()) >= -1e-12);
        prop_assert!(finite(kl(&p, &q, &cfg()).unwrap()) >= -1e-12);
    }
}

#[test]
fn likelihood_and_truncated_sum_share_grid_argmax() {
    use malpha::compact::CompactModel;
    use malpha::fixtures::WORKED_EXAMPLE_SAMPLE;

    let batch = SampleBatch::from_scalars(&WORKED_EXAMPLE_SAMPLE).unwrap();
    let model = CompactModel::default();
    let grid: Vec<f64> = (0..=1000).map(|k| 2.0 + 0.01 * k as f64).collect();
    let argmax = |score: &dyn Fn(f64) -> Extended| {
        let mut best = (grid[0], score(grid[0]));
        for &mu in &grid[1..] {
            let v = score(mu);
            if v > best.1 {
                best = (mu, v);
            }
        }
        best.0
    };
    let big_l = |mu: f64| {
        let p = StudentTParams::univariate(2.0, mu, 1.0).unwrap();
        generalized_log_likelihood(&p, &batch, 2.0, &cfg()).unwrap()
    };
    let small_l = |mu: f64| Extended::Finite(model.objective(&WORKED_EXAMPLE_SAMPLE, mu));
    let a = argmax(&big_l);
    assert_eq!(a, argmax(&small_l));
    assert!((a - 8.46).abs() < 0.006);
    assert!(big_l(8.46) > big_l(6.84));

    let fit = model.maximize(&WORKED_EXAMPLE_SAMPLE).unwrap();
    let best = fit
        .candidates
        .iter()
        .map(|c| c.maximizer)
        .max_by(|a, b| big_l(*a).partial_cmp(&big_l(*b)).unwrap())
        .unwrap();
    assert_eq!(best, fit.mu_hat);
}
