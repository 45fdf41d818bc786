use algocompare::advisor::{
    bonferroni, compare_learning_curves, describe_curves, recommend_sample_size, Band, Center,
    CurveComparisonCriterion, LearningCurveSet,
};
use algocompare::engine::{run_grid, NoProgress};
use algocompare::numerics::{normal_cdf, student_t_sf};
use algocompare::stattests::{permutation_exact_p, permutation_test, run_test, PermutationRule};
use algocompare::{
    CenterMode, DistributionPair, DistributionSpec, Family, GridConfig, RngStream, TestId,
    TestSettings,
};
use proptest::prelude::*;

fn settings() -> TestSettings {
    TestSettings {
        n_boot: 300,
        n_perm: 300,
        ..TestSettings::default()
    }
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..15, 2usize..15).prop_flat_map(|(n1, n2)| {
        (
            proptest::collection::vec(-100.0f64..100.0, n1),
            proptest::collection::vec(-100.0f64..100.0, n2),
        )
    })
}

fn normal(sigma: f64) -> DistributionSpec {
    DistributionSpec::new(Family::Normal, CenterMode::Mean, sigma, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cdf_and_tail_are_monotone(mut xs in proptest::collection::vec(-40.0f64..40.0, 2..60), dof in 0.5f64..200.0) {
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(normal_cdf(w[0]).unwrap() <= normal_cdf(w[1]).unwrap());
            prop_assert!(student_t_sf(w[0], dof).unwrap() >= student_t_sf(w[1], dof).unwrap());
        }
    }

    #[test]
    fn t_tails_sum_to_one(t in -50.0f64..50.0, dof in 0.2f64..1e4) {
        let s = student_t_sf(t, dof).unwrap() + student_t_sf(-t, dof).unwrap();
        prop_assert!((s - 1.0).abs() <= 1e-12, "{}", s);
    }

    #[test]
    fn shifting_a_spec_shifts_every_draw(seed in any::<u64>(), d in -10.0f64..10.0, which in 0usize..3) {
        let family = [Family::Normal, Family::lognormal(), Family::bimodal()][which].clone();
        let spec = DistributionSpec::new(family, CenterMode::Median, 1.5, 0.0).unwrap();
        let a = spec.sample(50, &mut RngStream::new(seed, 0)).unwrap();
        let b = spec.shifted(d).sample(50, &mut RngStream::new(seed, 0)).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((y - d - x).abs() <= 1e-12 * (1.0 + x.abs() + d.abs()));
        }
    }

    #[test]
    fn empirical_draws_stay_in_centered_support(
        values in proptest::collection::vec(-1e3f64..1e3, 2..30),
        median in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mode = if median { CenterMode::Median } else { CenterMode::Mean };
        prop_assume!(values.iter().any(|v| *v != values[0]));
        let spec = DistributionSpec::empirical(values, None, mode, None).unwrap();
        let support = spec.support().unwrap();
        let s = spec.sample(200, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(s.iter().all(|v| support.contains(v)));
    }

    #[test]
    fn swapping_samples_keeps_decisions((x1, x2) in pair(), seed in any::<u64>()) {
        for t in TestId::ALL {
            let mut r1 = RngStream::new(seed, 0);
            let mut r2 = RngStream::new(seed, 0);
            let a = run_test(t, &x1, &x2, 0.05, &settings(), &mut r1).unwrap();
            let b = run_test(t, &x2, &x1, 0.05, &settings(), &mut r2).unwrap();
            prop_assert_eq!(a.reject, b.reject, "{}", t);
            match (a.p_value, b.p_value) {
                (Some(p), Some(q)) => prop_assert!((p - q).abs() <= 1e-12, "{}: {} vs {}", t, p, q),
                (None, None) => {}
                _ => prop_assert!(false, "{}", t),
            }
            if t == TestId::MannWhitney {
                let n1n2 = (x1.len() * x2.len()) as f64;
                prop_assert!((a.statistic + b.statistic - n1n2).abs() < 1e-9);
            } else {
                prop_assert!((a.statistic + b.statistic).abs() <= 1e-9 * (1.0 + a.statistic.abs()));
            }
            if t == TestId::BootstrapCi {
                let (lo, hi) = (a.ci_low.unwrap(), b.ci_high.unwrap());
                prop_assert!((lo + hi).abs() <= 1e-9 * (1.0 + lo.abs()), "{} vs {}", lo, hi);
            }
        }
    }

    #[test]
    fn rank_tests_ignore_monotone_transforms((x1, x2) in pair()) {
        let f = |v: &f64| v.signum() * v.abs().sqrt() * 3.0 - 7.0;
        let y1: Vec<f64> = x1.iter().map(f).collect();
        let y2: Vec<f64> = x2.iter().map(f).collect();
        for t in [TestId::MannWhitney, TestId::RankedT] {
            let mut rng = RngStream::new(0, 0);
            let a = run_test(t, &x1, &x2, 0.05, &settings(), &mut rng).unwrap();
            let b = run_test(t, &y1, &y2, 0.05, &settings(), &mut rng).unwrap();
            prop_assert_eq!(a.p_value, b.p_value);
        }
    }

    #[test]
    fn sampled_permutation_converges_to_exact(
        x1 in proptest::collection::vec(0i32..20, 4),
        x2 in proptest::collection::vec(0i32..20, 4),
        seed in any::<u64>(),
    ) {
        let x1: Vec<f64> = x1.into_iter().map(f64::from).collect();
        let x2: Vec<f64> = x2.into_iter().map(f64::from).collect();
        let exact = permutation_exact_p(&x1, &x2, PermutationRule::Inclusive).unwrap();
        let sampled = TestSettings { n_perm: 100_000, exact_cap: 0, ..TestSettings::default() };
        let p = permutation_test(&x1, &x2, 0.05, &sampled, &mut RngStream::new(seed, 0))
            .unwrap()
            .p_value
            .unwrap();
        prop_assert!((p - exact).abs() <= 0.01, "{} vs {}", p, exact);
    }

    #[test]
    fn bonferroni_inverts_to_alpha(alpha in 1e-6f64..0.999, n in 1usize..10_000) {
        let back = bonferroni(alpha, n).unwrap() * n as f64;
        // division then multiplication may round by one unit in the last place
        prop_assert!((back - alpha).abs() <= alpha * f64::EPSILON, "{} vs {}", back, alpha);
    }

    #[test]
    fn curve_verdicts_ignore_common_offsets(seed in any::<u64>(), shift in -5.0f64..5.0, c in -1e3f64..1e3) {
        let mut rng = RngStream::new(seed, 0);
        let mut curves = |offset: f64| {
            let runs = (0..6)
                .map(|_| (0..12).map(|_| rng.standard_normal() + offset).collect())
                .collect();
            LearningCurveSet::new((0..12).collect(), runs, "").unwrap()
        };
        let a = curves(0.0);
        let b = curves(shift);
        let criterion = CurveComparisonCriterion {
            n_comparisons: 10,
            n_required: 5,
            alpha: 0.05,
            test: TestId::Welch,
            settings: TestSettings::default(),
        };
        let r1 = compare_learning_curves(&a, &b, &criterion, &mut RngStream::new(1, 1)).unwrap();
        let r2 = compare_learning_curves(&a.offset(c), &b.offset(c), &criterion, &mut RngStream::new(1, 1)).unwrap();
        prop_assert_eq!(r1.verdict, r2.verdict);
        prop_assert_eq!(r1.n_rejections, r2.n_rejections);
    }

    #[test]
    fn median_run_is_stable_under_monotone_transforms(
        runs in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 5), 3..10)
            .prop_filter("odd number of runs", |r| r.len() % 2 == 1),
    ) {
        let set = LearningCurveSet::new((0..5).collect(), runs.clone(), "").unwrap();
        let warped = LearningCurveSet::new(
            (0..5).collect(),
            runs.iter().map(|r| r.iter().map(|v| v.exp()).collect()).collect(),
            "",
        )
        .unwrap();
        let a = describe_curves(&set, Band::Sd, Center::Median).unwrap();
        let b = describe_curves(&warped, Band::Sd, Center::Median).unwrap();
        for (i, (ra, rb)) in a.iter().zip(&b).enumerate() {
            let idx_a = runs.iter().position(|r| r[i] == ra.center);
            let idx_b = warped.runs.iter().position(|r| r[i] == rb.center);
            prop_assert_eq!(idx_a, idx_b);
            prop_assert!((rb.center.ln() - ra.center).abs() < 1e-12);
        }
    }
}

/// Sample median and its standard error from the density at the median.
fn median_of(xs: &mut [f64]) -> f64 {
    let mid = xs.len() / 2;
    *xs.select_nth_unstable_by(mid, f64::total_cmp).1
}

#[test]
fn families_are_standardized_in_ten_million_draws() {
    let n = 10_000_000usize;
    let phi0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let sigma_ln = 1.0f64;
    let ln_sd = ((sigma_ln.powi(2).exp() - 1.0) * sigma_ln.powi(2).exp()).sqrt();
    let d = 0.9f64;
    let s = (1.0 - d * d).sqrt();
    // raw density at the raw median, and raw sd
    let cases = [
        (Family::Normal, phi0, 1.0),
        (Family::lognormal(), phi0 / sigma_ln, ln_sd),
        (
            Family::bimodal(),
            (-(d / s).powi(2) / 2.0).exp() * phi0 / s,
            1.0,
        ),
    ];
    for (family, raw_density, raw_sd) in cases {
        for mode in [CenterMode::Mean, CenterMode::Median] {
            let sigma = 1.7;
            let spec = DistributionSpec::new(family.clone(), mode, sigma, 0.0).unwrap();
            let mut xs = spec
                .sample(n, &mut RngStream::new(77, 0))
                .unwrap()
                .into_values();
            let nf = n as f64;
            let mean = xs.iter().sum::<f64>() / nf;
            let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
            let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
            let sd = m2.sqrt();
            let se_sd = ((m4 - m2 * m2) / nf).sqrt() / (2.0 * sd);
            assert!(
                (sd - sigma).abs() <= 4.0 * se_sd,
                "{family:?} {mode:?}: sd {sd}"
            );
            let center = match mode {
                CenterMode::Mean => {
                    let se = sd / nf.sqrt();
                    assert!(mean.abs() <= 4.0 * se, "{family:?}: mean {mean} se {se}");
                    mean
                }
                CenterMode::Median => {
                    let density = raw_density * raw_sd / sigma;
                    let se = 1.0 / (2.0 * density * nf.sqrt());
                    let med = median_of(&mut xs);
                    assert!(med.abs() <= 4.0 * se, "{family:?}: median {med} se {se}");
                    med
                }
            };
            let _ = center;
        }
    }
}

#[test]
fn bimodal_draws_are_symmetric() {
    let spec = DistributionSpec::new(Family::bimodal(), CenterMode::Mean, 1.0, 0.0).unwrap();
    let xs = spec.sample(1_000_000, &mut RngStream::new(5, 5)).unwrap();
    let n = xs.len() as f64;
    let mean = xs.mean();
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let skew = m3 / m2.powf(1.5);
    assert!(skew.abs() <= 4.0 * (6.0 / n).sqrt(), "skewness {skew}");
}

#[test]
fn null_calibration_and_uniform_p_values() {
    let mut rng = RngStream::new(123, 0);
    let mut ps: Vec<f64> = (0..10_000)
        .map(|_| {
            let x1: Vec<f64> = (0..20).map(|_| rng.standard_normal()).collect();
            let x2: Vec<f64> = (0..20).map(|_| rng.standard_normal()).collect();
            run_test(TestId::TTest, &x1, &x2, 0.05, &settings(), &mut rng)
                .unwrap()
                .p_value
                .unwrap()
        })
        .collect();
    ps.sort_by(f64::total_cmp);
    let n = ps.len() as f64;
    let sup = ps
        .iter()
        .enumerate()
        .map(|(i, p)| ((i + 1) as f64 / n - p).abs().max((p - i as f64 / n).abs()))
        .fold(0.0, f64::max);
    assert!(sup <= 0.02, "KS distance {sup}");

    let config = GridConfig {
        pairs: vec![DistributionPair::new("n/n", normal(1.0), normal(1.0))],
        tests: vec![TestId::TTest, TestId::Welch],
        effect_sizes: vec![0.0],
        sample_sizes: vec![30],
        n_repetitions: 10_000,
        alpha: 0.05,
        base_seed: 31,
        settings: TestSettings::reference(),
    };
    for c in run_grid(&config, &NoProgress).unwrap().cells {
        assert!((c.rejection_rate - 0.05).abs() <= 0.009, "{c:?}");
    }
}

#[test]
fn power_grows_with_sample_size() {
    let config = GridConfig {
        pairs: vec![DistributionPair::new("n/n", normal(1.0), normal(1.0))],
        tests: vec![TestId::TTest],
        effect_sizes: vec![0.5, 1.0],
        sample_sizes: vec![2, 3, 5, 10, 15, 20, 30, 40, 50, 100],
        n_repetitions: 2_000,
        alpha: 0.05,
        base_seed: 8,
        settings: TestSettings::reference(),
    };
    let g = run_grid(&config, &NoProgress).unwrap();
    for e in 0..2 {
        for n in 1..config.sample_sizes.len() {
            let (a, b) = (g.cell(0, 0, e, n - 1), g.cell(0, 0, e, n));
            let slack = 2.0 * (a.standard_error.powi(2) + b.standard_error.powi(2)).sqrt();
            assert!(
                b.rejection_rate >= a.rejection_rate - slack,
                "{a:?} -> {b:?}"
            );
        }
    }
}

#[test]
fn larger_power_targets_never_need_fewer_seeds() {
    let pair = DistributionPair::new("n/n", normal(1.0), normal(1.0));
    let mut last = 0;
    for target in [0.3, 0.5, 0.7, 0.8, 0.9, 0.95] {
        let r = recommend_sample_size(
            1.0,
            target,
            TestId::Welch,
            &pair,
            0.05,
            1_000,
            4,
            &TestSettings::reference(),
        )
        .unwrap();
        let n = r.sample_size.unwrap_or(usize::MAX);
        assert!(n >= last, "target {target}: {n} < {last}");
        last = n;
    }
    let huge = recommend_sample_size(
        12.0,
        0.8,
        TestId::TTest,
        &pair,
        0.05,
        1_000,
        4,
        &TestSettings::reference(),
    )
    .unwrap();
    assert!(huge.sample_size.unwrap() <= 5);
    assert!(recommend_sample_size(
        0.0,
        0.8,
        TestId::TTest,
        &pair,
        0.05,
        10,
        4,
        &TestSettings::reference()
    )
    .is_err());
    assert!(recommend_sample_size(
        1.0,
        1.0,
        TestId::TTest,
        &pair,
        0.05,
        10,
        4,
        &TestSettings::reference()
    )
    .is_err());
}
