//! Family-wise error rates of the multiple-comparison procedures, estimated
//! by simulating the whole procedure under the null.

use algocompare::advisor::{
    bonferroni, compare_learning_curves, CurveComparisonCriterion, LearningCurveSet, Verdict,
};
use algocompare::stattests::welch_test;
use algocompare::{RngStream, TestId, TestSettings};

fn bound(rate: f64, reps: usize) -> f64 {
    let se = (rate * (1.0 - rate) / reps as f64)
        .sqrt()
        .max((0.05 * 0.95 / reps as f64).sqrt());
    0.05 + 4.0 * se
}

#[test]
fn bonferroni_controls_any_rejection() {
    let level = bonferroni(0.05, 10).unwrap();
    assert_eq!(level, 0.005);
    let reps = 10_000;
    let mut rng = RngStream::new(2, 0);
    let mut any = 0;
    for _ in 0..reps {
        let mut hit = false;
        for _ in 0..10 {
            let x1: Vec<f64> = (0..10).map(|_| rng.standard_normal()).collect();
            let x2: Vec<f64> = (0..10).map(|_| rng.standard_normal()).collect();
            hit |= welch_test(&x1, &x2, level).unwrap().reject;
        }
        any += usize::from(hit);
    }
    let rate = any as f64 / reps as f64;
    assert!(rate <= bound(rate, reps), "FWER {rate}");
}

#[test]
fn curve_criterion_rarely_declares_a_winner_under_the_null() {
    let reps = 1_000;
    let criterion = CurveComparisonCriterion {
        n_comparisons: 100,
        n_required: 50,
        alpha: 0.05,
        test: TestId::Welch,
        settings: TestSettings::default(),
    };
    let steps: Vec<u64> = (1..=100).map(|s| s * 5_000).collect();
    let mut rng = RngStream::new(3, 0);
    let curves = |rng: &mut RngStream| {
        let runs = (0..10)
            .map(|_| (0..100).map(|_| rng.standard_normal()).collect())
            .collect();
        LearningCurveSet::new(steps.clone(), runs, "null").unwrap()
    };
    let mut false_verdicts = 0;
    for _ in 0..reps {
        let a = curves(&mut rng);
        let b = curves(&mut rng);
        let r = compare_learning_curves(&a, &b, &criterion, &mut rng).unwrap();
        if matches!(r.verdict, Verdict::ABetter | Verdict::BBetter) {
            false_verdicts += 1;
        }
    }
    let rate = false_verdicts as f64 / reps as f64;
    assert!(rate <= bound(rate, reps), "false verdict rate {rate}");
}
