//! Practical guidance: how many seeds to run, multiple-comparison
//! corrections, and whole-learning-curve comparisons.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{mean, median, variance};
use crate::engine::{power_table, DistributionPair, SAMPLE_SIZE_LADDER};
use crate::numerics::RngStream;
use crate::stattests::{
    check_alpha, percentile_sorted, run_test, Comparison, TestId, TestOutcome, TestSettings,
};
use crate::{Error, Result};

/// Bonferroni-corrected significance level `α / n_c`.
pub fn bonferroni(alpha: f64, n_comparisons: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if n_comparisons == 0 {
        return Err(Error::domain("number of comparisons must be at least 1"));
    }
    Ok(alpha / n_comparisons as f64)
}

/// Estimated power at one rung of the sample-size ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub sample_size: usize,
    pub power: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeRecommendation {
    pub test: TestId,
    pub expected_epsilon: f64,
    pub target_power: f64,
    /// Smallest rung reaching the target, `None` if no rung does.
    pub sample_size: Option<usize>,
    pub power: Option<f64>,
    pub standard_error: Option<f64>,
    pub ladder: Vec<LadderPoint>,
}

/// Smallest sample size on the standard ladder whose simulated power
/// reaches `target_power` for an effect of `expected_epsilon`.
#[allow(clippy::too_many_arguments)]
pub fn recommend_sample_size(
    expected_epsilon: f64,
    target_power: f64,
    test: TestId,
    pair: &DistributionPair,
    alpha: f64,
    n_repetitions: usize,
    base_seed: u64,
    settings: &TestSettings,
) -> Result<SampleSizeRecommendation> {
    if !(expected_epsilon.is_finite() && expected_epsilon > 0.0) {
        return Err(Error::domain(format!(
            "expected effect size must be positive, got {expected_epsilon}"
        )));
    }
    if !(target_power > 0.0 && target_power < 1.0) {
        return Err(Error::domain(format!(
            "target power must lie in (0, 1), got {target_power}"
        )));
    }
    let table = power_table(
        pair,
        &[test],
        &[expected_epsilon],
        &SAMPLE_SIZE_LADDER,
        n_repetitions,
        alpha,
        base_seed,
        settings,
    )?;
    let ladder: Vec<LadderPoint> = table.blocks[0]
        .rows
        .iter()
        .map(|r| LadderPoint {
            sample_size: r.sample_size,
            power: r.power[0],
            standard_error: r.standard_error[0],
        })
        .collect();
    let hit = ladder.iter().find(|p| p.power >= target_power);
    Ok(SampleSizeRecommendation {
        test,
        expected_epsilon,
        target_power,
        sample_size: hit.map(|p| p.sample_size),
        power: hit.map(|p| p.power),
        standard_error: hit.map(|p| p.standard_error),
        ladder,
    })
}

/// Performance of several runs evaluated at common environment steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurveSet {
    pub eval_steps: Vec<u64>,
    /// One sequence per run, aligned with `eval_steps`.
    pub runs: Vec<Vec<f64>>,
    #[serde(default)]
    pub label: String,
}

impl LearningCurveSet {
    pub fn new(
        eval_steps: Vec<u64>,
        runs: Vec<Vec<f64>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        for (i, run) in runs.iter().enumerate() {
            if run.len() != eval_steps.len() {
                problems.push(format!(
                    "run {i} has {} values for {} steps",
                    run.len(),
                    eval_steps.len()
                ));
            }
            if let Some(j) = run.iter().position(|v| !v.is_finite()) {
                problems.push(format!("run {i} has a non-finite value at step index {j}"));
            }
        }
        if problems.is_empty() {
            Ok(Self {
                eval_steps,
                runs,
                label: label.into(),
            })
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn n_runs(&self) -> usize {
        self.runs.len()
    }

    /// Values of all runs at step index `i`.
    pub fn at(&self, i: usize) -> Vec<f64> {
        self.runs.iter().map(|r| r[i]).collect()
    }

    /// Adds `c` to every value.
    pub fn offset(&self, c: f64) -> Self {
        Self {
            eval_steps: self.eval_steps.clone(),
            runs: self
                .runs
                .iter()
                .map(|r| r.iter().map(|v| v + c).collect())
                .collect(),
            label: self.label.clone(),
        }
    }
}

/// Decision rule for comparing two learning curves: test each of the last
/// `n_comparisons` steps at `α·N_crit/N_c`, and conclude when more than
/// `n_required` of them reject.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveComparisonCriterion {
    pub n_comparisons: usize,
    pub n_required: usize,
    pub alpha: f64,
    pub test: TestId,
    #[serde(default)]
    pub settings: TestSettings,
}

impl CurveComparisonCriterion {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_comparisons == 0 {
            problems.push("n_comparisons must be at least 1".to_string());
        }
        if self.n_required == 0 {
            problems.push("n_required must be at least 1".to_string());
        }
        if self.n_required > self.n_comparisons {
            problems.push(format!(
                "n_required ({}) exceeds n_comparisons ({})",
                self.n_required, self.n_comparisons
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            problems.push(format!("alpha {} is outside (0, 1)", self.alpha));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Per-step significance level.
    pub fn corrected_alpha(&self) -> f64 {
        self.alpha * self.n_required as f64 / self.n_comparisons as f64
    }

    /// Approximate chance of meeting the criterion under the null when each
    /// step is tested at `level`: `level · N_c / N_crit`.
    pub fn family_wise_error(&self, level: f64) -> f64 {
        level * self.n_comparisons as f64 / self.n_required as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ABetter,
    BBetter,
    NoConclusion,
    /// Enough steps reject, but not all in the same direction.
    Inconsistent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ABetter => "a better than b",
            Verdict::BBetter => "b better than a",
            Verdict::NoConclusion => "no conclusion",
            Verdict::Inconsistent => "inconsistent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepComparison {
    pub step: u64,
    /// Center of `a` minus center of `b`, using the tendency the test compares.
    pub difference: f64,
    pub outcome: TestOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveComparison {
    pub criterion: CurveComparisonCriterion,
    pub corrected_alpha: f64,
    pub n_rejections: usize,
    /// Median of `difference` over the rejecting steps.
    pub median_difference: Option<f64>,
    pub verdict: Verdict,
    pub steps: Vec<StepComparison>,
}

fn center(comparison: Comparison, x: &[f64]) -> f64 {
    match comparison {
        Comparison::Means => mean(x),
        Comparison::Medians => median(x),
    }
}

/// Compares the last `N_c` evaluation steps of two curve sets.
pub fn compare_learning_curves(
    a: &LearningCurveSet,
    b: &LearningCurveSet,
    criterion: &CurveComparisonCriterion,
    rng: &mut RngStream,
) -> Result<CurveComparison> {
    criterion.validate()?;
    let n_c = criterion.n_comparisons;
    let (la, lb) = (a.eval_steps.len(), b.eval_steps.len());
    if la < n_c || lb < n_c {
        return Err(Error::config(format!(
            "n_comparisons ({n_c}) exceeds the number of evaluation steps ({})",
            la.min(lb)
        )));
    }
    let (sa, sb) = (&a.eval_steps[la - n_c..], &b.eval_steps[lb - n_c..]);
    let mismatched: Vec<(u64, u64)> = sa
        .iter()
        .zip(sb)
        .filter(|(x, y)| x != y)
        .map(|(x, y)| (*x, *y))
        .collect();
    if !mismatched.is_empty() {
        return Err(Error::Alignment(mismatched));
    }
    for set in [a, b] {
        if set.n_runs() < 2 {
            return Err(Error::domain(format!(
                "curve set '{}' has {} run(s), need at least 2",
                set.label,
                set.n_runs()
            )));
        }
    }

    let level = criterion.corrected_alpha();
    let compares = criterion.test.compares();
    let mut steps = Vec::with_capacity(n_c);
    for k in 0..n_c {
        let (xa, xb) = (a.at(la - n_c + k), b.at(lb - n_c + k));
        let outcome = run_test(criterion.test, &xa, &xb, level, &criterion.settings, rng)?;
        steps.push(StepComparison {
            step: sa[k],
            difference: center(compares, &xa) - center(compares, &xb),
            outcome,
        });
    }

    let rejected: Vec<f64> = steps
        .iter()
        .filter(|s| s.outcome.reject)
        .map(|s| s.difference)
        .collect();
    let median_difference = (!rejected.is_empty()).then(|| median(&rejected));
    let verdict = if rejected.len() <= criterion.n_required {
        Verdict::NoConclusion
    } else if rejected.iter().all(|d| *d > 0.0) {
        Verdict::ABetter
    } else if rejected.iter().all(|d| *d < 0.0) {
        Verdict::BBetter
    } else {
        Verdict::Inconsistent
    };
    Ok(CurveComparison {
        criterion: *criterion,
        corrected_alpha: level,
        n_rejections: rejected.len(),
        median_difference,
        verdict,
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Band {
    /// Center ± sample standard deviation.
    Sd,
    /// Center ± standard error of the mean.
    Se,
    /// Percentile range, bounds given in percent.
    Interpercentile { low: f64, high: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Center {
    Mean,
    Median,
}

/// Summary of one evaluation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: u64,
    pub center: f64,
    pub low: f64,
    pub high: f64,
}

/// Per-step center and band of a set of learning curves.
pub fn describe_curves(
    set: &LearningCurveSet,
    band: Band,
    center: Center,
) -> Result<Vec<StepSummary>> {
    if set.n_runs() == 0 {
        return Err(Error::domain("curve set has no runs"));
    }
    if let Band::Interpercentile { low, high } = band {
        if !(0.0 <= low && low < high && high <= 100.0) {
            return Err(Error::config(format!(
                "percentile band [{low}, {high}] must satisfy 0 <= low < high <= 100"
            )));
        }
    }
    Ok(set
        .eval_steps
        .iter()
        .enumerate()
        .map(|(i, &step)| {
            let mut x = set.at(i);
            let c = match center {
                Center::Mean => mean(&x),
                Center::Median => median(&x),
            };
            let (low, high) = match band {
                Band::Sd => {
                    let s = variance(&x).sqrt();
                    (c - s, c + s)
                }
                Band::Se => {
                    let s = (variance(&x) / x.len() as f64).sqrt();
                    (c - s, c + s)
                }
                Band::Interpercentile { low, high } => {
                    x.sort_by(f64::total_cmp);
                    (
                        percentile_sorted(&x, low / 100.0),
                        percentile_sorted(&x, high / 100.0),
                    )
                }
            };
            StepSummary {
                step,
                center: c,
                low,
                high,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curves(runs: usize, steps: usize, seed: u64, offset: f64) -> LearningCurveSet {
        let mut rng = RngStream::new(seed, 0);
        let eval_steps = (1..=steps as u64).map(|s| s * 1000).collect();
        let data = (0..runs)
            .map(|_| (0..steps).map(|_| rng.standard_normal() + offset).collect())
            .collect();
        LearningCurveSet::new(eval_steps, data, "c").unwrap()
    }

    fn criterion(n_c: usize, n_crit: usize) -> CurveComparisonCriterion {
        CurveComparisonCriterion {
            n_comparisons: n_c,
            n_required: n_crit,
            alpha: 0.05,
            test: TestId::Welch,
            settings: TestSettings::default(),
        }
    }

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni(0.05, 1).unwrap(), 0.05);
        assert!((bonferroni(0.05, 5).unwrap() - 0.01).abs() < 1e-18);
        assert!(bonferroni(0.05, 0).is_err());
    }

    #[test]
    fn corrected_alpha_halves_for_half_required() {
        let c = criterion(100, 50);
        assert_eq!(c.corrected_alpha(), 0.025);
        assert!((c.family_wise_error(c.corrected_alpha()) - 0.05).abs() < 1e-15);
        assert!(criterion(10, 11).validate().is_err());
    }

    #[test]
    fn identical_sets_give_no_conclusion() {
        let a = curves(5, 20, 1, 0.0);
        let mut rng = RngStream::new(0, 0);
        let r = compare_learning_curves(&a, &a, &criterion(20, 10), &mut rng).unwrap();
        assert_eq!(r.n_rejections, 0);
        assert_eq!(r.verdict, Verdict::NoConclusion);
        assert_eq!(r.median_difference, None);
    }

    #[test]
    fn separated_sets_favour_the_higher_one() {
        let a = curves(10, 20, 1, 0.0);
        let b = curves(10, 20, 2, 10.0);
        let mut rng = RngStream::new(0, 0);
        let r = compare_learning_curves(&a, &b, &criterion(20, 10), &mut rng).unwrap();
        assert_eq!(r.n_rejections, 20);
        assert_eq!(r.verdict, Verdict::BBetter);
        let r = compare_learning_curves(&b, &a, &criterion(20, 10), &mut rng).unwrap();
        assert_eq!(r.verdict, Verdict::ABetter);
    }

    #[test]
    fn mixed_directions_are_inconsistent() {
        let mut a = curves(10, 4, 1, 0.0);
        for run in &mut a.runs {
            run[0] += 50.0;
            run[1] += 50.0;
            run[2] -= 50.0;
            run[3] -= 50.0;
        }
        let b = curves(10, 4, 2, 0.0);
        let mut rng = RngStream::new(0, 0);
        let r = compare_learning_curves(&a, &b, &criterion(4, 2), &mut rng).unwrap();
        assert_eq!(r.n_rejections, 4);
        assert_eq!(r.verdict, Verdict::Inconsistent);
    }

    #[test]
    fn misaligned_steps_are_listed() {
        let a = curves(3, 5, 1, 0.0);
        let mut b = curves(3, 5, 2, 0.0);
        b.eval_steps[3] = 4001;
        let mut rng = RngStream::new(0, 0);
        match compare_learning_curves(&a, &b, &criterion(3, 1), &mut rng) {
            Err(Error::Alignment(v)) => assert_eq!(v, vec![(4000, 4001)]),
            other => panic!("expected alignment error, got {other:?}"),
        }
        // only the compared suffix has to agree
        b.eval_steps[3] = 4000;
        b.eval_steps[0] = 7;
        assert!(compare_learning_curves(&a, &b, &criterion(3, 1), &mut rng).is_ok());
    }

    #[test]
    fn ragged_runs_are_rejected() {
        assert!(LearningCurveSet::new(vec![1, 2], vec![vec![1.0]], "x").is_err());
        assert!(LearningCurveSet::new(vec![1], vec![vec![f64::NAN]], "x").is_err());
    }

    #[test]
    fn describe_examples() {
        let set = LearningCurveSet::new(
            vec![10, 20],
            vec![vec![-1.0, -1.0], vec![0.0, 0.0], vec![1.0, 1.0]],
            "sym",
        )
        .unwrap();
        for row in describe_curves(&set, Band::Sd, Center::Mean).unwrap() {
            assert_eq!((row.center, row.low, row.high), (0.0, -1.0, 1.0));
        }

        let single = LearningCurveSet::new(vec![1, 2], vec![vec![3.0, 4.0]], "one").unwrap();
        for band in [
            Band::Sd,
            Band::Se,
            Band::Interpercentile {
                low: 10.0,
                high: 90.0,
            },
        ] {
            let rows = describe_curves(&single, band, Center::Median).unwrap();
            assert_eq!((rows[1].center, rows[1].low, rows[1].high), (4.0, 4.0, 4.0));
        }

        let ten =
            LearningCurveSet::new(vec![0], (1..=10).map(|v| vec![v as f64]).collect(), "").unwrap();
        let band = Band::Interpercentile {
            low: 10.0,
            high: 90.0,
        };
        let row = describe_curves(&ten, band, Center::Mean).unwrap()[0];
        assert!((row.low - 1.9).abs() < 1e-12 && (row.high - 9.1).abs() < 1e-12);

        let reversed = Band::Interpercentile {
            low: 90.0,
            high: 10.0,
        };
        assert!(matches!(
            describe_curves(&ten, reversed, Center::Mean),
            Err(Error::Config(_))
        ));
    }
}
