//! Two-sample difference tests.
//!
//! All six tests map `(x1, x2, alpha)` to a [`TestOutcome`]. Resampling tests
//! additionally take a caller-owned [`RngStream`]; the others ignore it when
//! called through [`run_test`].
//!
//! | test           | compares | p-value from                                   |
//! |----------------|----------|------------------------------------------------|
//! | `t_test`       | means    | Student t, pooled variance                     |
//! | `welch`        | means    | Student t, Welch–Satterthwaite dof             |
//! | `mann_whitney` | medians  | normal approximation, tie + continuity corr.   |
//! | `ranked_t`     | medians  | `t_test` on joint midranks                     |
//! | `bootstrap_ci` | means    | none; rejects when the percentile CI excludes 0|
//! | `permutation`  | means    | label relabelings, exact when few enough       |
//!
//! Degenerate inputs never produce NaN: two zero-variance samples with equal
//! means give `p = 1`, with different means `p = 0` and an infinite statistic.

mod parametric;
mod rank;
mod resampling;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{mean, median, variance, CenterMode};
use crate::numerics::RngStream;
use crate::{Error, Result};

pub use parametric::{t_test, welch_test};
pub use rank::{mann_whitney, mann_whitney_exact_p, midranks, ranked_t_test};
pub use resampling::{
    bootstrap_ci_test, n_choose_k, percentile_sorted, permutation_exact_p, permutation_test,
};

/// Default number of bootstrap resamples and of sampled relabelings.
pub const DEFAULT_RESAMPLES: usize = 1_000;
/// Largest number of label splits enumerated exactly.
pub const DEFAULT_EXACT_CAP: u64 = 100_000;
/// Fewest resamples accepted by the resampling tests.
pub const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestId {
    TTest,
    Welch,
    MannWhitney,
    RankedT,
    BootstrapCi,
    Permutation,
}

/// Which central tendency a test compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Means,
    Medians,
}

impl Comparison {
    pub fn center_mode(self) -> CenterMode {
        match self {
            Comparison::Means => CenterMode::Mean,
            Comparison::Medians => CenterMode::Median,
        }
    }
}

/// Assumptions a test relies on for its nominal false positive rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Assumptions {
    pub normal: bool,
    pub equal_variances: bool,
    /// Continuous laws of identical shape and spread.
    pub same_shape: bool,
    /// Only reliable for large samples.
    pub large_samples: bool,
}

impl TestId {
    pub const ALL: [TestId; 6] = [
        TestId::TTest,
        TestId::Welch,
        TestId::MannWhitney,
        TestId::RankedT,
        TestId::BootstrapCi,
        TestId::Permutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestId::TTest => "t_test",
            TestId::Welch => "welch",
            TestId::MannWhitney => "mann_whitney",
            TestId::RankedT => "ranked_t",
            TestId::BootstrapCi => "bootstrap_ci",
            TestId::Permutation => "permutation",
        }
    }

    /// Short column header used in rendered tables.
    pub fn column_label(self) -> &'static str {
        match self {
            TestId::TTest => "t-test",
            TestId::Welch => "Welch",
            TestId::MannWhitney => "Mann-Whit.",
            TestId::RankedT => "r. t-test",
            TestId::BootstrapCi => "boot.",
            TestId::Permutation => "permut.",
        }
    }

    pub fn compares(self) -> Comparison {
        match self {
            TestId::MannWhitney | TestId::RankedT => Comparison::Medians,
            _ => Comparison::Means,
        }
    }

    pub fn assumptions(self) -> Assumptions {
        let none = Assumptions {
            normal: false,
            equal_variances: false,
            same_shape: false,
            large_samples: false,
        };
        match self {
            TestId::TTest => Assumptions {
                normal: true,
                equal_variances: true,
                ..none
            },
            TestId::Welch => Assumptions {
                normal: true,
                ..none
            },
            TestId::MannWhitney | TestId::RankedT => Assumptions {
                same_shape: true,
                ..none
            },
            TestId::BootstrapCi => Assumptions {
                large_samples: true,
                ..none
            },
            TestId::Permutation => Assumptions {
                same_shape: true,
                ..none
            },
        }
    }

    pub fn uses_rng(self) -> bool {
        matches!(self, TestId::BootstrapCi | TestId::Permutation)
    }

    /// Stable small integer used when deriving random stream ids.
    pub fn code(self) -> u64 {
        match self {
            TestId::TTest => 1,
            TestId::Welch => 2,
            TestId::MannWhitney => 3,
            TestId::RankedT => 4,
            TestId::BootstrapCi => 5,
            TestId::Permutation => 6,
        }
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "t_test" | "t" | "ttest" => TestId::TTest,
            "welch" => TestId::Welch,
            "mann_whitney" | "mw" | "mannwhitney" => TestId::MannWhitney,
            "ranked_t" | "ranked_t_test" => TestId::RankedT,
            "bootstrap_ci" | "bootstrap" | "boot" => TestId::BootstrapCi,
            "permutation" | "perm" => TestId::Permutation,
            _ => {
                return Err(Error::domain(format!(
                    "unknown test '{s}' (expected one of t_test, welch, mann_whitney, \
                     ranked_t, bootstrap_ci, permutation)"
                )))
            }
        })
    }
}

/// How relabelings that tie the observed difference are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermutationRule {
    /// `p = #{|Δ̃| ≥ |Δ|} / M`, add-one smoothed when sampled. Valid p-values.
    #[default]
    Inclusive,
    /// `p = #{|Δ̃| > |Δ|} / M`. The observed labeling never counts against
    /// rejection, which makes the test anti-conservative at small N.
    Strict,
}

/// Knobs of the resampling tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestSettings {
    pub n_boot: usize,
    pub n_perm: usize,
    /// Enumerate all label splits when there are at most this many.
    pub exact_cap: u64,
    pub permutation_rule: PermutationRule,
}

impl Default for TestSettings {
    fn default() -> Self {
        Self {
            n_boot: DEFAULT_RESAMPLES,
            n_perm: DEFAULT_RESAMPLES,
            exact_cap: DEFAULT_EXACT_CAP,
            permutation_rule: PermutationRule::Inclusive,
        }
    }
}

impl TestSettings {
    /// Settings of the calibration study: strict permutation counting.
    pub fn reference() -> Self {
        Self {
            permutation_rule: PermutationRule::Strict,
            ..Self::default()
        }
    }
}

/// Result of one test on one pair of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test_id: TestId,
    /// t for the t-type tests, U of the first sample for Mann-Whitney,
    /// the observed mean difference for the resampling tests.
    #[serde(with = "nonfinite")]
    pub statistic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
    pub reject: bool,
    pub alpha: f64,
    pub compares: Comparison,
}

impl TestOutcome {
    pub(crate) fn from_p(test_id: TestId, statistic: f64, p: f64, alpha: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self {
            test_id,
            statistic,
            p_value: Some(p),
            dof: None,
            ci_low: None,
            ci_high: None,
            reject: p < alpha,
            alpha,
            compares: test_id.compares(),
        }
    }
}

/// Differences of central tendencies and the relative effect size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub delta_mean: f64,
    pub delta_median: f64,
    pub sigma_pool: f64,
    pub epsilon_mean: f64,
    pub epsilon_median: f64,
}

/// Relative effect sizes `|Δ| / σ_pool` with `σ_pool = √((s1² + s2²)/2)`.
pub fn effect_estimate(x1: &[f64], x2: &[f64]) -> Result<EffectEstimate> {
    check_sample(x1, 2, "first")?;
    check_sample(x2, 2, "second")?;
    let sigma_pool = (0.5 * (variance(x1) + variance(x2))).sqrt();
    if !(sigma_pool > 0.0) {
        return Err(Error::domain("pooled standard deviation is zero"));
    }
    let delta_mean = mean(x1) - mean(x2);
    let delta_median = median(x1) - median(x2);
    Ok(EffectEstimate {
        delta_mean,
        delta_median,
        sigma_pool,
        epsilon_mean: delta_mean.abs() / sigma_pool,
        epsilon_median: delta_median.abs() / sigma_pool,
    })
}

/// Runs `test` with the given settings.
pub fn run_test(
    test: TestId,
    x1: &[f64],
    x2: &[f64],
    alpha: f64,
    settings: &TestSettings,
    rng: &mut RngStream,
) -> Result<TestOutcome> {
    match test {
        TestId::TTest => t_test(x1, x2, alpha),
        TestId::Welch => welch_test(x1, x2, alpha),
        TestId::MannWhitney => mann_whitney(x1, x2, alpha),
        TestId::RankedT => ranked_t_test(x1, x2, alpha),
        TestId::BootstrapCi => bootstrap_ci_test(x1, x2, alpha, settings.n_boot, rng),
        TestId::Permutation => permutation_test(x1, x2, alpha, settings, rng),
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

pub(crate) fn check_sample(x: &[f64], min_len: usize, which: &str) -> Result<()> {
    if x.len() < min_len {
        return Err(Error::domain(format!(
            "{which} sample has {} values, need at least {min_len}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!(
            "{which} sample contains non-finite values"
        )));
    }
    Ok(())
}

/// Serializes non-finite floats as strings so JSON round-trips them.
pub(crate) mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}
