use std::cmp::Ordering;

use super::{
    check_alpha, check_sample, PermutationRule, TestId, TestOutcome, TestSettings, MIN_RESAMPLES,
};
use crate::distributions::mean;
use crate::numerics::RngStream;
use crate::{Error, Result};

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn n_choose_k(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `f` with the sum of every size-`k` subset of `values`.
pub(crate) fn for_each_subset_sum<F: FnMut(f64)>(values: &[f64], k: usize, mut f: F) {
    fn walk<F: FnMut(f64)>(values: &[f64], start: usize, k: usize, acc: f64, f: &mut F) {
        if k == 0 {
            f(acc);
            return;
        }
        for i in start..=values.len() - k {
            walk(values, i + 1, k - 1, acc + values[i], f);
        }
    }
    if k <= values.len() {
        walk(values, 0, k, 0.0, &mut f);
    }
}

/// Percentile of sorted data by linear interpolation between order
/// statistics; `q` is a fraction in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of empty data");
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Total order on samples so that resampling does not depend on which one
/// is passed first.
fn canonical_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn resample_mean(x: &[f64], rng: &mut RngStream) -> f64 {
    let mut s = 0.0;
    for _ in 0..x.len() {
        s += x[rng.index(x.len())];
    }
    s / x.len() as f64
}

/// Percentile bootstrap confidence interval on the mean difference; rejects
/// when the `100(1-α)%` interval excludes zero.
pub fn bootstrap_ci_test(
    x1: &[f64],
    x2: &[f64],
    alpha: f64,
    n_boot: usize,
    rng: &mut RngStream,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    check_sample(x1, 2, "first")?;
    check_sample(x2, 2, "second")?;
    if n_boot < MIN_RESAMPLES {
        return Err(Error::config(format!(
            "n_boot must be at least {MIN_RESAMPLES}, got {n_boot}"
        )));
    }
    let flip = canonical_cmp(x1, x2) == Ordering::Greater;
    let (a, b) = if flip { (x2, x1) } else { (x1, x2) };
    let mut diffs = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        let d = resample_mean(a, rng) - resample_mean(b, rng);
        diffs.push(if flip { -d } else { d });
    }
    diffs.sort_by(f64::total_cmp);
    let lo = percentile_sorted(&diffs, alpha / 2.0);
    let hi = percentile_sorted(&diffs, 1.0 - alpha / 2.0);
    Ok(TestOutcome {
        test_id: TestId::BootstrapCi,
        statistic: mean(x1) - mean(x2),
        p_value: None,
        dof: None,
        ci_low: Some(lo),
        ci_high: Some(hi),
        reject: lo > 0.0 || hi < 0.0,
        alpha,
        compares: TestId::BootstrapCi.compares(),
    })
}

/// Label-relabeling geometry shared by the exact and sampled modes.
struct Relabeling {
    pool: Vec<f64>,
    k: usize,
    rest: usize,
    total: f64,
    observed: f64,
    tol: f64,
    rule: PermutationRule,
}

impl Relabeling {
    fn new(x1: &[f64], x2: &[f64], rule: PermutationRule) -> Self {
        let mut pool = Vec::with_capacity(x1.len() + x2.len());
        pool.extend_from_slice(x1);
        pool.extend_from_slice(x2);
        pool.sort_by(f64::total_cmp);
        let k = x1.len().min(x2.len());
        let rest = pool.len() - k;
        let total = pool.iter().sum();
        let max_abs = pool.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            tol: 8.0 * pool.len() as f64 * f64::EPSILON * max_abs,
            observed: (mean(x1) - mean(x2)).abs(),
            pool,
            k,
            rest,
            total,
            rule,
        }
    }

    fn tied(&self) -> bool {
        self.pool[0] == self.pool[self.pool.len() - 1]
    }

    #[inline]
    fn counts(&self, subset_sum: f64) -> bool {
        let d = (subset_sum / self.k as f64 - (self.total - subset_sum) / self.rest as f64).abs();
        match self.rule {
            PermutationRule::Inclusive => d >= self.observed - self.tol,
            PermutationRule::Strict => d > self.observed + self.tol,
        }
    }

    fn exact(&self) -> f64 {
        let mut extreme = 0u64;
        for_each_subset_sum(&self.pool, self.k, |s| {
            if self.counts(s) {
                extreme += 1;
            }
        });
        extreme as f64 / n_choose_k(self.pool.len(), self.k) as f64
    }

    fn sampled(&mut self, n_perm: usize, rng: &mut RngStream) -> f64 {
        let mut work = self.pool.clone();
        let mut extreme = 0usize;
        for _ in 0..n_perm {
            let s: f64 = rng.choose_subset(&mut work, self.k).iter().sum();
            if self.counts(s) {
                extreme += 1;
            }
        }
        match self.rule {
            PermutationRule::Inclusive => (extreme + 1) as f64 / (n_perm + 1) as f64,
            PermutationRule::Strict => extreme as f64 / n_perm as f64,
        }
    }
}

/// Exact permutation p-value over all label splits.
pub fn permutation_exact_p(x1: &[f64], x2: &[f64], rule: PermutationRule) -> Result<f64> {
    check_sample(x1, 1, "first")?;
    check_sample(x2, 1, "second")?;
    let r = Relabeling::new(x1, x2, rule);
    if r.tied() {
        return Ok(1.0);
    }
    Ok(r.exact())
}

/// Permutation test on the absolute mean difference.
///
/// All `C(N1+N2, N1)` splits are enumerated when there are at most
/// `settings.exact_cap` of them; otherwise `settings.n_perm` random
/// relabelings are drawn. A pool of identical values gives `p = 1`.
pub fn permutation_test(
    x1: &[f64],
    x2: &[f64],
    alpha: f64,
    settings: &TestSettings,
    rng: &mut RngStream,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    check_sample(x1, 2, "first")?;
    check_sample(x2, 2, "second")?;
    let mut r = Relabeling::new(x1, x2, settings.permutation_rule);
    let splits = n_choose_k(r.pool.len(), r.k);
    let p = if r.tied() {
        1.0
    } else if splits <= settings.exact_cap {
        r.exact()
    } else {
        if settings.n_perm < MIN_RESAMPLES {
            return Err(Error::config(format!(
                "n_perm must be at least {MIN_RESAMPLES}, got {}",
                settings.n_perm
            )));
        }
        r.sampled(settings.n_perm, rng)
    };
    Ok(TestOutcome::from_p(
        TestId::Permutation,
        mean(x1) - mean(x2),
        p,
        alpha,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(n_choose_k(4, 2), 6);
        assert_eq!(n_choose_k(20, 10), 184_756);
        assert_eq!(n_choose_k(3, 5), 0);
        assert_eq!(n_choose_k(200, 100), u64::MAX);
    }

    #[test]
    fn subset_sums_cover_all_subsets() {
        let mut sums = Vec::new();
        for_each_subset_sum(&[1.0, 2.0, 4.0, 8.0], 2, |s| sums.push(s));
        sums.sort_by(f64::total_cmp);
        assert_eq!(sums, vec![3.0, 5.0, 6.0, 9.0, 10.0, 12.0]);
    }

    #[test]
    fn interpolated_percentiles() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert!((percentile_sorted(&v, 0.1) - 1.9).abs() < 1e-12);
        assert!((percentile_sorted(&v, 0.9) - 9.1).abs() < 1e-12);
        assert_eq!(percentile_sorted(&v, 0.0), 1.0);
        assert_eq!(percentile_sorted(&v, 1.0), 10.0);
    }

    #[test]
    fn bootstrap_constant_and_separated() {
        let mut rng = RngStream::new(1, 1);
        let c = [4.0; 6];
        let o = bootstrap_ci_test(&c, &c, 0.05, 1000, &mut rng).unwrap();
        assert_eq!(
            (o.ci_low, o.ci_high, o.reject),
            (Some(0.0), Some(0.0), false)
        );

        let hi = [100.0, 101.0, 102.0, 103.0];
        let lo = [0.0, 1.0, 2.0, 3.0];
        let o = bootstrap_ci_test(&hi, &lo, 0.05, 1000, &mut rng).unwrap();
        assert!(o.reject && o.ci_low.unwrap() > 0.0);
        assert!(bootstrap_ci_test(&hi, &lo, 0.05, 99, &mut rng).is_err());
    }

    #[test]
    fn permutation_exact_example() {
        let mut rng = RngStream::new(0, 0);
        let o = permutation_test(
            &[1.0, 2.0],
            &[10.0, 20.0],
            0.05,
            &TestSettings::default(),
            &mut rng,
        )
        .unwrap();
        assert!((o.p_value.unwrap() - 2.0 / 6.0).abs() < 1e-15);
        assert!(!o.reject);
        // strict counting: no split is more extreme than the observed one
        let strict = TestSettings::reference();
        let o = permutation_test(&[1.0, 2.0], &[10.0, 20.0], 0.05, &strict, &mut rng).unwrap();
        assert_eq!(o.p_value, Some(0.0));
        assert!(o.reject);
    }

    #[test]
    fn permutation_constant_samples() {
        let mut rng = RngStream::new(0, 0);
        for settings in [TestSettings::default(), TestSettings::reference()] {
            let o = permutation_test(&[3.0; 4], &[3.0; 4], 0.05, &settings, &mut rng).unwrap();
            assert_eq!((o.p_value, o.reject), (Some(1.0), false));
        }
    }

    #[test]
    fn sampled_mode_validates_and_smooths() {
        let x1: Vec<f64> = (0..12).map(f64::from).collect();
        let x2: Vec<f64> = (100..112).map(f64::from).collect();
        let mut rng = RngStream::new(5, 5);
        let settings = TestSettings {
            n_perm: 500,
            ..TestSettings::default()
        };
        let o = permutation_test(&x1, &x2, 0.05, &settings, &mut rng).unwrap();
        // only the observed split (and its mirror) reach the observed gap
        assert!(o.p_value.unwrap() >= 1.0 / 501.0);
        assert!(o.reject);
        let bad = TestSettings {
            n_perm: 10,
            ..TestSettings::default()
        };
        assert!(permutation_test(&x1, &x2, 0.05, &bad, &mut rng).is_err());
    }
}
