use super::parametric::pooled;
use super::resampling::{for_each_subset_sum, n_choose_k};
use super::{check_alpha, check_sample, TestId, TestOutcome, DEFAULT_EXACT_CAP};
use crate::numerics::phi;
use crate::{Error, Result};

/// Joint midranks (1-based, ties averaged) and the tie term `Σ (t³ - t)`.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share the average of ranks i+1..=j
        let rank = 0.5 * (i + 1 + j) as f64;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

fn joint_ranks(x1: &[f64], x2: &[f64]) -> (Vec<f64>, f64) {
    let mut all = Vec::with_capacity(x1.len() + x2.len());
    all.extend_from_slice(x1);
    all.extend_from_slice(x2);
    midranks(&all)
}

/// Wilcoxon-Mann-Whitney rank-sum test, two-sided, normal approximation
/// with tie-corrected variance and a 0.5 continuity correction.
pub fn mann_whitney(x1: &[f64], x2: &[f64], alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    check_sample(x1, 1, "first")?;
    check_sample(x2, 1, "second")?;
    let (n1, n2) = (x1.len() as f64, x2.len() as f64);
    let n = n1 + n2;
    let (ranks, ties) = joint_ranks(x1, x2);
    let rank_sum: f64 = ranks[..x1.len()].iter().sum();
    let u1 = rank_sum - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    let p = if var > 0.0 {
        let z = ((u1 - mu).abs() - 0.5) / var.sqrt();
        2.0 * phi(-z)
    } else {
        1.0
    };
    Ok(TestOutcome::from_p(TestId::MannWhitney, u1, p, alpha))
}

/// Exact two-sided Mann-Whitney p-value by enumerating every assignment of
/// the joint midranks to the first sample.
pub fn mann_whitney_exact_p(x1: &[f64], x2: &[f64]) -> Result<f64> {
    check_sample(x1, 1, "first")?;
    check_sample(x2, 1, "second")?;
    let (n1, n2) = (x1.len(), x2.len());
    let total = n_choose_k(n1 + n2, n1);
    if total > DEFAULT_EXACT_CAP {
        return Err(Error::domain(format!(
            "{total} rank assignments exceed the enumeration cap of {DEFAULT_EXACT_CAP}"
        )));
    }
    let (ranks, _) = joint_ranks(x1, x2);
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let mu = (n1 * n2) as f64 / 2.0;
    let observed = (ranks[..n1].iter().sum::<f64>() - offset - mu).abs();
    let mut extreme = 0u64;
    for_each_subset_sum(&ranks, n1, |s| {
        if (s - offset - mu).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    });
    Ok(extreme as f64 / total as f64)
}

/// Student's t-test applied to the joint midranks.
pub fn ranked_t_test(x1: &[f64], x2: &[f64], alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    check_sample(x1, 2, "first")?;
    check_sample(x2, 2, "second")?;
    let (ranks, _) = joint_ranks(x1, x2);
    let (r1, r2) = ranks.split_at(x1.len());
    Ok(pooled(TestId::RankedT, r1, r2, alpha))
}
