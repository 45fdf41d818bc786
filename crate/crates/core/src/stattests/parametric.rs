use super::{check_alpha, check_sample, TestId, TestOutcome};
use crate::distributions::{mean, variance};
use crate::numerics::t_two_sided;
use crate::Result;

/// Student's two-sample t-test with pooled variance.
pub fn t_test(x1: &[f64], x2: &[f64], alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    check_sample(x1, 2, "first")?;
    check_sample(x2, 2, "second")?;
    Ok(pooled(TestId::TTest, x1, x2, alpha))
}

pub(super) fn pooled(id: TestId, x1: &[f64], x2: &[f64], alpha: f64) -> TestOutcome {
    let (n1, n2) = (x1.len() as f64, x2.len() as f64);
    let dof = n1 + n2 - 2.0;
    let pooled_var = ((n1 - 1.0) * variance(x1) + (n2 - 1.0) * variance(x2)) / dof;
    let se = (pooled_var * (1.0 / n1 + 1.0 / n2)).sqrt();
    finish(id, mean(x1) - mean(x2), se, dof, alpha)
}

/// Welch's unequal-variance t-test.
pub fn welch_test(x1: &[f64], x2: &[f64], alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    check_sample(x1, 2, "first")?;
    check_sample(x2, 2, "second")?;
    let (n1, n2) = (x1.len() as f64, x2.len() as f64);
    let a = variance(x1) / n1;
    let b = variance(x2) / n2;
    let dof = (a + b).powi(2) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
    Ok(finish(
        TestId::Welch,
        mean(x1) - mean(x2),
        (a + b).sqrt(),
        dof,
        alpha,
    ))
}

fn finish(id: TestId, diff: f64, se: f64, dof: f64, alpha: f64) -> TestOutcome {
    let (t, p) = if se > 0.0 {
        let t = diff / se;
        (t, t_two_sided(t, dof))
    } else if diff == 0.0 {
        (0.0, 1.0)
    } else {
        (diff.signum() * f64::INFINITY, 0.0)
    };
    let mut out = TestOutcome::from_p(id, t, p, alpha);
    out.dof = Some(if dof.is_finite() { dof } else { 0.0 });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::student_t_sf;

    #[test]
    fn identical_samples_keep_h0() {
        let x = [1.0, 2.0, 3.0];
        for o in [
            t_test(&x, &x, 0.05).unwrap(),
            welch_test(&x, &x, 0.05).unwrap(),
        ] {
            assert_eq!(o.statistic, 0.0);
            assert_eq!(o.p_value, Some(1.0));
            assert!(!o.reject);
        }
    }

    #[test]
    fn textbook_recomputation() {
        let x1 = [0.1, 0.2, 0.3, 0.4];
        let x2 = [0.5, 0.6, 0.7, 0.8];
        // Hand evaluation: means 0.25 and 0.65, both variances 1/60, so the
        // pooled sd is √(1/60) and t = -0.4 / (√(1/60)·√(1/2)).
        let t_hand = -0.4 / ((1.0f64 / 60.0).sqrt() * 0.5f64.sqrt());
        let p_hand = 2.0 * student_t_sf(t_hand.abs(), 6.0).unwrap();
        let o = t_test(&x1, &x2, 0.05).unwrap();
        assert!((o.statistic - t_hand).abs() < 1e-10);
        assert!((o.p_value.unwrap() - p_hand).abs() < 1e-10);
        assert!(o.reject);
    }

    #[test]
    fn welch_equals_student_for_equal_variances() {
        let x1 = [1.0, 3.0, 5.0, 9.0];
        let x2 = [11.0, 13.0, 15.0, 19.0];
        let t = t_test(&x1, &x2, 0.05).unwrap();
        let w = welch_test(&x1, &x2, 0.05).unwrap();
        assert_eq!(t.statistic, w.statistic);
        assert!((w.dof.unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_conventions() {
        let o = t_test(&[2.0, 2.0], &[2.0, 2.0, 2.0], 0.05).unwrap();
        assert_eq!((o.p_value, o.reject), (Some(1.0), false));
        let o = welch_test(&[1.0, 1.0], &[2.0, 2.0], 0.05).unwrap();
        assert_eq!((o.p_value, o.reject), (Some(0.0), true));
        assert_eq!(o.statistic, f64::NEG_INFINITY);
        assert!(t_test(&[1.0], &[1.0, 2.0], 0.05).is_err());
    }
}
