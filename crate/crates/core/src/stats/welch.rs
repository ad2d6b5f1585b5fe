use super::special::{t_quantile, t_two_sided_p};
use super::StatsError;

/// Sufficient statistics of one group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample variance with the `n - 1` denominator.
    pub variance: f64,
}

impl GroupSummary {
    pub fn new(n: usize, mean: f64, variance: f64) -> Result<Self, StatsError> {
        if n < 2 {
            return Err(StatsError::TooFewValues(n));
        }
        if !mean.is_finite() || !variance.is_finite() {
            return Err(StatsError::NonFinite);
        }
        if variance < 0.0 {
            return Err(StatsError::DomainError(format!("negative variance {variance}")));
        }
        Ok(GroupSummary { n, mean, variance })
    }

    /// Squared standard error of the mean.
    pub fn sem2(&self) -> f64 {
        self.variance / self.n as f64
    }
}

/// Two-pass mean and variance, with the usual correction term for the
/// rounding left in the first pass.
pub fn summarize(values: &[f64]) -> Result<GroupSummary, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::TooFewValues(n));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (ss, comp) = values.iter().fold((0.0, 0.0), |(ss, c), v| {
        let d = v - mean;
        (ss + d * d, c + d)
    });
    let variance = ((ss - comp * comp / nf) / (nf - 1.0)).max(0.0);
    let mean = mean + comp / nf;
    GroupSummary::new(n, mean, variance)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
    /// Confidence interval on `mean_a - mean_b`.
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub std_error: f64,
}

impl WelchResult {
    pub fn mean_difference(&self) -> f64 {
        self.mean_a - self.mean_b
    }
}

fn check_confidence(confidence: f64) -> Result<(), StatsError> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(StatsError::DomainError(format!("confidence {confidence} outside (0, 1)")))
    }
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of
/// freedom and a two-sided p-value.
pub fn welch_test(a: &GroupSummary, b: &GroupSummary, confidence: f64) -> Result<WelchResult, StatsError> {
    check_confidence(confidence)?;
    let (va, vb) = (a.sem2(), b.sem2());
    let se2 = va + vb;
    if !(se2 > 0.0) {
        return Err(StatsError::ZeroStandardError);
    }
    let se = se2.sqrt();
    let diff = a.mean - b.mean;
    let t = diff / se;
    let df = se2 * se2 / (va * va / (a.n - 1) as f64 + vb * vb / (b.n - 1) as f64);
    let p = t_two_sided_p(t, df)?;
    let half = t_quantile((1.0 + confidence) / 2.0, df)? * se;
    Ok(WelchResult {
        t,
        df,
        p_two_sided: p,
        ci_low: diff - half,
        ci_high: diff + half,
        confidence,
        mean_a: a.mean,
        mean_b: b.mean,
        std_error: se,
    })
}

pub fn welch_test_samples(a: &[f64], b: &[f64], confidence: f64) -> Result<WelchResult, StatsError> {
    welch_test(&summarize(a)?, &summarize(b)?, confidence)
}

/// Confidence interval for one group's mean:
/// `mean ± t_quantile((1 + c)/2, n - 1) * sqrt(variance / n)`.
pub fn mean_interval(group: &GroupSummary, confidence: f64) -> Result<(f64, f64), StatsError> {
    check_confidence(confidence)?;
    let q = t_quantile((1.0 + confidence) / 2.0, (group.n - 1) as f64)?;
    let half = q * group.sem2().sqrt();
    Ok((group.mean - half, group.mean + half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_summary() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((s.n, s.mean, s.variance), (5, 3.0, 2.5));
        assert_eq!(summarize(&[7.0, 7.0, 7.0]).unwrap().variance, 0.0);
        assert_eq!(summarize(&[1.0]), Err(StatsError::TooFewValues(1)));
        assert_eq!(summarize(&[1.0, f64::NAN]), Err(StatsError::NonFinite));
    }

    #[test]
    fn variance_is_shift_invariant() {
        let base = [1.0, 2.5, 3.0, 4.75, 5.0, 9.0];
        let shifted: Vec<f64> = base.iter().map(|v| v + 1e9).collect();
        let (a, b) = (summarize(&base).unwrap(), summarize(&shifted).unwrap());
        assert!(((a.variance - b.variance) / a.variance).abs() < 1e-6);
    }

    #[test]
    fn identical_groups() {
        let g = GroupSummary::new(12, 4.0, 2.0).unwrap();
        let r = welch_test(&g, &g, 0.95).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_two_sided, 1.0);
        assert!((r.ci_low + r.ci_high).abs() < 1e-15);
    }

    #[test]
    fn reference_pair() {
        // [1..5] vs [2,4,6,8,10]; reference values from an independent
        // statistics package.
        let a = GroupSummary::new(5, 3.0, 2.5).unwrap();
        let b = GroupSummary::new(5, 6.0, 10.0).unwrap();
        let r = welch_test(&a, &b, 0.95).unwrap();
        assert!((r.t - -1.8973665961010275).abs() < 1e-12);
        assert!((r.df - 5.882352941176471).abs() < 1e-12);
        assert!((r.p_two_sided - 0.10753119493062718).abs() < 1e-12);
        assert!((r.ci_low - -6.887741643736975).abs() < 1e-10);
        assert!((r.ci_high - 0.887741643736975).abs() < 1e-10);
    }

    #[test]
    fn swapping_groups_negates() {
        let a = GroupSummary::new(8, 1.0, 3.0).unwrap();
        let b = GroupSummary::new(20, 2.5, 0.5).unwrap();
        let ab = welch_test(&a, &b, 0.9).unwrap();
        let ba = welch_test(&b, &a, 0.9).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.df, ba.df);
        assert_eq!(ab.p_two_sided, ba.p_two_sided);
        assert!((ab.ci_low + ba.ci_high).abs() < 1e-12);
        assert!((ab.ci_high + ba.ci_low).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_an_error() {
        let a = GroupSummary::new(3, 1.0, 0.0).unwrap();
        assert_eq!(welch_test(&a, &a, 0.95), Err(StatsError::ZeroStandardError));
        let b = GroupSummary::new(3, 2.0, 0.0).unwrap();
        assert_eq!(welch_test(&a, &b, 0.95), Err(StatsError::ZeroStandardError));
        assert!(welch_test(&a, &GroupSummary::new(3, 2.0, 1.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn pooled_df_when_balanced() {
        for n in [2usize, 5, 40, 1000] {
            let a = GroupSummary::new(n, 0.0, 3.7).unwrap();
            let b = GroupSummary::new(n, 1.0, 3.7).unwrap();
            let r = welch_test(&a, &b, 0.95).unwrap();
            assert!((r.df - (2 * n - 2) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn group_interval() {
        let g = summarize(&[0.0, 2.0]).unwrap();
        let (lo, hi) = mean_interval(&g, 0.95).unwrap();
        let cauchy = (0.475 * std::f64::consts::PI).tan();
        assert!((hi - 1.0 - cauchy).abs() < 1e-9);
        assert!((1.0 - lo - cauchy).abs() < 1e-9);
        let c = summarize(&[5.0; 4]).unwrap();
        assert_eq!(mean_interval(&c, 0.95).unwrap(), (5.0, 5.0));
    }

    proptest! {
        #[test]
        fn samples_and_summaries_agree(
            a in proptest::collection::vec(-50.0f64..50.0, 2..40),
            b in proptest::collection::vec(-50.0f64..50.0, 2..40),
        ) {
            let (sa, sb) = (summarize(&a).unwrap(), summarize(&b).unwrap());
            prop_assume!(sa.variance + sb.variance > 0.0);
            let raw = welch_test_samples(&a, &b, 0.95).unwrap();
            let sum = welch_test(&sa, &sb, 0.95).unwrap();
            prop_assert_eq!(raw, sum);
            prop_assert!(raw.ci_low <= raw.mean_difference() && raw.mean_difference() <= raw.ci_high);
            prop_assert!((0.0..=1.0).contains(&raw.p_two_sided));
            if raw.mean_difference() != 0.0 {
                prop_assert_eq!(raw.t.signum(), raw.mean_difference().signum());
            }
        }
    }
}
