use originality::stats::{t_cdf, t_quantile, welch_test_samples};
use serde_json::Value;

fn cases() -> Vec<Value> {
    let text = include_str!("data/welch_reference.json");
    let root: Value = serde_json::from_str(text).unwrap();
    root["cases"].as_array().unwrap().clone()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn matches_reference_implementation() {
    let cases = cases();
    assert_eq!(cases.len(), 26);
    for (i, c) in cases.iter().enumerate() {
        let (a, b) = (floats(&c["a"]), floats(&c["b"]));
        let r = welch_test_samples(&a, &b, 0.95).unwrap();
        for (name, got, key) in
            [("t", r.t, "t"), ("df", r.df, "df"), ("p", r.p_two_sided, "p"), ("ci_low", r.ci_low, "ci_low"), ("ci_high", r.ci_high, "ci_high")]
        {
            let want = c[key].as_f64().unwrap();
            assert!(rel(got, want) < 1e-9, "case {i} {name}: {got} vs {want}");
        }
    }
}

#[test]
fn fixture_covers_the_size_range() {
    let sizes: Vec<usize> = cases().iter().flat_map(|c| [c["a"].as_array().unwrap().len(), c["b"].as_array().unwrap().len()]).collect();
    assert!(sizes.iter().all(|&n| (3..=500).contains(&n)));
    assert!(*sizes.iter().max().unwrap() > 250);
}

#[test]
fn small_textbook_pair() {
    let r = welch_test_samples(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 6.0, 8.0, 10.0], 0.95).unwrap();
    assert!((r.t + 1.8973665961010275).abs() < 1e-12);
    assert!((r.df - 5.882352941176471).abs() < 1e-12);
}

#[test]
fn t_distribution_agrees_with_statrs() {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    for df in [1.0, 2.0, 3.5, 5.0, 30.0, 1000.0] {
        let reference = StudentsT::new(0.0, 1.0, df).unwrap();
        for t in [-12.0, -3.0, -1.0, -0.2, 0.0, 0.7, 2.0, 6.0] {
            let (got, want) = (t_cdf(t, df).unwrap(), reference.cdf(t));
            assert!((got - want).abs() < 1e-10, "cdf df={df} t={t}: {got} vs {want}");
        }
        for p in [0.001, 0.05, 0.5, 0.9, 0.975] {
            let (got, want) = (t_quantile(p, df).unwrap(), reference.inverse_cdf(p));
            assert!(rel(got, want) < 1e-7 || (got - want).abs() < 1e-10, "quantile df={df} p={p}: {got} vs {want}");
        }
    }
}
