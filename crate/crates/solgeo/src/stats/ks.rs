//! Kolmogorov-Smirnov distances.

use super::{ReferenceLaw, SampleSet};
use crate::error::{Result, SolError};
use std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF through `erfc`; absolute error well below 1e-7.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// One-sample KS distance of a sorted sample against an analytic CDF.
pub fn ks_one_sample_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample KS distance; ties are walked jointly so identical samples
/// score exactly 0.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// 99% Kolmogorov quantile scaled for sample size n: `1.628 / sqrt(n)`.
pub fn ks_threshold_99(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// What a sample is compared against.
pub enum KsReference<'a> {
    Law(ReferenceLaw),
    Sample(&'a SampleSet),
}

/// KS distance between a sample and a reference. Only the standard
/// normal reference has an analytic CDF; the Brownian-extrema law must be
/// sampled first and passed as a [`SampleSet`].
pub fn ks_statistic(sample: &SampleSet, reference: KsReference<'_>) -> Result<f64> {
    match reference {
        KsReference::Law(ReferenceLaw::StdNormal) => {
            Ok(ks_one_sample_sorted(&sample.sorted(), normal_cdf))
        }
        KsReference::Law(ReferenceLaw::BmExtrema { .. }) => Err(SolError::domain(
            "ks_statistic",
            "extrema laws have no analytic CDF; sample them and pass a SampleSet",
        )),
        KsReference::Sample(other) => Ok(ks_two_sample(&sample.values, &other.values)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841344746068543).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 1.349898031630095e-3).abs() < 1e-12);
    }

    #[test]
    fn identical_samples_have_zero_distance() {
        let v: Vec<f64> = (0..500).map(|i| (i as f64).sin()).collect();
        let s1 = SampleSet::new("a", 0.0, v.clone()).unwrap();
        let s2 = SampleSet::new("b", 0.0, v).unwrap();
        let d = ks_statistic(&s1, KsReference::Sample(&s2)).unwrap();
        assert!(d <= 1.0 / 500.0, "{d}");
    }

    #[test]
    fn mismatched_kind_is_an_error() {
        let s = SampleSet::new("a", 0.0, vec![0.0; 100]).unwrap();
        assert!(ks_statistic(
            &s,
            KsReference::Law(ReferenceLaw::BmExtrema { p: 1.0, q: 1.0 })
        )
        .is_err());
    }

    #[test]
    fn shifted_normal_distance() {
        // sup_x |Phi(x) - Phi(x-1)| = Phi(1/2) - Phi(-1/2) ~ 0.3829
        let s = crate::stats::reference_std_normal(20_000, 3).unwrap();
        let shifted =
            SampleSet::new("n(1,1)", 0.0, s.values.iter().map(|v| v + 1.0).collect()).unwrap();
        let d = ks_statistic(&shifted, KsReference::Law(ReferenceLaw::StdNormal)).unwrap();
        assert!((d - 0.3829).abs() < 0.02, "{d}");
    }

    #[test]
    fn standard_normal_sample_passes_at_99() {
        let s = crate::stats::reference_std_normal(10_000, 4).unwrap();
        let d = ks_statistic(&s, KsReference::Law(ReferenceLaw::StdNormal)).unwrap();
        assert!(d < ks_threshold_99(10_000), "{d}");
    }
}
