//! Statistics-layer tests: estimator self-checks on synthetic laws,
//! escape-interval tightening, heavy-tail machinery, boundary labels on
//! short runs, and the deviation pipeline.

use solgeo::geometry::SolParams;
use solgeo::rng::{NormalSource, StreamId};
use solgeo::sim::{SimConfig, Scheme};
use solgeo::stats::*;

fn cfg(p: f64, q: f64, a: f64, seed: u64) -> SimConfig {
    SimConfig {
        params: SolParams { p, q, a },
        dt: 1e-3,
        horizon: 1.0,
        seed,
        scheme: Scheme::Euler,
    }
}

#[test]
fn hill_ci_covers_synthetic_pareto_tail() {
    // 100 repetitions of Hill on an exact Pareto(kappa = 2) sample: the
    // asymptotic CI must cover the truth ~95% of the time.
    let src = NormalSource::new(1234, StreamId::Synthetic);
    let n = 20_000;
    let k = 1000;
    let mut covered = 0;
    for rep in 0..100u64 {
        let values: Vec<f64> = (0..n as u64)
            .map(|i| src.uniform(rep * n as u64 + i, 1).powf(-0.5))
            .collect();
        let s = SampleSet::new("pareto", 0.0, values).unwrap();
        let est = tail_exponent(&s, k).unwrap();
        if est.ci_low <= 2.0 && 2.0 <= est.ci_high {
            covered += 1;
        }
    }
    assert!(covered >= 89, "coverage {covered}/100");
}

#[test]
fn hill_k_sensitivity_is_mild_on_pareto() {
    let src = NormalSource::new(77, StreamId::Synthetic);
    let values: Vec<f64> = (0..100_000u64).map(|i| src.uniform(i, 2).powf(-1.0)).collect();
    let s = SampleSet::new("pareto1", 0.0, values).unwrap();
    let base = tail_exponent(&s, 2000).unwrap().kappa_hat;
    for k in [1000, 4000] {
        let v = tail_exponent(&s, k).unwrap().kappa_hat;
        assert!((v - base).abs() < 0.15 * base, "k={k}: {v} vs {base}");
    }
}

#[test]
fn escape_interval_tightens_with_horizon() {
    let n = 400;
    let c = cfg(1.0, 1.0, 1.0, 51);
    let w100 = escape_rate(&c, 100.0, n).unwrap();
    let w200 = escape_rate(&c, 200.0, n).unwrap();
    assert!(w200.width() < w100.width(), "{w100:?} vs {w200:?}");
    assert!(w100.low <= 1.0 + 0.05 && w100.high >= 1.0 - 0.05);
    assert_eq!(w100.skipped, 0);
}

#[test]
fn y_infinity_distribution_is_symmetric() {
    // Sample skewness within 3 standard errors of 0. Uses a light-tailed
    // configuration (kappa = 2a/q = 8) so the third moment exists.
    let n = 4000;
    let c = SimConfig {
        params: SolParams { p: 1.0, q: 0.5, a: 2.0 },
        dt: 1e-3,
        horizon: 1.0,
        seed: 52,
        scheme: Scheme::Euler,
    };
    let s = sample_y_infinity(&c, n, 1e-6).unwrap();
    let skew = skewness(&s.values);
    let se = (6.0 / n as f64).sqrt();
    assert!(skew.abs() < 3.0 * se, "skew {skew}, se {se}");
}

#[test]
fn clt_third_component_is_exactly_normal() {
    // Z_t - a t = W_t at every t: KS < 0.03 against N(0,1).
    let c = cfg(1.0, 1.0, 1.0, 53);
    let triples = clt_sample(&c, 2000, 20.0).unwrap();
    let z = triples.component(2).unwrap();
    let d = ks_statistic(&z, KsReference::Law(ReferenceLaw::StdNormal)).unwrap();
    assert!(d < 0.03, "KS {d}");
}

#[test]
fn boundary_labels_on_short_drifted_runs() {
    use rayon::prelude::*;
    use solgeo::sim::simulate_path_decimated;
    let n = 100;
    for (a, expect) in [(1.0, BoundaryPiece::VarpiP), (-1.0, BoundaryPiece::VarpiQ)] {
        let c = SimConfig {
            params: SolParams { p: 1.0, q: 1.0, a },
            dt: 1e-3,
            horizon: 60.0,
            seed: 54,
            scheme: Scheme::Euler,
        };
        let good = (0..n as u64)
            .into_par_iter()
            .filter(|i| {
                let path = simulate_path_decimated(&c, *i, 100).unwrap();
                boundary_classify(&path, &c.params) == expect
            })
            .count();
        assert!(good >= 99, "a={a}: {good}/{n} labelled {expect}");
    }
}

#[test]
fn deviation_summaries_are_finite_and_modest() {
    let c = SimConfig {
        params: SolParams { p: 1.0, q: 1.0, a: 1.0 },
        dt: 1e-3,
        horizon: 30.0,
        seed: 55,
        scheme: Scheme::Euler,
    };
    let sums = deviation_summaries(&c, 20).unwrap();
    assert_eq!(sums.len(), 20);
    for s in &sums {
        assert!(s.is_finite());
        // bound 2/|a| plus generous slack at this short horizon
        assert!(*s < 6.0, "summary {s}");
    }
}

#[test]
fn deviation_summaries_need_positive_drift() {
    let c = cfg(1.0, 1.0, 0.0, 1);
    assert!(deviation_summaries(&c, 4).is_err());
}

#[test]
fn reference_triples_respect_component_order() {
    let ts = reference_bm_triples(2.0, 3.0, 200, 10_000, 9).unwrap();
    for tr in &ts.triples {
        // components are (p Mmax, -q Mmin, W_1) with p = 2, q = 3
        assert!(tr[0] >= 0.0 && tr[1] >= 0.0);
        assert!(tr[0] / 2.0 + tr[1] / 3.0 >= tr[2].abs() - 1e-12);
    }
}
