//! Monte Carlo statistics for the limit theorems of the Sol diffusion.
//!
//! The drifted Brownian motion on Sol(p,q) satisfies, as `t -> inf`:
//!
//! * a coordinate CLT: for `a > 0`,
//!   `(log|X_t| - p a t, log|Y_t|, Z_t - a t) / sqrt(t) -> (p N, 0, N)`
//!   in law with `N` standard normal; symmetric for `a < 0`; for `a = 0`
//!   the limit is `(p Mmax, -q Mmin, N)` built from the running extrema
//!   of a standard Brownian motion on `[0, 1]`;
//! * a distance CLT: `(dist(Z_t, o) - |a| t)/sqrt(t) -> N` for `a != 0`,
//!   and `dist(Z_t, o)/sqrt(t) -> 2(Mmax - Mmin) - |N|` for `a = 0`;
//! * linear rate of escape `dist(Z_t, o)/t -> |a|`;
//! * for `a > 0`, convergence `Y_t -> Y_inf` with polynomial tail
//!   `P[|Y_inf| > y] ~ y^{-2a/q}`, and at most logarithmic deviation from
//!   the limit vertical geodesic.
//!
//! Everything here is a seeded, reproducible experiment: empirical CDFs
//! compared by Kolmogorov-Smirnov distance, Hill estimation for the tail
//! exponent, interval sandwiches from the certified distance bounds.

mod ks;
mod limits;

pub use ks::{ks_statistic, ks_two_sample, ks_threshold_99, normal_cdf, KsReference};
pub use limits::{
    boundary_classify, boundary_classify_with, clt_sample, deviation_profile,
    deviation_summaries, deviation_summary, dist_clt_sample, escape_rate, sample_y_infinity,
    tail_exponent, BoundaryCriteria, BoundaryPiece, EscapeInterval,
};

use crate::error::{Result, SolError};
use crate::rng::{NormalSource, StreamId};
use serde::{Deserialize, Serialize};

/// A labelled batch of scalar draws of one functional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub label: String,
    /// Horizon the functional was evaluated at (0 for synthetic laws).
    pub t: f64,
    pub values: Vec<f64>,
}

impl SampleSet {
    /// At least 100 draws; below that none of the KS thresholds used here
    /// mean anything.
    pub fn new(label: impl Into<String>, t: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 100 {
            return Err(SolError::domain("SampleSet", "need at least 100 samples"));
        }
        Ok(SampleSet { label: label.into(), t, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn sd(&self) -> f64 {
        sd(&self.values)
    }

    /// CSV dump: header = label, one value per line.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.label)?;
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }
}

/// A batch of normalized coordinate triples.
#[derive(Debug, Clone)]
pub struct TripleSet {
    pub label: String,
    pub t: f64,
    pub triples: Vec<[f64; 3]>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Extract one coordinate as a [`SampleSet`].
    pub fn component(&self, idx: usize) -> Result<SampleSet> {
        assert!(idx < 3);
        SampleSet::new(
            format!("{}[{idx}]", self.label),
            self.t,
            self.triples.iter().map(|tr| tr[idx]).collect(),
        )
    }
}

/// Reference laws the normalized functionals converge to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReferenceLaw {
    /// N(0,1); has an analytic CDF.
    StdNormal,
    /// `(p Mmax, -q Mmin, W_1)` for a standard BM on [0,1]; sampled, not
    /// analytic.
    BmExtrema { p: f64, q: f64 },
}

/// Draws of N(0,1) from the dedicated reference stream.
pub fn reference_std_normal(n: usize, seed: u64) -> Result<SampleSet> {
    let src = NormalSource::new(seed, StreamId::Reference);
    SampleSet::new(
        "std_normal",
        0.0,
        (0..n as u64).map(|i| src.normal(i, 0, 0)).collect(),
    )
}

/// Draws of `(p Mmax, -q Mmin, W_1)` by simulating a standard Brownian
/// motion on [0,1] with `steps` increments. Requires `steps >= 10^4` so
/// the discrete extrema resolve the continuous ones.
pub fn reference_bm_triples(p: f64, q: f64, n: usize, steps: usize, seed: u64) -> Result<TripleSet> {
    if steps < 10_000 {
        return Err(SolError::domain(
            "reference_bm_triples",
            "extrema laws need steps >= 1e4",
        ));
    }
    let src = NormalSource::new(seed, StreamId::Reference);
    let sqdt = (1.0 / steps as f64).sqrt();
    let triples: Vec<[f64; 3]> = crate::stats::par_collect(n, |path| {
        let mut w = 0.0f64;
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for k in 0..steps as u64 {
            w += src.normal(path as u64, k, 1) * sqdt;
            lo = lo.min(w);
            hi = hi.max(w);
        }
        [p * hi, -q * lo, w]
    });
    Ok(TripleSet { label: "bm_extrema".into(), t: 1.0, triples })
}

/// Draws from [`ReferenceLaw`]; `steps` only matters for the extrema law.
pub fn reference_sample(law: ReferenceLaw, n: usize, steps: usize, seed: u64) -> Result<TripleSet> {
    match law {
        ReferenceLaw::StdNormal => {
            let s = reference_std_normal(n, seed)?;
            Ok(TripleSet {
                label: s.label,
                t: 0.0,
                triples: s.values.into_iter().map(|v| [v, v, v]).collect(),
            })
        }
        ReferenceLaw::BmExtrema { p, q } => reference_bm_triples(p, q, n, steps, seed),
    }
}

/// Hill-type tail estimate with its asymptotic confidence interval.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailEstimate {
    pub kappa_hat: f64,
    pub k: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

/// Sample skewness.
pub fn skewness(v: &[f64]) -> f64 {
    let m = mean(v);
    let s = sd(v);
    let n = v.len() as f64;
    v.iter().map(|x| ((x - m) / s).powi(3)).sum::<f64>() / n
}

/// Linear-interpolated quantile of a sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= n {
        sorted[n - 1]
    } else {
        let frac = pos - i as f64;
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    }
}

/// Deterministic parallel map over path indices: results land in index
/// order regardless of how the worker pool schedules them.
pub(crate) fn par_collect<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}
