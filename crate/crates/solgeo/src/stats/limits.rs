//! Experiment functionals: CLT samples, escape-rate sandwich, distance
//! CLT surrogates, tail exponent, geodesic deviation, boundary labels.

use super::{mean, par_collect, SampleSet, TailEstimate, TripleSet};
use crate::error::{Result, SolError};
use crate::geometry::{
    deviation_proxy, deviation_proxy_logs, upper_bound_iii_logs, upper_bound_iv_logs, SolParams,
    SolPoint,
};
use crate::logspace::{log_add_exp, LogSigned};
use crate::sim::{self, BrownianPath, Channels, PathKernel, SimConfig};

fn with_horizon(config: &SimConfig, t: f64) -> Result<SimConfig> {
    let mut cfg = *config;
    cfg.horizon = t;
    cfg.validate()?;
    Ok(cfg)
}

/// Guard for the drifted CLT normalizations: `log|X_t|` (resp. `log|Y_t|`)
/// must be positive with overwhelming probability, i.e. `p |a| t >= 10`.
fn check_clt_horizon(params: &SolParams, t: f64) -> Result<()> {
    let margin = if params.a > 0.0 {
        params.p * params.a * t
    } else if params.a < 0.0 {
        params.q * -params.a * t
    } else {
        return Ok(());
    };
    if margin < 10.0 {
        return Err(SolError::domain(
            "clt_sample",
            format!("drifted CLT needs p|a|t >= 10, got {margin:.2}"),
        ));
    }
    Ok(())
}

/// N independent draws of the normalized coordinate triple at horizon t.
/// The normalization is selected by the sign of the drift:
///
/// * `a > 0`: `((log|X_t| - p a t), log|Y_t|, Z_t - a t) / sqrt(t)`
/// * `a < 0`: `(log|X_t|, (log|Y_t| + q a t), Z_t - a t) / sqrt(t)`
/// * `a = 0`: `(log|X_t|, log|Y_t|, Z_t) / sqrt(t)`
pub fn clt_sample(config: &SimConfig, n: usize, t: f64) -> Result<TripleSet> {
    let cfg = with_horizon(config, t)?;
    check_clt_horizon(&cfg.params, t)?;
    let SolParams { p, q, a } = cfg.params;
    let rt = t.sqrt();
    let triples = par_collect(n, |i| {
        let s = sim::terminal_state_channels(&cfg, i as u64, Channels::COORDS);
        let lx = s.x.log_abs();
        let ly = s.y.log_abs();
        if a > 0.0 {
            [(lx - p * a * t) / rt, ly / rt, (s.z - a * t) / rt]
        } else if a < 0.0 {
            [lx / rt, (ly + q * a * t) / rt, (s.z - a * t) / rt]
        } else {
            [lx / rt, ly / rt, s.z / rt]
        }
    });
    Ok(TripleSet { label: format!("clt(a={a})"), t, triples })
}

/// Two-sided Monte Carlo sandwich for the rate of escape
/// `dist(Z_t, o)/t -> |a|`: `low` averages the vertical lower bound,
/// `high` the staircase upper bound.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct EscapeInterval {
    pub low: f64,
    pub high: f64,
    /// Paths with an exactly-zero lateral coordinate (probability zero;
    /// counted, not failed).
    pub skipped: usize,
}

impl EscapeInterval {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v <= self.high
    }
}

pub fn escape_rate(config: &SimConfig, t: f64, n: usize) -> Result<EscapeInterval> {
    if t < 100.0 {
        return Err(SolError::domain("escape_rate", "needs t >= 100"));
    }
    let cfg = with_horizon(config, t)?;
    let params = cfg.params;
    let sides: Vec<Option<(f64, f64)>> = par_collect(n, |i| {
        let s = sim::terminal_state_channels(&cfg, i as u64, Channels::COORDS);
        if s.x.is_zero() || s.y.is_zero() {
            return None;
        }
        let high = upper_bound_iv_logs(params, s.x.log_abs(), s.y.log_abs(), s.z) / t;
        Some((s.z.abs() / t, high))
    });
    let kept: Vec<(f64, f64)> = sides.iter().flatten().copied().collect();
    if kept.is_empty() {
        return Err(SolError::domain("escape_rate", "all paths degenerate"));
    }
    let low = mean(&kept.iter().map(|v| v.0).collect::<Vec<_>>());
    let high = mean(&kept.iter().map(|v| v.1).collect::<Vec<_>>());
    Ok(EscapeInterval { low, high, skipped: n - kept.len() })
}

/// Samples of the distance-CLT surrogate. The true Sol distance has no
/// closed form; the limit theorem is proved by sandwiching it between the
/// vertical lower bound and the staircase upper bound, so those same
/// certified bounds serve as the statistic:
///
/// * `a != 0`: `(ub_iv(Z_t) - |a| t) / sqrt(t)` (standard normal limit)
/// * `a = 0`: `min(ub_iii, ub_iv)(Z_t) / sqrt(t)`
///   (limit `2(Mmax - Mmin) - |N|`)
pub fn dist_clt_sample(config: &SimConfig, n: usize, t: f64) -> Result<SampleSet> {
    if t < 100.0 {
        return Err(SolError::domain("dist_clt_sample", "needs t >= 100"));
    }
    let cfg = with_horizon(config, t)?;
    let params = cfg.params;
    let abs_a = params.a.abs();
    let rt = t.sqrt();
    let values: Vec<Option<f64>> = par_collect(n, |i| {
        let s = sim::terminal_state_channels(&cfg, i as u64, Channels::COORDS);
        if s.x.is_zero() || s.y.is_zero() {
            return None;
        }
        let iv = upper_bound_iv_logs(params, s.x.log_abs(), s.y.log_abs(), s.z);
        if abs_a > 0.0 {
            Some((iv - abs_a * t) / rt)
        } else {
            let iii = upper_bound_iii_logs(params, s.x.log_abs(), s.y.log_abs(), s.z);
            Some(iii.min(iv) / rt)
        }
    });
    SampleSet::new(
        format!("dist_clt(a={})", params.a),
        t,
        values.into_iter().flatten().collect(),
    )
}

/// Hill estimator of the polynomial tail exponent over the `k` largest
/// order statistics: `kappa_hat = k / sum_{i<k} log(x_(N-i) / x_(N-k))`,
/// with the asymptotic-normality interval `kappa_hat (1 +- 1.96/sqrt(k))`.
pub fn tail_exponent(samples: &SampleSet, k: usize) -> Result<TailEstimate> {
    let n = samples.len();
    if k < 10 || k > n / 10 {
        return Err(SolError::domain(
            "tail_exponent",
            format!("need 10 <= k <= N/10, got k={k}, N={n}"),
        ));
    }
    let mut pos: Vec<f64> = samples.values.iter().copied().filter(|v| *v > 0.0).collect();
    if pos.len() <= k {
        return Err(SolError::domain(
            "tail_exponent",
            format!("only {} positive samples for k={k}", pos.len()),
        ));
    }
    pos.sort_by(f64::total_cmp);
    let threshold = pos[pos.len() - 1 - k];
    let sum: f64 = (0..k)
        .map(|i| (pos[pos.len() - 1 - i] / threshold).ln())
        .sum();
    let kappa_hat = k as f64 / sum;
    let half = 1.96 / (k as f64).sqrt();
    Ok(TailEstimate {
        kappa_hat,
        k,
        ci_low: kappa_hat * (1.0 - half),
        ci_high: kappa_hat * (1.0 + half),
    })
}

/// N draws of the almost-sure limit `Y_inf` (drift `a > 0`), each path
/// run until the truncation noise is below `target_sd`.
pub fn sample_y_infinity(config: &SimConfig, n: usize, target_sd: f64) -> Result<SampleSet> {
    let cutoff = sim::y_infinity_cutoff(&config.params, target_sd)?;
    let cfg = with_horizon(config, cutoff)?;
    let values = par_collect(n, |i| {
        sim::terminal_state_channels(&cfg, i as u64, Channels::YZ).y.to_f64()
    });
    SampleSet::new("y_infinity", cutoff, values)
}

/// Deviation-from-the-limit-geodesic profile of a materialized path: at
/// every saved integer time `n >= 2`, the certified upper bound for
/// `dist(Z_n, gamma^{y_inf})` divided by `log n`.
///
/// This follows the path arrays at `f64` resolution, which resolves
/// `Y_n - Y_inf` only while `q a n` is small (the gap shrinks like
/// `e^{-q a n}`); the long-horizon experiment in [`deviation_summaries`]
/// tracks the tail of Y in log space instead.
pub fn deviation_profile(
    path: &BrownianPath,
    y_inf: f64,
    params: SolParams,
) -> Result<Vec<(u64, f64)>> {
    if params.a == 0.0 {
        return Err(SolError::domain("deviation_profile", "needs drift a != 0"));
    }
    let mut out = Vec::new();
    for i in 0..path.len() {
        let t = path.times[i];
        let n = t.round();
        if n >= 2.0 && (t - n).abs() < 1e-9 {
            let g = SolPoint::new(path.x[i], path.y[i], path.z[i]);
            let proxy = deviation_proxy(g, y_inf, params)?;
            out.push((n as u64, proxy / n.ln()));
        }
    }
    Ok(out)
}

/// Max of `proxy / log n` over the window `n in [lo, hi]`.
pub fn deviation_summary(profile: &[(u64, f64)], lo: u64, hi: u64) -> f64 {
    profile
        .iter()
        .filter(|(n, _)| *n >= lo && *n <= hi)
        .map(|(_, r)| *r)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Long-horizon deviation experiment for drift `a > 0`.
///
/// Each path runs to the configured horizon T plus a convergence margin;
/// `Y_inf - Y_n` is reconstructed exactly from the stored per-step
/// increments by a backward pass in signed log space (at integer time n
/// the gap is of order `e^{-q a n}`, far below `f64` resolution of Y
/// itself). Returns, per path, the max over integer `n in [T/2, T]` of
/// `deviation_proxy(Z_n, gamma^{Y_inf}) / log n`.
pub fn deviation_summaries(config: &SimConfig, n_paths: usize) -> Result<Vec<f64>> {
    if config.params.a <= 0.0 {
        return Err(SolError::domain(
            "deviation_summaries",
            "needs drift a > 0 (exchange coordinates for a < 0)",
        ));
    }
    config.validate()?;
    let t_int = config.horizon.floor() as u64;
    if t_int < 4 {
        return Err(SolError::domain("deviation_summaries", "horizon too short"));
    }
    let extra = sim::y_infinity_cutoff(&config.params, 1e-6)?;
    let total = with_horizon(config, config.horizon + extra)?;
    let steps_total = total.n_steps();
    let params = config.params;
    let lo = t_int / 2;

    let summaries = par_collect(n_paths, |path| {
        let mut kernel = PathKernel::with_channels(&total, path as u64, Channels::COORDS);
        let mut incs: Vec<LogSigned> = Vec::with_capacity(steps_total as usize);
        // Snapshot (step, z, log|X|) at integer times.
        let mut snaps: Vec<(u64, f64, f64)> = Vec::with_capacity(t_int as usize);
        let mut next_snap = 2.0f64;
        while kernel.state().step < steps_total {
            kernel.advance();
            incs.push(kernel.last_inc_y());
            let s = kernel.state();
            while next_snap <= t_int as f64 && s.t + 1e-9 >= next_snap {
                snaps.push((s.step, s.z, s.x.log_abs()));
                next_snap += 1.0;
            }
        }
        // Backward pass: tail(K) = sum_{j >= K} inc_j = Y_inf - Y_K.
        let mut tail = LogSigned::ZERO;
        let mut snap_iter = snaps.iter().rev().peekable();
        let mut best = f64::NEG_INFINITY;
        let mut m = snaps.len() as u64 + 1; // integer time of the last snapshot
        for j in (0..incs.len() as u64).rev() {
            tail = tail.add(incs[j as usize]);
            while let Some(&&(step, z, lx)) = snap_iter.peek() {
                if step == j {
                    if m >= lo && m <= t_int {
                        let log_xt = lx - params.p * z;
                        let log_yt = params.q * z + tail.log_abs;
                        let proxy = deviation_proxy_logs(params, log_xt, log_yt);
                        best = best.max(proxy / (m as f64).ln());
                    }
                    m -= 1;
                    snap_iter.next();
                } else {
                    break;
                }
            }
        }
        best
    });
    Ok(summaries)
}

/// Pieces of the geometric boundary a path can converge to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BoundaryPiece {
    /// `{varpi_p} x R`: z runs to +inf while Y settles (drift a > 0).
    VarpiP,
    /// `R x {varpi_q}`: z runs to -inf while X settles (drift a < 0).
    VarpiQ,
    /// The glueing point `(varpi_p, varpi_q)` of the two boundary disks
    /// (drift a = 0): both planes escape to their points at infinity.
    Glue,
    Undecided,
}

impl std::fmt::Display for BoundaryPiece {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BoundaryPiece::VarpiP => "varpi_p x R",
            BoundaryPiece::VarpiQ => "R x varpi_q",
            BoundaryPiece::Glue => "(varpi_p,varpi_q)",
            BoundaryPiece::Undecided => "undecided",
        };
        f.write_str(s)
    }
}

/// End-of-path classification thresholds.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryCriteria {
    /// z must clear this many sigmas of a driftless `W_T` for the drifted
    /// labels.
    pub z_sigmas: f64,
    /// Transversal clock increment over the last quarter must stay below
    /// this for "converged".
    pub clock_eps: f64,
    /// ... and the transversal coordinate must move less than this.
    pub coord_eps: f64,
    /// Log growth both planes must exceed for the glueing point; default
    /// `2 log T`.
    pub growth_log: Option<f64>,
}

impl Default for BoundaryCriteria {
    fn default() -> Self {
        BoundaryCriteria {
            z_sigmas: 4.0,
            clock_eps: 1e-8,
            coord_eps: 1e-4,
            growth_log: None,
        }
    }
}

/// Classify where a path is heading on the boundary, by end-of-path
/// statistics. Inconclusive paths are labelled [`BoundaryPiece::Undecided`]
/// rather than failing.
pub fn boundary_classify(path: &BrownianPath, params: &SolParams) -> BoundaryPiece {
    boundary_classify_with(path, params, &BoundaryCriteria::default())
}

pub fn boundary_classify_with(
    path: &BrownianPath,
    params: &SolParams,
    criteria: &BoundaryCriteria,
) -> BoundaryPiece {
    let _ = params;
    let n = path.len();
    if n < 4 {
        return BoundaryPiece::Undecided;
    }
    let t_end = path.times[n - 1];
    let i34 = path
        .times
        .iter()
        .position(|&t| t >= 0.75 * t_end)
        .unwrap_or(n - 1);
    let z_end = path.z[n - 1];
    let z_thr = criteria.z_sigmas * t_end.sqrt();

    // "Converged" = the transversal clock and coordinate both settled
    // over the last quarter. NaN (saturated clocks) reads as not
    // converged.
    let dvq = path.vq[n - 1] - path.vq[i34];
    let y_conv = dvq.is_finite()
        && dvq <= criteria.clock_eps
        && (path.y[n - 1] - path.y[i34]).abs() <= criteria.coord_eps;
    let dvp = path.vp[n - 1] - path.vp[i34];
    let x_conv = dvp.is_finite()
        && dvp <= criteria.clock_eps
        && (path.x[n - 1] - path.x[i34]).abs() <= criteria.coord_eps;

    if z_end >= z_thr && y_conv {
        return BoundaryPiece::VarpiP;
    }
    if z_end <= -z_thr && x_conv {
        return BoundaryPiece::VarpiQ;
    }

    let growth = criteria.growth_log.unwrap_or(2.0 * t_end.max(2.0).ln());
    let gx = log_add_exp(path.x[n - 1].abs().ln(), z_end);
    let gy = log_add_exp(path.y[n - 1].abs().ln(), -z_end);
    if gx >= growth && gy >= growth {
        BoundaryPiece::Glue
    } else {
        BoundaryPiece::Undecided
    }
}
