//! Brownian motion with vertical drift on Sol(p,q).
//!
//! Started at the origin, the diffusion generated by the drifted Laplacian
//! solves
//!
//! ```text
//! Z_t = a t + W_t
//! X_t = int_0^t e^{ p Z_s} dW^1_s
//! Y_t = int_0^t e^{-q Z_s} dW^2_s
//! ```
//!
//! with three independent standard Brownian motions. Two discretizations
//! are provided:
//!
//! * [`Scheme::Euler`] — Ito left-point evaluation,
//!   `X_{k+1} = X_k + e^{p Z_k} dW^1`. Left-point is load-bearing: a
//!   midpoint rule would simulate the Stratonovich integral and bias X.
//! * [`Scheme::TimeChange`] — `X` and `Y` are Brownian motions read on the
//!   quadratic-variation clocks `V_t(p) = int e^{2 p Z_s} ds` and
//!   `V_t(-q)`; given the discrete clock the increments are exact in law
//!   and independent of `W`.
//!
//! For drift `a > 0` the factor `e^{p Z_t}` grows like `e^{p a t}`, so `X`
//! and the clocks are accumulated as signed log-magnitudes; every
//! downstream statistic consumes `log|X_t|` anyway. Randomness is keyed by
//! `(seed, path, step, channel)`, making paths reproducible and
//! embarrassingly parallel.

use crate::error::{Result, SolError};
use crate::geometry::{group_inv, group_mul, SolParams, SolPoint};
use crate::logspace::{log_add_exp, LogSigned, ScaledSigned};
use crate::rng::{NormalSource, StreamId};
use serde::{Deserialize, Serialize};

/// Discretization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Euler,
    TimeChange,
}

/// Simulation configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SolParams,
    /// Time step (default 1e-3 in the experiment harness).
    pub dt: f64,
    /// Horizon T.
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimConfig {
    pub fn new(params: SolParams, dt: f64, horizon: f64, seed: u64, scheme: Scheme) -> Result<Self> {
        let cfg = SimConfig { params, dt, horizon, seed, scheme };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SolError::domain("SimConfig", "dt must be positive"));
        }
        if !(self.horizon >= self.dt) || !self.horizon.is_finite() {
            return Err(SolError::domain("SimConfig", "need 0 < dt <= T"));
        }
        if self.horizon / self.dt > 9.0e15 {
            return Err(SolError::domain("SimConfig", "T/dt does not fit a step counter"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> u64 {
        (self.horizon / self.dt).round().max(1.0) as u64
    }
}

/// Running state of one path. The lateral coordinates and the clocks
/// live in scaled-float form: their magnitudes outgrow `f64` well inside
/// the experiment horizons.
#[derive(Debug, Clone, Copy)]
pub struct PathState {
    pub step: u64,
    pub t: f64,
    pub w: f64,
    pub z: f64,
    pub x: ScaledSigned,
    pub y: ScaledSigned,
    /// V_t(p).
    pub vp: ScaledSigned,
    /// V_t(-q).
    pub vq: ScaledSigned,
}

/// Which state components a run needs. The random stream is identical
/// for every mask (all channels are drawn from the same counter blocks),
/// so skipping a coordinate never changes the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channels {
    pub x: bool,
    pub y: bool,
    pub clocks: bool,
}

impl Channels {
    pub const ALL: Channels = Channels { x: true, y: true, clocks: true };
    /// Coordinates only; enough for the terminal-value statistics.
    pub const COORDS: Channels = Channels { x: true, y: true, clocks: false };
    pub const YZ: Channels = Channels { x: false, y: true, clocks: false };
}

/// Step-by-step simulator for one path.
pub struct PathKernel {
    params: SolParams,
    dt: f64,
    sqrt_dt: f64,
    ln_half_dt: f64,
    scheme: Scheme,
    channels: Channels,
    source: NormalSource,
    tc_source: NormalSource,
    path: u64,
    state: PathState,
    /// (log_scale, factor) of the last Y increment: inc = e^{scale} * factor.
    last_inc_y: (f64, f64),
}

impl PathKernel {
    pub fn new(config: &SimConfig, path: u64) -> Self {
        Self::with_channels(config, path, Channels::ALL)
    }

    /// The time-change scheme reads the clocks, so they stay on for it.
    pub fn with_channels(config: &SimConfig, path: u64, mut channels: Channels) -> Self {
        if config.scheme == Scheme::TimeChange {
            channels.clocks = true;
        }
        PathKernel {
            params: config.params,
            dt: config.dt,
            sqrt_dt: config.dt.sqrt(),
            ln_half_dt: (0.5 * config.dt).ln(),
            scheme: config.scheme,
            channels,
            source: NormalSource::new(config.seed, StreamId::Path),
            tc_source: NormalSource::new(config.seed, StreamId::TimeChange),
            path,
            state: PathState {
                step: 0,
                t: 0.0,
                w: 0.0,
                z: 0.0,
                x: ScaledSigned::ZERO,
                y: ScaledSigned::ZERO,
                vp: ScaledSigned::ZERO,
                vq: ScaledSigned::ZERO,
            },
            last_inc_y: (f64::NEG_INFINITY, 0.0),
        }
    }

    pub fn state(&self) -> &PathState {
        &self.state
    }

    /// The Y-increment consumed by the most recent [`advance`] call, in
    /// signed log form; needed by consumers that must resolve `Y_inf - Y_t`
    /// below `f64` resolution.
    ///
    /// [`advance`]: PathKernel::advance
    pub fn last_inc_y(&self) -> LogSigned {
        let (scale, factor) = self.last_inc_y;
        LogSigned::from_log(scale + factor.abs().ln(), factor)
    }

    /// The driving increment of W consumed at the current step.
    pub fn peek_dw(&self) -> f64 {
        let blk = self.source.block(self.path, self.state.step);
        NormalSource::pair_a(blk).0 * self.sqrt_dt
    }

    /// Advance one time step.
    pub fn advance(&mut self) {
        let s = &mut self.state;
        let (p, q, a) = (self.params.p, self.params.q, self.params.a);
        let blk = self.source.block(self.path, s.step);
        let (gw, gw2) = NormalSource::pair_a(blk);
        let dw = gw * self.sqrt_dt;
        let z_next = s.z + a * self.dt + dw;

        match self.scheme {
            Scheme::Euler => {
                // Ito: integrands frozen at the left endpoint.
                if self.channels.x {
                    let gw1 = NormalSource::pair_b(blk).0;
                    s.x.add_exp_prod(p * s.z, gw1 * self.sqrt_dt);
                }
                if self.channels.y {
                    s.y.add_exp_prod(-q * s.z, gw2 * self.sqrt_dt);
                    self.last_inc_y = (-q * s.z, gw2 * self.sqrt_dt);
                }
                if self.channels.clocks {
                    // trapezoid accrual of V(p), V(-q)
                    let half = 0.5 * self.dt;
                    s.vp.add_exp_prod(2.0 * p * s.z, half);
                    s.vp.add_exp_prod(2.0 * p * z_next, half);
                    s.vq.add_exp_prod(-2.0 * q * s.z, half);
                    s.vq.add_exp_prod(-2.0 * q * z_next, half);
                }
            }
            Scheme::TimeChange => {
                // The clocks drive the increments: X and Y are Brownian
                // motions read at V(p) and V(-q), independent of W.
                let log_dvp = self.ln_half_dt + log_add_exp(2.0 * p * s.z, 2.0 * p * z_next);
                let log_dvq = self.ln_half_dt + log_add_exp(-2.0 * q * s.z, -2.0 * q * z_next);
                let h = self.tc_source.step(self.path, s.step);
                if self.channels.x {
                    s.x.add_exp_prod(0.5 * log_dvp, h.w);
                }
                if self.channels.y {
                    s.y.add_exp_prod(0.5 * log_dvq, h.w1);
                    self.last_inc_y = (0.5 * log_dvq, h.w1);
                }
                s.vp.add_exp_prod(log_dvp, 1.0);
                s.vq.add_exp_prod(log_dvq, 1.0);
            }
        }

        s.w += dw;
        s.z = z_next;
        s.step += 1;
        s.t = s.step as f64 * self.dt;
    }

    /// Run to the configured step count of `config` (caller supplies it).
    pub fn run_to(&mut self, steps: u64) -> &PathState {
        while self.state.step < steps {
            self.advance();
        }
        &self.state
    }
}

/// Terminal state of one path at the configured horizon.
pub fn terminal_state(config: &SimConfig, path: u64) -> PathState {
    let mut k = PathKernel::new(config, path);
    k.run_to(config.n_steps());
    *k.state()
}

/// Terminal state computing only the requested channels.
pub fn terminal_state_channels(config: &SimConfig, path: u64, channels: Channels) -> PathState {
    let mut k = PathKernel::with_channels(config, path, channels);
    k.run_to(config.n_steps());
    *k.state()
}

/// Why a materialized path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStatus {
    Complete,
    /// A coordinate left the representable `f64` range at this step; the
    /// arrays stop just before it.
    TruncatedOverflow { step: u64 },
}

/// A materialized sample path on the saved grid.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    pub times: Vec<f64>,
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub vp: Vec<f64>,
    pub vq: Vec<f64>,
    pub status: PathStatus,
}

impl BrownianPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV dump, `t,W,X,Y,Z,Vp,Vq` with one row per saved step.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,W,X,Y,Z,Vp,Vq")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.times[i], self.w[i], self.x[i], self.y[i], self.z[i], self.vp[i], self.vq[i]
            )?;
        }
        Ok(())
    }
}

/// Simulate one path (path index 0) and materialize every step.
pub fn simulate_path(config: &SimConfig) -> Result<BrownianPath> {
    simulate_path_decimated(config, 0, 1)
}

/// Simulate path `path` of the batch, saving every `decimation`-th step
/// (the initial and final states are always saved). Coordinates whose
/// magnitude has outgrown `f64` truncate the path with an explicit
/// status; the clocks saturate to `+inf` instead, since "diverged" is a
/// meaningful reading for them.
pub fn simulate_path_decimated(
    config: &SimConfig,
    path: u64,
    decimation: u64,
) -> Result<BrownianPath> {
    config.validate()?;
    let decimation = decimation.max(1);
    let steps = config.n_steps();
    let mut kernel = PathKernel::new(config, path);
    let mut out = BrownianPath {
        times: vec![0.0],
        w: vec![0.0],
        x: vec![0.0],
        y: vec![0.0],
        z: vec![0.0],
        vp: vec![0.0],
        vq: vec![0.0],
        status: PathStatus::Complete,
    };
    while kernel.state().step < steps {
        kernel.advance();
        let s = kernel.state();
        if s.step.is_multiple_of(decimation) || s.step == steps {
            let x = s.x.to_f64();
            let y = s.y.to_f64();
            if !x.is_finite() || !y.is_finite() || !s.z.is_finite() {
                out.status = PathStatus::TruncatedOverflow { step: s.step };
                break;
            }
            out.times.push(s.t);
            out.w.push(s.w);
            out.x.push(x);
            out.y.push(y);
            out.z.push(s.z);
            out.vp.push(s.vp.to_f64());
            out.vq.push(s.vq.to_f64());
        }
    }
    Ok(out)
}

/// Group increment `g1^{-1} g2`; by left-invariance it has the law of the
/// path value at the elapsed time, `Z_s^{-1} Z_t ~ Z_{t-s}`.
pub fn increment(g1: SolPoint, g2: SolPoint, params: SolParams) -> Result<SolPoint> {
    group_mul(group_inv(g1, params)?, g2, params)
}

/// Estimate of the almost-sure limit `Y_inf = int_0^inf e^{-q Z_s} dW^2_s`
/// (finite when `a > 0`) by running path `path` to `cutoff`. The
/// truncation error has conditional standard deviation of order
/// `e^{-q(a cutoff + W_cutoff)}`.
pub fn y_infinity(config: &SimConfig, path: u64, cutoff: f64) -> Result<f64> {
    if config.params.a <= 0.0 {
        return Err(SolError::domain("y_infinity", "requires drift a > 0"));
    }
    let mut cfg = *config;
    cfg.horizon = cutoff;
    cfg.validate()?;
    let s = terminal_state(&cfg, path);
    Ok(s.y.to_f64())
}

/// Mirror of [`y_infinity`] for `a < 0`: the first coordinate converges.
pub fn x_infinity(config: &SimConfig, path: u64, cutoff: f64) -> Result<f64> {
    if config.params.a >= 0.0 {
        return Err(SolError::domain("x_infinity", "requires drift a < 0"));
    }
    let mut cfg = *config;
    cfg.horizon = cutoff;
    cfg.validate()?;
    let s = terminal_state(&cfg, path);
    Ok(s.x.to_f64())
}

/// Horizon after which the truncation noise of `Y_cutoff` vs `Y_inf`
/// stays below `target_sd` with three sigmas of slack on `W`:
/// solves `q (a T - 3 sqrt(T)) >= -log(target_sd)`.
pub fn y_infinity_cutoff(params: &SolParams, target_sd: f64) -> Result<f64> {
    if params.a <= 0.0 {
        return Err(SolError::domain("y_infinity_cutoff", "requires drift a > 0"));
    }
    let need = -target_sd.ln() / params.q;
    // a u^2 - 3 u - need = 0 for u = sqrt(T)
    let u = (3.0 + (9.0 + 4.0 * params.a * need).sqrt()) / (2.0 * params.a);
    Ok((u * u).max(1.0))
}
