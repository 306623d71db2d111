//! Geometry of Sol(p,q).
//!
//! Coordinates `(x, y, z)` identify the group element whose left action is
//! `(a,b,c) . (x,y,z) = (e^{pc} x + a, e^{-qc} y + b, c + z)`. The
//! left-invariant length element is `e^{-2pz} dx^2 + e^{2qz} dy^2 + dz^2`,
//! so Sol(p,q) is the horocyclic product of the hyperbolic planes H(p) and
//! H(q) in logarithmic coordinates: `proj1 (x,y,z) = (x,z)` lands in H(p),
//! `proj2 (x,y,z) = (y,-z)` in H(q), and the two heights sum to zero.
//!
//! There is no closed form for the Sol distance. This module provides the
//! exact hyperbolic distances of the factor planes, four certified bounds
//! on `dist(o, g)` (two lower, two upper), and a variational upper
//! estimate obtained by relaxing a polygonal curve ([`estimate_distance`]).
//!
//! Several bound evaluators have `*_logs` twins taking `log|x|, log|y|`
//! directly; the diffusion's coordinates overflow `f64` long before the
//! horizons used in the limit-theorem experiments.

mod variational;

pub use variational::{
    certified_upper_estimate, estimate_distance, estimate_distance_between, suggested_segments,
    Curve,
};

use crate::error::{Result, SolError};
use crate::logspace::log_add_exp;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// The parameter triple: curvatures `p, q > 0` of the two hyperbolic
/// planes and the vertical drift `a` of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolParams {
    pub p: f64,
    pub q: f64,
    pub a: f64,
}

impl SolParams {
    pub fn new(p: f64, q: f64, a: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(SolError::domain("SolParams", format!("p = {p} must be > 0")));
        }
        if !(q > 0.0) || !q.is_finite() {
            return Err(SolError::domain("SolParams", format!("q = {q} must be > 0")));
        }
        if !a.is_finite() {
            return Err(SolError::domain("SolParams", format!("a = {a} must be finite")));
        }
        Ok(SolParams { p, q, a })
    }

    /// The drift for which the operator is the Laplace-Beltrami operator.
    pub fn beltrami_drift(&self) -> f64 {
        0.5 * (self.q - self.p)
    }
}

/// A point of Sol(p,q); `z` is the horocycle level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SolPoint {
    pub const ORIGIN: SolPoint = SolPoint { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        SolPoint { x, y, z }
    }

    /// Height homomorphism onto R.
    pub fn hor(&self) -> f64 {
        self.z
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A point of H(p) in logarithmic coordinates `(x, z)`; the underlying
/// half-plane height is `e^z`, so `z` is unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypPoint {
    pub x: f64,
    pub z: f64,
}

impl HypPoint {
    pub const ORIGIN: HypPoint = HypPoint { x: 0.0, z: 0.0 };

    pub fn new(x: f64, z: f64) -> Self {
        HypPoint { x, z }
    }

    pub fn hor(&self) -> f64 {
        self.z
    }
}

/// Group product `g . h`.
pub fn group_mul(g: SolPoint, h: SolPoint, params: SolParams) -> Result<SolPoint> {
    let out = SolPoint {
        x: (params.p * g.z).exp() * h.x + g.x,
        y: (-params.q * g.z).exp() * h.y + g.y,
        z: g.z + h.z,
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(SolError::NonFinite { context: "group_mul" })
    }
}

/// Group inverse: `inv(a,b,c) = (-e^{-pc} a, -e^{qc} b, -c)`.
pub fn group_inv(g: SolPoint, params: SolParams) -> Result<SolPoint> {
    let out = SolPoint {
        x: -(-params.p * g.z).exp() * g.x,
        y: -(params.q * g.z).exp() * g.y,
        z: -g.z,
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(SolError::NonFinite { context: "group_inv" })
    }
}

/// Modular function `e^{(q-p) z}`; identically 1 iff p = q.
pub fn modular(g: SolPoint, params: SolParams) -> f64 {
    ((params.q - params.p) * g.z).exp()
}

/// First projection, onto H(p).
pub fn proj1(g: SolPoint) -> HypPoint {
    HypPoint { x: g.x, z: g.z }
}

/// Second projection, onto H(q); the height flips sign so that the two
/// projected heights always sum to zero.
pub fn proj2(g: SolPoint) -> HypPoint {
    HypPoint { x: g.y, z: -g.z }
}

/// arcosh(1 + s) for s >= 0, stable for both tiny and huge s.
#[inline]
fn acosh1p(s: f64) -> f64 {
    libm::log1p(s + (s * (s + 2.0)).sqrt())
}

/// Exact H(1) distance in logarithmic coordinates:
/// `arcosh(1 + ((x-x')^2 + (e^z - e^{z'})^2) / (2 e^{z+z'}))`,
/// evaluated through `2 sinh^2(dz/2) + dx^2 e^{-(z+z')} / 2` so pure
/// vertical pairs come out as `|z - z'|` to machine precision.
pub fn dist_h1(u: HypPoint, v: HypPoint) -> f64 {
    let dz = u.z - v.z;
    let sh = libm::sinh(0.5 * dz);
    let dx = u.x - v.x;
    let s = 2.0 * sh * sh + 0.5 * dx * dx * (-(u.z + v.z)).exp();
    acosh1p(s)
}

/// H(1) distance from `(x, 0^z)` to the origin with `|x| = e^{log_abs_x}`,
/// usable when `x` itself far exceeds the `f64` range.
pub fn dist_h1_origin_from_log(log_abs_x: f64, z: f64) -> f64 {
    let sh = libm::sinh(0.5 * z);
    let vertical = if sh == 0.0 {
        f64::NEG_INFINITY
    } else {
        LN_2 + 2.0 * sh.abs().ln()
    };
    let s_log = log_add_exp(vertical, 2.0 * log_abs_x - z - LN_2);
    if s_log < 700.0 {
        acosh1p(s_log.exp())
    } else {
        // arcosh(1+s) = log(2s) + O(1/s)
        LN_2 + s_log
    }
}

/// H(p) distance via the scaling identity
/// `dist_{H(p)}(u, v) = (1/p) dist_{H(1)}((p u_x, p u_z), (p v_x, p v_z))`.
pub fn dist_hp(p: f64, u: HypPoint, v: HypPoint) -> f64 {
    dist_h1(
        HypPoint { x: p * u.x, z: p * u.z },
        HypPoint { x: p * v.x, z: p * v.z },
    ) / p
}

/// H(p) distance from `(x, z)` to the origin with `|x| = e^{log_abs_x}`.
pub fn dist_hp_origin_from_log(p: f64, log_abs_x: f64, z: f64) -> f64 {
    dist_h1_origin_from_log(p.ln() + log_abs_x, p * z) / p
}

/// Lower bound (vertical): `dist(o, g) >= |z|`.
pub fn lower_bound_i(g: SolPoint) -> f64 {
    g.z.abs()
}

/// Lower bound from the lateral coordinates. The distance `d` satisfies
/// `d + (1/p + 1/q) log d >= (2/p) log|x| + (2/q) log|y| - |z|`, which is
/// implicit in `d`; the bound returned is the largest `d* >= 1` with
/// `d* + (1/p + 1/q) log d* <=` that right-hand side, found by bisection
/// (the left side is strictly increasing). Returns 0 when vacuous.
pub fn lower_bound_ii(g: SolPoint, params: SolParams) -> Result<f64> {
    lower_bound_ii_logs(params, g.x.abs().ln(), g.y.abs().ln(), g.z)
}

/// `lower_bound_ii` on log-magnitude coordinates.
pub fn lower_bound_ii_logs(
    params: SolParams,
    log_abs_x: f64,
    log_abs_y: f64,
    z: f64,
) -> Result<f64> {
    let rhs = 2.0 * log_abs_x / params.p + 2.0 * log_abs_y / params.q - z.abs();
    if rhs <= 1.0 {
        // Includes x = 0 or y = 0 (rhs = -inf): the bound is vacuous.
        return Ok(0.0);
    }
    if !rhs.is_finite() {
        return Err(SolError::NonFinite { context: "lower_bound_ii" });
    }
    let c = 1.0 / params.p + 1.0 / params.q;
    let f = |d: f64| d + c * d.ln();
    let (mut lo, mut hi) = (1.0, 2.0);
    while f(hi) < rhs {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= rhs {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(lo)
}

/// Upper bound via the two hyperbolic factors:
/// `dist_{H(p)}((x,z), o) + dist_{H(q)}((y,-z), o) - |z|`.
pub fn upper_bound_iii(g: SolPoint, params: SolParams) -> f64 {
    upper_bound_iii_logs(params, g.x.abs().ln(), g.y.abs().ln(), g.z)
}

/// `upper_bound_iii` on log-magnitude coordinates.
pub fn upper_bound_iii_logs(params: SolParams, log_abs_x: f64, log_abs_y: f64, z: f64) -> f64 {
    dist_hp_origin_from_log(params.p, log_abs_x, z)
        + dist_hp_origin_from_log(params.q, log_abs_y, -z)
        - z.abs()
}

/// Cost of the horizontal hop `(0, log|x|/p) -> (x, log|x|/p)` in H(p):
/// independent of `x`, equal to `(1/p) arcosh(1 + p^2/2)`.
pub fn horizontal_hop_cost(p: f64) -> f64 {
    acosh1p(0.5 * p * p) / p
}

/// Upper bound from the five-leg staircase path:
/// `c_p + c_q + |lx + ly| + min(|lx| + |ly + z|, |lx - z| + |ly|)` with
/// `lx = log|x|/p`, `ly = log|y|/q`. Requires `x, y != 0`.
pub fn upper_bound_iv(g: SolPoint, params: SolParams) -> Result<f64> {
    if g.x == 0.0 || g.y == 0.0 {
        return Err(SolError::domain(
            "upper_bound_iv",
            "requires x != 0 and y != 0",
        ));
    }
    Ok(upper_bound_iv_logs(
        params,
        g.x.abs().ln(),
        g.y.abs().ln(),
        g.z,
    ))
}

/// `upper_bound_iv` on log-magnitude coordinates (caller guarantees the
/// logs are finite).
pub fn upper_bound_iv_logs(params: SolParams, log_abs_x: f64, log_abs_y: f64, z: f64) -> f64 {
    let lx = log_abs_x / params.p;
    let ly = log_abs_y / params.q;
    horizontal_hop_cost(params.p)
        + horizontal_hop_cost(params.q)
        + (lx + ly).abs()
        + (lx.abs() + (ly + z).abs()).min((lx - z).abs() + ly.abs())
}

/// Which way a vertical geodesic ray runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerticalDirection {
    /// `t -> (0, eta, t)`: converges to the boundary piece at `z = +inf`.
    Up,
    /// `t -> (xi, 0, -t)`: converges to the boundary piece at `z = -inf`.
    Down,
}

/// Unit-speed vertical geodesic ray through the indicated boundary point.
pub fn vertical_geodesic(endpoint: f64, direction: VerticalDirection, t: f64) -> SolPoint {
    debug_assert!(t >= 0.0);
    match direction {
        VerticalDirection::Up => SolPoint::new(0.0, endpoint, t),
        VerticalDirection::Down => SolPoint::new(endpoint, 0.0, -t),
    }
}

/// Upper bound for the distance from `g` to the upward vertical geodesic
/// `t -> (0, y_inf, t)`: left-translating by `(0, y_inf, z)^{-1}` moves
/// the nearest geodesic point to the origin, giving
/// `dist(g, geodesic) <= ub_iii((e^{-pz} x, e^{qz}(y - y_inf), 0))`.
pub fn deviation_proxy(g: SolPoint, y_inf: f64, params: SolParams) -> Result<f64> {
    let xt = (-params.p * g.z).exp() * g.x;
    let yt = (params.q * g.z).exp() * (g.y - y_inf);
    if !xt.is_finite() || !yt.is_finite() {
        return Err(SolError::NonFinite { context: "deviation_proxy" });
    }
    Ok(deviation_proxy_logs(
        params,
        xt.abs().ln(),
        yt.abs().ln(),
    ))
}

/// `deviation_proxy` on the log magnitudes of the translated coordinates
/// `e^{-pz} x` and `e^{qz}(y - y_inf)`.
pub fn deviation_proxy_logs(params: SolParams, log_abs_xt: f64, log_abs_yt: f64) -> f64 {
    upper_bound_iii_logs(params, log_abs_xt, log_abs_yt, 0.0)
}
