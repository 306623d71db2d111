//! Variational upper estimate for the Sol distance.
//!
//! The length of a curve `(x(t), y(t), z(t))` is
//! `int sqrt(e^{-2p z} xdot^2 + e^{2q z} ydot^2 + zdot^2) dt`. A polygonal
//! curve is scored by the midpoint rule (metric factors frozen at the
//! segment's mean height) and relaxed by Gauss-Seidel sweeps of
//! safeguarded per-coordinate Newton steps on the interior vertices, with
//! coarse-to-fine subdivision so the low-frequency shape is settled on
//! cheap polygons first. Any iterate's length is an upper bound for the
//! distance up to the discretization error of the polygon itself.
//!
//! Initial candidates: the straight coordinate segment, and the two
//! five-leg staircase paths that climb to the horocycle level `log|x|/p`
//! (resp. descend to `-log|y|/q`) where the lateral hops have unit-order
//! cost; those staircases are near-optimal for large `|x|, |y|`.

use super::{group_inv, group_mul, SolParams, SolPoint};
use crate::error::{Result, SolError};

#[inline]
fn safe_exp(t: f64) -> f64 {
    t.clamp(-745.0, 709.0).exp()
}

/// A polygonal curve with fixed endpoints.
#[derive(Debug, Clone)]
pub struct Curve {
    points: Vec<SolPoint>,
}

impl Curve {
    pub fn new(points: Vec<SolPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(SolError::domain("Curve", "needs at least 2 points"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(SolError::NonFinite { context: "Curve" });
        }
        Ok(Curve { points })
    }

    pub fn points(&self) -> &[SolPoint] {
        &self.points
    }

    pub fn n_segments(&self) -> usize {
        self.points.len() - 1
    }

    /// Straight coordinate segment from the origin to `g`.
    pub fn straight(g: SolPoint, segments: usize) -> Self {
        let n = segments.max(2);
        let points = (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                SolPoint::new(t * g.x, t * g.y, t * g.z)
            })
            .collect();
        Curve { points }
    }

    /// Piecewise-linear interpolation through `corners`, distributing
    /// roughly `segments` segments proportionally to the legs' metric
    /// lengths.
    fn through(corners: &[SolPoint], segments: usize, params: SolParams) -> Self {
        let leg_len: Vec<f64> = corners
            .windows(2)
            .map(|w| seg_len(&w[0], &w[1], params).max(1e-12))
            .collect();
        let total: f64 = leg_len.iter().sum();
        let mut points = vec![corners[0]];
        for (i, w) in corners.windows(2).enumerate() {
            let n = ((segments as f64 * leg_len[i] / total).round() as usize).max(1);
            for k in 1..=n {
                let t = k as f64 / n as f64;
                points.push(SolPoint::new(
                    w[0].x + t * (w[1].x - w[0].x),
                    w[0].y + t * (w[1].y - w[0].y),
                    w[0].z + t * (w[1].z - w[0].z),
                ));
            }
        }
        Curve { points }
    }

    /// Midpoint-rule length.
    pub fn length(&self, params: SolParams) -> f64 {
        self.points
            .windows(2)
            .map(|w| seg_len(&w[0], &w[1], params))
            .sum()
    }

    /// Insert coordinate midpoints, doubling the segment count.
    pub fn subdivide(&mut self) {
        let mut out = Vec::with_capacity(self.points.len() * 2 - 1);
        for w in self.points.windows(2) {
            out.push(w[0]);
            out.push(SolPoint::new(
                0.5 * (w[0].x + w[1].x),
                0.5 * (w[0].y + w[1].y),
                0.5 * (w[0].z + w[1].z),
            ));
        }
        out.push(*self.points.last().unwrap());
        self.points = out;
    }

    /// Resample to `m` segments at uniform metric arclength along the
    /// current polyline. The length functional is parametrization-blind,
    /// so relaxation lets vertices bunch up; redistribution keeps the
    /// polygon nondegenerate without changing its trace.
    pub fn resample(&mut self, m: usize, params: SolParams) {
        let m = m.max(2);
        let mut cum = Vec::with_capacity(self.points.len());
        cum.push(0.0);
        for w in self.points.windows(2) {
            cum.push(cum.last().unwrap() + seg_len(&w[0], &w[1], params));
        }
        let total = *cum.last().unwrap();
        if !(total > 0.0) || !total.is_finite() {
            return;
        }
        let mut out = Vec::with_capacity(m + 1);
        out.push(self.points[0]);
        let mut i = 0usize;
        for j in 1..m {
            let target = total * j as f64 / m as f64;
            while i + 1 < cum.len() - 1 && cum[i + 1] < target {
                i += 1;
            }
            let span = cum[i + 1] - cum[i];
            let frac = if span > 0.0 { (target - cum[i]) / span } else { 0.0 };
            let (a, b) = (self.points[i], self.points[i + 1]);
            out.push(SolPoint::new(
                a.x + frac * (b.x - a.x),
                a.y + frac * (b.y - a.y),
                a.z + frac * (b.z - a.z),
            ));
        }
        out.push(*self.points.last().unwrap());
        self.points = out;
    }

    /// One symmetric Gauss-Seidel sweep over the interior vertices.
    /// Endpoints never move. Returns the post-sweep length.
    pub fn relax_sweep(&mut self, params: SolParams) -> f64 {
        let n = self.points.len();
        for i in 1..n - 1 {
            relax_vertex(&mut self.points, i, params);
        }
        for i in (1..n - 1).rev() {
            relax_vertex(&mut self.points, i, params);
        }
        self.length(params)
    }

    /// Sweep until the length improvement stalls or `max_sweeps` is hit,
    /// redistributing vertices by arclength between rounds. Returns the
    /// best (smallest) polygon length observed; every intermediate
    /// polygon is itself a valid upper bound, so the result can only
    /// improve with a larger budget.
    pub fn relax(&mut self, params: SolParams, max_sweeps: usize) -> f64 {
        let n = self.n_segments();
        let mut remaining = max_sweeps;
        let mut best = self.length(params);
        loop {
            self.resample(n, params);
            let mut len = self.length(params);
            let mut round_progress = false;
            while remaining > 0 {
                let next = self.relax_sweep(params);
                remaining -= 1;
                let gained = len - next;
                len = next;
                best = best.min(len);
                if gained <= 1e-12 * (1.0 + len) {
                    break;
                }
                round_progress = true;
            }
            if remaining == 0 || !round_progress {
                return best;
            }
        }
    }
}

#[inline]
fn seg_len(a: &SolPoint, b: &SolPoint, params: SolParams) -> f64 {
    let zm = 0.5 * (a.z + b.z);
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let dz = b.z - a.z;
    (safe_exp(-2.0 * params.p * zm) * dx * dx + safe_exp(2.0 * params.q * zm) * dy * dy
        + dz * dz)
        .sqrt()
}

/// Newton on the convex 1-d profile `u -> sqrt(k1 + c1 (u-a)^2) +
/// sqrt(k2 + c2 (b-u)^2)`; used for the x- and y-coordinate updates.
#[inline]
fn lateral_newton(u0: f64, a: f64, b: f64, c1: f64, k1: f64, c2: f64, k2: f64) -> f64 {
    let f = |u: f64| {
        let d1 = u - a;
        let d2 = b - u;
        (k1 + c1 * d1 * d1).sqrt() + (k2 + c2 * d2 * d2).sqrt()
    };
    let mut u = u0;
    for _ in 0..3 {
        let d1 = u - a;
        let d2 = b - u;
        let l1 = (k1 + c1 * d1 * d1).sqrt();
        let l2 = (k2 + c2 * d2 * d2).sqrt();
        if l1 == 0.0 || l2 == 0.0 {
            return u0;
        }
        let grad = c1 * d1 / l1 - c2 * d2 / l2;
        let hess = c1 * k1 / (l1 * l1 * l1) + c2 * k2 / (l2 * l2 * l2);
        if hess <= 1e-300 {
            break;
        }
        u -= grad / hess;
    }
    if f(u) <= f(u0) {
        u
    } else {
        u0
    }
}

fn relax_vertex(points: &mut [SolPoint], i: usize, params: SolParams) {
    let l = points[i - 1];
    let r = points[i + 1];
    let mut v = points[i];
    let (p, q) = (params.p, params.q);

    // Metric factors at the two segment midheights; reused by both
    // lateral updates (which do not move z).
    let zm1 = 0.5 * (l.z + v.z);
    let zm2 = 0.5 * (v.z + r.z);
    let (ex1, ey1) = (safe_exp(-2.0 * p * zm1), safe_exp(2.0 * q * zm1));
    let (ex2, ey2) = (safe_exp(-2.0 * p * zm2), safe_exp(2.0 * q * zm2));

    let dz1 = v.z - l.z;
    let dz2 = r.z - v.z;

    // x-update
    {
        let dy1 = v.y - l.y;
        let dy2 = r.y - v.y;
        let k1 = ey1 * dy1 * dy1 + dz1 * dz1;
        let k2 = ey2 * dy2 * dy2 + dz2 * dz2;
        v.x = lateral_newton(v.x, l.x, r.x, ex1, k1, ex2, k2);
    }
    // y-update
    {
        let dx1 = v.x - l.x;
        let dx2 = r.x - v.x;
        let k1 = ex1 * dx1 * dx1 + dz1 * dz1;
        let k2 = ex2 * dx2 * dx2 + dz2 * dz2;
        v.y = lateral_newton(v.y, l.y, r.y, ey1, k1, ey2, k2);
    }
    // z-update: the metric factors move with z, so the profile is not
    // globally convex; take a trust-clamped Newton step and keep it only
    // if the local two-segment length improves.
    {
        let dx1 = v.x - l.x;
        let dy1 = v.y - l.y;
        let dx2 = r.x - v.x;
        let dy2 = r.y - v.y;
        let local = |z: f64| {
            seg_len(&l, &SolPoint::new(v.x, v.y, z), params)
                + seg_len(&SolPoint::new(v.x, v.y, z), &r, params)
        };
        let mut best = v.z;
        let mut best_f = local(best);
        let mut u = v.z;
        for _ in 0..2 {
            let a1 = safe_exp(-2.0 * p * 0.5 * (l.z + u)) * dx1 * dx1;
            let b1 = safe_exp(2.0 * q * 0.5 * (l.z + u)) * dy1 * dy1;
            let a2 = safe_exp(-2.0 * p * 0.5 * (u + r.z)) * dx2 * dx2;
            let b2 = safe_exp(2.0 * q * 0.5 * (u + r.z)) * dy2 * dy2;
            let t1 = u - l.z;
            let t2 = u - r.z;
            let l1 = (a1 + b1 + t1 * t1).sqrt();
            let l2 = (a2 + b2 + t2 * t2).sqrt();
            if l1 == 0.0 || l2 == 0.0 {
                break;
            }
            let e1p = -p * a1 + q * b1;
            let e2p = -p * a2 + q * b2;
            let l1p = (e1p + 2.0 * t1) / (2.0 * l1);
            let l2p = (e2p + 2.0 * t2) / (2.0 * l2);
            let grad = l1p + l2p;
            let e1pp = p * p * a1 + q * q * b1;
            let e2pp = p * p * a2 + q * q * b2;
            let hess = (e1pp + 2.0) / (2.0 * l1) - l1p * l1p / l1 + (e2pp + 2.0) / (2.0 * l2)
                - l2p * l2p / l2;
            let cap = 1.0 / (1.0 + p.max(q));
            let mut step = if hess > 1e-300 {
                (-grad / hess).clamp(-cap, cap)
            } else {
                -grad.signum() * 0.25 * cap
            };
            let mut accepted = false;
            for _ in 0..3 {
                let cand = u + step;
                let fc = local(cand);
                if fc < best_f {
                    best_f = fc;
                    best = cand;
                    u = cand;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        v.z = best;
    }
    points[i] = v;
}

/// Sampled points of the H(kappa) geodesic between two log-model points:
/// a vertical line or a semicircle in half-plane coordinates.
fn hyp_arc(kappa: f64, a: super::HypPoint, b: super::HypPoint, segments: usize) -> Vec<super::HypPoint> {
    let n = segments.max(1);
    let (xa, xb) = (kappa * a.x, kappa * b.x);
    let (wa, wb) = (safe_exp(kappa * a.z), safe_exp(kappa * b.z));
    let linear = |t: f64| super::HypPoint::new(a.x + t * (b.x - a.x), a.z + t * (b.z - a.z));
    if (xa - xb).abs() <= 1e-12 * (1.0 + xa.abs() + xb.abs()) {
        // vertical geodesic: linear in log coordinates
        return (0..=n).map(|k| linear(k as f64 / n as f64)).collect();
    }
    let center = (xa * xa + wa * wa - xb * xb - wb * wb) / (2.0 * (xa - xb));
    let r = libm::hypot(xa - center, wa);
    let ta = libm::atan2(wa, xa - center);
    let tb = libm::atan2(wb, xb - center);
    if !r.is_finite() || !ta.is_finite() || !tb.is_finite() || r <= 0.0 {
        return (0..=n).map(|k| linear(k as f64 / n as f64)).collect();
    }
    (0..=n)
        .map(|k| {
            let t = ta + (tb - ta) * k as f64 / n as f64;
            let w = (r * libm::sin(t)).max(1e-300);
            super::HypPoint::new((center + r * libm::cos(t)) / kappa, w.ln() / kappa)
        })
        .collect()
}

/// Candidates that run each factor plane's exact geodesic in turn: the
/// transversal legs of the hyperbolic upper bound. These start within the
/// polygonization error of that bound, so relaxation only polishes.
fn factor_geodesic_candidates(g: SolPoint, params: SolParams, segments: usize) -> Vec<Curve> {
    let o = super::HypPoint::ORIGIN;
    let mut out = Vec::new();

    // y-leg first (second plane), then x-leg at the final height.
    {
        let leg_y = super::dist_hp(params.q, o, super::HypPoint::new(g.y, -g.z));
        let leg_x = super::dist_hp(
            params.p,
            super::HypPoint::new(0.0, g.z),
            super::HypPoint::new(g.x, g.z),
        );
        let total = (leg_y + leg_x).max(1e-12);
        let ny = ((segments as f64 * leg_y / total).round() as usize).clamp(1, segments.saturating_sub(1).max(1));
        let nx = (segments - ny.min(segments - 1)).max(1);
        let mut points = Vec::with_capacity(ny + nx + 1);
        for u in hyp_arc(params.q, o, super::HypPoint::new(g.y, -g.z), ny) {
            points.push(SolPoint::new(0.0, u.x, -u.z));
        }
        for u in hyp_arc(
            params.p,
            super::HypPoint::new(0.0, g.z),
            super::HypPoint::new(g.x, g.z),
            nx,
        )
        .into_iter()
        .skip(1)
        {
            points.push(SolPoint::new(u.x, g.y, u.z));
        }
        out.push(Curve { points });
    }

    // x-leg first (first plane), then y-leg at the final height.
    {
        let leg_x = super::dist_hp(params.p, o, super::HypPoint::new(g.x, g.z));
        let leg_y = super::dist_hp(
            params.q,
            super::HypPoint::new(0.0, -g.z),
            super::HypPoint::new(g.y, -g.z),
        );
        let total = (leg_x + leg_y).max(1e-12);
        let nx = ((segments as f64 * leg_x / total).round() as usize).clamp(1, segments.saturating_sub(1).max(1));
        let ny = (segments - nx.min(segments - 1)).max(1);
        let mut points = Vec::with_capacity(nx + ny + 1);
        for u in hyp_arc(params.p, o, super::HypPoint::new(g.x, g.z), nx) {
            points.push(SolPoint::new(u.x, 0.0, u.z));
        }
        for u in hyp_arc(
            params.q,
            super::HypPoint::new(0.0, -g.z),
            super::HypPoint::new(g.y, -g.z),
            ny,
        )
        .into_iter()
        .skip(1)
        {
            points.push(SolPoint::new(g.x, u.x, -u.z));
        }
        out.push(Curve { points });
    }
    out
}

fn staircase_candidates(g: SolPoint, params: SolParams, segments: usize) -> Vec<Curve> {
    let o = SolPoint::ORIGIN;
    let mut out = Vec::new();
    let ha = if g.x != 0.0 {
        Some(g.x.abs().ln() / params.p)
    } else {
        None
    };
    let hb = if g.y != 0.0 {
        Some(-g.y.abs().ln() / params.q)
    } else {
        None
    };
    match (ha, hb) {
        (Some(ha), Some(hb)) => {
            let up_first = [
                o,
                SolPoint::new(0.0, 0.0, ha),
                SolPoint::new(g.x, 0.0, ha),
                SolPoint::new(g.x, 0.0, hb),
                SolPoint::new(g.x, g.y, hb),
                g,
            ];
            let down_first = [
                o,
                SolPoint::new(0.0, 0.0, hb),
                SolPoint::new(0.0, g.y, hb),
                SolPoint::new(0.0, g.y, ha),
                SolPoint::new(g.x, g.y, ha),
                g,
            ];
            out.push(Curve::through(&up_first, segments, params));
            out.push(Curve::through(&down_first, segments, params));
        }
        (Some(ha), None) => {
            let corners = [o, SolPoint::new(0.0, 0.0, ha), SolPoint::new(g.x, 0.0, ha), g];
            out.push(Curve::through(&corners, segments, params));
        }
        (None, Some(hb)) => {
            let corners = [o, SolPoint::new(0.0, 0.0, hb), SolPoint::new(0.0, g.y, hb), g];
            out.push(Curve::through(&corners, segments, params));
        }
        (None, None) => {}
    }
    out
}

/// Length of a locally optimized polygonal curve from the origin to `g`:
/// an upper bound for `dist(o, g)` up to the polygon's discretization
/// error. Refines from a coarse polygon by doubling until at least
/// `segments` segments, running up to `iters` relaxation sweeps per
/// level; more sweeps never increase the result at a fixed level.
pub fn estimate_distance(g: SolPoint, params: SolParams, segments: usize, iters: usize) -> f64 {
    let segments = segments.max(2);
    if g == SolPoint::ORIGIN {
        return 0.0;
    }
    // Gauss-Seidel damps high-frequency error fast but bends the curve's
    // global shape only at a rate ~ 1/n^2 per sweep, so coarse levels get
    // budgets inversely proportional to their size; they are cheap and
    // settle the shape before refinement.
    let budget = |n: usize| iters.max(3200 / n.max(1)).max(8);
    let coarse = segments.min(16);
    let mut candidates = vec![Curve::straight(g, coarse)];
    candidates.extend(staircase_candidates(g, params, coarse));
    candidates.extend(factor_geodesic_candidates(g, params, coarse.max(8)));

    // Near-tight path families can differ by less than the coarse
    // discretization error, so candidates that stay within a coarse
    // margin of the leader are all carried through the first refinement
    // levels before committing to one; clearly inferior ones are dropped
    // right away.
    let mut relaxed: Vec<(f64, Curve)> = candidates
        .into_iter()
        .map(|mut c| (c.relax(params, budget(c.n_segments())), c))
        .collect();
    relaxed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let keep = relaxed[0].0 + (0.08 * relaxed[0].0).max(0.5);
    relaxed.retain(|(l, _)| *l <= keep);

    let select_at = segments.min(128);
    for entry in &mut relaxed {
        while entry.1.n_segments() < select_at {
            let doubled = 2 * entry.1.n_segments();
            entry.1.resample(doubled, params);
            entry.0 = entry.1.relax(params, budget(entry.1.n_segments()));
        }
    }
    relaxed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut len, mut curve) = relaxed.swap_remove(0);
    loop {
        if curve.n_segments() >= segments {
            return len;
        }
        let doubled = 2 * curve.n_segments();
        curve.resample(doubled, params);
        len = curve.relax(params, budget(curve.n_segments()));
    }
}

/// `estimate_distance` between two arbitrary points via left-invariance:
/// `dist(g1, g2) = dist(o, g1^{-1} g2)`.
pub fn estimate_distance_between(
    g1: SolPoint,
    g2: SolPoint,
    params: SolParams,
    segments: usize,
    iters: usize,
) -> Result<f64> {
    let h = group_mul(group_inv(g1, params)?, g2, params)?;
    Ok(estimate_distance(h, params, segments, iters))
}

/// Segment count heuristic: enough resolution for the polygon gap to stay
/// a few 1e-4 at the scale suggested by the certified upper bounds.
pub fn suggested_segments(g: SolPoint, params: SolParams) -> usize {
    let mut scale = super::upper_bound_iii(g, params);
    if let Ok(iv) = super::upper_bound_iv(g, params) {
        scale = scale.min(iv);
    }
    ((48.0 * scale).ceil() as usize).clamp(96, 1024)
}

/// Upper estimate that escalates effort when the certified bounds say the
/// polygon has not converged: for points where the staircase or factor
/// bound is nearly tight, the first-pass estimate can sit a few 1e-4
/// above it, and only those points are worth longer relaxation.
pub fn certified_upper_estimate(g: SolPoint, params: SolParams) -> f64 {
    let mut upper = super::upper_bound_iii(g, params);
    if let Ok(iv) = super::upper_bound_iv(g, params) {
        upper = upper.min(iv);
    }
    let segs = suggested_segments(g, params);
    let mut est = estimate_distance(g, params, segs, 32);
    if est > upper + 4e-4 {
        est = est.min(estimate_distance(g, params, segs, 160));
    }
    if est > upper + 6e-4 {
        est = est.min(estimate_distance(g, params, (2 * segs).min(2048), 160));
    }
    if est > upper + 7e-4 {
        est = est.min(estimate_distance(g, params, (4 * segs).min(4096), 220));
    }
    est
}
