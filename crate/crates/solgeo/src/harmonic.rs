//! Modified Poisson kernels and positive eigenfunctions of the drifted
//! Laplacian.
//!
//! On H(p) with drift `a`, the operator
//! `(1/2)(e^{2pz} d_xx + d_zz) + a d_z` has positive lambda-eigenfunctions
//! exactly for `lambda >= lambda_min = -a^2/2`, and the minimal ones are
//! the modified Poisson kernels
//!
//! ```text
//! P_{p,a,lambda}((x,z), omega) = e^{alpha z}
//! P_{p,a,lambda}((x,z), xi)   = e^{alpha z} ((xi^2+1) / ((xi - p x)^2 + e^{2pz}))^beta
//! ```
//!
//! with `alpha = sqrt(a^2 + 2 lambda) - a` and
//! `beta = 1/2 + sqrt(a^2 + 2 lambda)/p`. At `p = 1, a = -1/2, lambda = 0`
//! this reduces to the classical hyperbolic Poisson kernel
//! `(xi^2+1) e^z / ((xi-x)^2 + e^{2z})`.
//!
//! On Sol(p,q), every positive eigenfunction is a sum `h1 . proj1 +
//! h2 . proj2` of eigenfunctions of the projected operators (drift `a` on
//! the first plane, `-a` on the second); finite atomic measures on the two
//! boundaries therefore generate eigenfunctions by superposition, and at
//! `lambda_min` the function `e^{-a z}` appears as the kernel of either
//! point at infinity.
//!
//! Verification is numerical throughout: finite differences with
//! metric-adapted steps (`h_x = eps e^{pz}`, `h_y = eps e^{-qz}`, so the
//! coefficients `e^{2pz}/h_x^2` stay `1/eps^2` at every height — uniform
//! steps lose all accuracy for `|z| >~ 3`), and tensor midpoint quadrature
//! for the reversibility identity. Minimality itself is not numerically
//! decidable; what is checked are the eigen-residuals and the analytic
//! identities.

use crate::error::{Result, SolError};
use crate::geometry::{group_mul, proj1, proj2, HypPoint, SolParams, SolPoint};
use crate::logspace::log_add_exp;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A boundary point of a hyperbolic plane: a real horocyclic coordinate
/// or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Boundary {
    Xi(f64),
    #[serde(with = "omega_str")]
    Omega,
}

mod omega_str {
    pub fn serialize<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str("omega")
    }
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<(), D::Error> {
        let v: String = serde::Deserialize::deserialize(d)?;
        if v == "omega" {
            Ok(())
        } else {
            Err(serde::de::Error::custom("expected \"omega\""))
        }
    }
}

/// Which factor plane a kernel family lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    /// H(p), reached through `proj1`; sees drift `+a`.
    First,
    /// H(q), reached through `proj2`; sees drift `-a`.
    Second,
}

/// One weighted boundary atom in the wire format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub xi: Boundary,
    pub w: f64,
}

/// JSON wire format for a kernel family with its boundary measure:
/// `{plane, curvature, drift, lambda, atoms: [{xi|"omega", w}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMeasureSpec {
    pub plane: Plane,
    pub curvature: f64,
    pub drift: f64,
    pub lambda: f64,
    pub atoms: Vec<AtomSpec>,
}

impl KernelMeasureSpec {
    pub fn measure(&self) -> Result<MeasureSpec> {
        MeasureSpec::new(self.atoms.iter().map(|a| (a.xi, a.w)).collect())
    }

    /// Kernel spec of a single atom of this family.
    pub fn kernel(&self, xi: Boundary) -> Result<KernelSpec> {
        KernelSpec::new(self.curvature, self.drift, self.lambda, xi)
    }
}

/// `alpha(lambda, a) = sqrt(a^2 + 2 lambda) - a`; the vertical exponent of
/// the kernels. Defined for `lambda >= -a^2/2`.
pub fn alpha(lambda: f64, a: f64) -> Result<f64> {
    let s = a * a + 2.0 * lambda;
    if s < 0.0 {
        return Err(SolError::domain(
            "alpha",
            format!("lambda = {lambda} below lambda_min = {}", -0.5 * a * a),
        ));
    }
    Ok(s.sqrt() - a)
}

/// `beta(lambda, a, p) = 1/2 + sqrt(a^2 + 2 lambda)/p`; the kernel power.
pub fn beta(lambda: f64, a: f64, p: f64) -> Result<f64> {
    let s = a * a + 2.0 * lambda;
    if s < 0.0 {
        return Err(SolError::domain(
            "beta",
            format!("lambda = {lambda} below lambda_min = {}", -0.5 * a * a),
        ));
    }
    Ok(0.5 + s.sqrt() / p)
}

/// Bottom of the positive spectrum of the drifted operator.
pub fn lambda_min(a: f64) -> f64 {
    -0.5 * a * a
}

/// A modified Poisson kernel `P_{p, drift, lambda}(., xi)` on one
/// hyperbolic plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// Curvature parameter of the plane (p for the first factor, q for
    /// the second).
    pub curvature: f64,
    /// Drift seen by this plane: `a` on the first factor, `-a` on the
    /// second.
    pub drift: f64,
    pub lambda: f64,
    pub xi: Boundary,
}

impl KernelSpec {
    pub fn new(curvature: f64, drift: f64, lambda: f64, xi: Boundary) -> Result<Self> {
        if !(curvature > 0.0) {
            return Err(SolError::domain("KernelSpec", "curvature must be > 0"));
        }
        // Admissibility: alpha/beta must exist.
        alpha(lambda, drift)?;
        Ok(KernelSpec { curvature, drift, lambda, xi })
    }
}

/// Evaluate a modified Poisson kernel; strictly positive on its domain.
pub fn eval_kernel(spec: &KernelSpec, u: HypPoint) -> Result<f64> {
    let al = alpha(spec.lambda, spec.drift)?;
    let log_val = match spec.xi {
        Boundary::Omega => al * u.z,
        Boundary::Xi(xi) => {
            let be = beta(spec.lambda, spec.drift, spec.curvature)?;
            let p = spec.curvature;
            let shifted = xi - p * u.x;
            let denom_log = log_add_exp(2.0 * shifted.abs().ln(), 2.0 * p * u.z);
            al * u.z + be * (libm::log1p(xi * xi) - denom_log)
        }
    };
    let v = log_val.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SolError::NonFinite { context: "eval_kernel" })
    }
}

/// A finite nonnegative atomic measure on the boundary of one plane.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub atoms: Vec<(Boundary, f64)>,
}

impl MeasureSpec {
    pub fn new(atoms: Vec<(Boundary, f64)>) -> Result<Self> {
        if atoms.iter().any(|(_, w)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(SolError::domain(
                "MeasureSpec",
                "weights must be finite and >= 0",
            ));
        }
        Ok(MeasureSpec { atoms })
    }

    pub fn point_mass(xi: Boundary, w: f64) -> Result<Self> {
        Self::new(vec![(xi, w)])
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Superposition eigenfunction on Sol:
/// `h(g) = sum_i w_i P_{p,a,lambda}(proj1 g, xi_i)
///        + sum_j v_j P_{q,-a,lambda}(proj2 g, eta_j)`.
pub fn eval_sol_eigenfunction(
    nu1: &MeasureSpec,
    nu2: &MeasureSpec,
    params: &SolParams,
    lambda: f64,
    g: SolPoint,
) -> Result<f64> {
    if nu1.is_empty() && nu2.is_empty() {
        return Err(SolError::domain(
            "eval_sol_eigenfunction",
            "both measures are empty",
        ));
    }
    let u1 = proj1(g);
    let u2 = proj2(g);
    let mut total = 0.0;
    for (xi, w) in &nu1.atoms {
        let spec = KernelSpec::new(params.p, params.a, lambda, *xi)?;
        total += w * eval_kernel(&spec, u1)?;
    }
    for (eta, w) in &nu2.atoms {
        let spec = KernelSpec::new(params.q, -params.a, lambda, *eta)?;
        total += w * eval_kernel(&spec, u2)?;
    }
    Ok(total)
}

/// Drifted Laplacian by central differences on the 7-point stencil with
/// metric-adapted steps; O(eps^2) consistent uniformly in z.
pub fn apply_laplacian_fd(
    f: &(dyn Fn(SolPoint) -> f64 + Sync),
    g: SolPoint,
    params: &SolParams,
    eps: f64,
) -> Result<f64> {
    let hx = eps * (params.p * g.z).exp();
    let hy = eps * (-params.q * g.z).exp();
    let hz = eps;
    let f0 = f(g);
    let vals = [
        f(SolPoint::new(g.x + hx, g.y, g.z)),
        f(SolPoint::new(g.x - hx, g.y, g.z)),
        f(SolPoint::new(g.x, g.y + hy, g.z)),
        f(SolPoint::new(g.x, g.y - hy, g.z)),
        f(SolPoint::new(g.x, g.y, g.z + hz)),
        f(SolPoint::new(g.x, g.y, g.z - hz)),
    ];
    if !f0.is_finite() || vals.iter().any(|v| !v.is_finite()) {
        return Err(SolError::NonFinite { context: "apply_laplacian_fd" });
    }
    // e^{2pz} D_xx with step h_x = eps e^{pz} cancels to 1/eps^2; same in y.
    let inv = 1.0 / (eps * eps);
    let second =
        (vals[0] - 2.0 * f0 + vals[1]) + (vals[2] - 2.0 * f0 + vals[3]) + (vals[4] - 2.0 * f0 + vals[5]);
    Ok(0.5 * inv * second + params.a * (vals[4] - vals[5]) / (2.0 * hz))
}

/// Same scheme for the projected operator
/// `(1/2)(e^{2pz} d_xx + d_zz) + drift d_z` on one hyperbolic plane.
pub fn apply_hyp_laplacian_fd(
    f: &(dyn Fn(HypPoint) -> f64 + Sync),
    u: HypPoint,
    p: f64,
    drift: f64,
    eps: f64,
) -> Result<f64> {
    let hx = eps * (p * u.z).exp();
    let hz = eps;
    let f0 = f(u);
    let vals = [
        f(HypPoint::new(u.x + hx, u.z)),
        f(HypPoint::new(u.x - hx, u.z)),
        f(HypPoint::new(u.x, u.z + hz)),
        f(HypPoint::new(u.x, u.z - hz)),
    ];
    if !f0.is_finite() || vals.iter().any(|v| !v.is_finite()) {
        return Err(SolError::NonFinite { context: "apply_hyp_laplacian_fd" });
    }
    let inv = 1.0 / (eps * eps);
    let second = (vals[0] - 2.0 * f0 + vals[1]) + (vals[2] - 2.0 * f0 + vals[3]);
    Ok(0.5 * inv * second + drift * (vals[2] - vals[3]) / (2.0 * hz))
}

/// A rectangular evaluation grid in Sol.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: SolPoint,
    pub half: [f64; 3],
    pub counts: [usize; 3],
    /// Finite-difference step scale.
    pub eps: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.counts.iter().any(|c| *c < 3) {
            return Err(SolError::domain("GridSpec", "need >= 3 nodes per axis"));
        }
        if !(self.eps > 0.0) {
            return Err(SolError::domain("GridSpec", "eps must be > 0"));
        }
        Ok(())
    }

    fn axis(&self, i: usize) -> Vec<f64> {
        let c = [self.center.x, self.center.y, self.center.z][i];
        let h = self.half[i];
        let n = self.counts[i];
        (0..n)
            .map(|k| c - h + 2.0 * h * k as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn nodes(&self) -> Vec<SolPoint> {
        let (xs, ys, zs) = (self.axis(0), self.axis(1), self.axis(2));
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push(SolPoint::new(x, y, z));
                }
            }
        }
        out
    }
}

/// A rectangular grid on one hyperbolic plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HypGridSpec {
    pub center: HypPoint,
    pub half: [f64; 2],
    pub counts: [usize; 2],
    pub eps: f64,
}

impl HypGridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.counts.iter().any(|c| *c < 3) {
            return Err(SolError::domain("HypGridSpec", "need >= 3 nodes per axis"));
        }
        if !(self.eps > 0.0) {
            return Err(SolError::domain("HypGridSpec", "eps must be > 0"));
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<HypPoint> {
        let mut out = Vec::new();
        for i in 0..self.counts[0] {
            for j in 0..self.counts[1] {
                out.push(HypPoint::new(
                    self.center.x - self.half[0]
                        + 2.0 * self.half[0] * i as f64 / (self.counts[0] - 1) as f64,
                    self.center.z - self.half[1]
                        + 2.0 * self.half[1] * j as f64 / (self.counts[1] - 1) as f64,
                ));
            }
        }
        out
    }
}

/// Max relative eigen-residual `|Lap_a h - lambda h| / (|h| + 1e-300)`
/// over the grid, for the superposition eigenfunction of the measures.
pub fn eigen_residual(
    nu1: &MeasureSpec,
    nu2: &MeasureSpec,
    params: &SolParams,
    lambda: f64,
    grid: &GridSpec,
) -> Result<f64> {
    grid.validate()?;
    let h = |g: SolPoint| eval_sol_eigenfunction(nu1, nu2, params, lambda, g).unwrap_or(f64::NAN);
    // Probe once so measure/domain errors surface as errors, not NaN.
    eval_sol_eigenfunction(nu1, nu2, params, lambda, grid.center)?;
    let residuals: Vec<Result<f64>> = grid
        .nodes()
        .par_iter()
        .map(|&g| {
            let val = h(g);
            let lap = apply_laplacian_fd(&h, g, params, grid.eps)?;
            Ok((lap - lambda * val).abs() / (val.abs() + 1e-300))
        })
        .collect();
    let mut worst = 0.0f64;
    for r in residuals {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// Residual of the drift-conjugation identity on H(1):
/// `Lap_{-1/2}(e^{(abar+1/2) z} fbar)
///   = e^{(abar+1/2) z} (Lap_{abar} fbar + (4 abar^2 - 1)/8 fbar)`.
/// `lambdabar` only certifies admissibility of the field's eigenvalue.
pub fn conjugation_check(
    fbar: &(dyn Fn(HypPoint) -> f64 + Sync),
    abar: f64,
    lambdabar: f64,
    grid: &HypGridSpec,
) -> Result<f64> {
    grid.validate()?;
    alpha(lambdabar, abar)?;
    let shift = abar + 0.5;
    let conj = |u: HypPoint| (shift * u.z).exp() * fbar(u);
    let extra = (4.0 * abar * abar - 1.0) / 8.0;
    let residuals: Vec<Result<f64>> = grid
        .nodes()
        .par_iter()
        .map(|&u| {
            let lhs = apply_hyp_laplacian_fd(&conj, u, 1.0, -0.5, grid.eps)?;
            let inner = apply_hyp_laplacian_fd(fbar, u, 1.0, abar, grid.eps)? + extra * fbar(u);
            let rhs = (shift * u.z).exp() * inner;
            Ok((lhs - rhs).abs() / (1.0 + rhs.abs()))
        })
        .collect();
    let mut worst = 0.0f64;
    for r in residuals {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// Residual of the curvature-scaling identity
/// `(Lap^{H(p)}_a f) . theta = p^2 Lap^{H(1)}_{a/p} (f . theta)` with
/// `theta(x,z) = (x/p, z/p)`, evaluated on a grid in H(1) coordinates.
pub fn scaling_check(
    f: &(dyn Fn(HypPoint) -> f64 + Sync),
    p: f64,
    drift: f64,
    grid: &HypGridSpec,
) -> Result<f64> {
    grid.validate()?;
    let pulled = |u: HypPoint| f(HypPoint::new(u.x / p, u.z / p));
    let residuals: Vec<Result<f64>> = grid
        .nodes()
        .par_iter()
        .map(|&u| {
            let lhs =
                apply_hyp_laplacian_fd(f, HypPoint::new(u.x / p, u.z / p), p, drift, grid.eps)?;
            let rhs = p * p * apply_hyp_laplacian_fd(&pulled, u, 1.0, drift / p, grid.eps)?;
            Ok((lhs - rhs).abs() / (1.0 + rhs.abs()))
        })
        .collect();
    let mut worst = 0.0f64;
    for r in residuals {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// Residual of left-translation invariance
/// `Lap_a (tau_{g0} f) = tau_{g0} (Lap_a f)` over the grid.
pub fn translation_invariance_check(
    f: &(dyn Fn(SolPoint) -> f64 + Sync),
    g0: SolPoint,
    params: &SolParams,
    grid: &GridSpec,
) -> Result<f64> {
    grid.validate()?;
    let params = *params;
    let translated = move |g: SolPoint| match group_mul(g0, g, params) {
        Ok(gg) => f(gg),
        Err(_) => f64::NAN,
    };
    let residuals: Vec<Result<f64>> = grid
        .nodes()
        .par_iter()
        .map(|&u| {
            let lhs = apply_laplacian_fd(&translated, u, &params, grid.eps)?;
            let moved = group_mul(g0, u, params)?;
            let rhs = apply_laplacian_fd(f, moved, &params, grid.eps)?;
            Ok((lhs - rhs).abs() / (1.0 + rhs.abs()))
        })
        .collect();
    let mut worst = 0.0f64;
    for r in residuals {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// Tensor midpoint quadrature box for the reversibility identity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadBox {
    pub center: SolPoint,
    pub half: [f64; 3],
    pub n: [usize; 3],
    /// Step scale of the embedded finite-difference Laplacian.
    pub eps: f64,
}

impl QuadBox {
    pub fn validate(&self) -> Result<()> {
        if self.n.iter().any(|c| *c < 4) {
            return Err(SolError::domain("QuadBox", "need >= 4 cells per axis"));
        }
        if !(self.eps > 0.0) {
            return Err(SolError::domain("QuadBox", "eps must be > 0"));
        }
        Ok(())
    }
}

/// Smooth compactly supported test field: a Gaussian profile cut off by a
/// C-infinity bump vanishing at the faces of `support`.
pub fn gaussian_bump_field(
    support: QuadBox,
    center: SolPoint,
    sigma: f64,
) -> impl Fn(SolPoint) -> f64 + Sync {
    fn bump(u: f64) -> f64 {
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }
    move |g: SolPoint| {
        let d2 = (g.x - center.x).powi(2) + (g.y - center.y).powi(2) + (g.z - center.z).powi(2);
        let cut = bump((g.x - support.center.x) / support.half[0])
            * bump((g.y - support.center.y) / support.half[1])
            * bump((g.z - support.center.z) / support.half[2]);
        (-0.5 * d2 / (sigma * sigma)).exp() * cut
    }
}

/// Symmetry defect of the drifted Laplacian with respect to its
/// reversibility measure `m_a = e^{2 a z} dx dy dz`:
/// `|int f Lap_a g dm_a - int g Lap_a f dm_a| / int |f Lap_a g| dm_a`,
/// by tensor midpoint quadrature and the FD Laplacian. The fields must
/// vanish near the box boundary.
pub fn reversibility_check(
    f: &(dyn Fn(SolPoint) -> f64 + Sync),
    g: &(dyn Fn(SolPoint) -> f64 + Sync),
    params: &SolParams,
    quad: &QuadBox,
) -> Result<f64> {
    quad.validate()?;
    let cell = [
        2.0 * quad.half[0] / quad.n[0] as f64,
        2.0 * quad.half[1] / quad.n[1] as f64,
        2.0 * quad.half[2] / quad.n[2] as f64,
    ];
    let dv = cell[0] * cell[1] * cell[2];
    let node = |i: usize, k: usize| -> f64 {
        let c = [quad.center.x, quad.center.y, quad.center.z][k];
        c - quad.half[k] + (i as f64 + 0.5) * cell[k]
    };
    let a = params.a;

    // One (i1, i2) column per task; slab sums combined in index order.
    let columns: Vec<Result<(f64, f64, f64)>> = (0..quad.n[0] * quad.n[1])
        .into_par_iter()
        .map(|flat| {
            let i = flat / quad.n[1];
            let j = flat % quad.n[1];
            let (x, y) = (node(i, 0), node(j, 1));
            let (mut s1, mut s2, mut sn) = (0.0, 0.0, 0.0);
            for k in 0..quad.n[2] {
                let z = node(k, 2);
                let pt = SolPoint::new(x, y, z);
                let fv = f(pt);
                let gv = g(pt);
                if fv == 0.0 && gv == 0.0 {
                    continue;
                }
                let weight = (2.0 * a * z).exp() * dv;
                let lg = apply_laplacian_fd(g, pt, params, quad.eps)?;
                let lf = apply_laplacian_fd(f, pt, params, quad.eps)?;
                s1 += fv * lg * weight;
                s2 += gv * lf * weight;
                sn += (fv * lg).abs() * weight;
            }
            Ok((s1, s2, sn))
        })
        .collect();

    let (mut i1, mut i2, mut norm) = (0.0, 0.0, 0.0);
    for c in columns {
        let (s1, s2, sn) = c?;
        i1 += s1;
        i2 += s2;
        norm += sn;
    }
    if norm <= 1e-100 {
        return Err(SolError::domain(
            "reversibility_check",
            "fields have no mass in the box",
        ));
    }
    Ok((i1 - i2).abs() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_beta_special_values() {
        // at lambda_min the square root vanishes: alpha = -a
        for &a in &[-1.0, -0.3, 0.0, 0.7, 2.0] {
            assert!((alpha(lambda_min(a), a).unwrap() + a).abs() < 1e-12);
        }
        // harmonic case with positive drift: constants are harmonic
        assert_eq!(alpha(0.0, 1.3).unwrap(), 0.0);
        // classical hyperbolic values
        assert!((alpha(0.0, -0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((beta(0.0, -0.5, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // below the bottom of the spectrum: domain errors
        assert!(alpha(-0.500001, 1.0).is_err());
        assert!(beta(-0.500001, 1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_matches_classical_poisson() {
        let spec = KernelSpec::new(1.0, -0.5, 0.0, Boundary::Xi(0.7)).unwrap();
        for &(x, z) in &[(0.0, 0.0), (1.5, -1.0), (-2.0, 2.0), (0.7, 0.0)] {
            let u = HypPoint::new(x, z);
            let classical =
                (0.7f64 * 0.7 + 1.0) * z.exp() / ((0.7 - x).powi(2) + (2.0 * z).exp());
            let v = eval_kernel(&spec, u).unwrap();
            assert!((v - classical).abs() <= 1e-12 * classical, "{v} vs {classical}");
        }
    }

    #[test]
    fn kernel_trivial_points() {
        let spec = KernelSpec::new(1.0, 0.4, 0.3, Boundary::Omega).unwrap();
        assert_eq!(eval_kernel(&spec, HypPoint::new(5.0, 0.0)).unwrap(), 1.0);
        let spec = KernelSpec::new(1.0, 0.4, 0.3, Boundary::Xi(0.0)).unwrap();
        assert!((eval_kernel(&spec, HypPoint::ORIGIN).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenfunction_needs_an_atom() {
        let params = SolParams { p: 1.0, q: 1.0, a: 0.5 };
        let empty = MeasureSpec::default();
        assert!(eval_sol_eigenfunction(&empty, &empty, &params, 0.0, SolPoint::ORIGIN).is_err());
    }

    #[test]
    fn vertical_exponential_at_lambda_min() {
        // nu1 = delta_omega: h = e^{-a z}, an eigenfunction at lambda_min.
        let params = SolParams { p: 1.0, q: 1.0, a: 0.8 };
        let nu1 = MeasureSpec::point_mass(Boundary::Omega, 1.0).unwrap();
        let nu2 = MeasureSpec::default();
        let lm = lambda_min(params.a);
        for &z in &[-1.0, 0.0, 2.0] {
            let h = eval_sol_eigenfunction(&nu1, &nu2, &params, lm, SolPoint::new(1.0, 2.0, z))
                .unwrap();
            assert!((h - (-params.a * z).exp()).abs() < 1e-12);
        }
        // constants: a = 0, lambda = 0, both omegas at weight 1/2
        let params0 = SolParams { p: 1.0, q: 1.0, a: 0.0 };
        let half1 = MeasureSpec::point_mass(Boundary::Omega, 0.5).unwrap();
        let half2 = MeasureSpec::point_mass(Boundary::Omega, 0.5).unwrap();
        let h = eval_sol_eigenfunction(&half1, &half2, &params0, 0.0, SolPoint::new(3.0, -1.0, 0.6))
            .unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fd_on_simple_fields() {
        let params = SolParams { p: 1.0, q: 1.5, a: 0.7 };
        let one = |_: SolPoint| 1.0;
        let lin = |g: SolPoint| g.z;
        let g = SolPoint::new(0.3, -0.2, 0.9);
        assert!(apply_laplacian_fd(&one, g, &params, 1e-3).unwrap().abs() < 1e-9);
        let v = apply_laplacian_fd(&lin, g, &params, 1e-3).unwrap();
        assert!((v - params.a).abs() < 1e-9, "{v}");
    }

    #[test]
    fn fd_eigen_exponential() {
        // f = e^{-a z}: Lap_a f = -(a^2/2) f, within 1e-6 relative at eps = 1e-3.
        let params = SolParams { p: 1.0, q: 1.0, a: 1.0 };
        let f = move |g: SolPoint| (-params.a * g.z).exp();
        for &z in &[-1.0, 0.0, 1.5] {
            let g = SolPoint::new(0.5, -0.5, z);
            let lap = apply_laplacian_fd(&f, g, &params, 1e-3).unwrap();
            let expect = lambda_min(params.a) * f(g);
            assert!(
                (lap - expect).abs() <= 1e-6 * expect.abs(),
                "z={z}: {lap} vs {expect}"
            );
        }
    }

    #[test]
    fn grid_validation() {
        let mut grid = GridSpec {
            center: SolPoint::ORIGIN,
            half: [1.0; 3],
            counts: [3, 3, 2],
            eps: 1e-3,
        };
        assert!(grid.validate().is_err());
        grid.counts = [3, 3, 3];
        assert!(grid.validate().is_ok());
        grid.eps = 0.0;
        assert!(grid.validate().is_err());
    }

    #[test]
    fn reversibility_symmetric_field_is_exact() {
        let params = SolParams { p: 1.0, q: 1.0, a: 0.7 };
        let quad = QuadBox {
            center: SolPoint::ORIGIN,
            half: [3.0; 3],
            n: [16, 16, 16],
            eps: 1e-3,
        };
        let f = gaussian_bump_field(quad, SolPoint::new(0.3, 0.0, -0.2), 0.8);
        let d = reversibility_check(&f, &f, &params, &quad).unwrap();
        assert!(d < 1e-12, "{d}");
    }
}
