//! Numerics for the solvable Lie group Sol(p,q).
//!
//! Sol(p,q) is the semidirect product of R^2 and R induced by the action
//! `(x,y) -> (e^{pz} x, e^{-qz} y)`, carrying the left-invariant length
//! element `e^{-2pz} dx^2 + e^{2qz} dy^2 + dz^2`. Equivalently, it is the
//! horocyclic product of two hyperbolic planes H(p) and H(q) of curvatures
//! `-p^2` and `-q^2`, glued along opposite horocycles.
//!
//! The crate provides four subsystems:
//!
//! * [`geometry`] — exact group operations, projections onto the two
//!   hyperbolic planes, closed-form hyperbolic distances, certified
//!   two-sided bounds on the Sol distance, and a variational upper-bound
//!   estimator for the distance itself (no closed form exists).
//! * [`sim`] — Brownian motion with vertical drift `a`, i.e. the diffusion
//!   generated by `(1/2)(e^{2pz} d_xx + e^{-2qz} d_yy + d_zz) + a d_z`,
//!   discretized by an Ito Euler scheme and, independently, by a
//!   time-change scheme built on the quadratic-variation clocks.
//! * [`stats`] — Monte Carlo reproduction of the limit theorems for this
//!   diffusion: coordinate and distance CLTs, rate of escape, boundary
//!   convergence, tail exponent of the transversal limit, and the
//!   logarithmic deviation from the limit geodesic.
//! * [`harmonic`] — modified Poisson kernels on H(p), positive
//!   eigenfunctions of the drifted Laplacian on Sol assembled from them,
//!   and finite-difference / quadrature verification of the eigenfunction,
//!   conjugation, scaling, translation-invariance and reversibility
//!   identities.
//!
//! All floating point quantities are `f64`. Everything is deterministic
//! given a seed: randomness comes from a counter-based generator keyed by
//! `(seed, path, step, channel)`, so parallel runs reduce identically
//! regardless of worker count.

pub mod error;
pub mod geometry;
pub mod harmonic;
pub mod logspace;
pub mod report;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::SolError;
pub use geometry::{HypPoint, SolParams, SolPoint};
pub use sim::{BrownianPath, Scheme, SimConfig};

/// Crate version embedded in emitted reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
