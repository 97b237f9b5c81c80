//! Numerical toolkit for centroaffine curves and polygons related by
//! Bäcklund-type chord constructions.
//!
//! A centroaffine curve is a closed plane curve `γ` with `[γ(t), γ'(t)] = 1`
//! (the bracket is the 2×2 determinant) and the central anti-symmetry
//! `γ(t + π) = −γ(t)`. Two such curves are *c-related* when `[γ(t), δ(t)] = c`
//! for all `t`; a curve is *self-Bäcklund* when it is c-related to its own
//! parameter shift, `[γ(t), γ(t + α)] = c`. The discrete analogue replaces
//! curves by centrally symmetric polygons with unit consecutive determinants.
//!
//! The crate builds the members of this family end to end:
//!
//! * [`elliptic`] — Weierstrass ℘, ζ, σ on rectangular lattices (the
//!   analytic engine behind the explicit curve families);
//! * [`hill`] — Hill's equation `y'' + (λ − p)y = 0`: Floquet multipliers,
//!   the lowest periodic eigenvalue, Riccati solutions, KdV/mKdV flows;
//! * [`curves`] — curve types, chord certificates, conic examples,
//!   rotation-angle equations, Wegner-type curves;
//! * [`lame`] — closed curves with Lamé curvature `2℘(t+ω') + ℘(a)` and
//!   their self-Bäcklund chord angles;
//! * [`polygons`] — polygon recurrences, butterflies, discrete Bäcklund
//!   transformations, recutting, rigidity analysis;
//! * [`carousel`] — the continuous-time vertex dynamics on polygons, its
//!   conserved quantities and monodromy;
//! * [`hyperbolic`] — the dual curve in the hyperbolic plane.

pub mod carousel;
pub mod curves;
pub mod elliptic;
pub mod hill;
pub mod hyperbolic;
pub mod lame;
pub mod numerics;
pub mod polygons;

mod error;

pub use error::{Error, Result};

/// 2×2 determinant of column vectors: `[u, v] = u_x v_y − u_y v_x`.
#[inline]
pub fn det2(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}
