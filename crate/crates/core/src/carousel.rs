//! Continuous-time dynamics on centrally symmetric polygons.
//!
//! Among all vertex velocity fields `V_i = v_i P_i - P_{i-1}` there is (for an
//! odd number `n` of vertex pairs) exactly one choice of multipliers `v_i`
//! that preserves the unit consecutive determinants; the resulting field `ξ`
//! conserves the three quadratic sums
//!
//! ```text
//! I = Σ x_i x_{i+1},   J = Σ (x_i y_{i+1} + x_{i+1} y_i),   K = Σ y_i y_{i+1}
//! ```
//!
//! and lies in the kernel of the closed 2-form
//! `ω = Σ (dx_{i+1} ∧ dy_i + dx_i ∧ dy_{i+1})`, whose contractions with the
//! linear `sl_2` actions `e, h, f` produce the differentials of `I, J, K`
//! (`i_e ω = -dI`, `i_h ω = dJ`, `i_f ω = dK`).
//! For decagons (`n = 5`) the determinant constraints are resolved by two
//! positive coordinates `(x, y)` on which the flow becomes Hamiltonian for
//! `H(x, y) = x + y + (x+1)/y + (y+1)/x + (x+y+1)/(xy)` with respect to the
//! area form `dx ∧ dy / (xy)`.  Following the flow for the time it takes the
//! `(x, y)`-trajectory to advance by one vertex relabeling yields an elliptic
//! monodromy matrix; levels where that monodromy degenerates to the identity
//! come from closed curves with a constant-determinant chord at arc shift
//! `π/5`, and the module searches for them by shooting over the level.

use rand::Rng;
use serde::Serialize;

use crate::curves::{CentroaffineCurve, SelfBacklundCertificate};
use crate::numerics::rk::{Dopri5, OdeOptions};
use crate::polygons::CentroaffinePolygon;
use crate::{det2, Error, Result};

use std::f64::consts::PI;

/// Residual allowed on the defining relations of the velocity field.
const FIELD_TOL: f64 = 1e-10;
/// Relative residual below which a vector array counts as tangent to the
/// unit-determinant constraints.
const TANGENT_TOL: f64 = 1e-8;
/// Per-step drift budget on the consecutive determinants during integration.
const STEP_DRIFT_TOL: f64 = 1e-9;
/// Residual gate on the least-squares `SL_2` fit of the monodromy.
const MONODROMY_FIT_TOL: f64 = 1e-7;

fn sub2(u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    [u[0] - v[0], u[1] - v[1]]
}

fn norm2(u: [f64; 2]) -> f64 {
    u[0].hypot(u[1])
}

/// Solve the cyclic system `v_i + v_{i+1} = a_i` for odd length:
/// `v_i = (a_i - a_{i+1} + a_{i+2} - … + a_{i+n-1}) / 2`.
fn alternating_half_sums(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    debug_assert!(n % 2 == 1);
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            let mut sign = 1.0;
            for j in 0..n {
                s += sign * a[(i + j) % n];
                sign = -sign;
            }
            0.5 * s
        })
        .collect()
}

/// Multipliers `v_i` with `v_i + v_{i+1} = a_i` (indices cyclic).  Odd length
/// has the unique alternating-sum solution; even length requires the
/// alternating sum of the right-hand side to vanish and the remaining
/// 1-parameter gauge is fixed symmetrically by `Σ (-1)^i v_i = 0`.
fn determinant_multipliers(a: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if n % 2 == 1 {
        return Ok(alternating_half_sums(a));
    }
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let alt: f64 = a
        .iter()
        .enumerate()
        .map(|(i, x)| if i % 2 == 0 { *x } else { -*x })
        .sum();
    if alt.abs() > 1e-9 * (1.0 + scale) {
        return Err(Error::domain(format!(
            "no determinant-preserving field on this polygon with an even number \
             of vertex pairs: the alternating coefficient sum is {alt:.3e}, not zero"
        )));
    }
    // Particular solution w with w_0 = 0, then the symmetric gauge.
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        w[i + 1] = a[i] - w[i];
    }
    let gauge: f64 = w
        .iter()
        .enumerate()
        .map(|(i, x)| if i % 2 == 0 { *x } else { -*x })
        .sum::<f64>()
        / n as f64;
    Ok((0..n)
        .map(|i| w[i] - if i % 2 == 0 { gauge } else { -gauge })
        .collect())
}

/// Half-representation helpers.  A centrally symmetric polygon is handled as
/// its first `n` vertices; the remaining `n` are the exact negations.  The
/// helpers below run on such half-lists so that the integrator and the
/// finite-difference tests can work slightly off the determinant constraints.
fn half_vertex(half: &[[f64; 2]], i: i64) -> [f64; 2] {
    let n = half.len() as i64;
    let j = i.rem_euclid(2 * n);
    if j < n {
        half[j as usize]
    } else {
        let v = half[(j - n) as usize];
        [-v[0], -v[1]]
    }
}

/// Recurrence coefficients `a_i = [P_{i-1}, P_{i+1}]` of a half-list.
fn half_coeffs(half: &[[f64; 2]]) -> Vec<f64> {
    let n = half.len();
    (0..n)
        .map(|i| det2(half_vertex(half, i as i64 - 1), half_vertex(half, i as i64 + 1)))
        .collect()
}

/// The determinant-preserving velocity field on a half-list (odd `n` only;
/// used by the integrator and the finite-difference commutator).
fn half_xi(half: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let v = alternating_half_sums(&half_coeffs(half));
    (0..half.len())
        .map(|i| {
            let p = half[i];
            let prev = half_vertex(half, i as i64 - 1);
            [v[i] * p[0] - prev[0], v[i] * p[1] - prev[1]]
        })
        .collect()
}

/// The commuting field `ν = 2K·e + J·h - 2I·f` on a half-list.
fn half_nu(half: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let q = half_invariants(half);
    half.iter()
        .map(|p| {
            [
                q.j * p[0] - 2.0 * q.i * p[1],
                2.0 * q.k * p[0] - q.j * p[1],
            ]
        })
        .collect()
}

fn half_invariants(half: &[[f64; 2]]) -> QuadraticInvariants {
    let n = half.len();
    let mut i_sum = 0.0;
    let mut j_sum = 0.0;
    let mut k_sum = 0.0;
    for idx in 0..n {
        let p = half[idx];
        let q = half_vertex(half, idx as i64 + 1);
        i_sum += p[0] * q[0];
        j_sum += p[0] * q[1] + q[0] * p[1];
        k_sum += p[1] * q[1];
    }
    QuadraticInvariants {
        i: i_sum,
        j: j_sum,
        k: k_sum,
    }
}

/// The three conserved quadratic sums of the flow, taken over one period of
/// the vertex list (the second, negated half repeats the same terms).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadraticInvariants {
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl QuadraticInvariants {
    /// `J² - 4IK`, invariant under the linear `SL_2` action in addition to
    /// being conserved by the flow.
    pub fn discriminant(&self) -> f64 {
        self.j * self.j - 4.0 * self.i * self.k
    }

    fn max_abs(&self) -> f64 {
        self.i.abs().max(self.j.abs()).max(self.k.abs())
    }
}

/// Conserved sums of a polygon.
pub fn quadratic_invariants(p: &CentroaffinePolygon) -> QuadraticInvariants {
    half_invariants(&p.vertices()[..p.n()])
}

/// A point on a flow trajectory: the polygon, the flow time, and the
/// conserved sums cached at construction.
#[derive(Clone, Debug, Serialize)]
pub struct CarouselState {
    pub polygon: CentroaffinePolygon,
    pub t: f64,
    pub invariants: QuadraticInvariants,
}

impl CarouselState {
    /// Wrap a polygon as a flow state at time `t`.  Only polygons with an odd
    /// number `n` of vertex pairs flow (even `n` needs the admissibility
    /// condition and even then the field is fixed only up to gauge).
    pub fn new(polygon: CentroaffinePolygon, t: f64) -> Result<Self> {
        if polygon.n() % 2 == 0 {
            return Err(Error::domain(format!(
                "the carousel flow needs an odd number of vertex pairs, got n = {}",
                polygon.n()
            )));
        }
        let invariants = quadratic_invariants(&polygon);
        Ok(CarouselState {
            polygon,
            t,
            invariants,
        })
    }

    /// Largest mismatch between the cached sums and their recomputed values.
    pub fn cache_residual(&self) -> f64 {
        let fresh = quadratic_invariants(&self.polygon);
        (fresh.i - self.invariants.i)
            .abs()
            .max((fresh.j - self.invariants.j).abs())
            .max((fresh.k - self.invariants.k).abs())
    }
}

/// The determinant-preserving velocity field: `2n` vertex velocities
/// `V_i = v_i P_i - P_{i-1}` with `[P_i, V_i] = 1` and
/// `[V_i, P_{i+1}] + [P_i, V_{i+1}] = 0`.  For an even number of vertex pairs
/// the field exists only when the alternating coefficient sum vanishes, and
/// the symmetric gauge is returned.
pub fn xi(p: &CentroaffinePolygon) -> Result<Vec<[f64; 2]>> {
    let v = determinant_multipliers(p.hill_coeffs())?;
    let n = p.n();
    let verts = p.vertices();
    let vel: Vec<[f64; 2]> = (0..2 * n)
        .map(|i| {
            let cur = verts[i];
            let prev = verts[(i + 2 * n - 1) % (2 * n)];
            let vi = v[i % n];
            [vi * cur[0] - prev[0], vi * cur[1] - prev[1]]
        })
        .collect();
    let scale = verts.iter().map(|&u| norm2(u)).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for i in 0..2 * n {
        let nxt = (i + 1) % (2 * n);
        let r1 = det2(verts[i], vel[i]) - 1.0;
        let r2 = det2(vel[i], verts[nxt]) + det2(verts[i], vel[nxt]);
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    if worst > FIELD_TOL * (1.0 + scale * scale) {
        return Err(Error::residual(
            "velocity field normalization",
            worst,
            FIELD_TOL * (1.0 + scale * scale),
        ));
    }
    Ok(vel)
}

/// The linear field `e: (x, y) -> (0, x)` applied to every vertex.
pub fn field_e(p: &CentroaffinePolygon) -> Vec<[f64; 2]> {
    p.vertices().iter().map(|v| [0.0, v[0]]).collect()
}

/// The linear field `h: (x, y) -> (x, -y)` applied to every vertex.
pub fn field_h(p: &CentroaffinePolygon) -> Vec<[f64; 2]> {
    p.vertices().iter().map(|v| [v[0], -v[1]]).collect()
}

/// The linear field `f: (x, y) -> (y, 0)` applied to every vertex.
pub fn field_f(p: &CentroaffinePolygon) -> Vec<[f64; 2]> {
    p.vertices().iter().map(|v| [v[1], 0.0]).collect()
}

/// The field `ν = 2K·e + J·h - 2I·f`, tangent to the linear `SL_2` orbits and
/// commuting with the flow.
pub fn field_nu(p: &CentroaffinePolygon) -> Vec<[f64; 2]> {
    let n = p.n();
    let half = half_nu(&p.vertices()[..n]);
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..2 * n {
        let v = half[i % n];
        if i < n {
            out.push(v);
        } else {
            out.push([-v[0], -v[1]]);
        }
    }
    out
}

/// Largest violation of `d/dε [P_i + ε u_i, P_{i+1} + ε u_{i+1}] = 0` over
/// the whole vertex cycle, relative to the vertex and velocity scales.
pub fn tangency_residual(p: &CentroaffinePolygon, u: &[[f64; 2]]) -> f64 {
    let verts = p.vertices();
    let len = verts.len();
    let scale = verts.iter().map(|&v| norm2(v)).fold(0.0, f64::max)
        * u.iter().map(|&v| norm2(v)).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for i in 0..len {
        let nxt = (i + 1) % len;
        let r = det2(u[i], verts[nxt]) + det2(verts[i], u[nxt]);
        worst = worst.max(r.abs());
    }
    worst / (1.0 + scale)
}

/// Evaluate `ω = Σ (dx_{i+1} ∧ dy_i + dx_i ∧ dy_{i+1})` (one period of `i`)
/// on two tangent arrays of `2n` vertex velocities.  Inputs must be tangent
/// to the unit-determinant constraints.
pub fn presymplectic(
    p: &CentroaffinePolygon,
    u: &[[f64; 2]],
    w: &[[f64; 2]],
) -> Result<f64> {
    let n = p.n();
    if u.len() != 2 * n || w.len() != 2 * n {
        return Err(Error::domain(format!(
            "tangent arrays must list all {} vertex velocities",
            2 * n
        )));
    }
    for (name, arr) in [("first", u), ("second", w)] {
        let r = tangency_residual(p, arr);
        if r > TANGENT_TOL {
            return Err(Error::residual(
                format!("{name} argument of the 2-form is not tangent to the determinant constraints"),
                r,
                TANGENT_TOL,
            ));
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        let j = i + 1;
        // dx_{i+1} ∧ dy_i + dx_i ∧ dy_{i+1} evaluated on (u, w).
        total += u[j][0] * w[i][1] - w[j][0] * u[i][1];
        total += u[i][0] * w[j][1] - w[i][0] * u[j][1];
    }
    Ok(total)
}

/// Differentials of the conserved sums as linear forms on a tangent array:
/// returns `(dI(u), dJ(u), dK(u))`.
pub fn invariant_differentials(p: &CentroaffinePolygon, u: &[[f64; 2]]) -> [f64; 3] {
    let n = p.n();
    let verts = p.vertices();
    let mut di = 0.0;
    let mut dj = 0.0;
    let mut dk = 0.0;
    for i in 0..n {
        let j = i + 1;
        let (pc, pn) = (verts[i], verts[j]);
        let (uc, un) = (u[i], u[j]);
        di += uc[0] * pn[0] + pc[0] * un[0];
        dj += uc[0] * pn[1] + pc[0] * un[1] + un[0] * pc[1] + pn[0] * uc[1];
        dk += uc[1] * pn[1] + pc[1] * un[1];
    }
    [di, dj, dk]
}

/// A random velocity array tangent to the unit-determinant constraints,
/// spanning the full `n`-dimensional tangent space as the draws vary.
pub fn random_tangent(
    p: &CentroaffinePolygon,
    rng: &mut impl Rng,
) -> Result<Vec<[f64; 2]>> {
    let n = p.n();
    let verts = p.vertices();
    let mut u: Vec<[f64; 2]> = Vec::with_capacity(n);
    u.push([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
    for i in 0..n - 1 {
        // u_{i+1} = α P_{i+1} + β P_i keeps [P_i, P_{i+1}] fixed when
        // α = -[u_i, P_{i+1}]; β is a free draw.
        let alpha = -det2(u[i], verts[i + 1]);
        let beta = rng.gen_range(-1.0..1.0);
        u.push([
            alpha * verts[i + 1][0] + beta * verts[i][0],
            alpha * verts[i + 1][1] + beta * verts[i][1],
        ]);
    }
    // Close the cycle: the wrap constraint [u_{n-1}, P_n] + [P_{n-1}, u_n]
    // with u_n = -u_0, P_n = -P_0 is restored by a correction along P_{n-2},
    // which leaves the previous constraint untouched.
    let violation = det2(u[n - 1], verts[0]) + det2(verts[n - 1], u[0]);
    let lever = det2(verts[n - 2], verts[0]);
    if lever.abs() < 1e-9 {
        return Err(Error::Degenerate(
            "vertex chord too small to close a random tangent draw".into(),
        ));
    }
    let delta = -violation / lever;
    u[n - 1][0] += delta * verts[n - 2][0];
    u[n - 1][1] += delta * verts[n - 2][1];
    for i in 0..n {
        let v = u[i];
        u.push([-v[0], -v[1]]);
    }
    Ok(u)
}

/// Flatten the first `n` vertices into ODE coordinates.
fn flatten(half: &[[f64; 2]]) -> Vec<f64> {
    half.iter().flat_map(|v| [v[0], v[1]]).collect()
}

fn unflatten(y: &[f64]) -> Vec<[f64; 2]> {
    y.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

/// Right-hand side of the flow in half-representation.
fn carousel_rhs(_t: f64, y: &[f64], dy: &mut [f64]) {
    let half = unflatten(y);
    let vel = half_xi(&half);
    for (i, v) in vel.iter().enumerate() {
        dy[2 * i] = v[0];
        dy[2 * i + 1] = v[1];
    }
}

/// Rescale each vertex `P_i -> exp(ℓ_i) P_i` so that all consecutive
/// determinants return to 1 exactly (the cyclic system `ℓ_i + ℓ_{i+1} =
/// -ln d_i` has a unique solution for odd `n`).  Returns the pre-projection
/// determinant drift.
fn project_determinants(y: &mut [f64]) -> Result<f64> {
    let half = unflatten(y);
    let n = half.len();
    let mut g = Vec::with_capacity(n);
    let mut drift = 0.0f64;
    for i in 0..n {
        let d = det2(half[i], half_vertex(&half, i as i64 + 1));
        if !(d > 0.0) {
            return Err(Error::Degenerate(format!(
                "consecutive determinant {d:.3e} is not positive during the flow"
            )));
        }
        drift = drift.max((d - 1.0).abs());
        g.push(-d.ln());
    }
    let l = alternating_half_sums(&g);
    for i in 0..n {
        let s = l[i].exp();
        y[2 * i] *= s;
        y[2 * i + 1] *= s;
    }
    Ok(drift)
}

/// Adaptive integrator for the flow with per-step projection back onto the
/// determinant constraints.
struct FlowEngine {
    stepper: Dopri5<fn(f64, &[f64], &mut [f64])>,
}

impl FlowEngine {
    fn new(p: &CentroaffinePolygon, t0: f64, tol: f64) -> Result<Self> {
        if p.n() % 2 == 0 {
            return Err(Error::domain(format!(
                "the carousel flow needs an odd number of vertex pairs, got n = {}",
                p.n()
            )));
        }
        let y0 = flatten(&p.vertices()[..p.n()]);
        let opt = OdeOptions {
            rtol: tol,
            atol: tol,
            h_init: 1e-4,
            max_steps: 50_000_000,
        };
        Ok(FlowEngine {
            stepper: Dopri5::new(carousel_rhs as fn(f64, &[f64], &mut [f64]), t0, &y0, opt),
        })
    }

    fn t(&self) -> f64 {
        self.stepper.t
    }

    /// One accepted step toward `t_max`, then determinant projection.
    fn step(&mut self, t_max: f64) -> Result<()> {
        self.stepper.step(t_max)?;
        let drift = project_determinants(&mut self.stepper.y)?;
        if drift > STEP_DRIFT_TOL {
            return Err(Error::residual(
                "per-step determinant drift during the flow",
                drift,
                STEP_DRIFT_TOL,
            ));
        }
        self.stepper.resync();
        Ok(())
    }

    fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.stepper.t < t_end - 1e-13 * (1.0 + t_end.abs()) {
            self.step(t_end)?;
        }
        Ok(())
    }

    fn half(&self) -> Vec<[f64; 2]> {
        unflatten(&self.stepper.y)
    }

    fn polygon(&self) -> Result<CentroaffinePolygon> {
        let half = self.half();
        let n = half.len();
        let mut verts = half;
        for i in 0..n {
            let v = verts[i];
            verts.push([-v[0], -v[1]]);
        }
        CentroaffinePolygon::from_vertices(verts)
    }

    fn coeffs(&self) -> Vec<f64> {
        half_coeffs(&self.half())
    }
}

/// Integrate the flow from `state` for time `t_span > 0` with tolerance
/// `tol`, returning the trajectory at every accepted step (initial state
/// included).  The conserved sums are monitored along the way; drifting
/// beyond `10 · tol` (relative to their size) aborts with an error.
pub fn flow(state: &CarouselState, t_span: f64, tol: f64) -> Result<Vec<CarouselState>> {
    if !(t_span > 0.0) || !t_span.is_finite() {
        return Err(Error::domain(format!(
            "flow needs a positive time span, got {t_span}"
        )));
    }
    if !(tol > 0.0) || tol > 1e-6 {
        return Err(Error::domain(format!(
            "flow tolerance must lie in (0, 1e-6], got {tol}"
        )));
    }
    let mut engine = FlowEngine::new(&state.polygon, state.t, tol)?;
    let t_end = state.t + t_span;
    let base = state.invariants;
    let drift_tol = 10.0 * tol * (1.0 + base.max_abs());
    let mut out = vec![CarouselState {
        polygon: state.polygon.clone(),
        t: state.t,
        invariants: base,
    }];
    while engine.t() < t_end - 1e-13 * (1.0 + t_end.abs()) {
        engine.step(t_end)?;
        let polygon = engine.polygon()?;
        let invariants = quadratic_invariants(&polygon);
        let drift = (invariants.i - base.i)
            .abs()
            .max((invariants.j - base.j).abs())
            .max((invariants.k - base.k).abs());
        if drift > drift_tol {
            return Err(Error::residual(
                "conserved-sum drift along the flow",
                drift,
                drift_tol,
            ));
        }
        out.push(CarouselState {
            polygon,
            t: engine.t(),
            invariants,
        });
    }
    Ok(out)
}

/// The reduced Hamiltonian of decagon dynamics in the two positive
/// coordinates that resolve the determinant constraints:
/// `H = x + y + (x+1)/y + (y+1)/x + (x+y+1)/(xy)`.
pub fn frieze5_hamiltonian(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::domain(format!(
            "the reduced coordinates must be positive, got ({x}, {y})"
        )));
    }
    Ok(x + y + (x + 1.0) / y + (y + 1.0) / x + (x + y + 1.0) / (x * y))
}

/// The reduced flow on the `(x, y)` coordinates, i.e. the Hamiltonian field
/// of `H` for the area form `dx ∧ dy / (xy)`:
/// `ẋ = xy ∂H/∂y, ẏ = -xy ∂H/∂x`.
pub fn reduced_field(x: f64, y: f64) -> Result<[f64; 2]> {
    frieze5_hamiltonian(x, y)?;
    let dh_dx = 1.0 + 1.0 / y - (y + 2.0 + 1.0 / y) / (x * x);
    let dh_dy = 1.0 + 1.0 / x - (x + 2.0 + 1.0 / x) / (y * y);
    Ok([x * y * dh_dy, -x * y * dh_dx])
}

/// Build the decagon with reduced coordinates `(x, y)`: seeded at
/// `P_0 = (1, 0)`, `P_1 = (0, 1)` with coefficient sequence
/// `((x+y+1)/(xy), x, (y+1)/x, (x+1)/y, y)`, which always closes.
pub fn decagon_from_frieze(x: f64, y: f64) -> Result<CentroaffinePolygon> {
    frieze5_hamiltonian(x, y)?;
    let a = [
        (x + y + 1.0) / (x * y),
        x,
        (y + 1.0) / x,
        (x + 1.0) / y,
        y,
    ];
    CentroaffinePolygon::from_hill(&a)?.closed().ok_or_else(|| {
        Error::Degenerate("reduced decagon coefficients failed to close".into())
    })
}

/// Reduced coordinates of a decagon: `(a_1, a_4)` of its coefficient list.
pub fn frieze5_coords(p: &CentroaffinePolygon) -> Result<(f64, f64)> {
    if p.n() != 5 {
        return Err(Error::domain(format!(
            "reduced coordinates exist for decagons only, got n = {}",
            p.n()
        )));
    }
    let a = p.hill_coeffs();
    Ok((a[1], a[4]))
}

/// The monodromy of decagon dynamics: flow until the reduced coordinates
/// reach their image under the one-step vertex relabeling, then fit the
/// `SL_2` matrix `A` with `A · P_{i+1}(0) = P_i(t_0)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CarouselMonodromy {
    pub matrix: [[f64; 2]; 2],
    /// Flow time after which the relabeled start is reproduced.
    pub period: f64,
    pub trace: f64,
    /// `acos(trace / 2)`, in `[0, π]`.
    pub rotation_angle: f64,
    /// Relative residual of the least-squares fit.
    pub fit_residual: f64,
}

fn sl2_fit(from: &[[f64; 2]], to: &[[f64; 2]]) -> Result<([[f64; 2]; 2], f64)> {
    // Least squares A·u ≈ q: A = (Σ q uᵀ)(Σ u uᵀ)^{-1}, then projected to
    // determinant one.
    let mut suu = [[0.0f64; 2]; 2];
    let mut squ = [[0.0f64; 2]; 2];
    for (u, q) in from.iter().zip(to) {
        for r in 0..2 {
            for c in 0..2 {
                suu[r][c] += u[r] * u[c];
                squ[r][c] += q[r] * u[c];
            }
        }
    }
    let det = suu[0][0] * suu[1][1] - suu[0][1] * suu[1][0];
    if det.abs() < 1e-12 {
        return Err(Error::Degenerate(
            "vertex configuration too degenerate for a linear fit".into(),
        ));
    }
    let inv = [
        [suu[1][1] / det, -suu[0][1] / det],
        [-suu[1][0] / det, suu[0][0] / det],
    ];
    let mut a = [[0.0f64; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            a[r][c] = squ[r][0] * inv[0][c] + squ[r][1] * inv[1][c];
        }
    }
    let da = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(da > 0.0) {
        return Err(Error::Degenerate(format!(
            "fitted monodromy has non-positive determinant {da:.3e}"
        )));
    }
    let s = da.sqrt();
    for row in a.iter_mut() {
        row[0] /= s;
        row[1] /= s;
    }
    let mut worst = 0.0f64;
    for (u, q) in from.iter().zip(to) {
        let img = [
            a[0][0] * u[0] + a[0][1] * u[1],
            a[1][0] * u[0] + a[1][1] * u[1],
        ];
        worst = worst.max(norm2(sub2(img, *q)) / (1.0 + norm2(*u)));
    }
    Ok((a, worst))
}

fn monodromy_from_pair(
    start: &[[f64; 2]],
    end: &[[f64; 2]],
    period: f64,
) -> Result<CarouselMonodromy> {
    let len = start.len();
    let shifted: Vec<[f64; 2]> = (0..len).map(|i| start[(i + 1) % len]).collect();
    let (matrix, fit_residual) = sl2_fit(&shifted, end)?;
    if fit_residual > MONODROMY_FIT_TOL {
        return Err(Error::residual(
            "least-squares fit of the monodromy matrix",
            fit_residual,
            MONODROMY_FIT_TOL,
        ));
    }
    let trace = matrix[0][0] + matrix[1][1];
    if trace.abs() >= 2.0 + 1e-9 {
        return Err(Error::residual(
            "monodromy ellipticity |trace| < 2",
            trace.abs(),
            2.0,
        ));
    }
    let rotation_angle = (trace / 2.0).clamp(-1.0, 1.0).acos();
    Ok(CarouselMonodromy {
        matrix,
        period,
        trace,
        rotation_angle,
        fit_residual,
    })
}

/// Monodromies at the first `count` valid section returns.  The reduced
/// trajectory visits the relabeled target coordinates once per reduced
/// period, so the `k`-th candidate is the first one composed with `k` full
/// turns of the level; closure searches scan all of them.
pub fn monodromy_candidates(
    p0: &CentroaffinePolygon,
    tol: f64,
    count: usize,
) -> Result<Vec<CarouselMonodromy>> {
    if p0.n() != 5 {
        return Err(Error::domain(format!(
            "monodromy is computed for decagons only, got n = {}",
            p0.n()
        )));
    }
    if !(tol > 0.0) || tol > 1e-8 {
        return Err(Error::domain(format!(
            "monodromy tolerance must lie in (0, 1e-8], got {tol}"
        )));
    }
    if count == 0 || count > 16 {
        return Err(Error::domain(format!(
            "between 1 and 16 section returns can be requested, got {count}"
        )));
    }
    let a0 = p0.hill_coeffs().to_vec();
    let start: Vec<[f64; 2]> = p0.vertices().to_vec();
    // Reduced coordinates travel from (a_1, a_4) to the relabeled target
    // (a_2, a_0).
    let target = (a0[2], a0[0]);
    let here = (a0[1], a0[4]);
    let dist = (here.0 - target.0).hypot(here.1 - target.1);
    if dist < 1e-10 * (1.0 + target.0.abs() + target.1.abs()) {
        // The relabeling fixes the reduced point (the affinely regular
        // orbit): the monodromy is the relabeling itself, at zero flow time.
        return Ok(vec![monodromy_from_pair(&start, &start, 0.0)?]);
    }
    // Section coordinate: the reduced coordinate moving faster at the
    // target, so the section is transversal there.
    let vel_t = reduced_field(target.0, target.1)?;
    let (sect, cross_sign) = if vel_t[1].abs() >= vel_t[0].abs() {
        (1usize, vel_t[1].signum())
    } else {
        (0usize, vel_t[0].signum())
    };
    let sect_target = if sect == 1 { target.1 } else { target.0 };
    let other_target = if sect == 1 { target.0 } else { target.1 };

    let reduced_of = |coeffs: &[f64]| -> (f64, f64) { (coeffs[1], coeffs[4]) };
    let section_value = |coeffs: &[f64]| -> f64 {
        let (x, y) = reduced_of(coeffs);
        if sect == 1 {
            y - sect_target
        } else {
            x - sect_target
        }
    };

    let mut found = Vec::new();
    let mut engine = FlowEngine::new(p0, 0.0, tol)?;
    let mut prev_t = engine.t();
    let mut prev_y = engine.stepper.y.clone();
    let mut prev_g = section_value(&engine.coeffs());
    let t_cap = 100.0 * count as f64;
    let mut crossings = 0usize;
    while engine.t() < t_cap && crossings < 20 * count {
        engine.step(t_cap)?;
        let g = section_value(&engine.coeffs());
        // Direction filter: the reduced trajectory must cross the section
        // the same way the field points at the target.
        let crossing = prev_g.signum() != g.signum() && (g - prev_g).signum() == cross_sign;
        if crossing {
            crossings += 1;
            // Bisect the crossing time with exact re-integrations from the
            // saved pre-crossing state.
            let mut lo = prev_t;
            let mut hi = engine.t();
            let eval = |t: f64| -> Result<Vec<f64>> {
                if t <= prev_t + 1e-15 {
                    return Ok(prev_y.clone());
                }
                let opt = OdeOptions {
                    rtol: tol,
                    atol: tol,
                    h_init: ((t - prev_t) * 0.1).max(1e-8),
                    max_steps: 2_000_000,
                };
                let mut local = Dopri5::new(
                    carousel_rhs as fn(f64, &[f64], &mut [f64]),
                    prev_t,
                    &prev_y,
                    opt,
                );
                while local.t < t - 1e-14 * (1.0 + t.abs()) {
                    local.step(t)?;
                    project_determinants(&mut local.y)?;
                    local.resync();
                }
                Ok(local.y)
            };
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if hi - lo < 1e-13 * (1.0 + hi.abs()) {
                    break;
                }
                let y_mid = eval(mid)?;
                let g_mid = section_value(&half_coeffs(&unflatten(&y_mid)));
                if g_mid.signum() == prev_g.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_star = 0.5 * (lo + hi);
            let y_star = eval(t_star)?;
            let half = unflatten(&y_star);
            let coeffs = half_coeffs(&half);
            let (x, y) = reduced_of(&coeffs);
            let other = if sect == 1 { x } else { y };
            if (other - other_target).abs() < 1e-5 * (1.0 + other_target.abs()) {
                let n = half.len();
                let mut end = half;
                for i in 0..n {
                    let v = end[i];
                    end.push([-v[0], -v[1]]);
                }
                if let Ok(m) = monodromy_from_pair(&start, &end, t_star) {
                    found.push(m);
                    if found.len() == count {
                        return Ok(found);
                    }
                }
            }
        }
        prev_t = engine.t();
        prev_y = engine.stepper.y.clone();
        prev_g = g;
    }
    if found.is_empty() {
        Err(Error::NoConvergence {
            what: "carousel monodromy".into(),
            detail: format!(
                "no section return matching the relabeled coordinates within t <= {t_cap} \
                 ({crossings} candidate crossings examined)"
            ),
        })
    } else {
        Ok(found)
    }
}

/// Compute the monodromy of a decagon under the flow.  The reduced
/// `(x, y)`-trajectory is integrated until it reaches the relabeled target
/// coordinates (detected by a section through the target, refined by
/// bisection of exact re-integrations); the matrix is then fitted between
/// the relabeled start and the flowed polygon.
pub fn monodromy(p0: &CentroaffinePolygon, tol: f64) -> Result<CarouselMonodromy> {
    Ok(monodromy_candidates(p0, tol, 1)?.remove(0))
}

/// The coefficient-sum bound `Σ a_i >= 2 n cos(π/n)` with equality exactly
/// on the affinely regular polygons.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MinorInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub equality: bool,
}

/// Evaluate the coefficient-sum bound for a polygon.
pub fn minor_inequality_check(p: &CentroaffinePolygon) -> Result<MinorInequality> {
    let n = p.n();
    let lhs: f64 = p.hill_coeffs().iter().sum();
    let rhs = 2.0 * n as f64 * (PI / n as f64).cos();
    if lhs < rhs - 1e-10 {
        return Err(Error::residual(
            "coefficient-sum lower bound",
            rhs - lhs,
            1e-10,
        ));
    }
    Ok(MinorInequality {
        lhs,
        rhs,
        equality: (lhs - rhs).abs() < 1e-9,
    })
}

/// A level of decagon dynamics whose monodromy is the identity: the vertices
/// sweep a closed curve whose chords at arc shift `π/5` have constant
/// determinant.
#[derive(Clone, Debug)]
pub struct ClosedCarousel {
    /// The symmetric reduced coordinate `x = y = s` of the found level.
    pub coordinate: f64,
    /// Value of the reduced Hamiltonian there.
    pub level: f64,
    /// Flow time of one vertex advance.
    pub period: f64,
    /// Frobenius distance of the monodromy from the identity.
    pub closure_residual: f64,
    /// Chord-determinant certificate of the swept curve.
    pub certificate: SelfBacklundCertificate,
    /// The swept closed curve, sampled with the standard grid.
    pub curve: CentroaffineCurve,
}

fn identity_distance(m: [[f64; 2]; 2]) -> f64 {
    ((m[0][0] - 1.0).powi(2)
        + m[0][1].powi(2)
        + m[1][0].powi(2)
        + (m[1][1] - 1.0).powi(2))
    .sqrt()
}

/// Signed closure defect used for the level shooting: the rotation angle of
/// the monodromy with the sign of its lower-left entry, which flips as the
/// matrix passes through the identity.
fn signed_angle(m: &CarouselMonodromy) -> f64 {
    if m.matrix[1][0] >= 0.0 {
        m.rotation_angle
    } else {
        -m.rotation_angle
    }
}

/// Sample the curve swept by vertex `P_0` over one half-period `t_half` and
/// renormalize the parameter so that the curve closes on the standard
/// anti-periodic grid.
fn sweep_curve(
    p: &CentroaffinePolygon,
    t_half: f64,
    tol: f64,
    grid: usize,
) -> Result<CentroaffineCurve> {
    let rho = t_half / PI;
    let scale = 1.0 / rho.sqrt();
    let mut engine = FlowEngine::new(p, 0.0, tol)?;
    let mut samples = Vec::with_capacity(grid);
    for j in 0..grid / 2 {
        let t_j = t_half * j as f64 / (grid / 2) as f64;
        engine.advance_to(t_j)?;
        let v = engine.half()[0];
        samples.push([scale * v[0], scale * v[1]]);
    }
    for j in 0..grid / 2 {
        let v = samples[j];
        samples.push([-v[0], -v[1]]);
    }
    CentroaffineCurve::closed_with_tolerance(samples, 1e-5)
}

/// Shooting over the symmetric levels `x = y = s`, `s` in `[s_lo, s_hi]`:
/// find a level where some section-return monodromy is the identity and
/// certify the swept closed curve.  `grid` controls the scan resolution.
pub fn find_closed_carousel(
    s_lo: f64,
    s_hi: f64,
    grid: usize,
    tol: f64,
) -> Result<ClosedCarousel> {
    if !(s_lo > 0.0 && s_hi > s_lo) {
        return Err(Error::domain(format!(
            "level scan needs 0 < s_lo < s_hi, got [{s_lo}, {s_hi}]"
        )));
    }
    if grid < 2 {
        return Err(Error::domain("level scan needs at least 2 grid points"));
    }
    const RETURNS: usize = 10;
    let mut scan = Vec::with_capacity(grid);
    for j in 0..grid {
        let s = s_lo + (s_hi - s_lo) * j as f64 / (grid - 1) as f64;
        let ms = monodromy_candidates(&decagon_from_frieze(s, s)?, tol, RETURNS)?;
        scan.push((s, ms));
    }
    // Smallest return index whose signed angle changes sign across the scan
    // away from the ±π wrap.
    let mut bracket = None;
    'search: for k in 0..RETURNS {
        for w in scan.windows(2) {
            let (s_a, ms_a) = &w[0];
            let (s_b, ms_b) = &w[1];
            if ms_a.len() <= k || ms_b.len() <= k {
                continue;
            }
            let (sig_a, sig_b) = (signed_angle(&ms_a[k]), signed_angle(&ms_b[k]));
            if sig_a.signum() != sig_b.signum() && sig_a.abs().max(sig_b.abs()) < 1.2 {
                bracket = Some((*s_a, sig_a, *s_b, k));
                break 'search;
            }
        }
    }
    let (mut lo, sigma_lo, mut hi, k_star) = bracket.ok_or_else(|| Error::NoConvergence {
        what: "closed-carousel level scan".into(),
        detail: format!(
            "no identity monodromy bracketed for s in [{s_lo}, {s_hi}] with {grid} points \
             and {RETURNS} section returns per level"
        ),
    })?;
    let eval = |s: f64| -> Result<CarouselMonodromy> {
        let ms = monodromy_candidates(&decagon_from_frieze(s, s)?, tol, k_star + 1)?;
        if ms.len() != k_star + 1 {
            return Err(Error::NoConvergence {
                what: "closed-carousel refinement".into(),
                detail: format!("level s = {s} yielded only {} section returns", ms.len()),
            });
        }
        Ok(ms[k_star])
    };
    let lo_sign = sigma_lo.signum();
    let mut best: Option<(f64, CarouselMonodromy)> = None;
    for _ in 0..60 {
        if hi - lo < 1e-12 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let m = eval(mid)?;
        let better = match &best {
            Some((_, b)) => identity_distance(m.matrix) < identity_distance(b.matrix),
            None => true,
        };
        if better {
            best = Some((mid, m));
        }
        if signed_angle(&m).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (best_s, monodromy_best) = best.ok_or_else(|| Error::NoConvergence {
        what: "closed-carousel refinement".into(),
        detail: "bisection produced no evaluations".into(),
    })?;
    let closure_residual = identity_distance(monodromy_best.matrix);
    let p_star = decagon_from_frieze(best_s, best_s)?;
    let t_half = 5.0 * monodromy_best.period;
    // The swept curve oscillates once per reduced period, roughly 40 times
    // per half-turn here, so the spectral grid must stay comfortably above
    // that harmonic content.
    let curve = sweep_curve(&p_star, t_half, tol, 2048)?;
    let certificate = curve.verify_self_backlund(PI / 5.0)?;
    Ok(ClosedCarousel {
        coordinate: best_s,
        level: frieze5_hamiltonian(best_s, best_s)?,
        period: monodromy_best.period,
        closure_residual,
        certificate,
        curve,
    })
}
