//! Discrete centroaffine geometry.
//!
//! A centroaffine `2n`-gon is a centrally symmetric polygon `P_0, …, P_{2n-1}`
//! with `[P_i, P_{i+1}] = 1` and `P_{i+n} = -P_i`.  Its vertices obey a
//! three-term recurrence `P_{i+1} = a_i P_i - P_{i-1}` whose `n`-periodic
//! coefficients `a_i = [P_{i-1}, P_{i+1}]` determine the polygon up to
//! `SL_2(R)`, and the chord determinants `[P_i, P_j]` fill a frieze pattern
//! of width `n - 3`.  The module provides the vertex/coefficient dictionary,
//! butterfly quadrilaterals with the induced discrete Bäcklund and recutting
//! transformations, explicit non-trivial self-Bäcklund polygons, and the
//! circulant eigenvalue analysis of infinitesimal rigidity of regular
//! polygons.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::lm;
use crate::{det2, Error, Result};

/// Tolerance on the unit consecutive determinants of a stored polygon.
const SIDE_DET_TOL: f64 = 1e-10;
/// Tolerance on the `n`-step monodromy being `-Id` when closing a polygon.
const CLOSURE_TOL: f64 = 1e-9;
/// Tolerance for declaring a family of chord determinants constant.
const CHORD_TOL: f64 = 1e-9;
/// Radius ratio (dilated midpoint ring over vertex ring) used by the
/// even/odd construction; any value other than 1 gives a non-regular polygon.
const DILATION_RATIO: f64 = 0.8;

fn add2(u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    [u[0] + v[0], u[1] + v[1]]
}

fn sub2(u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    [u[0] - v[0], u[1] - v[1]]
}

fn norm2(u: [f64; 2]) -> f64 {
    u[0].hypot(u[1])
}

/// Propagate `P_{i+1} = a_{i mod n} P_i - P_{i-1}` from two seed vertices,
/// returning `count` vertices in total.
fn propagate(a: &[f64], p0: [f64; 2], p1: [f64; 2], count: usize) -> Vec<[f64; 2]> {
    let n = a.len();
    let mut v = Vec::with_capacity(count);
    v.push(p0);
    if count > 1 {
        v.push(p1);
    }
    for i in 1..count.saturating_sub(1) {
        let ai = a[i % n];
        let prev = v[i - 1];
        let cur = v[i];
        v.push([ai * cur[0] - prev[0], ai * cur[1] - prev[1]]);
    }
    v
}

/// Outcome of propagating a coefficient sequence: either the closed polygon,
/// or the `n`-step monodromy (as a diagnostic) when it is not `-Id`.
#[derive(Debug, Clone)]
pub enum HillPropagation {
    Closed(CentroaffinePolygon),
    Monodromy([[f64; 2]; 2]),
}

impl HillPropagation {
    pub fn closed(self) -> Option<CentroaffinePolygon> {
        match self {
            HillPropagation::Closed(p) => Some(p),
            HillPropagation::Monodromy(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PolygonJson {
    n: usize,
    vertices: Vec<[f64; 2]>,
}

/// A centrally symmetric polygon with unit consecutive determinants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PolygonJson", into = "PolygonJson")]
pub struct CentroaffinePolygon {
    /// Half the number of vertices.
    n: usize,
    /// The `2n` vertices; the second half is the exact negation of the first.
    vertices: Vec<[f64; 2]>,
    /// The `n`-periodic recurrence coefficients `a_i = [P_{i-1}, P_{i+1}]`.
    hill: Vec<f64>,
}

impl TryFrom<PolygonJson> for CentroaffinePolygon {
    type Error = Error;

    fn try_from(json: PolygonJson) -> Result<Self> {
        if json.vertices.len() != 2 * json.n {
            return Err(Error::Parse(format!(
                "polygon JSON declares n = {} but carries {} vertices",
                json.n,
                json.vertices.len()
            )));
        }
        CentroaffinePolygon::from_vertices(json.vertices)
    }
}

impl From<CentroaffinePolygon> for PolygonJson {
    fn from(p: CentroaffinePolygon) -> Self {
        PolygonJson {
            n: p.n,
            vertices: p.vertices,
        }
    }
}

impl CentroaffinePolygon {
    /// Build a polygon from its full vertex list (length `2n >= 6`).
    ///
    /// Central symmetry is checked to `1e-9` relative and then enforced
    /// exactly; the unit-determinant and recurrence invariants are gated at
    /// their stored tolerances.
    pub fn from_vertices(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 6 || vertices.len() % 2 != 0 {
            return Err(Error::domain(format!(
                "a centroaffine polygon needs an even vertex count of at least 6, got {}",
                vertices.len()
            )));
        }
        let n = vertices.len() / 2;
        let scale = vertices.iter().map(|&v| norm2(v)).fold(0.0, f64::max);
        if !scale.is_finite() {
            return Err(Error::domain("non-finite vertex coordinates"));
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            let r = norm2(add2(vertices[i + n], vertices[i]));
            worst = worst.max(r);
        }
        let tol = 1e-9 * (1.0 + scale);
        if worst > tol {
            return Err(Error::residual("polygon central symmetry", worst, tol));
        }
        for i in 0..n {
            vertices[i + n] = [-vertices[i][0], -vertices[i][1]];
        }
        Self::assemble(vertices)
    }

    /// Propagate an `n`-periodic coefficient sequence from the normalized
    /// seed `P_0 = (1, 0)`, `P_1 = (0, 1)`.  The polygon closes exactly when
    /// the `n`-step monodromy is `-Id`; otherwise the monodromy is returned
    /// as a diagnostic value.
    pub fn from_hill(a: &[f64]) -> Result<HillPropagation> {
        let n = a.len();
        if n < 3 {
            return Err(Error::domain(format!(
                "need at least 3 recurrence coefficients, got {n}"
            )));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("non-finite recurrence coefficient"));
        }
        let pts = propagate(a, [1.0, 0.0], [0.0, 1.0], n + 2);
        let m = [[pts[n][0], pts[n + 1][0]], [pts[n][1], pts[n + 1][1]]];
        let miss = (m[0][0] + 1.0)
            .abs()
            .max((m[1][1] + 1.0).abs())
            .max(m[0][1].abs())
            .max(m[1][0].abs());
        if !miss.is_finite() || miss > CLOSURE_TOL {
            return Ok(HillPropagation::Monodromy(m));
        }
        let mut vertices = pts[..n].to_vec();
        for i in 0..n {
            let v = vertices[i];
            vertices.push([-v[0], -v[1]]);
        }
        Ok(HillPropagation::Closed(Self::assemble(vertices)?))
    }

    /// Validate the defining invariants and fill in the recurrence
    /// coefficients.  `vertices` must already be exactly centrally symmetric.
    fn assemble(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let len = vertices.len();
        let n = len / 2;
        let scale = vertices.iter().map(|&v| norm2(v)).fold(0.0, f64::max);
        let mut worst_det = 0.0f64;
        for i in 0..len {
            let d = det2(vertices[i], vertices[(i + 1) % len]);
            worst_det = worst_det.max((d - 1.0).abs());
        }
        if !worst_det.is_finite() || worst_det > SIDE_DET_TOL {
            return Err(Error::residual(
                "polygon consecutive determinants",
                worst_det,
                SIDE_DET_TOL,
            ));
        }
        let hill: Vec<f64> = (0..n)
            .map(|i| det2(vertices[(i + len - 1) % len], vertices[(i + 1) % len]))
            .collect();
        let rec_tol = 1e-10 * (1.0 + scale);
        let mut worst_rec = 0.0f64;
        for i in 0..len {
            let ai = hill[i % n];
            let prev = vertices[(i + len - 1) % len];
            let cur = vertices[i];
            let next = vertices[(i + 1) % len];
            let r = norm2(sub2(next, [ai * cur[0] - prev[0], ai * cur[1] - prev[1]]));
            worst_rec = worst_rec.max(r);
        }
        if worst_rec > rec_tol {
            return Err(Error::residual(
                "polygon three-term recurrence",
                worst_rec,
                rec_tol,
            ));
        }
        Ok(CentroaffinePolygon { n, vertices, hill })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// All `2n` vertices.
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Vertex with cyclic (possibly negative) index.
    pub fn vertex(&self, i: i64) -> [f64; 2] {
        let len = self.vertices.len() as i64;
        self.vertices[i.rem_euclid(len) as usize]
    }

    /// The `n` recurrence coefficients `a_i = [P_{i-1}, P_{i+1}]`.
    pub fn hill_coeffs(&self) -> &[f64] {
        &self.hill
    }

    /// `sum_i (-1)^i a_i`; it vanishes exactly when the even-indexed and
    /// odd-indexed vertices enclose equal areas, the admissibility condition
    /// for carousel dynamics on polygons with an even number of sides.
    pub fn alternating_hill_sum(&self) -> f64 {
        self.hill
            .iter()
            .enumerate()
            .map(|(i, a)| if i % 2 == 0 { *a } else { -*a })
            .sum()
    }

    /// Variance of the recurrence coefficients: zero exactly on affine-regular
    /// polygons, used as the (SL2-invariant) non-triviality measure.
    pub fn hill_variance(&self) -> f64 {
        let n = self.hill.len() as f64;
        let mean = self.hill.iter().sum::<f64>() / n;
        self.hill.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n
    }

    /// The full table of chord determinants `[P_i, P_{i+k}]`, `1 <= k <= n-1`.
    pub fn frieze(&self) -> Frieze {
        let len = self.vertices.len();
        let rows: Vec<Vec<f64>> = (1..self.n)
            .map(|k| {
                (0..self.n)
                    .map(|i| det2(self.vertices[i], self.vertices[(i + k) % len]))
                    .collect()
            })
            .collect();
        let all_positive = rows.iter().flatten().all(|&x| x > 0.0);
        Frieze { rows, all_positive }
    }

    /// Return the common chord value `c = [P_i, P_{i+k}]` if all chords of
    /// step `k` agree to `1e-9`, and `None` otherwise (or for `k` outside
    /// `2..=n-2`).
    pub fn is_self_backlund(&self, k: usize) -> Option<f64> {
        if k < 2 || k > self.n.saturating_sub(2) {
            return None;
        }
        let len = self.vertices.len();
        let chords: Vec<f64> = (0..self.n)
            .map(|i| det2(self.vertices[i], self.vertices[(i + k) % len]))
            .collect();
        let mean = chords.iter().sum::<f64>() / chords.len() as f64;
        let spread = chords
            .iter()
            .map(|c| (c - mean).abs())
            .fold(0.0, f64::max);
        (spread <= CHORD_TOL).then_some(mean)
    }

    /// Replace vertex `i` (and its antipode) by the butterfly completion of
    /// the triple `P_{i-1} P_i P_{i+1}`.  On a polygon with unit consecutive
    /// determinants the completion coincides with the original vertex, so
    /// this is the identity up to round-off; it is exposed for symmetry with
    /// the general-determinant recutting orbit.
    pub fn recut(&self, i: usize) -> Result<CentroaffinePolygon> {
        let len = self.vertices.len();
        if i >= len {
            return Err(Error::domain(format!(
                "vertex index {i} out of range for a polygon with {len} vertices"
            )));
        }
        let prev = self.vertices[(i + len - 1) % len];
        let next = self.vertices[(i + 1) % len];
        let new = butterfly_fourth(prev, self.vertices[i], next)?;
        let mut vertices = self.vertices.clone();
        vertices[i] = new;
        vertices[(i + self.n) % len] = [-new[0], -new[1]];
        Self::assemble(vertices)
    }
}

/// Chord-determinant table of a polygon: `rows()[k-1][i] = [P_i, P_{i+k}]`.
/// Each row is one period (`n` entries); rows `1` and `n-1` consist of ones
/// and the row `k = 2` reproduces the recurrence coefficients.
#[derive(Debug, Clone)]
pub struct Frieze {
    rows: Vec<Vec<f64>>,
    all_positive: bool,
}

impl Frieze {
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Row of chord step `k`, for `1 <= k <= n-1`.
    pub fn row(&self, k: usize) -> Option<&[f64]> {
        if k == 0 {
            return None;
        }
        self.rows.get(k - 1).map(|r| r.as_slice())
    }

    /// True when every entry is strictly positive (the case for simple
    /// polygons).
    pub fn all_positive(&self) -> bool {
        self.all_positive
    }
}

/// The linear involution swapping `a` and `b`:
/// `I(x) = ([x, b] b + [a, x] a) / [a, b]`.
fn involution(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    let d = det2(a, b);
    let cb = det2(x, b) / d;
    let ca = det2(a, x) / d;
    [cb * b[0] + ca * a[0], cb * b[1] + ca * a[1]]
}

/// Test the butterfly relations `[q0, q1] = [q3, q2]`, `[q1, q2] = [q0, q3]`
/// at relative tolerance `tol`.
pub fn is_butterfly(q: &[[f64; 2]; 4], tol: f64) -> bool {
    let scale2 = q.iter().map(|&v| norm2(v)).fold(0.0, f64::max).powi(2);
    let r1 = (det2(q[0], q[1]) - det2(q[3], q[2])).abs();
    let r2 = (det2(q[1], q[2]) - det2(q[0], q[3])).abs();
    r1.max(r2) <= tol * (1.0 + scale2)
}

/// The unique fourth point making `p1 p2 p3 p4` a centroaffine butterfly:
/// the image of `p2` under the linear involution that swaps `p1` and `p3`.
///
/// The result is cross-checked against the defining determinant relations
/// and their geometric form (`p1 p3` parallel to `p2 p4` with collinear
/// midpoints) before being returned.
pub fn butterfly_fourth(p1: [f64; 2], p2: [f64; 2], p3: [f64; 2]) -> Result<[f64; 2]> {
    let scale2 = norm2(p1).max(norm2(p2)).max(norm2(p3)).powi(2);
    let d = det2(p1, p3);
    if d.abs() <= 1e-12 * (1.0 + scale2) {
        return Err(Error::Degenerate(
            "butterfly completion needs [p1, p3] != 0".into(),
        ));
    }
    let p4 = involution(p1, p3, p2);
    let tol = 1e-12 * (1.0 + scale2.max(norm2(p4).powi(2)));
    let pair = (det2(p1, p2) - det2(p4, p3))
        .abs()
        .max((det2(p2, p3) - det2(p1, p4)).abs());
    let parallel = det2(sub2(p1, p3), sub2(p2, p4)).abs();
    let midpoints = det2(add2(p1, p3), add2(p2, p4)).abs();
    let worst = pair.max(parallel).max(midpoints);
    if worst > tol {
        return Err(Error::residual("butterfly relations", worst, tol));
    }
    Ok(p4)
}

/// Result of the step-by-step Bäcklund construction along a polygon.
#[derive(Debug, Clone)]
pub struct BacklundOrbit {
    /// `Q_0, …, Q_m` where `m` is the vertex count; `Q_m` wraps around to
    /// the start when the monodromy is trivial.
    pub points: Vec<[f64; 2]>,
    /// Whether `Q_m` returned to `Q_0` (to `1e-9` relative).
    pub closed: bool,
    /// The conserved rail determinant `[P_i, Q_i]`.
    pub c: f64,
}

/// Run the discrete Bäcklund construction: starting from `q1`, each step
/// completes `P_i P_{i+1} Q_{i+1} Q_i` to a butterfly, which preserves the
/// side determinants `[Q_i, Q_{i+1}] = [P_i, P_{i+1}]` and the rail
/// determinant `[P_i, Q_i]`.  Works on any cyclic vertex list (it is not
/// restricted to unit side determinants, so butterflies themselves are
/// admissible inputs).
pub fn backlund_orbit(vertices: &[[f64; 2]], q1: [f64; 2]) -> Result<BacklundOrbit> {
    let m = vertices.len();
    if m < 3 {
        return Err(Error::domain("need at least 3 vertices"));
    }
    let scale2 = vertices
        .iter()
        .map(|&v| norm2(v))
        .fold(norm2(q1), f64::max)
        .powi(2);
    let rail = det2(vertices[0], q1);
    if rail.abs() <= 1e-12 * (1.0 + scale2) {
        return Err(Error::Degenerate(
            "seed point is radially aligned with the first vertex".into(),
        ));
    }
    let mut q = Vec::with_capacity(m + 1);
    q.push(q1);
    for i in 0..m {
        let a = q[i];
        let b = vertices[(i + 1) % m];
        let d = det2(a, b);
        if d.abs() <= 1e-12 * (1.0 + scale2) {
            return Err(Error::Degenerate(format!(
                "involution degenerates at step {i}: [Q_{i}, P_{}] = 0",
                i + 1
            )));
        }
        q.push(involution(a, b, vertices[i % m]));
    }
    let tol = CHORD_TOL * (1.0 + scale2);
    let mut worst = 0.0f64;
    for i in 0..m {
        let side_p = det2(vertices[i], vertices[(i + 1) % m]);
        let side_q = det2(q[i], q[i + 1]);
        worst = worst.max((side_q - side_p).abs());
        worst = worst.max((det2(vertices[i], q[i]) - rail).abs());
    }
    if !worst.is_finite() || worst > tol {
        return Err(Error::residual(
            "Bäcklund side/rail conservation",
            worst,
            tol,
        ));
    }
    let scale = scale2.sqrt();
    let closed = norm2(sub2(q[m], q[0])) <= 1e-9 * (1.0 + scale);
    Ok(BacklundOrbit {
        points: q,
        closed,
        c: rail,
    })
}

/// [`backlund_orbit`] applied to the vertices of a centroaffine polygon.
pub fn backlund_transform(p: &CentroaffinePolygon, q1: [f64; 2]) -> Result<BacklundOrbit> {
    backlund_orbit(p.vertices(), q1)
}

/// State after iterating the full recutting map on a general polygon.
#[derive(Debug, Clone)]
pub struct RecutOrbit {
    pub vertices: Vec<[f64; 2]>,
    pub rounds: usize,
    /// Largest vertex norm seen anywhere along the orbit.
    pub max_radius: f64,
    /// Smallest vertex norm seen anywhere along the orbit.
    pub min_radius: f64,
}

/// Iterate the recutting transformation `T_{m-1} ∘ … ∘ T_0` (each `T_i`
/// replaces `P_i` by the butterfly completion of `P_{i-1} P_i P_{i+1}`,
/// which swaps the two adjacent side determinants) for `rounds` sweeps.
///
/// The orbit radii are reported so callers can inspect boundedness; the
/// multiset of side determinants is exactly invariant.
pub fn recut_orbit(initial: &[[f64; 2]], rounds: usize) -> Result<RecutOrbit> {
    let m = initial.len();
    if m < 3 {
        return Err(Error::domain("need at least 3 vertices"));
    }
    let mut v = initial.to_vec();
    let mut max_radius = v.iter().map(|&p| norm2(p)).fold(0.0, f64::max);
    let mut min_radius = v.iter().map(|&p| norm2(p)).fold(f64::INFINITY, f64::min);
    for round in 0..rounds {
        for i in 0..m {
            let prev = v[(i + m - 1) % m];
            let next = v[(i + 1) % m];
            let d = det2(prev, next);
            let local = norm2(prev).max(norm2(next)).powi(2);
            if !d.is_finite() || d.abs() <= 1e-13 * (1.0 + local) {
                return Err(Error::Degenerate(format!(
                    "recutting degenerates at vertex {i} of round {round}"
                )));
            }
            v[i] = involution(prev, next, v[i]);
            let r = norm2(v[i]);
            if !r.is_finite() {
                return Err(Error::NoConvergence {
                    what: "recutting orbit".into(),
                    detail: format!("vertex {i} diverged in round {round}"),
                });
            }
            max_radius = max_radius.max(r);
            min_radius = min_radius.min(r);
        }
    }
    Ok(RecutOrbit {
        vertices: v,
        rounds,
        max_radius,
        min_radius,
    })
}

/// Interleave a regular `n`-gon (on the circle that normalizes the side
/// determinants) with the dilation of its edge-midpoint polygon.  The
/// resulting `2n`-gon is dihedrally symmetric, which forces every odd-step
/// chord family `[P_i, P_{i+k}]` to be constant, while `ratio != 1` keeps
/// the recurrence coefficients non-constant.
fn midpoint_interleaved(n: usize, ratio: f64) -> Result<CentroaffinePolygon> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let half = std::f64::consts::PI / n as f64;
    let s = 1.0 / (ratio * half.sin()).sqrt();
    let lam = ratio / half.cos();
    let mut vertices = Vec::with_capacity(2 * n);
    for j in 0..n {
        let a0 = step * j as f64;
        let a1 = step * (j + 1) as f64;
        let r = [a0.cos(), a0.sin()];
        let rn = [a1.cos(), a1.sin()];
        vertices.push([s * r[0], s * r[1]]);
        vertices.push([
            s * lam * 0.5 * (r[0] + rn[0]),
            s * lam * 0.5 * (r[1] + rn[1]),
        ]);
    }
    CentroaffinePolygon::from_vertices(vertices)
}

/// Construct a verified non-trivial self-Bäcklund `(n, k)`-gon for the two
/// constructive families (`n` even with `k` odd, and `n = 2k`), or `None`
/// where no construction applies (in particular for every rigid pair).
pub fn construct_nk(n: usize, k: usize) -> Result<Option<CentroaffinePolygon>> {
    if n < 3 || k < 2 || k > n - 2 {
        return Err(Error::domain(format!(
            "chord step k = {k} must satisfy 2 <= k <= n - 2 (n = {n})"
        )));
    }
    let k_eff = k.min(n - k);
    if k_eff == 2 {
        return Ok(None);
    }
    let poly = if n % 2 == 0 && k_eff % 2 == 1 {
        Some(midpoint_interleaved(n, DILATION_RATIO)?)
    } else if n == 2 * k_eff {
        Some(collinear_flank(k_eff - 2)?)
    } else {
        None
    };
    if let Some(ref p) = poly {
        if p.is_self_backlund(k).is_none() {
            return Err(Error::residual(
                format!("({n}, {k}) construction chord spread"),
                f64::NAN,
                CHORD_TOL,
            ));
        }
        if p.hill_variance() <= 1e-8 {
            return Err(Error::domain(format!(
                "({n}, {k}) construction degenerated to a regular polygon"
            )));
        }
    }
    Ok(poly)
}

/// Non-trivial self-Bäcklund `(2k0 + 4, k0 + 2)`-gon (`k0` even) built from
/// four runs of `k0 + 1` collinear vertices joined by four corner vertices.
///
/// The recurrence coefficients are
/// `[c+1, 2, …, 2, 1, c+k0, 1, 2, …, 2, c+1, c-k0]`
/// with `c = (k0 + sqrt(k0^2 + 8)) / 2`, the positive root of
/// `c^2 - k0 c = 2`.  Four coefficients equal to 1 and `2(k0 - 1)`
/// coefficients equal to 2 flatten the polygon into straight runs of unit
/// spacing; seeding on the line `y = 1` places them at
/// `x ∈ ±[a, a + k0]` on `y = ±1` with `a = (c - k0)/2 = 1/c`
/// (so `c = 2a + k0` and the chord value is the reciprocal of the run
/// offset), and puts the corners at `(±1, 0)` and `(0, ±c)`, the two
/// symmetry axes.
fn collinear_flank(k0: usize) -> Result<CentroaffinePolygon> {
    if k0 < 2 || k0 % 2 != 0 {
        return Err(Error::domain(format!(
            "collinear-run construction needs an even run length parameter >= 2, got {k0}"
        )));
    }
    let n = 2 * k0 + 4;
    let c = 0.5 * (k0 as f64 + ((k0 * k0 + 8) as f64).sqrt());
    let a = 0.5 * (c - k0 as f64);
    let mut coeff = vec![2.0; n];
    coeff[0] = c + 1.0;
    coeff[k0] = 1.0;
    coeff[k0 + 1] = c + k0 as f64;
    coeff[k0 + 2] = 1.0;
    coeff[2 * k0 + 2] = c + 1.0;
    coeff[2 * k0 + 3] = c - k0 as f64;
    let pts = propagate(&coeff, [-a, 1.0], [-a - 1.0, 1.0], n);
    let mut vertices = pts;
    for i in 0..n {
        let v = vertices[i];
        vertices.push([-v[0], -v[1]]);
    }
    CentroaffinePolygon::from_vertices(vertices)
}

/// Eigenvalue analysis of the linearized self-Bäcklund constraints around a
/// regular polygon.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    pub n: usize,
    pub k: usize,
    /// Circulant eigenvalues `λ_j`, `j = 0, …, n-1`.
    pub eigenvalues: Vec<Complex64>,
    /// Indices with `λ_j = 0`; always contains `{0, 1, n-1}` (the `sl_2`
    /// directions).
    pub kernel_indices: Vec<usize>,
    pub kernel_dim: usize,
    /// True when the kernel exceeds the trivial three dimensions, i.e. the
    /// regular polygon admits a non-trivial infinitesimal deformation.
    pub nontrivial: bool,
}

/// Exact arithmetic criterion for `λ_j = 0`, used as the authoritative
/// tie-break near zero: besides the trivial indices, either one side of the
/// tangent identity is infinite (`n = 2j` with `k` odd, `n = 2k` with `j`
/// odd) or `n = 2(k + j)` with `n` dividing `(k - 1)(j - 1)`.
fn kernel_by_criterion(n: usize, k: usize, j: usize) -> bool {
    if j == 0 || j == 1 || j == n - 1 {
        return true;
    }
    // λ_{n-j} is the conjugate of λ_j, so the criterion is applied to both
    // mirror frequencies.
    let hit = |j: usize| {
        let infinite_j = n == 2 * j && k % 2 == 1;
        let infinite_k = n == 2 * k && j % 2 == 1;
        let arithmetic = n == 2 * (k + j) && ((k - 1) * (j - 1)) % n == 0;
        infinite_j || infinite_k || arithmetic
    };
    hit(j) || hit(n - j)
}

/// Compute the circulant eigenvalues
/// `λ_j = μ_{k-1} - μ_{k+1} ω_j + μ_{k+1} ω_j^k - μ_{k-1} ω_j^{k+1}`
/// (`μ_m = sin(π m / n)`, `ω_j = e^{2πij/n}`) of the linearized chord
/// constraints, and classify the kernel.
pub fn rigidity_analysis(n: usize, k: usize) -> Result<RigidityReport> {
    if n < 4 || k < 2 || 2 * k > n {
        return Err(Error::domain(format!(
            "rigidity analysis needs 2 <= k <= n/2, got (n, k) = ({n}, {k})"
        )));
    }
    let pi = std::f64::consts::PI;
    let mu = |m: usize| (pi * m as f64 / n as f64).sin();
    let mu_minus = mu(k - 1);
    let mu_plus = mu(k + 1);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut kernel_indices = Vec::new();
    for j in 0..n {
        let w = Complex64::from_polar(1.0, 2.0 * pi * j as f64 / n as f64);
        let wk = Complex64::from_polar(1.0, 2.0 * pi * (j * k % n) as f64 / n as f64);
        let lam = mu_minus - mu_plus * w + mu_plus * wk - mu_minus * wk * w;
        eigenvalues.push(lam);
        if kernel_by_criterion(n, k, j) {
            if lam.norm() > 1e-8 {
                return Err(Error::residual(
                    format!("circulant eigenvalue λ_{j} expected to vanish"),
                    lam.norm(),
                    1e-8,
                ));
            }
            kernel_indices.push(j);
        }
    }
    let kernel_dim = kernel_indices.len();
    Ok(RigidityReport {
        n,
        k,
        eigenvalues,
        kernel_indices,
        kernel_dim,
        nontrivial: kernel_dim > 3,
    })
}

/// Outcome of a random-restart least-squares search for self-Bäcklund
/// `(n, k)`-gons.  A numerical search cannot prove rigidity; when every
/// converged restart lands on the regular polygon the result corroborates
/// it, and any non-regular solution found is returned as a witness.
#[derive(Debug)]
pub struct SearchReport {
    pub n: usize,
    pub k: usize,
    pub attempts: usize,
    pub converged: usize,
    pub regular: usize,
    pub nonregular: Option<CentroaffinePolygon>,
}

/// Closure and chord-constancy residuals of a coefficient vector, the
/// objective of [`search_self_backlund`].
fn self_backlund_residuals(a: &[f64], k: usize) -> Vec<f64> {
    let n = a.len();
    let pts = propagate(a, [1.0, 0.0], [0.0, 1.0], n + k + 1);
    let mut r = Vec::with_capacity(n + 4);
    r.push(pts[n][0] + 1.0);
    r.push(pts[n][1]);
    r.push(pts[n + 1][0]);
    r.push(pts[n + 1][1] + 1.0);
    let chords: Vec<f64> = (0..n).map(|i| det2(pts[i], pts[i + k])).collect();
    let mean = chords.iter().sum::<f64>() / n as f64;
    for c in chords {
        r.push(c - mean);
    }
    r
}

/// Levenberg–Marquardt search over `n`-periodic recurrence coefficients for
/// closed self-Bäcklund `(n, k)`-gons, restarted from `attempts` perturbed
/// seeds around the regular values.
pub fn search_self_backlund(n: usize, k: usize, attempts: usize, seed: u64) -> Result<SearchReport> {
    if n < 3 || k < 2 || k > n - 2 {
        return Err(Error::domain(format!(
            "chord step k = {k} must satisfy 2 <= k <= n - 2 (n = {n})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = 2.0 * (std::f64::consts::PI / n as f64).cos();
    let opt = lm::LmOptions {
        max_iterations: 600,
        cost_tol: 1e-26,
        step_tol: 1e-14,
    };
    let mut report = SearchReport {
        n,
        k,
        attempts,
        converged: 0,
        regular: 0,
        nonregular: None,
    };
    for _ in 0..attempts {
        let x0: Vec<f64> = (0..n).map(|_| base + rng.gen_range(-0.6..0.6)).collect();
        let sol = lm::minimize(&mut |x: &[f64]| self_backlund_residuals(x, k), &x0, &opt);
        if !(sol.cost < 1e-20) {
            continue;
        }
        report.converged += 1;
        let mean = sol.x.iter().sum::<f64>() / n as f64;
        let dev = sol.x.iter().map(|a| (a - mean).abs()).fold(0.0, f64::max);
        if dev < 1e-6 {
            report.regular += 1;
        } else if report.nonregular.is_none() {
            if let HillPropagation::Closed(p) = CentroaffinePolygon::from_hill(&sol.x)? {
                report.nonregular = Some(p);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn regular(n: usize) -> CentroaffinePolygon {
        let a = vec![2.0 * (PI / n as f64).cos(); n];
        CentroaffinePolygon::from_hill(&a)
            .unwrap()
            .closed()
            .expect("constant coefficients 2cos(pi/n) close up")
    }

    /// The two-parameter pentagon family: its coefficient sequence is the
    /// frieze row x, (y+1)/x, (x+1)/y, y, (x+y+1)/(xy) read cyclically.
    fn pentagon(x: f64, y: f64) -> CentroaffinePolygon {
        let a = vec![
            (x + y + 1.0) / (x * y),
            x,
            (y + 1.0) / x,
            (x + 1.0) / y,
            y,
        ];
        CentroaffinePolygon::from_hill(&a)
            .unwrap()
            .closed()
            .expect("width-two frieze data closes up")
    }

    #[test]
    fn regular_polygon_chords_match_sine_ratios() {
        for n in [5usize, 7, 12] {
            let p = regular(n);
            let mu = |m: usize| (PI * m as f64 / n as f64).sin();
            let f = p.frieze();
            for k in 1..n {
                for (i, &v) in f.row(k).unwrap().iter().enumerate() {
                    assert!(
                        (v - mu(k) / mu(1)).abs() < 1e-9,
                        "n={n} k={k} i={i} chord {v}"
                    );
                }
            }
            assert!(f.all_positive());
            for k in 2..=n - 2 {
                let c = p.is_self_backlund(k).expect("regular polygon chords agree");
                assert!((c - mu(k) / mu(1)).abs() < 1e-9);
            }
            assert!(p.hill_variance() < 1e-20);
        }
    }

    #[test]
    fn golden_ratio_coefficients_are_the_regular_decagon() {
        let phi = 0.5 * (1.0 + 5.0f64.sqrt());
        assert!((phi - 2.0 * (PI / 5.0).cos()).abs() < 1e-15);
        let p = CentroaffinePolygon::from_hill(&[phi; 5])
            .unwrap()
            .closed()
            .unwrap();
        assert_eq!(p.vertices().len(), 10);
        assert!(p.hill_variance() < 1e-20);
    }

    #[test]
    fn generic_coefficients_leave_nontrivial_monodromy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a: Vec<f64> = (0..5).map(|_| rng.gen_range(1.5..2.5)).collect();
            match CentroaffinePolygon::from_hill(&a).unwrap() {
                HillPropagation::Closed(_) => panic!("random coefficients should not close"),
                HillPropagation::Monodromy(m) => {
                    let miss = (m[0][0] + 1.0)
                        .abs()
                        .max((m[1][1] + 1.0).abs())
                        .max(m[0][1].abs())
                        .max(m[1][0].abs());
                    assert!(miss > 1e-6, "monodromy unexpectedly close to -Id");
                }
            }
        }
    }

    #[test]
    fn pentagon_frieze_matches_two_parameter_form() {
        for (x, y) in [(1.3, 0.8), (0.55, 2.1)] {
            let p = pentagon(x, y);
            let f = p.frieze();
            let row2 = f.row(2).unwrap();
            let want2 = [
                x,
                (y + 1.0) / x,
                (x + 1.0) / y,
                y,
                (x + y + 1.0) / (x * y),
            ];
            for i in 0..5 {
                assert!((row2[i] - want2[i]).abs() < 1e-10, "row2[{i}]");
                // row 2 is the coefficient sequence, shifted by one vertex
                assert!((row2[i] - p.hill_coeffs()[(i + 1) % 5]).abs() < 1e-12);
            }
            let row3 = f.row(3).unwrap();
            for i in 0..5 {
                // glide symmetry of the width-two frieze
                assert!((row3[i] - row2[(i + 3) % 5]).abs() < 1e-10, "row3[{i}]");
            }
            assert!((row3[0] - y).abs() < 1e-10);
            for &v in f.row(1).unwrap().iter().chain(f.row(4).unwrap()) {
                assert!((v - 1.0).abs() < 1e-10);
            }
            assert!(f.all_positive());
        }
    }

    #[test]
    fn four_gon_alternating_sum_vanishes_only_at_regular() {
        let t = 1.3;
        let p = CentroaffinePolygon::from_hill(&[t, 2.0 / t, t, 2.0 / t])
            .unwrap()
            .closed()
            .expect("width-one frieze data closes");
        assert!((p.alternating_hill_sum().abs() - 2.0 * (t - 2.0 / t).abs()).abs() < 1e-10);
        let r = regular(4);
        assert!(r.alternating_hill_sum().abs() < 1e-10);
    }

    #[test]
    fn butterfly_involution_swaps_basis_pair() {
        let (c, d) = (0.37, 1.64);
        let p4 = butterfly_fourth([1.0, 0.0], [c, d], [0.0, 1.0]).unwrap();
        assert!((p4[0] - d).abs() < 1e-15 && (p4[1] - c).abs() < 1e-15);
        let same = butterfly_fourth([1.0, 0.0], [1.0, 0.0], [0.0, 1.0]).unwrap();
        assert!((same[0]).abs() < 1e-15 && (same[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn butterfly_characterizations_agree_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut pt = || [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let (p1, p2, p3) = (pt(), pt(), pt());
            if det2(p1, p3).abs() < 1e-3 {
                continue;
            }
            let p4 = butterfly_fourth(p1, p2, p3).unwrap();
            // the involution is its own inverse
            let back = butterfly_fourth(p1, p4, p3).unwrap();
            assert!(norm2(sub2(back, p2)) < 1e-10);
            // the dihedral orbit of label permutations preserves the relations
            let q = [p1, p2, p3, p4];
            let perms: [[usize; 4]; 8] = [
                [0, 1, 2, 3],
                [1, 2, 3, 0],
                [2, 3, 0, 1],
                [3, 0, 1, 2],
                [0, 3, 2, 1],
                [1, 0, 3, 2],
                [2, 1, 0, 3],
                [3, 2, 1, 0],
            ];
            for perm in perms {
                let r = [q[perm[0]], q[perm[1]], q[perm[2]], q[perm[3]]];
                assert!(is_butterfly(&r, 1e-10), "permutation {perm:?}");
            }
        }
    }

    #[test]
    fn ptolemy_plucker_identity_on_random_quadruples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let mut pt = || [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let (a, b, c, d) = (pt(), pt(), pt(), pt());
            let lhs = det2(a, b) * det2(c, d) + det2(b, c) * det2(a, d);
            let rhs = det2(a, c) * det2(b, d);
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn backlund_on_butterfly_reproduces_closed_quadrilateral() {
        let (a, b) = (1.3, 0.7);
        let (x, y) = (0.4, 1.1);
        let p = [[1.0, 0.0], [a, b], [0.0, 1.0], [b, a]];
        let orbit = backlund_orbit(&p, [x, y]).unwrap();
        assert!(orbit.closed);
        let q2 = [
            (a * b - x * y) / (b * x - a * y),
            (b * b - y * y) / (b * x - a * y),
        ];
        let q3 = [
            -y,
            (-y * (a * a + b * b) + a * b * x + y * y * y) / (a * b - x * y),
        ];
        let q4 = [
            (a * b - x * y) / (a * x - b * y),
            (a * a - y * y) / (a * x - b * y),
        ];
        assert!(norm2(sub2(orbit.points[1], q2)) < 1e-12);
        assert!(norm2(sub2(orbit.points[2], q3)) < 1e-12);
        assert!(norm2(sub2(orbit.points[3], q4)) < 1e-12);
        assert!(norm2(sub2(orbit.points[4], [x, y])) < 1e-12);
        let quad = [
            orbit.points[0],
            orbit.points[1],
            orbit.points[2],
            orbit.points[3],
        ];
        assert!(is_butterfly(&quad, 1e-10));
    }

    #[test]
    fn backlund_on_rotated_regular_polygon_closes() {
        let n = 5usize;
        let r = 1.0 / (PI / n as f64).sin().sqrt();
        let vertices: Vec<[f64; 2]> = (0..2 * n)
            .map(|j| {
                let t = PI * j as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let p = CentroaffinePolygon::from_vertices(vertices.clone()).unwrap();
        let psi = 0.37f64;
        let q1 = [r * psi.cos(), r * psi.sin()];
        let orbit = backlund_transform(&p, q1).unwrap();
        assert!(orbit.closed);
        assert!((orbit.c - psi.sin() / (PI / n as f64).sin()).abs() < 1e-12);
        for (j, &q) in orbit.points.iter().take(2 * n).enumerate() {
            let t = PI * j as f64 / n as f64 + psi;
            assert!(norm2(sub2(q, [r * t.cos(), r * t.sin()])) < 1e-9, "Q_{j}");
        }
    }

    #[test]
    fn backlund_conserves_sides_and_rail_without_closing() {
        let p = pentagon(1.3, 0.8);
        let orbit = backlund_transform(&p, [1.0, 1.0]).unwrap();
        // generic seed: monodromy need not be trivial, but the conserved
        // quantities hold along the whole construction (checked internally;
        // re-checked here)
        for i in 0..10 {
            let side = det2(orbit.points[i], orbit.points[i + 1]);
            assert!((side - 1.0).abs() < 1e-10);
            assert!((det2(p.vertices()[i], orbit.points[i]) - orbit.c).abs() < 1e-10);
        }
    }

    #[test]
    fn recut_fixes_unit_determinant_polygons() {
        let p = pentagon(0.9, 1.7);
        for i in 0..10 {
            let q = p.recut(i).unwrap();
            for (u, v) in q.vertices().iter().zip(p.vertices()) {
                assert!(norm2(sub2(*u, *v)) < 1e-12);
            }
        }
    }

    #[test]
    fn recutting_orbit_preserves_side_determinant_multiset() {
        let hexagon = [
            [1.9, 0.1],
            [0.8, 1.4],
            [-0.9, 1.2],
            [-2.1, -0.3],
            [-0.5, -1.6],
            [1.0, -1.0],
        ];
        let sides = |v: &[[f64; 2]]| {
            let mut s: Vec<f64> = (0..v.len())
                .map(|i| det2(v[i], v[(i + 1) % v.len()]))
                .collect();
            s.sort_by(f64::total_cmp);
            s
        };
        let before = sides(&hexagon);
        let orbit = recut_orbit(&hexagon, 2000).unwrap();
        let after = sides(&orbit.vertices);
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-8, "side multiset drifted: {a} vs {b}");
        }
        assert!(orbit.max_radius.is_finite() && orbit.min_radius > 0.0);
    }

    #[test]
    fn construct_8_3_is_nontrivially_self_backlund_for_odd_steps() {
        let p = construct_nk(8, 3).unwrap().expect("flexible case");
        assert_eq!(p.n(), 8);
        assert!(p.is_self_backlund(3).is_some());
        assert!(p.is_self_backlund(5).is_some());
        assert!(p.is_self_backlund(4).is_none(), "even chords must spread");
        assert!(p.hill_variance() > 1e-4);
        let f = p.frieze();
        let row3 = f.row(3).unwrap();
        let spread = row3.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - row3.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        assert!(spread < 1e-9, "k = 3 frieze row must be constant");
        let row2 = f.row(2).unwrap();
        let spread2 = row2.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - row2.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        assert!(spread2 > 1e-3, "coefficient row must vary");
    }

    #[test]
    fn construct_rigid_and_unsupported_cases_return_none() {
        assert!(construct_nk(7, 2).unwrap().is_none());
        assert!(construct_nk(9, 3).unwrap().is_none(), "odd n, k = 3 is rigid");
        assert!(construct_nk(25, 5).unwrap().is_none(), "no construction applies");
        assert!(construct_nk(2, 2).is_err());
    }

    #[test]
    fn rigidity_kernel_dimensions_match_criteria() {
        let cases = [
            (7usize, 3usize, 3usize),
            (9, 4, 3),
            (11, 5, 3),
            (12, 4, 3),
            (8, 3, 4),  // j = 4 = n/2 with k odd
            (12, 5, 4), // j = 6 = n/2
            (12, 6, 7), // n = 2k: every odd j
        ];
        for (n, k, dim) in cases {
            let rep = rigidity_analysis(n, k).unwrap();
            assert_eq!(rep.kernel_dim, dim, "(n, k) = ({n}, {k})");
            assert_eq!(rep.nontrivial, dim > 3);
            for j in [0, 1, n - 1] {
                assert!(rep.kernel_indices.contains(&j));
            }
            for &j in &rep.kernel_indices {
                assert!(rep.eigenvalues[j].norm() < 1e-10);
            }
        }
        let rep = rigidity_analysis(30, 4).unwrap();
        assert!(rep.kernel_indices.contains(&11));
        assert!(rep.kernel_indices.contains(&19));
        assert_eq!(rep.kernel_dim, 5);
        assert!(rep.eigenvalues[11].norm() < 1e-10);
        assert_eq!(30, 2 * (4 + 11));
        assert_eq!((4 - 1) * (11 - 1) % 30, 0);
    }

    #[test]
    fn rigidity_eigenvalues_match_dense_circulant_action() {
        for (n, k) in [(8usize, 3usize), (30, 4), (12, 5)] {
            let pi = PI;
            let mu = |m: usize| (pi * m as f64 / n as f64).sin();
            // rows of the linearized system: mu_{k-1} c_j - mu_{k+1} c_{j+1}
            //                              + mu_{k+1} c_{j+k} - mu_{k-1} c_{j+k+1}
            let apply = |v: &[Complex64]| -> Vec<Complex64> {
                (0..n)
                    .map(|j| {
                        mu(k - 1) * v[j] - mu(k + 1) * v[(j + 1) % n]
                            + mu(k + 1) * v[(j + k) % n]
                            - mu(k - 1) * v[(j + k + 1) % n]
                    })
                    .collect()
            };
            let rep = rigidity_analysis(n, k).unwrap();
            for j in 0..n {
                let v: Vec<Complex64> = (0..n)
                    .map(|m| Complex64::from_polar(1.0, 2.0 * pi * (j * m) as f64 / n as f64))
                    .collect();
                let av = apply(&v);
                for m in 0..n {
                    assert!((av[m] - rep.eigenvalues[j] * v[m]).norm() < 1e-10 * n as f64);
                }
            }
            // explicit real kernel vectors of the sl2 action
            let real_kernels: [Vec<f64>; 3] = [
                vec![1.0; n],
                (0..n).map(|j| (pi * (2.0 * j as f64 - 1.0) / n as f64).cos()).collect(),
                (0..n).map(|j| (pi * (2.0 * j as f64 - 1.0) / n as f64).sin()).collect(),
            ];
            for v in real_kernels {
                let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                for z in apply(&vc) {
                    assert!(z.norm() < 1e-10 * n as f64);
                }
            }
        }
    }

    #[test]
    fn random_restart_search_corroborates_rigid_cases() {
        for (n, k) in [(5usize, 2usize), (7, 3)] {
            let rep = search_self_backlund(n, k, 12, 41).unwrap();
            assert!(rep.converged >= 8, "({n}, {k}): only {} converged", rep.converged);
            assert_eq!(rep.converged, rep.regular, "({n}, {k}) found a non-regular gon");
            assert!(rep.nonregular.is_none());
        }
    }

    #[test]
    fn random_restart_search_finds_flexible_witness() {
        let rep = search_self_backlund(8, 3, 12, 17).unwrap();
        let witness = rep.nonregular.expect("(8, 3) admits non-regular solutions");
        assert!(witness.is_self_backlund(3).is_some());
        assert!(witness.hill_variance() > 1e-8);
    }

    #[test]
    fn construct_collinear_runs_hit_exact_chord_constants() {
        // (n, k) = (2k0+4, k0+2); the chord value is (k0 + sqrt(k0^2+8))/2
        // and the collinear runs start at a = (sqrt(k0^2+8) - k0)/4.
        for (n, k, k0) in [(8usize, 4usize, 2usize), (12, 6, 4), (16, 8, 6)] {
            let p = construct_nk(n, k).unwrap().expect("n = 2k admits examples");
            let c_exact = 0.5 * (k0 as f64 + ((k0 * k0 + 8) as f64).sqrt());
            let a_exact = 0.5 * (c_exact - k0 as f64);
            let c = p.is_self_backlund(k).expect("constant chords");
            assert!((c - c_exact).abs() < 1e-12, "(n={n}) c = {c} vs {c_exact}");
            assert!(p.hill_variance() > 1e-2);
            // the run of collinear vertices (a, 1), (a+1, 1), …, (a+k0, 1)
            for j in 0..=k0 {
                let want = [a_exact + j as f64, 1.0];
                assert!(
                    p.vertices().iter().any(|&v| norm2(sub2(v, want)) < 1e-9),
                    "missing run vertex {want:?} for n = {n}"
                );
            }
            // corner vertices on the two symmetry axes
            for want in [[1.0, 0.0], [-1.0, 0.0], [0.0, c_exact], [0.0, -c_exact]] {
                assert!(
                    p.vertices().iter().any(|&v| norm2(sub2(v, want)) < 1e-9),
                    "missing corner {want:?} for n = {n}"
                );
            }
        }
        // the reciprocal relation between run offset and chord value
        let c = 1.0 + 3f64.sqrt();
        assert!((c - (12f64.sqrt() + 2.0) / 2.0).abs() < 1e-15);
        assert!(((12f64.sqrt() - 2.0) / 4.0 - 1.0 / c).abs() < 1e-15);
    }

    #[test]
    fn polygon_json_roundtrip_preserves_vertices() {
        let p = pentagon(1.1, 0.9);
        let text = serde_json::to_string(&p).unwrap();
        let q: CentroaffinePolygon = serde_json::from_str(&text).unwrap();
        assert_eq!(p.n(), q.n());
        for (u, v) in p.vertices().iter().zip(q.vertices()) {
            assert_eq!(u, v, "roundtrip must be exact");
        }
        let bad = r#"{"n": 4, "vertices": [[1.0, 0.0]]}"#;
        assert!(serde_json::from_str::<CentroaffinePolygon>(bad).is_err());
    }
}
