//! Closed centroaffine curves with elliptic curvature p(t) = 2℘(t+ω′) + ℘(a).
//!
//! Any curve whose curvature satisfies the traveling-wave equation
//! (p′)² = cubic(p) has coordinates solving X″ = (2℘(t+ω′) + ℘(a))X, and a
//! quasi-periodic basis solution is available in closed form through the
//! Weierstrass σ and ζ functions. Closing the curve quantizes the spectral
//! parameter a; this module solves the quantization, builds the curves,
//! locates their self-chord (self-Bäcklund) angles from an exactly reduced
//! scalar equation, and deforms the whole picture down to the circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::curves::{self, CentroaffineCurve};
use crate::elliptic::Lattice;
use crate::numerics::quad;
use crate::{Error, Result};

/// Quadrature order for the ζ line integrals; panels are kept shorter than
/// the distance to the nearest pole row, so this is spectral-quality.
const GL_ORDER: usize = 32;

/// Grid used when a curve has to be sampled internally (angle certification).
const DEFAULT_GRID: usize = 1024;

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Solved spectral data for the curve family: lattice with ω = π/2k, the
/// rotation numerator n (odd, coprime to k), the band index m ≥ 0, and the
/// quantized parameter a with a·ζ(ω) − ω·ζ(a) = iπ(n/2k + m).
#[derive(Debug, Clone)]
pub struct LameParams {
    pub k: u32,
    pub n: u32,
    pub m: u32,
    pub omega_prime_im: f64,
    /// Solved spectral parameter: ω + ib for m = 0, ib for m > 0.
    pub a: Complex64,
    pub lattice: Lattice,
}

impl LameParams {
    pub fn omega(&self) -> f64 {
        self.lattice.omega
    }

    /// Floquet multiplier e^{iπn/k} of the solution over one lattice period.
    pub fn multiplier(&self) -> Complex64 {
        Complex64::new(0.0, PI * self.n as f64 / self.k as f64).exp()
    }

    /// Value of the curvature constant ℘(a) (real on both solution segments).
    pub fn wp_a(&self) -> Result<f64> {
        Ok(self.lattice.wp(self.a)?.re)
    }

    /// Curvature potential p(t) = 2℘(t+ω′) + ℘(a) of the (unit-Wronskian)
    /// curve this parameter set generates.
    pub fn potential(&self, t: f64) -> Result<f64> {
        let z = Complex64::new(t, self.omega_prime_im);
        Ok(2.0 * self.lattice.wp(z)?.re + self.wp_a()?)
    }
}

/// a·ζ(ω) − ω·ζ(a); pure imaginary on the segments (0, ω′) and (ω, ω+ω′).
fn quantization_value(lat: &Lattice, a: Complex64) -> Result<Complex64> {
    Ok(a * lat.eta - lat.omega * lat.zeta(a)?)
}

/// Solve the closing condition a·ζ(ω) − ω·ζ(a) = iπ(n/2k + m) for a.
///
/// The left side is pure imaginary and strictly monotone along each of the
/// candidate segments: on (ω, ω+ω′) it climbs from 0 to iπ/2 (hosting the
/// m = 0 solution), on (0, ω′) it falls from +i∞ to iπ/2 (hosting one
/// solution for every m ≥ 1). Bisection therefore pins a uniquely.
pub fn solve_a(k: u32, n: u32, m: u32, omega_prime_im: f64) -> Result<LameParams> {
    if k < 2 {
        return Err(Error::domain(format!("need k ≥ 2, got {k}")));
    }
    if n == 0 || n >= k || n % 2 == 0 || gcd(n, k) != 1 {
        return Err(Error::domain(format!(
            "rotation numerator must be odd, coprime to k = {k} and inside (0, k), got {n}"
        )));
    }
    if !(omega_prime_im > 0.0) || !omega_prime_im.is_finite() {
        return Err(Error::domain(
            "imaginary half-period must be positive and finite",
        ));
    }
    let omega = PI / (2.0 * k as f64);
    let lattice = Lattice::new(omega, omega_prime_im)?;
    let target = PI * (n as f64 / (2.0 * k as f64) + m as f64);

    let base = if m == 0 {
        Complex64::new(omega, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let gap = |y: f64| -> Result<f64> {
        let v = quantization_value(&lattice, base + Complex64::new(0.0, y))?;
        if v.re.abs() > 1e-8 * (1.0 + v.im.abs()) {
            return Err(Error::residual(
                "imaginary character of the closing condition",
                v.re.abs(),
                1e-8,
            ));
        }
        Ok(v.im - target)
    };

    // Endpoint brackets: stay off the segment ends (ζ poles / exact half
    // period values) by a hair.
    let (mut lo, mut hi) = if m == 0 {
        (1e-9 * omega_prime_im, (1.0 - 1e-9) * omega_prime_im)
    } else {
        // near y = 0 the value behaves like ω/y → +∞
        let mut y0 = omega_prime_im.min(omega / (target + PI));
        let mut tries = 0;
        while gap(y0)? <= 0.0 {
            y0 *= 0.5;
            tries += 1;
            if tries > 80 {
                return Err(Error::NoConvergence {
                    what: "closing-condition bracket".into(),
                    detail: "no sign change approaching the pole end".into(),
                });
            }
        }
        (y0, (1.0 - 1e-9) * omega_prime_im)
    };
    let (glo, ghi) = (gap(lo)?, gap(hi)?);
    // m = 0: increasing from ~0 to π/2; m > 0: decreasing from +∞ to π/2.
    let increasing = m == 0;
    let (ok_lo, ok_hi) = if increasing {
        (glo < 0.0, ghi > 0.0)
    } else {
        (glo > 0.0, ghi < 0.0)
    };
    if !ok_lo || !ok_hi {
        return Err(Error::domain(format!(
            "closing condition has no solution on the segment for (k, n, m) = ({k}, {n}, {m})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = gap(mid)?;
        if (g < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = base + Complex64::new(0.0, 0.5 * (lo + hi));
    let residual = (quantization_value(&lattice, a)? - Complex64::new(0.0, target)).norm();
    if residual > 1e-10 {
        return Err(Error::residual("closing condition", residual, 1e-10));
    }
    Ok(LameParams {
        k,
        n,
        m,
        omega_prime_im,
        a,
        lattice,
    })
}

/// A realized curve of the family, normalized to unit Wronskian.
#[derive(Debug, Clone)]
pub struct LameCurve {
    pub params: LameParams,
    pub curve: CentroaffineCurve,
    /// Wronskian [X, X′] of the raw solution; the curve is X/√W.
    pub wronskian_scale: f64,
    pub winding: i64,
}

/// Raw solution value
/// X(t) = e^{−tζ(a)} σ(a+t+ω′) σ(ω′) / (σ(a+ω′) σ(t+ω′));
/// the prefactor σ(ω′)/σ(a+ω′) is passed in precomputed.
fn x_plus(lat: &Lattice, a: Complex64, zeta_a: Complex64, pre: Complex64, t: f64) -> Result<Complex64> {
    let omp = lat.omega_prime();
    let tc = Complex64::new(t, 0.0);
    let num = lat.sigma(a + tc + omp)?;
    let den = lat.sigma(tc + omp)?;
    Ok((-tc * zeta_a).exp() * pre * num / den)
}

/// Logarithmic derivative X′/X = ζ(a+t+ω′) − ζ(a) − ζ(t+ω′).
fn x_log_deriv(lat: &Lattice, a: Complex64, zeta_a: Complex64, t: f64) -> Result<Complex64> {
    let omp = lat.omega_prime();
    let tc = Complex64::new(t, 0.0);
    Ok(lat.zeta(a + tc + omp)? - zeta_a - lat.zeta(tc + omp)?)
}

/// Evaluate the quasi-periodic solution on a 2π grid, normalize it to unit
/// Wronskian, validate every structural identity it must satisfy, and wrap
/// it as a closed centroaffine curve.
pub fn build_curve(params: &LameParams, grid_size: usize) -> Result<LameCurve> {
    if grid_size < 256 || !grid_size.is_power_of_two() {
        return Err(Error::domain(format!(
            "curve grid must be a power of two with at least 256 samples, got {grid_size}"
        )));
    }
    let lat = &params.lattice;
    let a = params.a;
    let omp = lat.omega_prime();
    let zeta_a = lat.zeta(a)?;
    let pre = lat.sigma(omp)? / lat.sigma(a + omp)?;

    // X(0) = 1 holds identically in exact arithmetic; verify the evaluator.
    let x0 = x_plus(lat, a, zeta_a, pre, 0.0)?;
    if (x0 - 1.0).norm() > 1e-10 {
        return Err(Error::residual(
            "normalization X(0) = 1",
            (x0 - 1.0).norm(),
            1e-10,
        ));
    }
    // X′(0) = ib with b > 0: b is the constant Wronskian [X, X′].
    let d0 = x_log_deriv(lat, a, zeta_a, 0.0)?;
    if d0.re.abs() > 1e-9 * (1.0 + d0.im.abs()) {
        return Err(Error::residual(
            "initial velocity iℝ⁺ alignment",
            d0.re.abs(),
            1e-9,
        ));
    }
    let w = d0.im;
    if w <= 0.0 {
        return Err(Error::Degenerate(format!(
            "solution Wronskian must be positive, got {w:.3e}"
        )));
    }

    let n = grid_size;
    let dt = 2.0 * PI / n as f64;
    let mut x = Vec::with_capacity(n);
    for j in 0..n {
        x.push(x_plus(lat, a, zeta_a, pre, j as f64 * dt)?);
    }

    // Constant-Wronskian check: [X, X′] = Im(conj(X)·X′) must equal w
    // everywhere (it is the invariant of the second-order equation).
    let mut worst_w = 0.0f64;
    for (j, xj) in x.iter().enumerate() {
        let d = xj * x_log_deriv(lat, a, zeta_a, j as f64 * dt)?;
        worst_w = worst_w.max(((xj.conj() * d).im - w).abs());
    }
    if worst_w > 1e-9 * w {
        return Err(Error::residual(
            "constant Wronskian of the elliptic solution",
            worst_w,
            1e-9 * w,
        ));
    }

    // Quasi-periodicity X(t+2ω) = e^{iπn/k}·X(t) (evaluated directly, not
    // assumed) and the closure X(t+π) = −X(t) it implies after k periods.
    let mu = params.multiplier();
    let scale_x = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let two_omega = 2.0 * params.omega();
    let mut worst_q = 0.0f64;
    for (j, xj) in x.iter().enumerate() {
        let shifted = x_plus(lat, a, zeta_a, pre, j as f64 * dt + two_omega)?;
        worst_q = worst_q.max((shifted - mu * xj).norm());
    }
    if worst_q > 1e-8 * scale_x {
        return Err(Error::residual(
            "Floquet quasi-periodicity of the solution",
            worst_q,
            1e-8 * scale_x,
        ));
    }
    let mut worst_anti = 0.0f64;
    for j in 0..n / 2 {
        worst_anti = worst_anti.max((x[j + n / 2] + x[j]).norm());
    }
    if worst_anti > 1e-8 * scale_x {
        return Err(Error::residual(
            "π-anti-periodicity of the solution",
            worst_anti,
            1e-8 * scale_x,
        ));
    }

    // Winding number by continuous argument tracking over the full loop.
    let mut total_turn = 0.0;
    for j in 0..n {
        let next = x[(j + 1) % n];
        total_turn += (next / x[j]).arg();
    }
    let winding = (total_turn / (2.0 * PI)).round() as i64;
    if (total_turn / (2.0 * PI) - winding as f64).abs() > 1e-6 {
        return Err(Error::Degenerate(format!(
            "argument tracking does not close up: {total_turn:.12} is not a multiple of 2π"
        )));
    }
    // The quantized solution is the positively-winding Floquet mode of
    // band 2m: in the tall-lattice limit it degenerates to e^{iκt} with
    // κ·2ω = πn/k + 2πm, so the turn count is m + n/2k per lattice period,
    // and winding is a homotopy invariant along the lattice deformation.
    let predicted = 2 * params.k as i64 * params.m as i64 + params.n as i64;
    if winding != predicted {
        return Err(Error::Degenerate(format!(
            "winding number {winding} does not match the band formula {predicted}"
        )));
    }

    let inv_sqrt_w = 1.0 / w.sqrt();
    let samples: Vec<[f64; 2]> = x
        .iter()
        .map(|z| [z.re * inv_sqrt_w, z.im * inv_sqrt_w])
        .collect();
    let curve = CentroaffineCurve::closed_from_samples(samples)?;
    Ok(LameCurve {
        params: params.clone(),
        curve,
        wronskian_scale: w,
        winding,
    })
}

/// Level function of the reduced chord-angle equation.
///
/// A chord angle α works iff σ(a+α) = e^{2αζ(a)}·σ(a−α). Taking logarithms
/// and imaginary parts turns this into G(α) = πl for integer branch levels
/// l, where G is built from one line integral of ζ along Im z = Im a:
///
///   m = 0 (a = ω + ib):
///     G(α) = π/2 + α·Im ζ(a) − b·ζ(ω) − Im ∫₀^{α−ω} ζ(ib+t) dt,
///   m > 0 (a = ib):
///     G(α) = α·Im ζ(a) − Im ∫₀^{α} ζ(ib+t) dt.
///
/// In both cases G(0) = 0, G is strictly monotone (its derivative
/// Im[ζ(a) − ζ(a ∓ ω + α)] cannot vanish because ℘′ is pure imaginary on
/// the relevant segments), and the slope of its linear part is fixed by the
/// closing condition. Each interior level πl therefore carries exactly one
/// angle.
struct LevelFunction<'a> {
    lat: &'a Lattice,
    /// height of the integration line = Im a
    b: f64,
    /// Im ζ(a)
    slope: f64,
    /// constant part: π/2 − b·ζ(ω) for m = 0, zero for m > 0
    offset: f64,
    /// lower integration limit: ω for m = 0, zero for m > 0
    shift: f64,
    /// max quadrature panel length (shorter than the pole distance)
    panel: f64,
}

impl<'a> LevelFunction<'a> {
    fn new(params: &'a LameParams) -> Result<Self> {
        let lat = &params.lattice;
        let b = params.a.im;
        let slope = lat.zeta(params.a)?.im;
        let (offset, shift) = if params.m == 0 {
            (PI / 2.0 - b * lat.eta.re, params.omega())
        } else {
            (0.0, 0.0)
        };
        let panel = lat.omega.min(b).min(2.0 * params.omega_prime_im - b) * 0.9;
        Ok(LevelFunction {
            lat,
            b,
            slope,
            offset,
            shift,
            panel,
        })
    }

    fn eval(&self, alpha: f64) -> Result<f64> {
        let b = self.b;
        let lat = self.lat;
        let mut bad = false;
        let mut integrand = |t: f64| match lat.zeta(Complex64::new(t, b)) {
            Ok(z) => z.im,
            Err(_) => {
                bad = true;
                0.0
            }
        };
        let g = quad::integrate(&mut integrand, 0.0, alpha - self.shift, GL_ORDER, self.panel);
        if bad {
            return Err(Error::Degenerate(
                "ζ integration line passed a lattice point".into(),
            ));
        }
        Ok(self.offset + alpha * self.slope - g)
    }

    /// dG/dα, available in closed form.
    fn derivative(&self, alpha: f64) -> Result<f64> {
        Ok(self.slope - self.lat.zeta(Complex64::new(alpha - self.shift, self.b))?.im)
    }
}

/// All self-chord angles of the curve in (0, π): the roots of the reduced
/// level equation, each re-certified directly on the sampled curve. Returns
/// (α, c) pairs sorted by angle, c being the constant chord determinant
/// [γ(t), γ(t+α)].
pub fn self_backlund_angles(params: &LameParams) -> Result<Vec<(f64, f64)>> {
    let level = LevelFunction::new(params)?;
    // G(0) = 0 identically; the value at π is an integer multiple of π
    // fixed by the closing condition (k−n for m = 0, k−n−2mk for m > 0).
    let g_end = level.eval(PI)?;
    let l_end = (g_end / PI).round();
    if (g_end - PI * l_end).abs() > 1e-8 {
        return Err(Error::residual(
            "integer level of the chord equation at π",
            (g_end - PI * l_end).abs(),
            1e-8,
        ));
    }
    let n_levels = (l_end.abs() as i64 - 1).max(0);
    let sign = if l_end > 0.0 { 1.0 } else { -1.0 };

    let mut out = Vec::new();
    if n_levels == 0 {
        return Ok(out);
    }
    let curve = build_curve(params, DEFAULT_GRID)?;
    for idx in 1..=n_levels {
        let target = sign * PI * idx as f64;
        let mut lo = 1e-12;
        let mut hi = PI - 1e-12;
        let f_lo = level.eval(lo)? - target;
        let f_hi = level.eval(hi)? - target;
        if f_lo * f_hi >= 0.0 {
            return Err(Error::NoConvergence {
                what: "chord-angle level root".into(),
                detail: format!("level {target:.6} not bracketed by (0, π)"),
            });
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = level.eval(mid)? - target;
            if (f_mid < 0.0) == (f_lo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let alpha = 0.5 * (lo + hi);
        // transversality: the root must be a genuine crossing
        if level.derivative(alpha)?.abs() < 1e-8 {
            return Err(Error::Degenerate(format!(
                "chord-angle root at α = {alpha:.12} is not transversal"
            )));
        }
        // double-entry bookkeeping: the sampled curve itself must agree
        let cert = curve.curve.verify_self_backlund(alpha)?;
        if cert.residual > 1e-7 {
            return Err(Error::residual(
                format!("chord determinant constancy at α = {alpha:.12}"),
                cert.residual,
                1e-7,
            ));
        }
        out.push((alpha, cert.c));
    }
    out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    Ok(out)
}

/// One member of a circle deformation family.
#[derive(Debug)]
pub struct DeformationStep {
    pub s: f64,
    pub curve: LameCurve,
    /// Certified (α, c) pairs at this deformation parameter.
    pub angles: Vec<(f64, f64)>,
}

/// Deform the simple curve family (n = 1, m = 0) toward the circle by
/// stretching the lattice: ω′ ↦ ω′/s with base ω′ = iω, s running down a
/// grid in (0, 1]. Checks that the k−2 chord angles move continuously and
/// that their s → 0 limits are roots of tan(kα) = k·tan(α).
pub fn deformation_family(k: u32, s_grid: &[f64]) -> Result<Vec<DeformationStep>> {
    if k < 3 {
        return Err(Error::domain("deformation families need k ≥ 3"));
    }
    if s_grid.is_empty() {
        return Err(Error::domain("empty deformation grid"));
    }
    for pair in s_grid.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::domain("deformation grid must strictly decrease"));
        }
    }
    if s_grid[0] > 1.0 || *s_grid.last().unwrap() <= 0.0 {
        return Err(Error::domain("deformation grid must lie in (0, 1]"));
    }
    let omega = PI / (2.0 * k as f64);
    let expected = (k - 2) as usize;

    let mut steps = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let params = solve_a(k, 1, 0, omega / s)?;
        let curve = build_curve(&params, DEFAULT_GRID)?;
        let angles = self_backlund_angles(&params)?;
        if angles.len() != expected {
            return Err(Error::NoConvergence {
                what: "deformation angle count".into(),
                detail: format!(
                    "expected {expected} chord angles at s = {s}, found {}",
                    angles.len()
                ),
            });
        }
        steps.push(DeformationStep { s, curve, angles });
    }

    // Continuity along the grid: branch b of consecutive members must not
    // jump (the roots are transversal, so they move smoothly in s).
    for pair in steps.windows(2) {
        for b in 0..expected {
            let jump = (pair[0].angles[b].0 - pair[1].angles[b].0).abs();
            if jump > 0.5 {
                return Err(Error::NoConvergence {
                    what: "deformation continuity".into(),
                    detail: format!(
                        "chord angle branch {b} jumps by {jump:.4} between s = {} and s = {}",
                        pair[0].s, pair[1].s
                    ),
                });
            }
        }
    }

    // s → 0 limit: polynomial extrapolation of each branch must land on a
    // root of the infinitesimal equation tan(kα) = k·tan(α).
    let limits = curves::infinitesimal_angles(k)?;
    let tail = steps.len().min(3);
    for b in 0..expected {
        let pts: Vec<(f64, f64)> = steps[steps.len() - tail..]
            .iter()
            .map(|st| (st.s, st.angles[b].0))
            .collect();
        let alpha0 = extrapolate_to_zero(&pts);
        let dist = limits
            .iter()
            .map(|r| (r - alpha0).abs())
            .fold(f64::INFINITY, f64::min);
        if dist > 1e-4 {
            return Err(Error::NoConvergence {
                what: "deformation limit".into(),
                detail: format!(
                    "branch {b} extrapolates to {alpha0:.8}, off the infinitesimal roots by {dist:.2e}"
                ),
            });
        }
    }
    Ok(steps)
}

/// Lagrange extrapolation of (x, y) data to x = 0.
fn extrapolate_to_zero(pts: &[(f64, f64)]) -> f64 {
    let mut acc = 0.0;
    for (i, &(xi, yi)) in pts.iter().enumerate() {
        let mut w = 1.0;
        for (j, &(xj, _)) in pts.iter().enumerate() {
            if i != j {
                w *= xj / (xj - xi);
            }
        }
        acc += w * yi;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hill;

    #[test]
    fn solve_a_validates_parameters() {
        assert!(solve_a(1, 1, 0, 1.0).is_err());
        assert!(solve_a(4, 2, 0, 1.0).is_err(), "even n");
        assert!(solve_a(9, 3, 0, 1.0).is_err(), "gcd(3,9) ≠ 1");
        assert!(solve_a(3, 5, 0, 1.0).is_err(), "n out of range");
        assert!(solve_a(3, 1, 0, -1.0).is_err());
    }

    #[test]
    fn solve_a_matches_degenerate_limit() {
        // For a tall lattice the closing condition for m = 0 collapses to
        // tanh(π·y/(2ω)) = n/k with a = ω + iy: the height of a above ω
        // approaches the fixed length (2ω/π)·artanh(1/k).
        let p = solve_a(3, 1, 0, 8.0).unwrap();
        assert!((p.a.re - p.omega()).abs() < 1e-12);
        let want = (2.0 * p.omega() / PI) * (1.0f64 / 3.0).atanh();
        assert!(
            (p.a.im - want).abs() < 1e-10,
            "degenerate placement: {} vs {want}",
            p.a.im
        );
    }

    #[test]
    fn solve_a_band_placement_and_monotonicity() {
        let mut lambdas = Vec::new();
        for m in 0..3 {
            let p = solve_a(3, 1, m, 1.0).unwrap();
            if m == 0 {
                assert!((p.a.re - p.omega()).abs() < 1e-12);
            } else {
                assert!(p.a.re.abs() < 1e-12);
            }
            assert!(p.a.im > 0.0 && p.a.im < 1.0);
            lambdas.push(-p.wp_a().unwrap());
        }
        assert!(
            lambdas[0] < lambdas[1] && lambdas[1] < lambdas[2],
            "spectral values must increase with the band index: {lambdas:?}"
        );
    }

    #[test]
    fn nearly_degenerate_curve_is_a_circle() {
        let p = solve_a(3, 1, 0, 12.0).unwrap();
        let built = build_curve(&p, 256).unwrap();
        assert_eq!(built.winding, 1);
        for s in built.curve.samples() {
            let r = s[0].hypot(s[1]);
            assert!((r - 1.0).abs() < 1e-6, "radius {r} should be ≈ 1");
        }
    }

    #[test]
    fn build_curve_structural_invariants() {
        let p = solve_a(3, 1, 0, 1.0).unwrap();
        let built = build_curve(&p, 1024).unwrap();
        assert_eq!(built.winding, 1);
        assert!(built.wronskian_scale > 0.0);
        assert!(
            built.curve.wronskian_residual() < 1e-10,
            "Wronskian deviation {}",
            built.curve.wronskian_residual()
        );
        // curvature of the normalized curve must be the elliptic potential
        let pot = hill::curvature_of(&built.curve).unwrap();
        let mut worst = 0.0f64;
        for (j, &t) in pot.grid().iter().enumerate() {
            worst = worst.max((pot.samples()[j] - p.potential(t).unwrap()).abs());
        }
        assert!(worst < 1e-8, "curvature mismatch {worst}");
    }

    #[test]
    fn winding_follows_band_formula() {
        for (k, n, m, want) in [(5u32, 3u32, 0u32, 3i64), (3, 1, 1, 7), (3, 1, 2, 13)] {
            let p = solve_a(k, n, m, 1.0).unwrap();
            let built = build_curve(&p, 1024).unwrap();
            assert_eq!(built.winding, want, "(k,n,m) = ({k},{n},{m})");
        }
    }

    #[test]
    fn chord_angles_k3_is_quarter_turn() {
        let p = solve_a(3, 1, 0, 1.0).unwrap();
        let angles = self_backlund_angles(&p).unwrap();
        assert_eq!(angles.len(), 1);
        let (alpha, c) = angles[0];
        assert!(
            (alpha - PI / 2.0).abs() < 1e-9,
            "k = 3 chord angle should be exactly π/2, got {alpha}"
        );
        assert!(c > 0.0 && c < 2.0, "chord constant {c}");
    }

    #[test]
    fn chord_angles_k5() {
        let p = solve_a(5, 1, 0, 1.0).unwrap();
        let angles = self_backlund_angles(&p).unwrap();
        assert_eq!(angles.len(), 3);
        assert!(angles.windows(2).all(|w| w[0].0 < w[1].0));
        let quarter = angles
            .iter()
            .map(|(a, _)| (a - PI / 2.0).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(quarter < 1e-9, "π/2 must be among the k = 5 angles");
        // n = 3 leaves a single level between the endpoints
        let p = solve_a(5, 3, 0, 1.0).unwrap();
        let angles = self_backlund_angles(&p).unwrap();
        assert_eq!(angles.len(), 1);
    }

    #[test]
    fn chord_angles_k4_avoid_quarter_turn() {
        let p = solve_a(4, 1, 0, 1.0).unwrap();
        let angles = self_backlund_angles(&p).unwrap();
        assert_eq!(angles.len(), 2);
        for (a, _) in &angles {
            assert!(
                (a - PI / 2.0).abs() > 1e-2,
                "k = 4 angles stay away from π/2, got {a}"
            );
        }
    }

    #[test]
    fn deformation_family_k3_holds_quarter_turn() {
        let steps = deformation_family(3, &[1.0, 0.5, 0.25]).unwrap();
        assert_eq!(steps.len(), 3);
        for st in &steps {
            assert_eq!(st.angles.len(), 1);
            assert!(
                (st.angles[0].0 - PI / 2.0).abs() < 1e-9,
                "the k = 3 branch is pinned at π/2 for every s"
            );
        }
    }

    #[test]
    fn deformation_family_k4_reaches_infinitesimal_roots() {
        let steps = deformation_family(4, &[1.0, 0.5, 0.25, 0.1]).unwrap();
        let limits = curves::infinitesimal_angles(4).unwrap();
        assert_eq!(limits.len(), 2);
        let last = &steps.last().unwrap().angles;
        for (branch, (alpha, _)) in last.iter().enumerate() {
            let dist = limits
                .iter()
                .map(|r| (r - alpha).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(
                dist < 1e-4,
                "branch {branch} at smallest s sits {dist:.2e} from an infinitesimal root"
            );
        }
    }
}
