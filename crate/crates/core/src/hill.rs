//! Floquet analysis of the Hill equation y″ + (λ − p(t))y = 0 with a
//! π-periodic potential: the discriminant Δ(λ), the lowest periodic
//! eigenvalue λ₀, the existence threshold c_max = 1/√(−λ₀) for c-related
//! companion curves, periodic Riccati solutions and the companion curves
//! they generate, and the KdV/mKdV pair that transports all of it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curves::CentroaffineCurve;
use crate::numerics::fft;
use crate::numerics::mat2::Mat2;
use crate::numerics::rk::{self, OdeOptions};
use crate::{det2, Error, Result};

const MIN_GRID: usize = 8;

/// A π-periodic function sampled on the uniform grid t_j = jπ/N, N a power
/// of two. Used for curvature potentials p and for Riccati solutions f.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PotentialJson", into = "PotentialJson")]
pub struct PeriodicPotential {
    samples: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PotentialJson {
    grid_size: usize,
    samples: Vec<f64>,
}

impl TryFrom<PotentialJson> for PeriodicPotential {
    type Error = Error;

    fn try_from(j: PotentialJson) -> Result<Self> {
        if j.grid_size != j.samples.len() {
            return Err(Error::Parse(format!(
                "grid_size {} does not match {} samples",
                j.grid_size,
                j.samples.len()
            )));
        }
        PeriodicPotential::new(j.samples)
    }
}

impl From<PeriodicPotential> for PotentialJson {
    fn from(p: PeriodicPotential) -> Self {
        PotentialJson {
            grid_size: p.samples.len(),
            samples: p.samples,
        }
    }
}

impl PeriodicPotential {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        if n < MIN_GRID || !n.is_power_of_two() {
            return Err(Error::domain(format!(
                "potential grid must be a power of two with at least {MIN_GRID} samples, got {n}"
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("potential samples must be finite"));
        }
        Ok(PeriodicPotential { samples })
    }

    pub fn constant(value: f64, grid_size: usize) -> Result<Self> {
        Self::new(vec![value; grid_size])
    }

    pub fn from_fn(f: impl Fn(f64) -> f64, grid_size: usize) -> Result<Self> {
        let dt = PI / grid_size as f64;
        Self::new((0..grid_size).map(|j| f(j as f64 * dt)).collect())
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Grid abscissae t_j = jπ/N.
    pub fn grid(&self) -> Vec<f64> {
        let dt = PI / self.samples.len() as f64;
        (0..self.samples.len()).map(|j| j as f64 * dt).collect()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// ∫₀^π p dt (exact for the trigonometric interpolant).
    pub fn integral(&self) -> f64 {
        self.mean() * PI
    }

    /// Samples of the spectral derivative of the given order.
    pub fn derivative(&self, order: u32) -> Vec<f64> {
        fft::derivative(&self.samples, PI, order)
    }

    /// Value of the trigonometric interpolant at an arbitrary parameter.
    pub fn eval(&self, t: f64) -> f64 {
        self.interpolant().eval(t)
    }

    fn interpolant(&self) -> TrigInterp {
        TrigInterp::from_samples(&self.samples)
    }
}

/// Compact trigonometric interpolant. Only harmonics above round-off are
/// kept, so evaluation inside the Hill integrator costs O(active modes) —
/// which for the smooth potentials this module deals with is a handful.
struct TrigInterp {
    mean: f64,
    /// (angular frequency, cosine amplitude, sine amplitude)
    terms: Vec<(f64, f64, f64)>,
}

impl TrigInterp {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let complex: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let spec = fft::coeffs(&complex);
        let scale = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let cutoff = 1e-14 * scale;
        let mut terms = Vec::new();
        for (m, c) in spec.iter().enumerate().take(n / 2).skip(1) {
            if c.norm() > cutoff {
                // a π-periodic function has angular frequencies 2m
                terms.push((2.0 * m as f64, 2.0 * c.re, -2.0 * c.im));
            }
        }
        let nyquist = spec[n / 2];
        if nyquist.norm() > cutoff {
            terms.push((n as f64, nyquist.re, 0.0));
        }
        TrigInterp {
            mean: spec[0].re,
            terms,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let mut acc = self.mean;
        for &(w, a, b) in &self.terms {
            let (s, c) = (w * t).sin_cos();
            acc += a * c + b * s;
        }
        acc
    }
}

/// Monodromy data of y″ + (λ − p)y = 0 over one period [0, π].
#[derive(Debug, Clone, Copy)]
pub struct FloquetData {
    pub lambda: f64,
    /// Δ(λ), the trace of the period map.
    pub trace: f64,
    /// Period map in the (y, y′) frame; column k is the image of the k-th
    /// coordinate direction.
    pub monodromy: [[f64; 2]; 2],
}

impl FloquetData {
    pub fn det(&self) -> f64 {
        Mat2(self.monodromy).det()
    }
}

/// Curvature potential p = [γ″, γ′] of a closed curve, restricted to one
/// π-period (the anti-periodicity of γ makes p π-periodic).
pub fn curvature_of(curve: &CentroaffineCurve) -> Result<PeriodicPotential> {
    if !curve.is_closed() {
        return Err(Error::domain(
            "curvature potential needs a closed curve",
        ));
    }
    let w = curve.wronskian_residual();
    if w > 1e-6 {
        return Err(Error::residual(
            "unit Wronskian of the curve behind a curvature potential",
            w,
            1e-6,
        ));
    }
    let p = curve.curvature()?;
    PeriodicPotential::new(p[..curve.n() / 2].to_vec())
}

/// Fundamental-solution monodromy of the Hill equation at spectral value λ.
pub fn floquet(p: &PeriodicPotential, lambda: f64) -> Result<FloquetData> {
    floquet_interp(&p.interpolant(), lambda)
}

fn floquet_interp(interp: &TrigInterp, lambda: f64) -> Result<FloquetData> {
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let q = interp.eval(t) - lambda;
        dy[0] = y[1];
        dy[1] = q * y[0];
        dy[2] = y[3];
        dy[3] = q * y[2];
    };
    let y = rk::integrate(rhs, 0.0, PI, &[1.0, 0.0, 0.0, 1.0], OdeOptions::default())?;
    let data = FloquetData {
        lambda,
        trace: y[0] + y[3],
        monodromy: [[y[0], y[2]], [y[1], y[3]]],
    };
    // The Wronskian determinant is an exact invariant, but for very negative
    // λ it is recovered by cancellation of exponentially large entries, so
    // the check has to be scaled by the square of the matrix size.
    let norm = Mat2(data.monodromy).norm();
    let tol = 1e-10 * (1.0 + norm * norm);
    let det_err = (data.det() - 1.0).abs();
    if det_err > tol {
        return Err(Error::residual(
            "Floquet monodromy determinant",
            det_err,
            tol,
        ));
    }
    Ok(data)
}

/// Lowest periodic eigenvalue: the smallest root of Δ(λ) = 2, located to
/// 1e-10 by bisection.
///
/// Two a-priori bounds pin the search window: for λ below min p the
/// equation is disconjugate and Δ > 2 strictly, and integrating the
/// logarithmic derivative of the positive ground-state solution over a
/// period shows λ₀ ≤ mean p. Δ → +∞ as λ → −∞, so if the lower end ever
/// fails to satisfy Δ > 2 it is pushed down by doubling.
pub fn lambda0(p: &PeriodicPotential) -> Result<f64> {
    let interp = p.interpolant();
    let mut gap = |lam: f64| -> Result<f64> { Ok(floquet_interp(&interp, lam)?.trace - 2.0) };
    let mean = p.mean();
    let min = p.samples.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut lo = min - 0.5;
    let mut step = 1.0;
    while gap(lo)? <= 0.0 {
        lo -= step;
        step *= 2.0;
        if step > 1e9 {
            return Err(Error::NoConvergence {
                what: "Hill spectrum bracketing".into(),
                detail: "discriminant never exceeded 2 while expanding downward".into(),
            });
        }
    }
    let hi = mean + 0.5;

    // March upward and take the first interval where Δ drops through 2:
    // Δ is strictly decreasing up to the first band edge, so the first
    // sign change is the lowest eigenvalue (later ones belong to higher
    // bands).
    const SCAN: usize = 400;
    let mut a = lo;
    let mut ga = gap(a)?;
    let mut bracket = None;
    for k in 1..=SCAN {
        let b = lo + (hi - lo) * k as f64 / SCAN as f64;
        let gb = gap(b)?;
        if ga > 0.0 && gb <= 0.0 {
            bracket = Some((a, b));
            break;
        }
        a = b;
        ga = gb;
    }
    let (mut a, mut b) = bracket.ok_or_else(|| Error::NoConvergence {
        what: "Hill spectrum bracketing".into(),
        detail: format!("no crossing of Δ = 2 found in [{lo:.6}, {hi:.6}]"),
    })?;
    while b - a > 1e-10 {
        let mid = 0.5 * (a + b);
        if gap(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Largest |c| for which the curve with this curvature admits a c-related
/// closed companion: c_max = 1/√(−λ₀).
pub fn c_max(p: &PeriodicPotential) -> Result<f64> {
    let l0 = lambda0(p)?;
    if l0 >= 0.0 {
        return Err(Error::domain(format!(
            "lowest Hill eigenvalue is {l0:.6} ≥ 0: not the curvature of a closed curve"
        )));
    }
    Ok(1.0 / (-l0).sqrt())
}

/// π-periodic solution of the Riccati equation c·f′ = f² − c²p − 1 on the
/// potential grid, or `None` when |c| exceeds c_max = 1/√(−λ₀).
///
/// The solution is f = −c·y′/y for a positive quasi-periodic Hill solution
/// at λ = −1/c²; y is fixed (up to scale) as the monodromy eigenvector with
/// the smaller positive multiplier, which on a circle selects the constant
/// f = +√(1−c²). Since that branch repels under forward integration, f is
/// recovered by integrating the Riccati equation backward from t = π, the
/// direction in which the periodic solution attracts.
pub fn riccati_periodic(p: &PeriodicPotential, c: f64) -> Result<Option<Vec<f64>>> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::domain("parameter c must be finite and nonzero"));
    }
    let l0 = lambda0(p)?;
    let lam = -1.0 / (c * c);
    if lam > l0 + 1e-9 * (1.0 + l0.abs()) {
        return Ok(None);
    }
    let interp = p.interpolant();
    let fd = floquet_interp(&interp, lam)?;
    let m = Mat2(fd.monodromy);
    let delta = fd.trace;
    // Below λ₀ the multipliers are positive with μ_small·μ_large = 1. The
    // subtraction-free form keeps μ_small accurate when Δ is huge.
    let disc = (delta * delta - 4.0).max(0.0).sqrt();
    let mu = 2.0 / (delta + disc);
    let v = m.eigenvector(mu);
    if v[0].abs() < 1e-13 {
        return Err(Error::Degenerate(
            "quasi-periodic Hill solution vanishes at t = 0".into(),
        ));
    }
    let f0 = -c * v[1] / v[0];

    // Backward sweep: z(s) = f(π − s) obeys z′ = −(z² − c²p(π−s) − 1)/c and
    // is attracted to the periodic branch, so the eigenvector error only
    // shrinks. f(π) = f(0) by periodicity.
    let n = p.grid_size();
    let dt = PI / n as f64;
    let rhs = |s: f64, z: &[f64], dz: &mut [f64]| {
        dz[0] = -(z[0] * z[0] - c * c * interp.eval(PI - s) - 1.0) / c;
    };
    let mut stepper = rk::Dopri5::new(rhs, 0.0, &[f0], OdeOptions::default());
    let mut f = vec![0.0; n];
    f[0] = f0;
    for k in 1..n {
        stepper.integrate_to(k as f64 * dt)?;
        if !stepper.y[0].is_finite() {
            return Err(Error::Degenerate(
                "Riccati solution reached a pole: the Hill solution has a zero".into(),
            ));
        }
        f[n - k] = stepper.y[0];
    }

    // Defining-equation residual, with the derivative taken spectrally.
    let fp = fft::derivative(&f, PI, 1);
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for j in 0..n {
        let r = c * fp[j] - f[j] * f[j] + c * c * p.samples[j] + 1.0;
        worst = worst.max(r.abs());
        scale = scale
            .max(f[j] * f[j])
            .max((c * c * p.samples[j]).abs());
    }
    let tol = 1e-8 * scale;
    if worst > tol {
        return Err(Error::residual("periodic Riccati solution", worst, tol));
    }
    Ok(Some(f))
}

/// Companion curve δ = f·γ + c·γ′ for a periodic Riccati solution f given
/// on the half-grid of γ. The result is validated: [γ, δ] = c pointwise and
/// δ is itself a closed unit-Wronskian curve.
pub fn c_related(gamma: &CentroaffineCurve, f: &[f64], c: f64) -> Result<CentroaffineCurve> {
    if !gamma.is_closed() {
        return Err(Error::domain("c-related construction needs a closed curve"));
    }
    let n = gamma.n();
    if f.len() != n / 2 {
        return Err(Error::domain(format!(
            "f must be sampled on the π-periodic half-grid of {} points, got {}",
            n / 2,
            f.len()
        )));
    }
    let g = gamma.samples();
    let dg = gamma.derivative(1)?;
    let mut delta = Vec::with_capacity(n);
    for j in 0..n {
        let fj = f[j % (n / 2)];
        delta.push([
            fj * g[j][0] + c * dg[j][0],
            fj * g[j][1] + c * dg[j][1],
        ]);
    }
    let mut worst = 0.0f64;
    for j in 0..n {
        worst = worst.max((det2(g[j], delta[j]) - c).abs());
    }
    let tol = 1e-8 * (1.0 + c.abs());
    if worst > tol {
        return Err(Error::residual("pairing determinant [γ, δ] = c", worst, tol));
    }
    CentroaffineCurve::closed_from_samples(delta)
}

/// Midpoint curve of a c-related pair together with its tangency data.
#[derive(Debug, Clone)]
pub struct MiddleCurve {
    pub samples: Vec<[f64; 2]>,
    /// max over the grid of |[Γ′, δ − γ]|.
    pub alignment_residual: f64,
    /// Sample indices j where the velocity factor h (in Γ′ = h·(δ − γ))
    /// changes sign between j and j+1: the cusps of the midpoint curve.
    pub cusps: Vec<usize>,
}

/// Midpoint curve Γ = (γ + δ)/2 of two curves with constant pairing
/// [γ, δ] = c ≠ 0. Its velocity is aligned with δ − γ; the alignment is
/// asserted, while cusps (sign changes of the velocity factor) are only
/// reported.
pub fn middle_curve(gamma: &CentroaffineCurve, delta: &CentroaffineCurve) -> Result<MiddleCurve> {
    if !gamma.is_closed() || !delta.is_closed() || gamma.n() != delta.n() {
        return Err(Error::domain(
            "middle curve needs two closed curves on the same grid",
        ));
    }
    let n = gamma.n();
    let g = gamma.samples();
    let d = delta.samples();
    let dets: Vec<f64> = (0..n).map(|j| det2(g[j], d[j])).collect();
    let c_mean = dets.iter().sum::<f64>() / n as f64;
    let spread = dets
        .iter()
        .map(|v| (v - c_mean).abs())
        .fold(0.0, f64::max);
    if spread > 1e-6 * (1.0 + c_mean.abs()) || c_mean.abs() < 1e-9 {
        return Err(Error::domain(
            "curves do not have a constant nonzero pairing [γ, δ]",
        ));
    }

    let mid: Vec<[f64; 2]> = (0..n)
        .map(|j| [0.5 * (g[j][0] + d[j][0]), 0.5 * (g[j][1] + d[j][1])])
        .collect();
    let x: Vec<f64> = mid.iter().map(|p| p[0]).collect();
    let y: Vec<f64> = mid.iter().map(|p| p[1]).collect();
    let period = 2.0 * PI;
    let dx = fft::derivative(&x, period, 1);
    let dy = fft::derivative(&y, period, 1);

    let mut residual = 0.0f64;
    let mut speed_scale = 0.0f64;
    let mut h = vec![0.0; n];
    for j in 0..n {
        let v = [dx[j], dy[j]];
        let w = [d[j][0] - g[j][0], d[j][1] - g[j][1]];
        residual = residual.max(det2(v, w).abs());
        let ww = w[0] * w[0] + w[1] * w[1];
        h[j] = (v[0] * w[0] + v[1] * w[1]) / ww;
        speed_scale = speed_scale.max(v[0].hypot(v[1]) * ww.sqrt());
    }
    let tol = 1e-8 * (1.0 + speed_scale);
    if residual > tol {
        return Err(Error::residual(
            "midpoint-curve tangency alignment",
            residual,
            tol,
        ));
    }
    let cusps: Vec<usize> = (0..n)
        .filter(|&j| h[j] * h[(j + 1) % n] < 0.0)
        .collect();
    Ok(MiddleCurve {
        samples: mid,
        alignment_residual: residual,
        cusps,
    })
}

fn spectrum(samples: &[f64]) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft::fft_in_place(&mut z);
    z
}

fn physical(spec: &[Complex64]) -> Vec<f64> {
    let mut z = spec.to_vec();
    fft::ifft_in_place(&mut z);
    z.into_iter().map(|v| v.re).collect()
}

/// Angular frequencies 2m of the π-periodic grid, in FFT bin order.
fn wavenumbers(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * fft::harmonic(j, n) as f64).collect()
}

/// One step of the classical integrating-factor RK4: the linear symbol is
/// integrated exactly, the nonlinear term N̂ with fourth-order stages.
fn if_rk4(
    u: &mut [Complex64],
    lsym: &[Complex64],
    dt: f64,
    nonlin: &mut impl FnMut(&[Complex64]) -> Vec<Complex64>,
) {
    let n = u.len();
    let e1: Vec<Complex64> = lsym.iter().map(|&l| (l * (0.5 * dt)).exp()).collect();
    let e2: Vec<Complex64> = lsym.iter().map(|&l| (l * dt).exp()).collect();
    let k1 = nonlin(u);
    let s1: Vec<Complex64> = (0..n).map(|j| e1[j] * (u[j] + 0.5 * dt * k1[j])).collect();
    let k2 = nonlin(&s1);
    let s2: Vec<Complex64> = (0..n).map(|j| e1[j] * u[j] + 0.5 * dt * k2[j]).collect();
    let k3 = nonlin(&s2);
    let s3: Vec<Complex64> = (0..n).map(|j| e2[j] * u[j] + dt * e1[j] * k3[j]).collect();
    let k4 = nonlin(&s3);
    for j in 0..n {
        u[j] = e2[j] * u[j]
            + (dt / 6.0) * (e2[j] * k1[j] + 2.0 * e1[j] * (k2[j] + k3[j]) + k4[j]);
    }
}

fn check_step_finite(out: &[f64], what: &str) -> Result<()> {
    if out.iter().any(|v| !v.is_finite() || v.abs() > 1e8) {
        return Err(Error::NoConvergence {
            what: what.into(),
            detail: "solution blow-up detected".into(),
        });
    }
    Ok(())
}

/// One pseudo-spectral step of ṗ = −½p‴ + 3p′p. The dispersive part is
/// integrated exactly by an integrating factor; the quadratic term is
/// written in conservative form (3/2)(p²)′ and dealiased by the 2/3 rule,
/// which keeps ∫p exactly fixed and ∫p² fixed to scheme order.
pub fn kdv_step(p: &PeriodicPotential, dt: f64) -> Result<PeriodicPotential> {
    if !dt.is_finite() {
        return Err(Error::domain("step size must be finite"));
    }
    let n = p.grid_size();
    let k = wavenumbers(n);
    let lsym: Vec<Complex64> = k
        .iter()
        .map(|&kh| Complex64::new(0.0, 0.5 * kh * kh * kh))
        .collect();
    let mut u = spectrum(&p.samples);
    fft::dealias_spectrum(&mut u);
    let mut nonlin = |spec: &[Complex64]| -> Vec<Complex64> {
        let v = physical(spec);
        let mut wh: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x * x, 0.0)).collect();
        fft::fft_in_place(&mut wh);
        for j in 0..n {
            wh[j] *= Complex64::new(0.0, 1.5 * k[j]);
        }
        fft::dealias_spectrum(&mut wh);
        wh
    };
    if_rk4(&mut u, &lsym, dt, &mut nonlin);
    let out = physical(&u);
    check_step_finite(&out, "KdV step")?;
    PeriodicPotential::new(out)
}

/// One pseudo-spectral step of ḟ = −½f‴ + (3/c²)(f² − 1)f′, the evolution
/// a periodic Riccati solution must follow when its potential moves by the
/// KdV flow. The linear part −½∂³ − (3/c²)∂ is integrated exactly; the
/// cubic advection enters conservatively as (1/c²)(f³)′.
pub fn mkdv_step(f: &[f64], c: f64, dt: f64) -> Result<Vec<f64>> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::domain("parameter c must be finite and nonzero"));
    }
    if !dt.is_finite() {
        return Err(Error::domain("step size must be finite"));
    }
    let n = f.len();
    if n < MIN_GRID || !n.is_power_of_two() {
        return Err(Error::domain(format!(
            "grid must be a power of two with at least {MIN_GRID} samples, got {n}"
        )));
    }
    let k = wavenumbers(n);
    let cc = 3.0 / (c * c);
    let lsym: Vec<Complex64> = k
        .iter()
        .map(|&kh| Complex64::new(0.0, 0.5 * kh * kh * kh - cc * kh))
        .collect();
    let mut u = spectrum(f);
    fft::dealias_spectrum(&mut u);
    let mut nonlin = |spec: &[Complex64]| -> Vec<Complex64> {
        let v = physical(spec);
        let mut wh: Vec<Complex64> = v
            .iter()
            .map(|&x| Complex64::new(x * x * x, 0.0))
            .collect();
        fft::fft_in_place(&mut wh);
        for j in 0..n {
            wh[j] *= Complex64::new(0.0, k[j] / (c * c));
        }
        fft::dealias_spectrum(&mut wh);
        wh
    };
    if_rk4(&mut u, &lsym, dt, &mut nonlin);
    let out = physical(&u);
    check_step_finite(&out, "mKdV step")?;
    Ok(out)
}

/// The first three conserved integrals of the KdV flow over one period:
/// ∫p, ∫p², ∫(p³ + ½p′²).
pub fn conserved_integrals(p: &PeriodicPotential) -> [f64; 3] {
    let s = &p.samples;
    let n = s.len() as f64;
    let dp = p.derivative(1);
    let m1 = s.iter().sum::<f64>() / n;
    let m2 = s.iter().map(|v| v * v).sum::<f64>() / n;
    let m3 = s
        .iter()
        .zip(&dp)
        .map(|(v, d)| v * v * v + 0.5 * d * d)
        .sum::<f64>()
        / n;
    [m1 * PI, m2 * PI, m3 * PI]
}

/// Coefficient functions φ_k of the expansion f = 1 + Σ_{k≥2} c^k·φ_k(t) of
/// the periodic Riccati solution around c = 0, obtained by matching powers
/// of c in c·f′ = f² − c²p − 1:
///
///   φ₂ = p/2,
///   φ₃ = p′/4,
///   φ₄ = (p″ − p²)/8,
///   φ₅ = (p‴ − 4pp′)/16,
///   φ₆ = (p⁗ − 6pp″ − 5p′² + 2p³)/32.
///
/// The odd coefficients are exact derivatives, so their integrals vanish,
/// and ∫φ₆ = (1/16)∫(p³ + ½p′²) is a conserved integral of the KdV flow.
/// Returned in order starting with φ₂; orders up to 6 are supported.
pub fn miura_series(p: &PeriodicPotential, order: usize) -> Result<Vec<Vec<f64>>> {
    if !(2..=6).contains(&order) {
        return Err(Error::domain(format!(
            "expansion order must be between 2 and 6, got {order}"
        )));
    }
    let n = p.grid_size();
    let p0 = &p.samples;
    let p1 = p.derivative(1);
    let p2 = p.derivative(2);
    let p3 = p.derivative(3);
    let p4 = p.derivative(4);
    let mut out = Vec::with_capacity(order - 1);
    out.push(p0.iter().map(|v| 0.5 * v).collect());
    if order >= 3 {
        out.push(p1.iter().map(|v| 0.25 * v).collect());
    }
    if order >= 4 {
        out.push((0..n).map(|j| 0.125 * (p2[j] - p0[j] * p0[j])).collect());
    }
    if order >= 5 {
        out.push(
            (0..n)
                .map(|j| (p3[j] - 4.0 * p0[j] * p1[j]) / 16.0)
                .collect(),
        );
    }
    if order >= 6 {
        out.push(
            (0..n)
                .map(|j| {
                    (p4[j] - 6.0 * p0[j] * p2[j] - 5.0 * p1[j] * p1[j]
                        + 2.0 * p0[j] * p0[j] * p0[j])
                        / 32.0
                })
                .collect(),
        );
    }
    Ok(out)
}

/// A closed curve evolving by γ̇ = −½p′·γ + p·γ′, the curve-level flow whose
/// curvature obeys KdV. The potential advances pseudo-spectrally; the frame
/// (γ(0), γ′(0)) follows the linear ODE the flow induces at t = 0; curves
/// are reconstructed on demand by integrating γ″ = p·γ once around the
/// period from the frame.
pub struct KdvCurveFlow {
    potential: PeriodicPotential,
    /// rows: frame[0] = (x(0), x′(0)), frame[1] = (y(0), y′(0))
    frame: [[f64; 2]; 2],
}

/// Coefficient matrix B with dF/dτ = F·B for the frame F = [γ(0) | γ′(0)]:
/// the flow moves γ(0) by −½p′γ + pγ′ and γ′(0) by (p² − ½p″)γ + ½p′γ′.
fn frame_coefficients(p: &PeriodicPotential) -> Mat2 {
    let p0 = p.samples()[0];
    let p1 = p.derivative(1)[0];
    let p2 = p.derivative(2)[0];
    Mat2([[-0.5 * p1, p0 * p0 - 0.5 * p2], [p0, 0.5 * p1]])
}

impl KdvCurveFlow {
    pub fn new(curve: &CentroaffineCurve) -> Result<Self> {
        let potential = curvature_of(curve)?;
        let g0 = curve.samples()[0];
        let dg0 = curve.derivative(1)?[0];
        Ok(KdvCurveFlow {
            potential,
            frame: [[g0[0], dg0[0]], [g0[1], dg0[1]]],
        })
    }

    pub fn potential(&self) -> &PeriodicPotential {
        &self.potential
    }

    /// Advance potential and frame together by one step.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let p_half = kdv_step(&self.potential, 0.5 * dt)?;
        let p_full = kdv_step(&self.potential, dt)?;
        let b0 = frame_coefficients(&self.potential);
        let bh = frame_coefficients(&p_half);
        let bf = frame_coefficients(&p_full);
        let f0 = Mat2(self.frame);
        let k1 = f0.mul(&b0);
        let k2 = add(&f0, &k1.scale(0.5 * dt)).mul(&bh);
        let k3 = add(&f0, &k2.scale(0.5 * dt)).mul(&bh);
        let k4 = add(&f0, &k3.scale(dt)).mul(&bf);
        let incr = add(&add(&k1, &k2.scale(2.0)), &add(&k3.scale(2.0), &k4)).scale(dt / 6.0);
        self.frame = add(&f0, &incr).0;
        self.potential = p_full;
        return Ok(());

        fn add(a: &Mat2, b: &Mat2) -> Mat2 {
            a.sub(&b.scale(-1.0))
        }
    }

    /// Reconstruct the curve at the current flow time on a grid of twice
    /// the potential resolution (one π-period integrated and mirrored).
    pub fn curve(&self) -> Result<CentroaffineCurve> {
        let interp = self.potential.interpolant();
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let q = interp.eval(t);
            dy[0] = y[1];
            dy[1] = q * y[0];
            dy[2] = y[3];
            dy[3] = q * y[2];
        };
        let half = self.potential.grid_size();
        let n = 2 * half;
        let dt = 2.0 * PI / n as f64;
        let y0 = [
            self.frame[0][0],
            self.frame[0][1],
            self.frame[1][0],
            self.frame[1][1],
        ];
        let mut stepper = rk::Dopri5::new(rhs, 0.0, &y0, OdeOptions::default());
        let mut samples = Vec::with_capacity(n);
        samples.push([y0[0], y0[2]]);
        for j in 1..half {
            stepper.integrate_to(j as f64 * dt)?;
            samples.push([stepper.y[0], stepper.y[2]]);
        }
        for j in 0..half {
            let s = samples[j];
            samples.push([-s[0], -s[1]]);
        }
        CentroaffineCurve::closed_with_tolerance(samples, 1e-7)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_potential(rng: &mut ChaCha8Rng, modes: usize, amp: f64, n: usize) -> PeriodicPotential {
        let coefs: Vec<(f64, f64)> = (1..=modes)
            .map(|m| {
                let a = rng.gen_range(-amp..amp) / m as f64;
                let b = rng.gen_range(-amp..amp) / m as f64;
                (a, b)
            })
            .collect();
        PeriodicPotential::from_fn(
            |t| {
                let mut v = -1.0;
                for (m, (a, b)) in coefs.iter().enumerate() {
                    let w = 2.0 * (m + 1) as f64;
                    v += a * (w * t).cos() + b * (w * t).sin();
                }
                v
            },
            n,
        )
        .unwrap()
    }

    /// Monodromy trace by an independent fixed-step RK4 sweep on a closed
    /// form potential (no trigonometric interpolation involved).
    fn oracle_trace(p: impl Fn(f64) -> f64, lam: f64, steps: usize) -> f64 {
        let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let q = p(t) - lam;
            dy[0] = y[1];
            dy[1] = q * y[0];
            dy[2] = y[3];
            dy[3] = q * y[2];
        };
        let h = PI / steps as f64;
        let mut y = vec![1.0, 0.0, 0.0, 1.0];
        for s in 0..steps {
            y = rk::rk4_step(&mut rhs, s as f64 * h, &y, h);
        }
        y[0] + y[3]
    }

    #[test]
    fn potential_validation_and_grid() {
        assert!(PeriodicPotential::new(vec![0.0; 48]).is_err());
        assert!(PeriodicPotential::new(vec![f64::NAN; 64]).is_err());
        let p = PeriodicPotential::from_fn(|t| (2.0 * t).cos(), 64).unwrap();
        let g = p.grid();
        assert_eq!(g.len(), 64);
        assert!((g[16] - PI / 4.0).abs() < 1e-15);
        assert!((p.eval(0.123) - (2.0 * 0.123f64).cos()).abs() < 1e-12);
        assert!((p.integral()).abs() < 1e-12);
    }

    #[test]
    fn potential_json_roundtrip_validates() {
        let p = PeriodicPotential::from_fn(|t| -1.0 + 0.3 * (2.0 * t).cos(), 32).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: PeriodicPotential = serde_json::from_str(&text).unwrap();
        assert_eq!(p.samples(), back.samples());
        let bad = r#"{"grid_size": 16, "samples": [0.0, 0.0]}"#;
        assert!(serde_json::from_str::<PeriodicPotential>(bad).is_err());
    }

    #[test]
    fn curvature_of_circle_is_minus_one() {
        let circle = CentroaffineCurve::circle(256).unwrap();
        let p = curvature_of(&circle).unwrap();
        assert_eq!(p.grid_size(), 128);
        for &v in p.samples() {
            assert!((v + 1.0).abs() < 1e-10, "curvature {v} should be −1");
        }
        let arc = CentroaffineCurve::open_from_parametrization(
            |t| ([t.cos(), t.sin()], [-t.sin(), t.cos()]),
            0.0,
            1.0,
            64,
        )
        .unwrap();
        assert!(curvature_of(&arc).is_err(), "open arcs have no π-periodic curvature");
    }

    #[test]
    fn hyperbola_branch_has_unit_curvature() {
        // (cosh t, sinh t) is centroaffine with γ″ = +γ; finite differences
        // on a sampled arc must recover p ≡ +1.
        let n = 256;
        let h = 2.0 / n as f64;
        let pts: Vec<[f64; 2]> = (0..=n)
            .map(|j| {
                let t = -1.0 + j as f64 * h;
                [t.cosh(), t.sinh()]
            })
            .collect();
        for j in 2..n - 2 {
            let d1 = [
                (pts[j - 2][0] - 8.0 * pts[j - 1][0] + 8.0 * pts[j + 1][0] - pts[j + 2][0])
                    / (12.0 * h),
                (pts[j - 2][1] - 8.0 * pts[j - 1][1] + 8.0 * pts[j + 1][1] - pts[j + 2][1])
                    / (12.0 * h),
            ];
            let d2 = [
                (-pts[j - 2][0] + 16.0 * pts[j - 1][0] - 30.0 * pts[j][0]
                    + 16.0 * pts[j + 1][0]
                    - pts[j + 2][0])
                    / (12.0 * h * h),
                (-pts[j - 2][1] + 16.0 * pts[j - 1][1] - 30.0 * pts[j][1]
                    + 16.0 * pts[j + 1][1]
                    - pts[j + 2][1])
                    / (12.0 * h * h),
            ];
            let p = det2(d2, d1);
            assert!((p - 1.0).abs() < 1e-7, "j={j}: p={p}");
        }
    }

    #[test]
    fn floquet_constant_potential_closed_forms() {
        let p = PeriodicPotential::constant(-1.0, 64).unwrap();
        // λ = −1: y″ = 0, fundamental matrix [[1, π], [0, 1]]
        let fd = floquet(&p, -1.0).unwrap();
        assert!((fd.trace - 2.0).abs() < 1e-10);
        assert!((fd.monodromy[0][0] - 1.0).abs() < 1e-10);
        assert!((fd.monodromy[0][1] - PI).abs() < 1e-9);
        assert!(fd.monodromy[1][0].abs() < 1e-10);
        assert!((fd.det() - 1.0).abs() < 1e-10);
        // λ = 3: y″ + 4y = 0, identity over one period
        let fd = floquet(&p, 3.0).unwrap();
        assert!((fd.trace - 2.0).abs() < 1e-9);
        assert!((fd.monodromy[0][0] - 1.0).abs() < 1e-9);
        assert!(fd.monodromy[0][1].abs() < 1e-9);
        assert!(fd.monodromy[1][0].abs() < 1e-9);
        // λ = 0: y″ + y = 0, anti-periodic, monodromy −Id
        let fd = floquet(&p, 0.0).unwrap();
        assert!((fd.trace + 2.0).abs() < 1e-9);
        assert!((fd.monodromy[0][0] + 1.0).abs() < 1e-10);
        assert!((fd.monodromy[1][1] + 1.0).abs() < 1e-10);
        assert!(fd.monodromy[0][1].abs() < 1e-10);
    }

    #[test]
    fn lambda0_constant_potential() {
        let p = PeriodicPotential::constant(-1.0, 64).unwrap();
        let l0 = lambda0(&p).unwrap();
        assert!((l0 + 1.0).abs() < 1e-9, "λ0 = {l0}");
    }

    #[test]
    fn lambda0_matches_dense_scan_oracle() {
        let pf = |t: f64| -1.0 + 0.3 * (2.0 * t).cos();
        let p = PeriodicPotential::from_fn(pf, 128).unwrap();

        // Oracle: coarse scan of the discriminant with an independent
        // fixed-step integrator, then bisection on the oracle itself.
        let steps = 4096;
        let mut lam = -1.8;
        let mut prev = oracle_trace(pf, lam, steps) - 2.0;
        assert!(prev > 0.0);
        let mut bracket = None;
        while lam < 0.0 {
            let next_lam = lam + 0.002;
            let next = oracle_trace(pf, next_lam, steps) - 2.0;
            if prev > 0.0 && next <= 0.0 {
                bracket = Some((lam, next_lam));
                break;
            }
            lam = next_lam;
            prev = next;
        }
        let (mut a, mut b) = bracket.expect("oracle found no crossing");
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if oracle_trace(pf, mid, steps) - 2.0 > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let oracle = 0.5 * (a + b);

        let l0 = lambda0(&p).unwrap();
        assert!(
            (l0 - oracle).abs() < 1e-8,
            "bisection {l0} vs dense-scan oracle {oracle}"
        );
        // the eigenvalue is simple: Δ strictly decreasing through 2
        let d = 1e-4;
        let up = floquet(&p, l0 + d).unwrap().trace;
        let down = floquet(&p, l0 - d).unwrap().trace;
        assert!(
            (up - down) / (2.0 * d) < -0.1,
            "Δ′(λ0) should be negative"
        );
    }

    #[test]
    fn lambda0_respects_mean_value_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..8 {
            let p = random_potential(&mut rng, 4, 0.35, 64);
            let l0 = lambda0(&p).unwrap();
            assert!(
                l0 <= p.mean() + 1e-9,
                "λ0 = {} exceeds the mean bound {}",
                l0,
                p.mean()
            );
        }
    }

    #[test]
    fn c_max_circle_and_positive_spectrum_rejection() {
        let p = PeriodicPotential::constant(-1.0, 64).unwrap();
        let cm = c_max(&p).unwrap();
        assert!((cm - 1.0).abs() < 1e-9, "c_max = {cm}");
        // p ≡ +1 has λ0 = +1: no closed curve has this curvature
        let q = PeriodicPotential::constant(1.0, 64).unwrap();
        assert!(matches!(c_max(&q), Err(Error::Domain(_))));
    }

    #[test]
    fn c_max_convex_bound() {
        // for strictly negative p, c_max ≤ 1/√P with P = −(1/π)∫p
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let p = random_potential(&mut rng, 3, 0.3, 64);
            assert!(p.samples().iter().all(|&v| v < 0.0));
            let cap = 1.0 / (-p.mean()).sqrt();
            let cm = c_max(&p).unwrap();
            assert!(cm <= cap + 1e-9, "c_max {cm} above convex bound {cap}");
        }
    }

    #[test]
    fn riccati_circle_branches() {
        let p = PeriodicPotential::constant(-1.0, 64).unwrap();
        let f = riccati_periodic(&p, 0.5).unwrap().unwrap();
        let want = (3.0f64).sqrt() / 2.0;
        for &v in &f {
            assert!((v - want).abs() < 1e-9, "f = {v}, want {want}");
        }
        // mirrored branch for negative c
        let fneg = riccati_periodic(&p, -0.5).unwrap().unwrap();
        for &v in &fneg {
            assert!((v + want).abs() < 1e-9);
        }
        // beyond the threshold only runaway solutions exist
        assert!(riccati_periodic(&p, 5.0 / 3.0).unwrap().is_none());
        assert!(matches!(
            riccati_periodic(&p, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn riccati_matches_backward_shooting_oracle() {
        let pf = |t: f64| -1.0 + 0.25 * (2.0 * t).cos() - 0.1 * (4.0 * t).sin();
        let p = PeriodicPotential::from_fn(pf, 128).unwrap();
        let cm = c_max(&p).unwrap();
        let c = 0.9 * cm;
        let f = riccati_periodic(&p, c).unwrap().unwrap();

        // Oracle: monodromy from a fixed-step sweep, eigenvector by hand,
        // then the Hill system integrated backward (the stable direction
        // for the decaying solution), f = −c·y′/y.
        let steps = 8192;
        let lam = -1.0 / (c * c);
        let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let q = pf(t) - lam;
            dy[0] = y[1];
            dy[1] = q * y[0];
            dy[2] = y[3];
            dy[3] = q * y[2];
        };
        let h = PI / steps as f64;
        let mut y = vec![1.0, 0.0, 0.0, 1.0];
        for s in 0..steps {
            y = rk::rk4_step(&mut rhs, s as f64 * h, &y, h);
        }
        let m = Mat2([[y[0], y[2]], [y[1], y[3]]]);
        let delta = m.trace();
        let mu = 2.0 / (delta + (delta * delta - 4.0).max(0.0).sqrt());
        let v = m.eigenvector(mu);
        // integrate backward from t = π with terminal value μ·v
        let mut rhs2 = |t: f64, y: &[f64], dy: &mut [f64]| {
            let q = pf(t) - lam;
            dy[0] = y[1];
            dy[1] = q * y[0];
        };
        let n = p.grid_size();
        let sub = steps / n;
        let mut z = vec![mu * v[0], mu * v[1]];
        let mut oracle = vec![0.0; n];
        oracle[0] = -c * v[1] / v[0];
        for s in 0..steps {
            let t = PI - s as f64 * h;
            z = rk::rk4_step(&mut rhs2, t, &z, -h);
            if (s + 1) % sub == 0 {
                let j = n - (s + 1) / sub;
                if j > 0 {
                    oracle[j] = -c * z[1] / z[0];
                }
            }
        }
        let worst = f
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-7, "max deviation from shooting oracle: {worst}");
    }

    #[test]
    fn riccati_existence_flips_at_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let p = random_potential(&mut rng, 3, 0.3, 64);
        let cm = c_max(&p).unwrap();
        for k in 1..=10 {
            let c = cm * k as f64 / 10.5;
            let f = riccati_periodic(&p, c).unwrap();
            assert!(f.is_some(), "expected a solution at c = {c} < c_max = {cm}");
        }
        for factor in [1.000002, 1.01, 1.3, 2.5] {
            let c = cm * factor;
            assert!(
                riccati_periodic(&p, c).unwrap().is_none(),
                "expected none at c = {c} > c_max = {cm}"
            );
        }
    }

    #[test]
    fn c_related_circle_is_rotation() {
        let circle = CentroaffineCurve::circle(256).unwrap();
        let c = 0.5;
        let f = vec![(1.0f64 - c * c).sqrt(); 128];
        let delta = c_related(&circle, &f, c).unwrap();
        assert!(delta.wronskian_residual() < 1e-9);
        // f + c∂ acts on a circle as rotation by arcsin c
        let rotated = circle.shifted_samples(PI / 6.0).unwrap();
        for (a, b) in delta.samples().iter().zip(&rotated) {
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        }
        for (g, d) in circle.samples().iter().zip(delta.samples()) {
            assert!((det2(*g, *d) - c).abs() < 1e-10);
        }
    }

    #[test]
    fn middle_curve_of_circle_pair_is_concentric() {
        let circle = CentroaffineCurve::circle(256).unwrap();
        let c = 0.5;
        let f = vec![(1.0f64 - c * c).sqrt(); 128];
        let delta = c_related(&circle, &f, c).unwrap();
        let mid = middle_curve(&circle, &delta).unwrap();
        assert!(mid.alignment_residual < 1e-8);
        assert!(mid.cusps.is_empty());
        let r = (PI / 12.0).cos();
        for s in &mid.samples {
            assert!((s[0].hypot(s[1]) - r).abs() < 1e-9);
        }
    }

    #[test]
    fn kdv_constant_potential_is_fixed() {
        let p = PeriodicPotential::constant(-1.0, 64).unwrap();
        let q = kdv_step(&p, 1e-3).unwrap();
        for (a, b) in p.samples().iter().zip(q.samples()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn kdv_conserves_integrals_at_scheme_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let p0 = random_potential(&mut rng, 4, 0.4, 128);
        let start = conserved_integrals(&p0);

        let drift = |dt: f64, steps: usize| -> [f64; 3] {
            let mut p = p0.clone();
            for _ in 0..steps {
                p = kdv_step(&p, dt).unwrap();
            }
            let end = conserved_integrals(&p);
            [
                (end[0] - start[0]).abs(),
                (end[1] - start[1]).abs(),
                (end[2] - start[2]).abs(),
            ]
        };
        let coarse = drift(4e-3, 50);
        let fine = drift(2e-3, 100);
        // ∫p is exact (the zero mode never moves)
        assert!(coarse[0] < 1e-13 && fine[0] < 1e-13);
        // ∫p² and the cubic integral drift at scheme order: halving the
        // step must cut the drift by at least the third-order factor
        for i in 1..3 {
            assert!(
                fine[i] < coarse[i] / 6.0 + 1e-14,
                "integral {i}: drift {} at dt, {} at dt/2",
                coarse[i],
                fine[i]
            );
        }
        assert!(coarse[1] < 1e-4 && coarse[2] < 5e-3);
    }

    #[test]
    fn mkdv_unit_fixed_point_and_joint_riccati_consistency() {
        let one = vec![1.0; 64];
        let out = mkdv_step(&one, 0.7, 1e-3).unwrap();
        for v in &out {
            assert!((v - 1.0).abs() < 1e-14);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let p0 = random_potential(&mut rng, 3, 0.3, 128);
        let cm = c_max(&p0).unwrap();
        let c = 0.5 * cm;
        let f0 = riccati_periodic(&p0, c).unwrap().unwrap();

        let residual_after = |dt: f64, steps: usize| -> f64 {
            let mut p = p0.clone();
            let mut f = f0.clone();
            for _ in 0..steps {
                p = kdv_step(&p, dt).unwrap();
                f = mkdv_step(&f, c, dt).unwrap();
            }
            let fp = fft::derivative(&f, PI, 1);
            (0..f.len())
                .map(|j| (c * fp[j] - f[j] * f[j] + c * c * p.samples()[j] + 1.0).abs())
                .fold(0.0, f64::max)
        };
        let coarse = residual_after(2e-3, 50);
        let fine = residual_after(1e-3, 100);
        assert!(coarse < 1e-4, "joint residual too large: {coarse}");
        assert!(
            fine < coarse / 2.5,
            "halving dt should shrink the pairing residual: {coarse} → {fine}"
        );
    }

    #[test]
    fn miura_series_matches_riccati_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let p = random_potential(&mut rng, 3, 0.5, 128);
        let phis = miura_series(&p, 6).unwrap();
        assert_eq!(phis.len(), 5);

        // odd coefficients are derivatives: zero mean
        for k in [1usize, 3] {
            let mean: f64 = phis[k].iter().sum::<f64>() / phis[k].len() as f64;
            assert!((mean * PI).abs() < 1e-10, "odd coefficient {k} integral");
        }
        // ∫φ₆ is the cubic conserved integral / 16
        let i6: f64 = phis[4].iter().sum::<f64>() / phis[4].len() as f64 * PI;
        let i3 = conserved_integrals(&p)[2];
        assert!((i6 - i3 / 16.0).abs() < 1e-10);
        // ... and is itself conserved by the flow
        let mut q = p.clone();
        for _ in 0..20 {
            q = kdv_step(&q, 1e-3).unwrap();
        }
        let j6: f64 = miura_series(&q, 6).unwrap()[4]
            .iter()
            .sum::<f64>()
            / p.grid_size() as f64
            * PI;
        assert!((j6 - i6).abs() < 1e-8, "∫φ₆ drifted: {i6} → {j6}");

        // the truncated series must approximate the true periodic solution
        // to O(c⁷): quartering the error ratio confirms the order
        let err = |c: f64| -> f64 {
            let f = riccati_periodic(&p, c).unwrap().unwrap();
            (0..f.len())
                .map(|j| {
                    let mut s = 1.0;
                    let mut ck = c * c;
                    for phi in &phis {
                        s += ck * phi[j];
                        ck *= c;
                    }
                    (f[j] - s).abs()
                })
                .fold(0.0, f64::max)
        };
        let big = err(0.12);
        let small = err(0.06);
        assert!(
            big / small > 60.0,
            "remainder should scale like c⁷: err(0.12)={big:e}, err(0.06)={small:e}"
        );
        assert!(matches!(miura_series(&p, 7), Err(Error::Domain(_))));
    }

    #[test]
    fn curve_flow_rotates_circle() {
        let circle = CentroaffineCurve::circle(256).unwrap();
        let mut flow = KdvCurveFlow::new(&circle).unwrap();
        let steps = 50;
        let dt = 1e-3;
        for _ in 0..steps {
            flow.step(dt).unwrap();
        }
        // constant curvature −1 gives γ̇ = −γ′: rigid rotation backward
        let expect = circle.shifted_samples(-(steps as f64) * dt).unwrap();
        let got = flow.curve().unwrap();
        for (a, b) in got.samples().iter().zip(&expect) {
            assert!(
                (a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9,
                "flowed circle should be a parameter shift"
            );
        }
    }

    #[test]
    fn paired_curve_flows_preserve_pairing() {
        let circle = CentroaffineCurve::circle(256).unwrap();
        let c = 0.5;
        let f = vec![(1.0f64 - c * c).sqrt(); 128];
        let delta0 = c_related(&circle, &f, c).unwrap();
        let mut ga = KdvCurveFlow::new(&circle).unwrap();
        let mut de = KdvCurveFlow::new(&delta0).unwrap();
        for _ in 0..50 {
            ga.step(1e-3).unwrap();
            de.step(1e-3).unwrap();
        }
        let g = ga.curve().unwrap();
        let d = de.curve().unwrap();
        let worst = g
            .samples()
            .iter()
            .zip(d.samples())
            .map(|(a, b)| (det2(*a, *b) - c).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "pairing drifted by {worst}");
    }
}
