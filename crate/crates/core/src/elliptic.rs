//! Weierstrass elliptic functions ℘, ℘′, ζ, σ on rectangular lattices.
//!
//! The lattice is `Λ = 2ω·Z + 2ω′·Z` with `ω > 0` real and `ω′ = i·b`,
//! `b > 0` pure imaginary. Evaluation uses the trigonometric q-series with
//! nome `q = exp(−π b / ω)`; arguments are first reduced to the fundamental
//! rectangle by (quasi-)periodicity. When the rectangle is wider than tall
//! (`b < ω`) the series would converge slowly, so evaluation is carried out
//! on the 90°-rotated lattice `(b, iω)` and mapped back through the
//! homogeneity relations `℘(z; Λ) = −℘(iz; iΛ)`, `ζ(z; Λ) = i·ζ(iz; iΛ)`,
//! `σ(z; Λ) = −i·σ(iz; iΛ)`.
//!
//! The degenerate (`ω′ → i∞`) limits are provided separately in closed
//! trigonometric form.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{Error, Result};

const POLE_TOL: f64 = 1e-10;

/// cot(v) without overflow for large |Im v|: away from the real axis the
/// exponentials are computed on the decaying side.
fn cot_stable(v: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if v.im > 20.0 {
        let x = (2.0 * i * v).exp(); // |x| = e^{−2 Im v}, tiny
        i * (x + 1.0) / (x - 1.0)
    } else if v.im < -20.0 {
        let y = (-2.0 * i * v).exp(); // tiny
        i * (1.0 + y) / (1.0 - y)
    } else {
        v.cos() / v.sin()
    }
}

/// A rectangular period lattice together with its derived constants.
#[derive(Debug, Clone)]
pub struct Lattice {
    /// Real half-period ω.
    pub omega: f64,
    /// Imaginary part of the half-period ω′ = i·omega_prime_im.
    pub omega_prime_im: f64,
    /// Roots of 4x³ − g₂x − g₃, ordered e1 > e2 > e3.
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// Invariants of the cubic.
    pub g2: f64,
    pub g3: f64,
    /// η = ζ(ω) (real for rectangular lattices).
    pub eta: Complex64,
    /// η′ = ζ(ω′) (pure imaginary), fixed by the Legendre relation
    /// η·ω′ − η′·ω = iπ/2 and cross-checked against direct evaluation.
    pub eta_prime: Complex64,
    frame: Frame,
    rotated: bool,
}

/// The lattice actually used for series evaluation; satisfies `b ≥ om` so
/// the nome is at most `exp(−π)`.
#[derive(Debug, Clone)]
struct Frame {
    om: f64,
    b: f64,
    q: f64,
    /// η of the frame lattice from its own q-series.
    eta1: f64,
}

impl Frame {
    fn new(om: f64, b: f64) -> Frame {
        let q = (-PI * b / om).exp();
        // η = π²/(12ω) · (1 − 24 Σ n q^{2n}/(1 − q^{2n}))
        let q2 = q * q;
        let mut sum = 0.0;
        let mut qp = q2;
        let mut n = 1.0;
        while qp > 1e-18 && n < 500.0 {
            sum += n * qp / (1.0 - qp);
            qp *= q2;
            n += 1.0;
        }
        let eta1 = PI * PI / (12.0 * om) * (1.0 - 24.0 * sum);
        Frame { om, b, q, eta1 }
    }

    fn eta_prime(&self) -> Complex64 {
        // Legendre: η·(ib) − η′·ω = iπ/2.
        Complex64::new(0.0, (self.eta1 * self.b - PI / 2.0) / self.om)
    }

    /// Reduce z modulo the period lattice; returns (z_red, m, n) with
    /// z = z_red + 2mω + 2n·ib and z_red in the centered rectangle.
    fn reduce(&self, z: Complex64) -> (Complex64, i64, i64) {
        let m = (z.re / (2.0 * self.om)).round() as i64;
        let n = (z.im / (2.0 * self.b)).round() as i64;
        let zr = Complex64::new(z.re - 2.0 * m as f64 * self.om, z.im - 2.0 * n as f64 * self.b);
        (zr, m, n)
    }

    /// Running powers q^{2n}·e^{±2inv} used by every series; both have
    /// modulus at most q inside the fundamental rectangle, so the terms
    /// decay geometrically and never overflow.
    fn factors(&self, v: Complex64) -> (Complex64, Complex64) {
        let q2 = Complex64::new(self.q * self.q, 0.0);
        let x = (Complex64::new(0.0, 2.0) * v).exp();
        (q2 * x, q2 / x)
    }

    /// ℘(z) for z already reduced; caller guards the pole at 0.
    fn wp(&self, z: Complex64) -> Complex64 {
        let om = self.om;
        let v = z * PI / (2.0 * om);
        let s = v.sin();
        let pref = PI / (2.0 * om);
        let mut acc = Complex64::new(-self.eta1 / om, 0.0) + pref * pref / (s * s);
        if self.q < 1e-250 {
            return acc;
        }
        let (rp, rm) = self.factors(v);
        let mut rpn = rp;
        let mut rmn = rm;
        let q2 = self.q * self.q;
        let mut q2n = q2;
        let mut n = 1.0;
        loop {
            let term = n * (rpn + rmn) / (2.0 * (1.0 - q2n));
            acc -= 2.0 * PI * PI / (om * om) * term;
            if n > 500.0 || (rpn.norm() + rmn.norm()) * n < 1e-18 {
                break;
            }
            rpn *= rp;
            rmn *= rm;
            q2n *= q2;
            n += 1.0;
        }
        acc
    }

    /// ℘′(z) for z already reduced.
    fn wp_prime(&self, z: Complex64) -> Complex64 {
        let om = self.om;
        let v = z * PI / (2.0 * om);
        let s = v.sin();
        let c = v.cos();
        let pref = PI / (2.0 * om);
        let mut acc = -2.0 * pref * pref * pref * c / (s * s * s);
        if self.q < 1e-250 {
            return acc;
        }
        let (rp, rm) = self.factors(v);
        let mut rpn = rp;
        let mut rmn = rm;
        let q2 = self.q * self.q;
        let mut q2n = q2;
        let mut n = 1.0;
        // sin(2nv) = (e^{2inv} − e^{−2inv})/(2i), and 1/(2i) = −i/2
        let inv_2i = Complex64::new(0.0, -0.5);
        loop {
            let term = n * n * (rpn - rmn) * inv_2i / (1.0 - q2n);
            acc += 2.0 * PI * PI * PI / (om * om * om) * term;
            if n > 500.0 || (rpn.norm() + rmn.norm()) * n * n < 1e-18 {
                break;
            }
            rpn *= rp;
            rmn *= rm;
            q2n *= q2;
            n += 1.0;
        }
        acc
    }

    /// ζ(z) for z already reduced.
    fn zeta(&self, z: Complex64) -> Complex64 {
        let om = self.om;
        let v = z * PI / (2.0 * om);
        let mut acc = self.eta1 * z / om + PI / (2.0 * om) * cot_stable(v);
        if self.q < 1e-250 {
            return acc;
        }
        let (rp, rm) = self.factors(v);
        let mut rpn = rp;
        let mut rmn = rm;
        let q2 = self.q * self.q;
        let mut q2n = q2;
        let mut n = 1.0;
        let inv_2i = Complex64::new(0.0, -0.5);
        loop {
            let term = (rpn - rmn) * inv_2i / (1.0 - q2n);
            acc += 2.0 * PI / om * term;
            if n > 500.0 || (rpn.norm() + rmn.norm()) < 1e-18 {
                break;
            }
            rpn *= rp;
            rmn *= rm;
            q2n *= q2;
            n += 1.0;
        }
        acc
    }

    /// σ(z) for z already reduced.
    fn sigma(&self, z: Complex64) -> Complex64 {
        let om = self.om;
        let v = z * PI / (2.0 * om);
        let mut acc = (2.0 * om / PI)
            * (self.eta1 * z * z / (2.0 * om)).exp()
            * v.sin();
        if self.q < 1e-250 {
            return acc;
        }
        // 1 − 2 q^{2n} cos 2v + q^{4n} = (1 − q^{2n} e^{2iv})(1 − q^{2n} e^{−2iv}).
        // Unlike the sum series, the angle here does not scale with n: each
        // factor reuses e^{±2iv} and only the q-power advances.
        let (rp, rm) = self.factors(v);
        let mut rpn = rp;
        let mut rmn = rm;
        let q2 = self.q * self.q;
        let mut q2n = q2;
        let mut n = 1.0;
        loop {
            let denom = (1.0 - q2n) * (1.0 - q2n);
            acc *= (1.0 - rpn) * (1.0 - rmn) / denom;
            if n > 500.0 || (rpn.norm() + rmn.norm()) < 1e-18 {
                break;
            }
            rpn *= q2;
            rmn *= q2;
            q2n *= q2;
            n += 1.0;
        }
        acc
    }
}

impl Lattice {
    pub fn new(omega: f64, omega_prime_im: f64) -> Result<Lattice> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::domain(format!(
                "real half-period must be positive and finite, got {omega}"
            )));
        }
        if !(omega_prime_im > 0.0) || !omega_prime_im.is_finite() {
            return Err(Error::domain(format!(
                "imaginary half-period must be positive and finite, got {omega_prime_im}"
            )));
        }
        let aspect = (omega_prime_im / omega).max(omega / omega_prime_im);
        if aspect > 200.0 {
            return Err(Error::domain(format!(
                "lattice aspect ratio {aspect:.1} exceeds 200; \
                 the exact functions are indistinguishable from the \
                 degenerate limit there — use degenerate_functions"
            )));
        }
        let rotated = omega_prime_im < omega;
        let frame = if rotated {
            Frame::new(omega_prime_im, omega)
        } else {
            Frame::new(omega, omega_prime_im)
        };
        let mut lat = Lattice {
            omega,
            omega_prime_im,
            e1: 0.0,
            e2: 0.0,
            e3: 0.0,
            g2: 0.0,
            g3: 0.0,
            eta: Complex64::new(0.0, 0.0),
            eta_prime: Complex64::new(0.0, 0.0),
            frame,
            rotated,
        };

        let om = Complex64::new(omega, 0.0);
        let omp = Complex64::new(0.0, omega_prime_im);
        let e1 = lat.wp(om)?;
        let e2 = lat.wp(om + omp)?;
        let e3 = lat.wp(omp)?;
        for (name, v) in [("e1", e1), ("e2", e2), ("e3", e3)] {
            if v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
                return Err(Error::residual(
                    format!("imaginary part of root {name}"),
                    v.im.abs(),
                    1e-9,
                ));
            }
        }
        let (mut e1, mut e2, mut e3) = (e1.re, e2.re, e3.re);
        // The roots must sum to zero (the cubic is depressed). Project the
        // evaluated triple onto that constraint so the symmetric functions
        // below are exactly consistent; Newton polishing is counterproductive
        // here because thin lattices make e₁ ≈ e₂ a near-double root.
        let s = (e1 + e2 + e3) / 3.0;
        e1 -= s;
        e2 -= s;
        e3 -= s;
        lat.e1 = e1;
        lat.e2 = e2;
        lat.e3 = e3;
        lat.g2 = -4.0 * (e1 * e2 + e1 * e3 + e2 * e3);
        lat.g3 = 4.0 * e1 * e2 * e3;

        lat.eta = lat.zeta(om)?;
        // Legendre relation pins η′; direct evaluation is the cross-check.
        let legendre = (lat.eta * omp - Complex64::new(0.0, PI / 2.0)) / omega;
        let direct = lat.zeta(omp)?;
        if (legendre - direct).norm() > 1e-9 * (1.0 + direct.norm()) {
            return Err(Error::residual(
                "eta_prime Legendre vs direct evaluation".to_string(),
                (legendre - direct).norm(),
                1e-9,
            ));
        }
        lat.eta_prime = legendre;
        Ok(lat)
    }

    pub fn omega_prime(&self) -> Complex64 {
        Complex64::new(0.0, self.omega_prime_im)
    }

    fn to_frame(&self, z: Complex64) -> Complex64 {
        if self.rotated {
            Complex64::new(0.0, 1.0) * z
        } else {
            z
        }
    }

    fn guard_pole(&self, zr: Complex64, function: &'static str) -> Result<()> {
        if zr.norm() < POLE_TOL {
            return Err(Error::Pole {
                function,
                tol: POLE_TOL,
            });
        }
        Ok(())
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        let zf = self.to_frame(z);
        let (zr, _, _) = self.frame.reduce(zf);
        self.guard_pole(zr, "wp")?;
        let w = self.frame.wp(zr);
        Ok(if self.rotated { -w } else { w })
    }

    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64> {
        let zf = self.to_frame(z);
        let (zr, _, _) = self.frame.reduce(zf);
        self.guard_pole(zr, "wp_prime")?;
        let w = self.frame.wp_prime(zr);
        Ok(if self.rotated {
            Complex64::new(0.0, -1.0) * w
        } else {
            w
        })
    }

    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        let zf = self.to_frame(z);
        let (zr, m, n) = self.frame.reduce(zf);
        self.guard_pole(zr, "zeta")?;
        let shift = 2.0 * m as f64 * self.frame.eta1 * Complex64::new(1.0, 0.0)
            + 2.0 * n as f64 * self.frame.eta_prime();
        let w = self.frame.zeta(zr) + shift;
        Ok(if self.rotated {
            Complex64::new(0.0, 1.0) * w
        } else {
            w
        })
    }

    pub fn sigma(&self, z: Complex64) -> Result<Complex64> {
        let zf = self.to_frame(z);
        let (zr, m, n) = self.frame.reduce(zf);
        // σ is entire: no pole guard.
        let sign = if (m + n + m * n) % 2 == 0 { 1.0 } else { -1.0 };
        let eta_shift = 2.0 * m as f64 * self.frame.eta1 * Complex64::new(1.0, 0.0)
            + 2.0 * n as f64 * self.frame.eta_prime();
        let midpoint = zr
            + Complex64::new(m as f64 * self.frame.om, n as f64 * self.frame.b);
        let w = sign * (eta_shift * midpoint).exp() * self.frame.sigma(zr);
        Ok(if self.rotated {
            Complex64::new(0.0, -1.0) * w
        } else {
            w
        })
    }
}

/// Closed-form limits of ℘, ζ, σ as ω′ → i∞ at fixed real half-period ω.
/// With `c = (1/3)(π/2ω)²` and `κ = √(3c) = π/(2ω)`:
///
/// ```text
/// ℘₀(z) = −c + 3c / sin²(κ z)
/// ζ₀(z) = c z + κ · cot(κ z)
/// σ₀(z) = κ⁻¹ · exp(c z²/2) · sin(κ z)
/// ```
#[derive(Debug, Clone, Copy)]
pub struct Degenerate {
    pub c: f64,
    kappa: f64,
}

pub fn degenerate_functions(omega: f64) -> Result<Degenerate> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!(
            "real half-period must be positive and finite, got {omega}"
        )));
    }
    let kappa = PI / (2.0 * omega);
    Ok(Degenerate {
        c: kappa * kappa / 3.0,
        kappa,
    })
}

impl Degenerate {
    pub fn wp(&self, z: Complex64) -> Complex64 {
        let s = (self.kappa * z).sin();
        -self.c + 3.0 * self.c / (s * s)
    }

    pub fn zeta(&self, z: Complex64) -> Complex64 {
        let w = self.kappa * z;
        self.c * z + self.kappa * w.cos() / w.sin()
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        (self.c * z * z / 2.0).exp() * (self.kappa * z).sin() / self.kappa
    }
}

/// Direct lattice-sum reference for ℘ — slow but independent of the
/// q-series. Pairs ±λ are summed together and the disk radius is
/// Richardson-extrapolated, which is enough for ~1e-10 absolute accuracy
/// at moderate radii. Used by tests as the second route of a dual check.
pub fn wp_lattice_sum(omega: f64, omega_prime_im: f64, z: Complex64, radius: f64) -> Complex64 {
    let partial = |r: f64| -> Complex64 {
        let mut acc = 1.0 / (z * z);
        let m_max = (r / (2.0 * omega)).ceil() as i64;
        let n_max = (r / (2.0 * omega_prime_im)).ceil() as i64;
        for m in -m_max..=m_max {
            for n in -n_max..=n_max {
                // half-lattice: pair λ with −λ
                if m < 0 || (m == 0 && n <= 0) {
                    continue;
                }
                let lam = Complex64::new(2.0 * m as f64 * omega, 2.0 * n as f64 * omega_prime_im);
                if lam.norm() > r {
                    continue;
                }
                acc += 1.0 / ((z - lam) * (z - lam)) + 1.0 / ((z + lam) * (z + lam))
                    - 2.0 / (lam * lam);
            }
        }
        acc
    };
    // tail ≈ a/R² ⇒ (4·S(2R) − S(R))/3 cancels the leading term
    let s1 = partial(radius);
    let s2 = partial(2.0 * radius);
    (4.0 * s2 - s1) / 3.0
}
