//! Explicit Runge–Kutta integrators: adaptive Dormand–Prince 5(4) and a
//! fixed-step classical RK4.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-12,
            h_init: 1e-3,
            max_steps: 2_000_000,
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// 4th-order embedded weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One accepted adaptive step at a time, so callers can observe or adjust
/// the state between steps (constraint projection, event detection).
pub struct Dopri5<F> {
    pub f: F,
    pub t: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    h: f64,
    opt: OdeOptions,
    steps: usize,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> Dopri5<F> {
    pub fn new(mut f: F, t0: f64, y0: &[f64], opt: OdeOptions) -> Self {
        let mut dy = vec![0.0; y0.len()];
        f(t0, y0, &mut dy);
        Dopri5 {
            f,
            t: t0,
            y: y0.to_vec(),
            dy,
            h: opt.h_init,
            opt,
            steps: 0,
        }
    }

    /// Refresh the cached derivative after an external modification of `y`.
    pub fn resync(&mut self) {
        let mut dy = vec![0.0; self.y.len()];
        (self.f)(self.t, &self.y, &mut dy);
        self.dy = dy;
    }

    /// Advance by one accepted step, at most up to `t_max`.
    pub fn step(&mut self, t_max: f64) -> Result<()> {
        let dim = self.y.len();
        let mut k = vec![vec![0.0; dim]; 7];
        k[0].copy_from_slice(&self.dy);
        loop {
            self.steps += 1;
            if self.steps > self.opt.max_steps {
                return Err(Error::NoConvergence {
                    what: "dopri5".into(),
                    detail: format!("step budget exhausted at t = {}", self.t),
                });
            }
            let h = self.h.min(t_max - self.t).max(1e-300);
            let mut ytmp = vec![0.0; dim];
            for stage in 0..6 {
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (s, ks) in k.iter().enumerate().take(stage + 1) {
                        acc += A[stage][s] * ks[i];
                    }
                    ytmp[i] = self.y[i] + h * acc;
                }
                let (head, tail) = k.split_at_mut(stage + 1);
                let _ = head;
                (self.f)(self.t + C[stage] * h, &ytmp, &mut tail[0]);
            }
            // Stage 7 input is the 5th-order solution itself (FSAL).
            let y5 = ytmp;
            let mut err_norm = 0.0;
            for i in 0..dim {
                let mut e4 = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    let b5 = if s < 6 { A[5][s] } else { 0.0 };
                    e4 += (b5 - B4[s]) * ks[i];
                }
                let err = h * e4;
                let scale = self.opt.atol + self.opt.rtol * self.y[i].abs().max(y5[i].abs());
                err_norm += (err / scale) * (err / scale);
            }
            err_norm = (err_norm / dim as f64).sqrt();

            if err_norm <= 1.0 {
                self.t += h;
                self.y = y5;
                self.dy = k[6].clone();
                let factor = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                self.h = h * factor;
                return Ok(());
            }
            self.h = h * (0.9 * err_norm.powf(-0.2)).clamp(0.1, 1.0);
            k[0].copy_from_slice(&self.dy);
        }
    }

    pub fn integrate_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end - 1e-14 * t_end.abs().max(1.0) {
            self.step(t_end)?;
        }
        Ok(())
    }
}

/// Convenience wrapper: integrate `y' = f(t, y)` from `t0` to `t1`.
pub fn integrate<F: FnMut(f64, &[f64], &mut [f64])>(
    f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opt: OdeOptions,
) -> Result<Vec<f64>> {
    let mut stepper = Dopri5::new(f, t0, y0, opt);
    stepper.integrate_to(t1)?;
    Ok(stepper.y)
}

/// One classical RK4 step.
pub fn rk4_step<F: FnMut(f64, &[f64], &mut [f64])>(
    f: &mut F,
    t: f64,
    y: &[f64],
    h: f64,
) -> Vec<f64> {
    let dim = y.len();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    f(t, y, &mut k1);
    let y2: Vec<f64> = (0..dim).map(|i| y[i] + 0.5 * h * k1[i]).collect();
    f(t + 0.5 * h, &y2, &mut k2);
    let y3: Vec<f64> = (0..dim).map(|i| y[i] + 0.5 * h * k2[i]).collect();
    f(t + 0.5 * h, &y3, &mut k3);
    let y4: Vec<f64> = (0..dim).map(|i| y[i] + h * k3[i]).collect();
    f(t + h, &y4, &mut k4);
    (0..dim)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Cubic Hermite interpolation of a trajectory segment.
pub fn hermite(t0: f64, y0: &[f64], dy0: &[f64], t1: f64, y1: &[f64], dy1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * dy0[i] + h01 * y1[i] + h11 * h * dy1[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dopri5_harmonic_oscillator() {
        let y = integrate(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            10.0,
            &[1.0, 0.0],
            OdeOptions::default(),
        )
        .unwrap();
        assert!((y[0] - 10.0f64.cos()).abs() < 1e-10);
        assert!((y[1] + 10.0f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn rk4_order() {
        // One step of RK4 on y' = y should match exp to O(h^5).
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let h = 1e-2;
        let y1 = rk4_step(&mut f, 0.0, &[1.0], h);
        assert!((y1[0] - h.exp()).abs() < 1e-11);
    }
}
