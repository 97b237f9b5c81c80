//! Spectral operations on uniformly sampled periodic data.
//!
//! Samples live at `t_j = t0 + j·period/N`. Fourier coefficients use the
//! convention `f(t) = Σ_m c_m exp(i·m·2π t/period)` with `m` running over
//! the symmetric range `−N/2 .. N/2−1`.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn fft_in_place(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(data.len()).process(data);
}

pub fn ifft_in_place(data: &mut [Complex64]) {
    let n = data.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(data);
    let scale = 1.0 / n as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

/// Signed harmonic index for FFT bin `j` of an `n`-point transform.
#[inline]
pub fn harmonic(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Normalized Fourier coefficients (bin `j` holds harmonic `harmonic(j, n)`).
pub fn coeffs(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut data = samples.to_vec();
    fft_in_place(&mut data);
    let scale = 1.0 / n as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
    data
}

/// Spectral derivative of given order for complex periodic samples.
pub fn derivative_c(samples: &[Complex64], period: f64, order: u32) -> Vec<Complex64> {
    let n = samples.len();
    let mut data = samples.to_vec();
    fft_in_place(&mut data);
    let base = 2.0 * std::f64::consts::PI / period;
    for (j, z) in data.iter_mut().enumerate() {
        let m = harmonic(j, n);
        // The unmatched Nyquist mode has no consistent odd derivative;
        // drop it (it is at round-off level for resolved smooth data).
        if order % 2 == 1 && n % 2 == 0 && j == n / 2 {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, base * m as f64);
        *z *= ik.powu(order);
    }
    ifft_in_place(&mut data);
    data
}

pub fn derivative(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    let complex: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    derivative_c(&complex, period, order)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Samples of `t ↦ f(t + alpha)` from samples of `f`, by trigonometric
/// interpolation (exact for band-limited data).
pub fn shift_c(samples: &[Complex64], period: f64, alpha: f64) -> Vec<Complex64> {
    let n = samples.len();
    let mut data = samples.to_vec();
    fft_in_place(&mut data);
    let base = 2.0 * std::f64::consts::PI / period;
    for (j, z) in data.iter_mut().enumerate() {
        let m = harmonic(j, n);
        *z *= Complex64::new(0.0, base * m as f64 * alpha).exp();
    }
    ifft_in_place(&mut data);
    data
}

pub fn shift(samples: &[f64], period: f64, alpha: f64) -> Vec<f64> {
    let complex: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    shift_c(&complex, period, alpha)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Evaluate the trigonometric interpolant at an arbitrary parameter value.
pub fn eval_c(coeffs: &[Complex64], period: f64, t: f64) -> Complex64 {
    let n = coeffs.len();
    let base = 2.0 * std::f64::consts::PI / period;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &c) in coeffs.iter().enumerate() {
        let m = harmonic(j, n);
        acc += c * Complex64::new(0.0, base * m as f64 * t).exp();
    }
    acc
}

/// Zero all harmonics with `|m| > n/3` (2/3-rule dealiasing for quadratic
/// and cubic products).
pub fn dealias_spectrum(spectrum: &mut [Complex64]) {
    let n = spectrum.len();
    let cutoff = n as i64 / 3;
    for (j, z) in spectrum.iter_mut().enumerate() {
        if harmonic(j, n).abs() > cutoff {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}
