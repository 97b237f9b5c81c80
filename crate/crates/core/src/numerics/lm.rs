//! Dense Levenberg–Marquardt for small least-squares problems
//! (finite-difference Jacobian, Gaussian elimination on the normal
//! equations). Problem sizes here are at most a few dozen unknowns.

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub struct LmOptions {
    pub max_iterations: usize,
    pub cost_tol: f64,
    pub step_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            cost_tol: 1e-24,
            step_tol: 1e-14,
        }
    }
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Solve `A x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular system.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

pub fn minimize(
    residual: &mut impl FnMut(&[f64]) -> Vec<f64>,
    x0: &[f64],
    opt: &LmOptions,
) -> LmResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residual(&x);
    let mut cost = cost_of(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;

    for _ in 0..opt.max_iterations {
        iterations += 1;
        if cost < opt.cost_tol {
            break;
        }
        let m = r.len();
        // Central-difference Jacobian, column by column. Central differences
        // cost twice the evaluations but drop the O(h) truncation bias, which
        // otherwise puts a hard floor under shooting residuals.
        let mut jac = vec![vec![0.0; n]; m];
        for j in 0..n {
            let h = 1e-6 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residual(&xp);
            let mut xm = x.clone();
            xm[j] -= h;
            let rm = residual(&xm);
            for i in 0..m {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for i in 0..m {
            for j in 0..n {
                jtr[j] += jac[i][j] * r[i];
                for k in j..n {
                    jtj[j][k] += jac[i][j] * jac[i][k];
                }
            }
        }
        for j in 0..n {
            for k in 0..j {
                jtj[j][k] = jtj[k][j];
            }
        }

        let mut improved = false;
        for _ in 0..12 {
            let mut damped = jtj.clone();
            for (j, row) in damped.iter_mut().enumerate() {
                row[j] += lambda * (jtj[j][j].max(1e-12));
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(step) = solve_dense(damped, rhs) else {
                lambda *= 10.0;
                continue;
            };
            let x_new: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + s).collect();
            let r_new = residual(&x_new);
            let cost_new = cost_of(&r_new);
            if cost_new < cost {
                let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if step_norm < opt.step_tol {
                    return LmResult {
                        x,
                        cost,
                        converged: true,
                        iterations,
                    };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let converged = cost < opt.cost_tol.max(1e-20);
    LmResult {
        x,
        cost,
        converged,
        iterations,
    }
}
