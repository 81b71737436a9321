//! Quasi-Newton minimization with backtracking line search.

use crate::error::{Error, Result};

#[derive(Debug)]
pub(crate) struct OptimResult {
    pub theta: Vec<f64>,
    pub nll: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimize `f` (value + gradient) by BFGS with Armijo backtracking.
///
/// Convergence: `||g||_inf <= tol * max(1, |f|)`. Iterates whose infinity
/// norm exceeds `divergence_norm` abort with a divergence error — this is
/// how logistic separation surfaces.
pub(crate) fn minimize_bfgs<F>(
    f: F,
    x0: Vec<f64>,
    max_iter: usize,
    tol: f64,
    divergence_norm: f64,
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let p = x0.len();
    let mut x = x0;
    let (mut fx, mut gx) = f(&x);
    if !fx.is_finite() {
        return Err(Error::Numeric(
            "objective not finite at the starting point".into(),
        ));
    }

    // Inverse Hessian approximation, started at the identity.
    let mut h = vec![0.0; p * p];
    for i in 0..p {
        h[i * p + i] = 1.0;
    }

    let mut iterations = 0;
    for iter in 1..=max_iter {
        iterations = iter;
        if inf_norm(&gx) <= tol * fx.abs().max(1.0) {
            return Ok(OptimResult {
                theta: x,
                nll: fx,
                grad_norm: inf_norm(&gx),
                iterations: iter - 1,
            });
        }

        // d = -H g
        let mut d = vec![0.0; p];
        for i in 0..p {
            let mut s = 0.0;
            for j in 0..p {
                s -= h[i * p + j] * gx[j];
            }
            d[i] = s;
        }
        let mut slope: f64 = d.iter().zip(&gx).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // Not a descent direction; reset to steepest descent.
            for i in 0..p {
                d[i] = -gx[i];
                for j in 0..p {
                    h[i * p + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            slope = -gx.iter().map(|g| g * g).sum::<f64>();
        }

        // Backtracking Armijo search.
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let (fn_, gn) = f(&xn);
            if fn_.is_finite() && fn_ <= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            // Line search stalled; accept if the gradient is already small.
            let loose = tol.sqrt() * fx.abs().max(1.0);
            let gnorm = inf_norm(&gx);
            return if gnorm <= loose {
                Ok(OptimResult {
                    theta: x,
                    nll: fx,
                    grad_norm: gnorm,
                    iterations: iter,
                })
            } else {
                Err(Error::Convergence {
                    iterations: iter,
                    gradient_norm: gnorm,
                    last_iterate: x,
                })
            };
        };

        if inf_norm(&xn) > divergence_norm {
            return Err(Error::Divergence(format!(
                "coefficient norm exceeded {divergence_norm:.0} after {iter} iterations (possible separation)"
            )));
        }

        // BFGS update of the inverse Hessian.
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let s_norm: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm: f64 = yv.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-12 * s_norm * y_norm {
            let rho = 1.0 / sy;
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let mut hy = vec![0.0; p];
            for i in 0..p {
                let mut acc = 0.0;
                for j in 0..p {
                    acc += h[i * p + j] * yv[j];
                }
                hy[i] = acc;
            }
            let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..p {
                for j in 0..p {
                    h[i * p + j] += rho * rho * yhy * s[i] * s[j] + rho * s[i] * s[j]
                        - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }

        x = xn;
        fx = fn_;
        gx = gn;
    }

    // BFGS can crawl near the optimum on ill-conditioned surfaces (many
    // one-hot columns, dispersion blocks). A few Newton steps with a
    // finite-difference Hessian of the analytic gradient finish the job.
    for _ in 0..8 {
        let gnorm = inf_norm(&gx);
        if gnorm <= tol * fx.abs().max(1.0) {
            return Ok(OptimResult {
                theta: x,
                nll: fx,
                grad_norm: gnorm,
                iterations,
            });
        }
        let hess = fd_hessian_of_grad(&f, &x);
        let Ok(step) = crate::linalg::solve_spd(&hess, &gx) else {
            break;
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(&step).map(|(xi, di)| xi - alpha * di).collect();
            let (fn_, gn) = f(&xn);
            if fn_.is_finite() && fn_ <= fx {
                if inf_norm(&xn) > divergence_norm {
                    return Err(Error::Divergence(format!(
                        "coefficient norm exceeded {divergence_norm:.0} (possible separation)"
                    )));
                }
                x = xn;
                fx = fn_;
                gx = gn;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !improved {
            break;
        }
    }

    let gnorm = inf_norm(&gx);
    if gnorm <= tol.sqrt() * fx.abs().max(1.0) {
        Ok(OptimResult {
            theta: x,
            nll: fx,
            grad_norm: gnorm,
            iterations,
        })
    } else {
        Err(Error::Convergence {
            iterations,
            gradient_norm: gnorm,
            last_iterate: x,
        })
    }
}

/// Symmetrized finite-difference Hessian built from the analytic gradient.
pub(crate) fn fd_hessian_of_grad<F>(f: &F, theta: &[f64]) -> crate::linalg::Matrix
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let p = theta.len();
    let mut hess = crate::linalg::Matrix::zeros(p, p);
    for j in 0..p {
        let h = 1e-5 * theta[j].abs().max(1.0);
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[j] += h;
        dn[j] -= h;
        let (_, gu) = f(&up);
        let (_, gd) = f(&dn);
        for i in 0..p {
            hess.set(i, j, (gu[i] - gd[i]) / (2.0 * h));
        }
    }
    let mut sym = crate::linalg::Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            sym.set(i, j, 0.5 * (hess.get(i, j) + hess.get(j, i)));
        }
    }
    sym
}
