//! Log-likelihoods, analytic gradients, and count CDFs for the model families.
//!
//! Parameter packing conventions (what the optimizer sees):
//!   gaussian:  [beta.., ln_sigma]
//!   logistic:  [beta..]
//!   poisson:   [beta..]
//!   zip:       [gamma.. (zero part), beta.. (rate part)]
//!   zinb:      [gamma.., beta.., ln_theta]
//!
//! All functions return the *negative* log-likelihood and its gradient.
//! Non-finite intermediate values yield `(inf, 0)` so the line search
//! rejects the step instead of propagating NaN.

use crate::linalg::Matrix;
use crate::special::{digamma, ln_gamma, reg_gamma_upper};

const LN_2PI: f64 = 1.837877066409345483560659472811;
const ETA_MAX: f64 = 700.0;

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn logsumexp2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn reject(p: usize) -> (f64, Vec<f64>) {
    (f64::INFINITY, vec![0.0; p])
}

pub(crate) fn nll_grad_gaussian(y: &[f64], x: &Matrix, theta: &[f64]) -> (f64, Vec<f64>) {
    let p = x.ncols();
    debug_assert_eq!(theta.len(), p + 1);
    let beta = &theta[..p];
    let ln_sigma = theta[p];
    if ln_sigma > 300.0 || ln_sigma < -300.0 {
        return reject(theta.len());
    }
    let sigma2 = (2.0 * ln_sigma).exp();
    let n = y.len() as f64;
    let mut sse = 0.0;
    let mut grad = vec![0.0; p + 1];
    for i in 0..y.len() {
        let r = y[i] - x.dot_row(i, beta);
        sse += r * r;
        for (gj, &xij) in grad[..p].iter_mut().zip(x.row(i)) {
            *gj -= r * xij; // d nll / d beta_j accumulates -(r * x) / sigma^2
        }
    }
    for gj in grad[..p].iter_mut() {
        *gj /= sigma2;
    }
    grad[p] = n - sse / sigma2;
    let nll = 0.5 * n * LN_2PI + n * ln_sigma + 0.5 * sse / sigma2;
    if !nll.is_finite() {
        return reject(theta.len());
    }
    (nll, grad)
}

pub(crate) fn nll_grad_logistic(y: &[f64], x: &Matrix, theta: &[f64]) -> (f64, Vec<f64>) {
    let p = x.ncols();
    debug_assert_eq!(theta.len(), p);
    let mut nll = 0.0;
    let mut grad = vec![0.0; p];
    for i in 0..y.len() {
        let eta = x.dot_row(i, theta);
        nll += softplus(eta) - y[i] * eta;
        let d = sigmoid(eta) - y[i];
        for (gj, &xij) in grad.iter_mut().zip(x.row(i)) {
            *gj += d * xij;
        }
    }
    if !nll.is_finite() {
        return reject(p);
    }
    (nll, grad)
}

pub(crate) fn nll_grad_poisson(y: &[f64], x: &Matrix, theta: &[f64]) -> (f64, Vec<f64>) {
    let p = x.ncols();
    debug_assert_eq!(theta.len(), p);
    let mut nll = 0.0;
    let mut grad = vec![0.0; p];
    for i in 0..y.len() {
        let eta = x.dot_row(i, theta);
        if eta > ETA_MAX {
            return reject(p);
        }
        let lambda = eta.exp();
        nll += lambda - y[i] * eta + ln_gamma(y[i] + 1.0);
        let d = lambda - y[i];
        for (gj, &xij) in grad.iter_mut().zip(x.row(i)) {
            *gj += d * xij;
        }
    }
    if !nll.is_finite() {
        return reject(p);
    }
    (nll, grad)
}

/// Zero-inflated Poisson. `zx` is the zero-part design.
pub(crate) fn nll_grad_zip(
    y: &[f64],
    x: &Matrix,
    zx: &Matrix,
    theta: &[f64],
) -> (f64, Vec<f64>) {
    let pz = zx.ncols();
    let pr = x.ncols();
    debug_assert_eq!(theta.len(), pz + pr);
    let gamma = &theta[..pz];
    let beta = &theta[pz..];
    let mut nll = 0.0;
    let mut grad = vec![0.0; pz + pr];
    for i in 0..y.len() {
        let eta_z = zx.dot_row(i, gamma);
        let eta = x.dot_row(i, beta);
        if eta > ETA_MAX {
            return reject(theta.len());
        }
        let lambda = eta.exp();
        let ln_pi = -softplus(-eta_z);
        let ln_one_minus_pi = -softplus(eta_z);
        if y[i] == 0.0 {
            let ln_d = logsumexp2(ln_pi, ln_one_minus_pi - lambda);
            nll -= ln_d;
            // d ll / d eta_z = pi (1-pi) (1 - e^{-lambda}) / D
            let one_minus_exp = -(-lambda).exp_m1();
            let gz = if one_minus_exp > 0.0 {
                (ln_pi + ln_one_minus_pi + one_minus_exp.ln() - ln_d).exp()
            } else {
                0.0
            };
            // d ll / d eta = -(1-pi) e^{-lambda} lambda / D
            let gr = -(ln_one_minus_pi - lambda + lambda.ln() - ln_d).exp();
            for (gj, &zij) in grad[..pz].iter_mut().zip(zx.row(i)) {
                *gj -= gz * zij;
            }
            for (gj, &xij) in grad[pz..].iter_mut().zip(x.row(i)) {
                *gj -= gr * xij;
            }
        } else {
            nll -= ln_one_minus_pi + y[i] * eta - lambda - ln_gamma(y[i] + 1.0);
            let gz = -sigmoid(eta_z); // d ll / d eta_z
            let gr = y[i] - lambda;
            for (gj, &zij) in grad[..pz].iter_mut().zip(zx.row(i)) {
                *gj -= gz * zij;
            }
            for (gj, &xij) in grad[pz..].iter_mut().zip(x.row(i)) {
                *gj -= gr * xij;
            }
        }
    }
    if !nll.is_finite() {
        return reject(theta.len());
    }
    (nll, grad)
}

/// Zero-inflated negative binomial in the mean–dispersion parameterization:
/// variance mu + mu^2 / theta, theta = exp(last parameter).
pub(crate) fn nll_grad_zinb(
    y: &[f64],
    x: &Matrix,
    zx: &Matrix,
    theta_packed: &[f64],
) -> (f64, Vec<f64>) {
    let pz = zx.ncols();
    let pr = x.ncols();
    debug_assert_eq!(theta_packed.len(), pz + pr + 1);
    let gamma = &theta_packed[..pz];
    let beta = &theta_packed[pz..pz + pr];
    let tau = theta_packed[pz + pr];
    if !(-30.0..=30.0).contains(&tau) {
        return reject(theta_packed.len());
    }
    let theta = tau.exp();
    let ln_theta = tau;
    let psi_theta = digamma(theta);

    let mut nll = 0.0;
    let mut grad = vec![0.0; theta_packed.len()];
    for i in 0..y.len() {
        let eta_z = zx.dot_row(i, gamma);
        let eta = x.dot_row(i, beta);
        if eta > ETA_MAX {
            return reject(theta_packed.len());
        }
        let mu = eta.exp();
        let ln_theta_plus_mu = logsumexp2(ln_theta, eta);
        let ln_pi = -softplus(-eta_z);
        let ln_one_minus_pi = -softplus(eta_z);
        // ln f0 = -theta ln(1 + mu/theta)
        let ln_f0 = -theta * (mu / theta).ln_1p();
        if y[i] == 0.0 {
            let ln_d = logsumexp2(ln_pi, ln_one_minus_pi + ln_f0);
            nll -= ln_d;
            let one_minus_f0 = -ln_f0.exp_m1();
            let gz = if one_minus_f0 > 0.0 {
                (ln_pi + ln_one_minus_pi + one_minus_f0.ln() - ln_d).exp()
            } else {
                0.0
            };
            // d ll / d eta = -(1-pi) f0 theta mu / ((theta+mu) D)
            let gr = -(ln_one_minus_pi + ln_f0 + ln_theta + eta - ln_theta_plus_mu - ln_d).exp();
            // d ll / d tau = (1-pi) f0 theta [mu/(theta+mu) - ln(1+mu/theta)] / D
            let bracket = mu / (theta + mu) - (mu / theta).ln_1p();
            let gt = (ln_one_minus_pi + ln_f0 + ln_theta - ln_d).exp() * bracket;
            for (gj, &zij) in grad[..pz].iter_mut().zip(zx.row(i)) {
                *gj -= gz * zij;
            }
            for (gj, &xij) in grad[pz..pz + pr].iter_mut().zip(x.row(i)) {
                *gj -= gr * xij;
            }
            grad[pz + pr] -= gt;
        } else {
            let yi = y[i];
            let ll = ln_one_minus_pi + ln_gamma(yi + theta) - ln_gamma(theta) - ln_gamma(yi + 1.0)
                + theta * (ln_theta - ln_theta_plus_mu)
                + yi * (eta - ln_theta_plus_mu);
            nll -= ll;
            let gz = -sigmoid(eta_z);
            let gr = yi - mu * (yi + theta) / (theta + mu);
            let gt = theta
                * (digamma(yi + theta) - psi_theta + ln_theta - ln_theta_plus_mu + 1.0
                    - (theta + yi) / (theta + mu));
            for (gj, &zij) in grad[..pz].iter_mut().zip(zx.row(i)) {
                *gj -= gz * zij;
            }
            for (gj, &xij) in grad[pz..pz + pr].iter_mut().zip(x.row(i)) {
                *gj -= gr * xij;
            }
            grad[pz + pr] -= gt;
        }
    }
    if !nll.is_finite() {
        return reject(theta_packed.len());
    }
    (nll, grad)
}

/// Poisson CDF P(X <= k) at integer k = floor(x).
///
/// Small rates use the pmf recurrence with early termination; for large
/// rates or far-right arguments this switches to the regularized upper
/// incomplete gamma identity P(X <= k) = Q(k+1, lambda).
pub fn poisson_cdf(x: f64, lambda: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let k = x.floor();
    if lambda == 0.0 {
        return 1.0;
    }
    if lambda > 600.0 || k > 20_000.0 {
        return reg_gamma_upper(k + 1.0, lambda);
    }
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    let mut j = 0.0;
    while j < k {
        j += 1.0;
        pmf *= lambda / j;
        cdf += pmf;
        if 1.0 - cdf < 1e-16 && j > lambda {
            return 1.0_f64.min(cdf.max(1.0 - 1e-16));
        }
    }
    cdf.min(1.0)
}

/// Negative binomial CDF P(Y <= k) in the mean–dispersion parameterization.
pub fn neg_binomial_cdf(x: f64, mu: f64, theta: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let k = x.floor();
    let ratio = mu / (theta + mu);
    let ln_f0 = -theta * (mu / theta).ln_1p();
    if ln_f0 > -700.0 {
        let mut pmf = ln_f0.exp();
        let mut cdf = pmf;
        let mut j = 0.0;
        while j < k {
            pmf *= (j + theta) / (j + 1.0) * ratio;
            cdf += pmf;
            j += 1.0;
            if 1.0 - cdf < 1e-16 && j > mu {
                return 1.0_f64.min(cdf.max(1.0 - 1e-16));
            }
        }
        cdf.min(1.0)
    } else {
        // f(0) underflows; accumulate in log space.
        let ln_ratio = ratio.ln();
        let mut ln_pmf = ln_f0;
        let mut terms = vec![ln_pmf];
        let mut j = 0.0;
        while j < k && terms.len() < 2_000_000 {
            ln_pmf += ((j + theta) / (j + 1.0)).ln() + ln_ratio;
            terms.push(ln_pmf);
            j += 1.0;
        }
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return 0.0;
        }
        let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
        (m + s.ln()).exp().min(1.0)
    }
}
