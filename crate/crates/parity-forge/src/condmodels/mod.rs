//! Conditional distribution estimation with a uniform CDF-evaluation
//! contract: six families, fitted by maximum likelihood.

mod loglik;
mod optim;

pub use loglik::{neg_binomial_cdf, poisson_cdf};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::empirical::Ecdf;
use crate::error::{Error, Result};
use crate::linalg::{inverse_spd, Matrix};
use crate::special::norm_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    EmpiricalByGroup,
    GaussianLinear,
    LogisticBinary,
    Poisson,
    ZeroInflatedPoisson,
    ZeroInflatedNegBin,
}

impl Family {
    pub fn is_count(&self) -> bool {
        matches!(
            self,
            Family::Poisson | Family::ZeroInflatedPoisson | Family::ZeroInflatedNegBin
        )
    }

    /// Whether the fitted distribution has atoms (needs left limits and
    /// stochastic transport).
    pub fn is_atomic(&self) -> bool {
        !matches!(self, Family::GaussianLinear)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Zero-inflation probability depends on the covariates (true) or on an
    /// intercept only (false).
    pub zero_covariates: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 200,
            tol: 1e-8,
            zero_covariates: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub log_likelihood: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub degenerate: bool,
    pub standard_errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    /// Covariate column names, intercept first.
    pub columns: Vec<String>,
    pub zero_covariates: bool,
}

impl DesignSpec {
    pub fn unnamed(width: usize, zero_covariates: bool) -> Self {
        DesignSpec {
            columns: (0..width)
                .map(|j| if j == 0 { "(intercept)".to_string() } else { format!("x{j}") })
                .collect(),
            zero_covariates,
        }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }
}

/// One evaluation row: a numeric covariate vector for regression families,
/// or a group label for the grouped empirical family.
#[derive(Debug, Clone, Copy)]
pub enum DesignRow<'a> {
    Numeric(&'a [f64]),
    Group(&'a str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Params {
    EmpiricalByGroup { groups: BTreeMap<String, Ecdf> },
    GaussianLinear { coef: Vec<f64>, scale: f64 },
    LogisticBinary { coef: Vec<f64> },
    Poisson { coef: Vec<f64> },
    ZeroInflatedPoisson { zero_coef: Vec<f64>, rate_coef: Vec<f64> },
    ZeroInflatedNegBin { zero_coef: Vec<f64>, rate_coef: Vec<f64>, dispersion: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondModel {
    pub params: Params,
    pub design: DesignSpec,
    pub diagnostics: FitDiagnostics,
}

impl CondModel {
    pub fn family(&self) -> Family {
        match self.params {
            Params::EmpiricalByGroup { .. } => Family::EmpiricalByGroup,
            Params::GaussianLinear { .. } => Family::GaussianLinear,
            Params::LogisticBinary { .. } => Family::LogisticBinary,
            Params::Poisson { .. } => Family::Poisson,
            Params::ZeroInflatedPoisson { .. } => Family::ZeroInflatedPoisson,
            Params::ZeroInflatedNegBin { .. } => Family::ZeroInflatedNegBin,
        }
    }

    /// Build a model from explicit parameters (oracle checks, provenance
    /// round trips). Diagnostics are zeroed.
    pub fn from_parts(params: Params, design: DesignSpec) -> Self {
        CondModel {
            params,
            design,
            diagnostics: FitDiagnostics {
                log_likelihood: 0.0,
                iterations: 0,
                gradient_norm: 0.0,
                degenerate: false,
                standard_errors: None,
            },
        }
    }

    fn numeric_row<'a>(&self, row: &DesignRow<'a>) -> Result<&'a [f64]> {
        match row {
            DesignRow::Numeric(v) => {
                if v.len() != self.design.width() {
                    return Err(Error::Contract(format!(
                        "design row has {} entries, model expects {}",
                        v.len(),
                        self.design.width()
                    )));
                }
                Ok(v)
            }
            DesignRow::Group(_) => Err(Error::Contract(
                "regression family evaluated with a group label row".into(),
            )),
        }
    }

    fn zero_eta(&self, zero_coef: &[f64], row: &[f64]) -> f64 {
        if self.design.zero_covariates {
            zero_coef.iter().zip(row).map(|(c, x)| c * x).sum()
        } else {
            zero_coef[0]
        }
    }

    fn linear(&self, coef: &[f64], row: &[f64]) -> f64 {
        coef.iter().zip(row).map(|(c, x)| c * x).sum()
    }

    /// P(X <= x | covariates) under the fitted family.
    pub fn eval_cdf(&self, x: f64, row: &DesignRow) -> Result<f64> {
        match &self.params {
            Params::EmpiricalByGroup { groups } => {
                let key = match row {
                    DesignRow::Group(g) => *g,
                    DesignRow::Numeric(_) => {
                        return Err(Error::Contract(
                            "grouped empirical family evaluated with a numeric row".into(),
                        ))
                    }
                };
                let ecdf = groups
                    .get(key)
                    .ok_or_else(|| Error::UnknownGroup(key.to_string()))?;
                Ok(ecdf.eval(x))
            }
            Params::GaussianLinear { coef, scale } => {
                let r = self.numeric_row(row)?;
                let mu = self.linear(coef, r);
                if *scale == 0.0 {
                    Ok(if x >= mu { 1.0 } else { 0.0 })
                } else {
                    Ok(norm_cdf((x - mu) / scale))
                }
            }
            Params::LogisticBinary { coef } => {
                let r = self.numeric_row(row)?;
                let p = sigmoid(self.linear(coef, r));
                Ok(if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - p
                } else {
                    1.0
                })
            }
            Params::Poisson { coef } => {
                let r = self.numeric_row(row)?;
                let lambda = self.linear(coef, r).exp();
                Ok(poisson_cdf(x, lambda))
            }
            Params::ZeroInflatedPoisson { zero_coef, rate_coef } => {
                let r = self.numeric_row(row)?;
                if x < 0.0 {
                    return Ok(0.0);
                }
                let pi = sigmoid(self.zero_eta(zero_coef, r));
                let lambda = self.linear(rate_coef, r).exp();
                Ok(pi + (1.0 - pi) * poisson_cdf(x, lambda))
            }
            Params::ZeroInflatedNegBin { zero_coef, rate_coef, dispersion } => {
                let r = self.numeric_row(row)?;
                if x < 0.0 {
                    return Ok(0.0);
                }
                let pi = sigmoid(self.zero_eta(zero_coef, r));
                let mu = self.linear(rate_coef, r).exp();
                Ok(pi + (1.0 - pi) * neg_binomial_cdf(x, mu, *dispersion))
            }
        }
    }

    /// Left limit P(X < x | covariates). Only meaningful for atomic families;
    /// the continuous gaussian family rejects the call.
    pub fn eval_cdf_left(&self, x: f64, row: &DesignRow) -> Result<f64> {
        match &self.params {
            Params::GaussianLinear { .. } => Err(Error::Contract(
                "left-limit CDF requested from a continuous family".into(),
            )),
            Params::EmpiricalByGroup { groups } => {
                let key = match row {
                    DesignRow::Group(g) => *g,
                    DesignRow::Numeric(_) => {
                        return Err(Error::Contract(
                            "grouped empirical family evaluated with a numeric row".into(),
                        ))
                    }
                };
                let ecdf = groups
                    .get(key)
                    .ok_or_else(|| Error::UnknownGroup(key.to_string()))?;
                Ok(ecdf.eval_left(x))
            }
            // Integer-count families: P(X < x) = P(X <= ceil(x) - 1).
            _ => {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                self.eval_cdf(x.ceil() - 1.0, row)
            }
        }
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

fn check_counts(y: &[f64]) -> Result<()> {
    for (i, &v) in y.iter().enumerate() {
        if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
            return Err(Error::Contract(format!(
                "count family requires non-negative integers; found {v} at row {i}"
            )));
        }
    }
    Ok(())
}

fn check_binary(y: &[f64]) -> Result<()> {
    for (i, &v) in y.iter().enumerate() {
        if v != 0.0 && v != 1.0 {
            return Err(Error::Contract(format!(
                "logistic family requires 0/1 responses; found {v} at row {i}"
            )));
        }
    }
    Ok(())
}

fn intercept_only(n: usize) -> Matrix {
    Matrix::from_columns(&[vec![1.0; n]])
}

/// Negative log-likelihood and gradient for a regression family at packed
/// parameters; the audit surface behind the finite-difference checks.
///
/// Packing: gaussian `[beta.., ln_sigma]`; logistic/poisson `[beta..]`;
/// zip `[gamma.., beta..]`; zinb `[gamma.., beta.., ln_theta]`, where the
/// zero part has the width of `x` when `zero_covariates` and width 1 otherwise.
pub fn family_nll_grad(
    family: Family,
    y: &[f64],
    x: &Matrix,
    zero_covariates: bool,
    packed: &[f64],
) -> Result<(f64, Vec<f64>)> {
    if y.len() != x.nrows() {
        return Err(Error::Contract(format!(
            "{} responses but {} design rows",
            y.len(),
            x.nrows()
        )));
    }
    let zx;
    let zxr: &Matrix = if zero_covariates {
        x
    } else {
        zx = intercept_only(y.len());
        &zx
    };
    let expected = packed_len(family, x.ncols(), zxr.ncols())?;
    if packed.len() != expected {
        return Err(Error::Contract(format!(
            "expected {expected} packed parameters, got {}",
            packed.len()
        )));
    }
    Ok(match family {
        Family::GaussianLinear => loglik::nll_grad_gaussian(y, x, packed),
        Family::LogisticBinary => loglik::nll_grad_logistic(y, x, packed),
        Family::Poisson => loglik::nll_grad_poisson(y, x, packed),
        Family::ZeroInflatedPoisson => loglik::nll_grad_zip(y, x, zxr, packed),
        Family::ZeroInflatedNegBin => loglik::nll_grad_zinb(y, x, zxr, packed),
        Family::EmpiricalByGroup => {
            return Err(Error::Contract(
                "the grouped empirical family has no likelihood surface".into(),
            ))
        }
    })
}

fn packed_len(family: Family, p: usize, pz: usize) -> Result<usize> {
    Ok(match family {
        Family::GaussianLinear => p + 1,
        Family::LogisticBinary | Family::Poisson => p,
        Family::ZeroInflatedPoisson => pz + p,
        Family::ZeroInflatedNegBin => pz + p + 1,
        Family::EmpiricalByGroup => {
            return Err(Error::Contract("empirical family has no packed parameters".into()))
        }
    })
}

/// Observed-information standard errors: finite differences of the analytic
/// gradient give the Hessian of the negative log-likelihood at the optimum.
fn standard_errors<F>(f: &F, theta: &[f64]) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let p = theta.len();
    let mut hess = Matrix::zeros(p, p);
    for j in 0..p {
        let h = 1e-5 * theta[j].abs().max(1.0);
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[j] += h;
        dn[j] -= h;
        let (fu, gu) = f(&up);
        let (fd, gd) = f(&dn);
        if !fu.is_finite() || !fd.is_finite() {
            return None;
        }
        for i in 0..p {
            hess.set(i, j, (gu[i] - gd[i]) / (2.0 * h));
        }
    }
    // Symmetrize before inverting.
    let mut sym = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            sym.set(i, j, 0.5 * (hess.get(i, j) + hess.get(j, i)));
        }
    }
    let inv = inverse_spd(&sym).ok()?;
    let mut se = Vec::with_capacity(p);
    for i in 0..p {
        let v = inv.get(i, i);
        if v < 0.0 {
            return None;
        }
        se.push(v.sqrt());
    }
    Some(se)
}

/// Maximum-likelihood fit of a regression family. The gaussian family is
/// closed-form least squares with the MLE variance; the rest run the shared
/// quasi-Newton optimizer.
pub fn fit_conditional(
    family: Family,
    y: &[f64],
    x: &Matrix,
    opts: &FitOptions,
) -> Result<CondModel> {
    if y.len() != x.nrows() {
        return Err(Error::Contract(format!(
            "{} responses but {} design rows",
            y.len(),
            x.nrows()
        )));
    }
    if y.is_empty() {
        return Err(Error::InsufficientData("empty response".into()));
    }
    let n = y.len();
    let p = x.ncols();
    let design = DesignSpec::unnamed(p, opts.zero_covariates);

    match family {
        Family::EmpiricalByGroup => Err(Error::Contract(
            "use fit_empirical_by_group for the grouped empirical family".into(),
        )),
        Family::GaussianLinear => {
            let gram = x.gram();
            let rhs = x.t_vec(y);
            let coef = crate::linalg::solve_spd(&gram, &rhs)?;
            let mut sse = 0.0;
            for i in 0..n {
                let r = y[i] - x.dot_row(i, &coef);
                sse += r * r;
            }
            let scale = (sse / n as f64).sqrt();
            let mean_y = y.iter().sum::<f64>() / n as f64;
            let sd_y = (y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>() / n as f64).sqrt();
            let degenerate = scale <= 1e-10 * (1.0 + sd_y);
            let (log_likelihood, se) = if degenerate {
                (f64::INFINITY, None)
            } else {
                let mut packed = coef.clone();
                packed.push(scale.ln());
                let ll = -loglik::nll_grad_gaussian(y, x, &packed).0;
                let se = standard_errors(&|t: &[f64]| loglik::nll_grad_gaussian(y, x, t), &packed);
                (ll, se)
            };
            Ok(CondModel {
                params: Params::GaussianLinear { coef, scale },
                design,
                diagnostics: FitDiagnostics {
                    log_likelihood,
                    iterations: 0,
                    gradient_norm: 0.0,
                    degenerate,
                    standard_errors: se,
                },
            })
        }
        Family::LogisticBinary => {
            check_binary(y)?;
            let mean = y.iter().sum::<f64>() / n as f64;
            let pbar = mean.clamp(1.0 / (n as f64 + 1.0), n as f64 / (n as f64 + 1.0));
            let mut start = vec![0.0; p];
            start[0] = (pbar / (1.0 - pbar)).ln().clamp(-5.0, 5.0);
            let obj = |t: &[f64]| loglik::nll_grad_logistic(y, x, t);
            let res = optim::minimize_bfgs(obj, start, opts.max_iter, opts.tol, 1e3)?;
            // A deviance this close to zero means every observation is fitted
            // with probability ~1: the data are separated and the MLE does
            // not exist.
            if res.nll < 1e-6 {
                return Err(Error::Divergence(
                    "perfect separation: fitted probabilities reached the boundary".into(),
                ));
            }
            let se = standard_errors(&obj, &res.theta);
            Ok(CondModel {
                params: Params::LogisticBinary { coef: res.theta.clone() },
                design,
                diagnostics: FitDiagnostics {
                    log_likelihood: -res.nll,
                    iterations: res.iterations,
                    gradient_norm: res.grad_norm,
                    degenerate: false,
                    standard_errors: se,
                },
            })
        }
        Family::Poisson => {
            check_counts(y)?;
            let mean = y.iter().sum::<f64>() / n as f64;
            if mean == 0.0 {
                return Err(Error::DegenerateFit("all counts are zero".into()));
            }
            let mut start = vec![0.0; p];
            start[0] = mean.ln();
            let obj = |t: &[f64]| loglik::nll_grad_poisson(y, x, t);
            let res = optim::minimize_bfgs(obj, start, opts.max_iter, opts.tol, 1e3)?;
            let se = standard_errors(&obj, &res.theta);
            Ok(CondModel {
                params: Params::Poisson { coef: res.theta.clone() },
                design,
                diagnostics: FitDiagnostics {
                    log_likelihood: -res.nll,
                    iterations: res.iterations,
                    gradient_norm: res.grad_norm,
                    degenerate: false,
                    standard_errors: se,
                },
            })
        }
        Family::ZeroInflatedPoisson | Family::ZeroInflatedNegBin => {
            check_counts(y)?;
            let nonzero: Vec<f64> = y.iter().copied().filter(|&v| v > 0.0).collect();
            if nonzero.is_empty() {
                return Err(Error::DegenerateFit(
                    "all counts are zero; a zero-inflated fit is unidentifiable".into(),
                ));
            }
            let zero_frac = (n - nonzero.len()) as f64 / n as f64;
            let mu_nz = nonzero.iter().sum::<f64>() / nonzero.len() as f64;
            // Moment-based split of the zeros between the structural and
            // count components.
            let p0_count = (-mu_nz).exp();
            let pi0 = ((zero_frac - p0_count) / (1.0 - p0_count)).clamp(0.02, 0.98);

            let zx;
            let zxr: &Matrix = if opts.zero_covariates {
                x
            } else {
                zx = intercept_only(n);
                &zx
            };
            let pz = zxr.ncols();
            let total = packed_len(family, p, pz)?;
            let mut start = vec![0.0; total];
            start[0] = (pi0 / (1.0 - pi0)).ln();
            start[pz] = mu_nz.ln();
            if family == Family::ZeroInflatedNegBin {
                let mean = y.iter().sum::<f64>() / n as f64;
                let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                let theta0 = if var > mean {
                    (mean * mean / (var - mean)).clamp(0.05, 1e4)
                } else {
                    10.0
                };
                start[total - 1] = theta0.ln();
            }

            let zip = family == Family::ZeroInflatedPoisson;
            let obj = |t: &[f64]| {
                if zip {
                    loglik::nll_grad_zip(y, x, zxr, t)
                } else {
                    loglik::nll_grad_zinb(y, x, zxr, t)
                }
            };
            // Dispersion running to +inf means the data carry no
            // overdispersion and the negbin MLE sits on the Poisson
            // boundary. The surface is flat there, so the optimizer cannot
            // meet the gradient tolerance; freeze ln(theta) at the boundary
            // and refit the remaining coefficients.
            const TAU_BOUNDARY: f64 = 8.0;
            let mut at_boundary = false;
            let res = match optim::minimize_bfgs(&obj, start, opts.max_iter, opts.tol, 1e3) {
                Ok(r) => r,
                Err(Error::Convergence { ref last_iterate, .. })
                    if !zip && *last_iterate.last().unwrap() > TAU_BOUNDARY =>
                {
                    at_boundary = true;
                    let reduced_obj = |t: &[f64]| {
                        let mut full = t.to_vec();
                        full.push(TAU_BOUNDARY);
                        let (v, mut g) = obj(&full);
                        g.pop();
                        (v, g)
                    };
                    let reduced_start = last_iterate[..total - 1].to_vec();
                    let mut r =
                        optim::minimize_bfgs(&reduced_obj, reduced_start, opts.max_iter, opts.tol, 1e3)?;
                    r.theta.push(TAU_BOUNDARY);
                    r
                }
                Err(e) => return Err(e),
            };
            let se = if at_boundary {
                let reduced_obj = |t: &[f64]| {
                    let mut full = t.to_vec();
                    full.push(TAU_BOUNDARY);
                    let (v, mut g) = obj(&full);
                    g.pop();
                    (v, g)
                };
                standard_errors(&reduced_obj, &res.theta[..total - 1]).map(|mut s| {
                    s.push(0.0); // dispersion held fixed at the boundary
                    s
                })
            } else {
                standard_errors(&obj, &res.theta)
            };
            let params = if zip {
                Params::ZeroInflatedPoisson {
                    zero_coef: res.theta[..pz].to_vec(),
                    rate_coef: res.theta[pz..].to_vec(),
                }
            } else {
                Params::ZeroInflatedNegBin {
                    zero_coef: res.theta[..pz].to_vec(),
                    rate_coef: res.theta[pz..pz + p].to_vec(),
                    dispersion: res.theta[pz + p].exp(),
                }
            };
            Ok(CondModel {
                params,
                design,
                diagnostics: FitDiagnostics {
                    log_likelihood: -res.nll,
                    iterations: res.iterations,
                    gradient_norm: res.grad_norm,
                    degenerate: false,
                    standard_errors: se,
                },
            })
        }
    }
}

/// One empirical CDF per group level; evaluation dispatches on the row's
/// group label.
pub fn fit_empirical_by_group(y: &[f64], groups: &[String]) -> Result<CondModel> {
    if y.len() != groups.len() {
        return Err(Error::Contract(format!(
            "{} values but {} group labels",
            y.len(),
            groups.len()
        )));
    }
    let mut by_group: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (v, g) in y.iter().zip(groups) {
        by_group.entry(g.clone()).or_default().push(*v);
    }
    let mut ecdfs = BTreeMap::new();
    for (g, vals) in by_group {
        if vals.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group `{g}` has {} observation(s); at least 2 required",
                vals.len()
            )));
        }
        ecdfs.insert(g, Ecdf::from_samples(&vals)?);
    }
    Ok(CondModel {
        params: Params::EmpiricalByGroup { groups: ecdfs },
        design: DesignSpec {
            columns: vec!["(group)".to_string()],
            zero_covariates: false,
        },
        diagnostics: FitDiagnostics {
            log_likelihood: f64::NAN,
            iterations: 0,
            gradient_norm: 0.0,
            degenerate: false,
            standard_errors: None,
        },
    })
}
