//! The transformation engine: univariate optimal-transport quantile maps
//! and the chained multivariate transformation producing M adjusted
//! replicates.
//!
//! Continuous variables are mapped deterministically through their fitted
//! conditional CDF; atomic variables draw a uniform on the CDF interval
//! (F(x-), F(x)] and push it through the marginal quantile function. Every
//! draw is keyed by `(seed, replicate, step, row)`, so ensembles are
//! reproducible across runs and thread counts.

use serde::{Deserialize, Serialize};

use crate::condmodels::{
    fit_conditional, fit_empirical_by_group, CondModel, DesignRow, Family, FitOptions,
};
use crate::data::{ColumnData, ColumnSpec, Dataset, Role, Scale};
use crate::empirical::Ecdf;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::parallel::parallel_map;
use crate::rng::StreamKey;

const STAGE_TRANSFORM: u64 = 0x54_52_41_4e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    Mutual,
    Pairwise,
}

/// Recipe for a discretized companion of an already-adjusted column:
/// fixed cutpoints plus empirical quantiles of the adjusted values,
/// recomputed per replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanionSpec {
    pub source: String,
    #[serde(default)]
    pub fixed_cutpoints: Vec<f64>,
    #[serde(default)]
    pub quantile_probs: Vec<f64>,
}

impl CompanionSpec {
    /// Resolve the recipe against one replicate's adjusted source column:
    /// ascending, deduplicated cutpoints.
    pub fn resolve_cutpoints(&self, adjusted_source: &[f64]) -> Result<Vec<f64>> {
        let mut cuts = self.fixed_cutpoints.clone();
        if !self.quantile_probs.is_empty() {
            let ecdf = Ecdf::from_samples(adjusted_source)?;
            for &p in &self.quantile_probs {
                cuts.push(ecdf.quantile(p)?);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        Ok(cuts)
    }
}

/// Bin index per value for bins (-inf, c1], (c1, c2], ..., (ck, inf).
pub fn make_companions(values: &[f64], cutpoints: &[f64]) -> Vec<u32> {
    debug_assert!(cutpoints.windows(2).all(|w| w[0] < w[1]), "cutpoints must ascend");
    values
        .iter()
        .map(|&v| cutpoints.partition_point(|&c| c < v) as u32)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub column: String,
    pub family: Family,
    #[serde(default)]
    pub companions: Vec<CompanionSpec>,
    /// Zero-inflation probability depends on covariates (default) or only
    /// on an intercept.
    #[serde(default = "default_true")]
    pub zero_covariates: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPlan {
    pub steps: Vec<PlanStep>,
    /// Replicate count M.
    #[serde(default = "default_m")]
    pub m: u32,
    pub seed: u64,
    /// Widen zero-mass intervals to Uniform(F(x-), F(x-) + 1/n) with a
    /// warning instead of aborting.
    #[serde(default)]
    pub tolerate_zero_mass: bool,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_m() -> u32 {
    50
}
fn default_max_iter() -> usize {
    200
}
fn default_tol() -> f64 {
    1e-8
}

impl ChainPlan {
    pub fn new(steps: Vec<PlanStep>, m: u32, seed: u64) -> Self {
        ChainPlan {
            steps,
            m,
            seed,
            tolerate_zero_mass: false,
            max_iter: default_max_iter(),
            tol: default_tol(),
        }
    }

    fn fit_options(&self, step: &PlanStep) -> FitOptions {
        FitOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            zero_covariates: step.zero_covariates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub variable: String,
    pub model: CondModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    /// Adjusted feature columns in plan order.
    pub columns: Vec<Vec<f64>>,
    pub fits: Vec<FitSummary>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedEnsemble {
    pub plan: ChainPlan,
    pub mode: TransformMode,
    pub seed: u64,
    /// Specs of the adjusted columns, in plan order.
    pub feature_specs: Vec<ColumnSpec>,
    pub replicates: Vec<Replicate>,
    /// Response and protected columns carried alongside for evaluation only.
    pub untouched: Vec<(ColumnSpec, ColumnData)>,
    pub warnings: Vec<String>,
    pub n: usize,
}

impl AdjustedEnsemble {
    pub fn adjusted_column(&self, replicate: usize, name: &str) -> Result<&[f64]> {
        let idx = self
            .plan
            .steps
            .iter()
            .position(|s| s.column == name)
            .ok_or_else(|| Error::Schema(format!("no adjusted column `{name}`")))?;
        Ok(&self.replicates[replicate].columns[idx])
    }

    pub fn untouched_column(&self, name: &str) -> Result<&ColumnData> {
        self.untouched
            .iter()
            .find(|(s, _)| s.name == name)
            .map(|(_, d)| d)
            .ok_or_else(|| Error::Schema(format!("no untouched column `{name}`")))
    }

    pub fn protected_labels(&self) -> Result<Vec<String>> {
        let prot: Vec<&(ColumnSpec, ColumnData)> = self
            .untouched
            .iter()
            .filter(|(s, _)| s.role == Role::Protected)
            .collect();
        if prot.is_empty() {
            return Err(Error::Role("ensemble carries no protected columns".into()));
        }
        let mut labels = vec![String::new(); self.n];
        for (k, (_, col)) in prot.iter().enumerate() {
            for (i, label) in labels.iter_mut().enumerate() {
                if k > 0 {
                    label.push('|');
                }
                label.push_str(&col.render(i, crate::data::PreTransform::None));
            }
        }
        Ok(labels)
    }

    /// Materialize one replicate as a Dataset (adjusted features plus,
    /// optionally, the untouched response).
    pub fn replicate_dataset(&self, replicate: usize, include_response: bool) -> Result<Dataset> {
        let rep = &self.replicates[replicate];
        let mut specs = Vec::new();
        let mut cols = Vec::new();
        for (spec, values) in self.feature_specs.iter().zip(&rep.columns) {
            specs.push(spec.clone());
            cols.push(column_from_f64(spec, values)?);
        }
        if include_response {
            for (spec, data) in &self.untouched {
                if spec.role == Role::Response {
                    specs.push(spec.clone());
                    cols.push(data.clone());
                }
            }
        }
        Dataset::new(specs, cols)
    }
}

/// Rebuild typed column data from adjusted f64 values. Adjusted values are
/// always drawn from the original column's observed values, so counts and
/// binaries stay exact integers.
fn column_from_f64(spec: &ColumnSpec, values: &[f64]) -> Result<ColumnData> {
    match spec.scale {
        Scale::Continuous => Ok(ColumnData::Continuous(values.to_vec())),
        Scale::Count => Ok(ColumnData::Count(
            values
                .iter()
                .map(|&v| {
                    if v < 0.0 || v.fract() != 0.0 {
                        Err(Error::Numeric(format!(
                            "adjusted count column `{}` holds non-integer {v}",
                            spec.name
                        )))
                    } else {
                        Ok(v as u64)
                    }
                })
                .collect::<Result<_>>()?,
        )),
        Scale::Binary => Ok(ColumnData::Binary(
            values
                .iter()
                .map(|&v| {
                    if v == 0.0 || v == 1.0 {
                        Ok(v as u8)
                    } else {
                        Err(Error::Numeric(format!(
                            "adjusted binary column `{}` holds {v}",
                            spec.name
                        )))
                    }
                })
                .collect::<Result<_>>()?,
        )),
        Scale::Categorical => Err(Error::Contract(
            "categorical columns cannot be adjusted".into(),
        )),
    }
}

/// Design for one chain step: either a numeric matrix or group labels.
pub(crate) enum StepDesign {
    Numeric { matrix: Matrix, columns: Vec<String> },
    Groups(Vec<String>),
}

impl StepDesign {
    pub(crate) fn row(&self, i: usize) -> DesignRow<'_> {
        match self {
            StepDesign::Numeric { matrix, .. } => DesignRow::Numeric(matrix.row(i)),
            StepDesign::Groups(g) => DesignRow::Group(&g[i]),
        }
    }
}

/// One-hot encode a code column over its observed codes, dropping the lowest
/// as the reference level. Returns (columns, names).
fn one_hot(codes: &[u32], levels: &[String], prefix: &str) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut observed: Vec<u32> = codes.to_vec();
    observed.sort_unstable();
    observed.dedup();
    let mut cols = Vec::new();
    let mut names = Vec::new();
    for &code in observed.iter().skip(1) {
        cols.push(codes.iter().map(|&c| if c == code { 1.0 } else { 0.0 }).collect());
        names.push(format!("{prefix}={}", levels.get(code as usize).cloned().unwrap_or_else(|| code.to_string())));
    }
    (cols, names)
}

fn protected_numeric_parts(ds: &Dataset) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    for spec in ds.protected() {
        let data = ds.column(&spec.name)?;
        match data {
            ColumnData::Categorical { codes, levels } => {
                let (mut c, mut n) = one_hot(codes, levels, &spec.name);
                cols.append(&mut c);
                names.append(&mut n);
            }
            _ => {
                cols.push(data.as_f64());
                names.push(spec.name.clone());
            }
        }
    }
    Ok((cols, names))
}

fn build_step_design(
    ds: &Dataset,
    plan: &ChainPlan,
    mode: TransformMode,
    step_idx: usize,
    adjusted: &[Vec<f64>],
) -> Result<StepDesign> {
    let step = &plan.steps[step_idx];
    let include_history = mode == TransformMode::Mutual && step_idx > 0;

    if step.family == Family::EmpiricalByGroup {
        // Group label per row: protected columns, plus (in the mutual chain)
        // earlier binary variables and declared companions.
        let n = ds.n();
        let mut labels = vec![String::new(); n];
        let mut push = |labels: &mut Vec<String>, part: &dyn Fn(usize) -> String| {
            for (i, l) in labels.iter_mut().enumerate() {
                if !l.is_empty() {
                    l.push('|');
                }
                l.push_str(&part(i));
            }
        };
        for spec in ds.protected() {
            let data = ds.column(&spec.name)?;
            match (spec.scale, data) {
                (Scale::Categorical, ColumnData::Categorical { codes, levels }) => {
                    push(&mut labels, &|i| levels[codes[i] as usize].clone());
                }
                (Scale::Binary, ColumnData::Binary(v)) => {
                    push(&mut labels, &|i| v[i].to_string());
                }
                _ => {
                    return Err(Error::Config(format!(
                        "empirical_by_group cannot condition on non-categorical protected column `{}`",
                        spec.name
                    )))
                }
            }
        }
        if include_history {
            for (k, earlier) in plan.steps[..step_idx].iter().enumerate() {
                let scale = ds.spec(&earlier.column)?.scale;
                if scale == Scale::Binary {
                    let vals = &adjusted[k];
                    push(&mut labels, &|i| format!("{}", vals[i] as u8));
                } else if let Some(comp) =
                    step.companions.iter().find(|c| c.source == earlier.column)
                {
                    let cuts = comp.resolve_cutpoints(&adjusted[k])?;
                    let codes = make_companions(&adjusted[k], &cuts);
                    push(&mut labels, &|i| codes[i].to_string());
                } else {
                    return Err(Error::Config(format!(
                        "empirical_by_group at step {step_idx} needs a companion for earlier \
                         non-binary variable `{}`",
                        earlier.column
                    )));
                }
            }
        }
        return Ok(StepDesign::Groups(labels));
    }

    let n = ds.n();
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let mut names = vec!["(intercept)".to_string()];
    let (mut pc, mut pn) = protected_numeric_parts(ds)?;
    cols.append(&mut pc);
    names.append(&mut pn);

    if include_history {
        for (k, earlier) in plan.steps[..step_idx].iter().enumerate() {
            cols.push(adjusted[k].clone());
            names.push(format!("adj:{}", earlier.column));
        }
        for comp in &step.companions {
            let k = plan.steps[..step_idx]
                .iter()
                .position(|s| s.column == comp.source)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "companion source `{}` is not adjusted before `{}`",
                        comp.source, step.column
                    ))
                })?;
            let cuts = comp.resolve_cutpoints(&adjusted[k])?;
            let codes = make_companions(&adjusted[k], &cuts);
            let bin_levels: Vec<String> = (0..=cuts.len()).map(|b| b.to_string()).collect();
            let (mut cc, mut cn) = one_hot(&codes, &bin_levels, &format!("bin:{}", comp.source));
            cols.append(&mut cc);
            names.append(&mut cn);
        }
    }

    Ok(StepDesign::Numeric {
        matrix: Matrix::from_columns(&cols),
        columns: names,
    })
}

/// Algorithm core: map one column through its fitted conditional CDF onto
/// the target marginal, deterministically for continuous variables and via
/// a randomized CDF-interval draw for atomic ones.
pub(crate) fn transform_univariate_keyed(
    x: &[f64],
    design: &StepDesign,
    model: &CondModel,
    target: &Ecdf,
    draws: &StreamKey,
    scale: Scale,
    tolerate_zero_mass: bool,
) -> Result<(Vec<f64>, Vec<String>)> {
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    for i in 0..n {
        let row = design.row(i);
        if scale == Scale::Continuous {
            let p = model.eval_cdf(x[i], &row)?;
            if !p.is_finite() {
                return Err(Error::NanPropagation {
                    row: i,
                    message: format!("conditional CDF of {} is not finite", x[i]),
                });
            }
            out.push(target.quantile(p.clamp(0.0, 1.0))?);
        } else {
            let hi = model.eval_cdf(x[i], &row)?;
            let lo = model.eval_cdf_left(x[i], &row)?;
            if !hi.is_finite() || !lo.is_finite() {
                return Err(Error::NanPropagation {
                    row: i,
                    message: format!("conditional CDF interval of {} is not finite", x[i]),
                });
            }
            let (lo, hi) = if hi > lo {
                (lo, hi)
            } else if tolerate_zero_mass {
                let eps = 1.0 / n as f64;
                let hi_w = (lo + eps).min(1.0);
                let lo_w = if hi_w > lo { lo } else { (hi_w - eps).max(0.0) };
                warnings.push(format!(
                    "row {i}: fitted model assigns zero mass to value {}; widened to ({lo_w:.6}, {hi_w:.6}]",
                    x[i]
                ));
                (lo_w, hi_w)
            } else {
                return Err(Error::ZeroMass { row: i, value: x[i] });
            };
            let u = draws.uniform_in(i as u64, lo, hi);
            out.push(target.quantile(u)?);
        }
    }
    Ok((out, warnings))
}

/// Public form of the univariate transformation over a numeric design matrix.
pub fn transform_univariate(
    x: &[f64],
    rows: &Matrix,
    model: &CondModel,
    target: &Ecdf,
    scale: Scale,
    seed: u64,
) -> Result<Vec<f64>> {
    let design = StepDesign::Numeric {
        matrix: rows.clone(),
        columns: Vec::new(),
    };
    let key = StreamKey::root(seed).child(STAGE_TRANSFORM).child(0).child(0);
    transform_univariate_keyed(x, &design, model, target, &key, scale, false).map(|(v, _)| v)
}

pub fn validate_plan(ds: &Dataset, plan: &ChainPlan) -> Result<()> {
    if ds.protected().is_empty() {
        return Err(Error::Role(
            "transform requested but no protected columns are declared".into(),
        ));
    }
    if plan.m == 0 {
        return Err(Error::Config("replicate count M must be at least 1".into()));
    }
    let features = ds.features();
    let mut remaining: Vec<&str> = features.iter().map(|s| s.name.as_str()).collect();
    for (idx, step) in plan.steps.iter().enumerate() {
        let spec = ds.spec(&step.column).map_err(|_| {
            Error::Config(format!("plan references unknown column `{}`", step.column))
        })?;
        if spec.role != Role::Feature {
            return Err(Error::Config(format!(
                "plan step `{}` is not a feature column (role {:?})",
                step.column, spec.role
            )));
        }
        let pos = remaining.iter().position(|n| *n == step.column).ok_or_else(|| {
            Error::Config(format!("column `{}` appears twice in the plan", step.column))
        })?;
        remaining.remove(pos);
        let ok = match spec.scale {
            Scale::Continuous => matches!(
                step.family,
                Family::GaussianLinear | Family::EmpiricalByGroup
            ),
            Scale::Count => matches!(
                step.family,
                Family::Poisson
                    | Family::ZeroInflatedPoisson
                    | Family::ZeroInflatedNegBin
                    | Family::EmpiricalByGroup
            ),
            Scale::Binary => matches!(
                step.family,
                Family::LogisticBinary | Family::EmpiricalByGroup
            ),
            Scale::Categorical => false,
        };
        if !ok {
            return Err(Error::Config(format!(
                "family {:?} is incompatible with column `{}` of scale {:?}",
                step.family, step.column, spec.scale
            )));
        }
        for comp in &step.companions {
            if !plan.steps[..idx].iter().any(|s| s.column == comp.source) {
                return Err(Error::Config(format!(
                    "companion source `{}` of step `{}` is not adjusted earlier in the ordering",
                    comp.source, step.column
                )));
            }
            let mut cuts = comp.fixed_cutpoints.clone();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "companion cutpoints for `{}` are not strictly ascending",
                    comp.source
                )));
            }
            if comp.quantile_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Config(format!(
                    "companion quantile probabilities for `{}` outside [0,1]",
                    comp.source
                )));
            }
        }
    }
    if !remaining.is_empty() {
        return Err(Error::Config(format!(
            "plan does not cover feature column(s): {}",
            remaining.join(", ")
        )));
    }
    Ok(())
}

fn untouched_columns(ds: &Dataset) -> Result<Vec<(ColumnSpec, ColumnData)>> {
    let mut out = Vec::new();
    for spec in ds.specs() {
        if matches!(spec.role, Role::Protected | Role::Response) {
            out.push((spec.clone(), ds.column(&spec.name)?.clone()));
        }
    }
    Ok(out)
}

fn fit_step(
    x: &[f64],
    design: &StepDesign,
    family: Family,
    opts: &FitOptions,
) -> Result<CondModel> {
    match design {
        StepDesign::Groups(labels) => fit_empirical_by_group(x, labels),
        StepDesign::Numeric { matrix, columns } => {
            let mut model = fit_conditional(family, x, matrix, opts)?;
            model.design.columns = columns.clone();
            Ok(model)
        }
    }
}

fn run_replicate(
    ds: &Dataset,
    plan: &ChainPlan,
    mode: TransformMode,
    replicate: usize,
    draw_root: &StreamKey,
    first_step_model: &CondModel,
    pairwise_models: Option<&[CondModel]>,
    targets: &[Ecdf],
    originals: &[Vec<f64>],
) -> Result<Replicate> {
    let mut adjusted: Vec<Vec<f64>> = Vec::with_capacity(plan.steps.len());
    let mut fits = Vec::with_capacity(plan.steps.len());
    let mut warnings = Vec::new();
    for (j, step) in plan.steps.iter().enumerate() {
        let wrap = |e: Error| Error::Pipeline {
            replicate,
            step: j,
            variable: step.column.clone(),
            source: Box::new(e),
        };
        let design = build_step_design(ds, plan, mode, j, &adjusted).map_err(wrap)?;
        let model = if j == 0 {
            first_step_model.clone()
        } else if let Some(models) = pairwise_models {
            models[j].clone()
        } else {
            fit_step(&originals[j], &design, step.family, &plan.fit_options(step)).map_err(wrap)?
        };
        let scale = ds.spec(&step.column).map_err(wrap)?.scale;
        let key = draw_root.child(replicate as u64).child(j as u64);
        let (values, mut warns) = transform_univariate_keyed(
            &originals[j],
            &design,
            &model,
            &targets[j],
            &key,
            scale,
            plan.tolerate_zero_mass,
        )
        .map_err(wrap)?;
        for w in warns.drain(..) {
            warnings.push(format!("step {j} ({}): {w}", step.column));
        }
        adjusted.push(values);
        fits.push(FitSummary {
            variable: step.column.clone(),
            model,
        });
    }
    Ok(Replicate {
        columns: adjusted,
        fits,
        warnings,
    })
}

fn transform_impl(
    ds: &Dataset,
    plan: &ChainPlan,
    mode: TransformMode,
    threads: usize,
) -> Result<AdjustedEnsemble> {
    validate_plan(ds, plan)?;
    crate::data::validate_roles(ds, true)?;

    let originals: Vec<Vec<f64>> = plan
        .steps
        .iter()
        .map(|s| Ok(ds.column(&s.column)?.as_f64()))
        .collect::<Result<_>>()?;
    let targets: Vec<Ecdf> = originals
        .iter()
        .map(|v| Ecdf::from_samples(v))
        .collect::<Result<_>>()?;

    // The first step's design never depends on adjusted values, so its fit is
    // shared across replicates. In the pairwise mode that holds at every step.
    let first_design = build_step_design(ds, plan, mode, 0, &[])?;
    let first_model = fit_step(
        &originals[0],
        &first_design,
        plan.steps[0].family,
        &plan.fit_options(&plan.steps[0]),
    )
    .map_err(|e| Error::Pipeline {
        replicate: 0,
        step: 0,
        variable: plan.steps[0].column.clone(),
        source: Box::new(e),
    })?;
    let pairwise_models: Option<Vec<CondModel>> = if mode == TransformMode::Pairwise {
        let mut models = vec![first_model.clone()];
        for (j, step) in plan.steps.iter().enumerate().skip(1) {
            let design = build_step_design(ds, plan, mode, j, &[])?;
            let model = fit_step(&originals[j], &design, step.family, &plan.fit_options(step))
                .map_err(|e| Error::Pipeline {
                    replicate: 0,
                    step: j,
                    variable: step.column.clone(),
                    source: Box::new(e),
                })?;
            models.push(model);
        }
        Some(models)
    } else {
        None
    };

    let draw_root = StreamKey::root(plan.seed).child(STAGE_TRANSFORM);
    let results: Vec<Result<Replicate>> = parallel_map(plan.m as usize, threads, |m| {
        run_replicate(
            ds,
            plan,
            mode,
            m,
            &draw_root,
            &first_model,
            pairwise_models.as_deref(),
            &targets,
            &originals,
        )
    });
    let mut replicates = Vec::with_capacity(results.len());
    for r in results {
        replicates.push(r?);
    }
    let warnings: Vec<String> = replicates
        .iter()
        .enumerate()
        .flat_map(|(m, r)| r.warnings.iter().map(move |w| format!("replicate {m}: {w}")))
        .collect();
    Ok(AdjustedEnsemble {
        plan: plan.clone(),
        mode,
        seed: plan.seed,
        feature_specs: plan
            .steps
            .iter()
            .map(|s| Ok(ds.spec(&s.column)?.clone()))
            .collect::<Result<_>>()?,
        replicates,
        untouched: untouched_columns(ds)?,
        warnings,
        n: ds.n(),
    })
}

/// Chained transformation to mutual independence: each variable is adjusted
/// given the protected columns and all previously adjusted variables.
pub fn chain_transform(ds: &Dataset, plan: &ChainPlan) -> Result<AdjustedEnsemble> {
    transform_impl(ds, plan, TransformMode::Mutual, 1)
}

/// Per-variable transformation to pairwise independence: every design
/// contains only the protected columns.
pub fn pairwise_transform(ds: &Dataset, plan: &ChainPlan) -> Result<AdjustedEnsemble> {
    transform_impl(ds, plan, TransformMode::Pairwise, 1)
}

/// Threaded entry point used by the CLI; output is identical for any thread
/// count.
pub fn transform_with_mode(
    ds: &Dataset,
    plan: &ChainPlan,
    mode: TransformMode,
    threads: usize,
) -> Result<AdjustedEnsemble> {
    transform_impl(ds, plan, mode, threads)
}

#[cfg(test)]
mod tests;
