use super::*;
use crate::condmodels::Params;
use crate::data::{ColumnData, ColumnSpec, Role, Scale};
use crate::special::ks_two_sample;

fn dataset(cols: Vec<(ColumnSpec, ColumnData)>) -> Dataset {
    let (specs, data): (Vec<_>, Vec<_>) = cols.into_iter().unzip();
    Dataset::new(specs, data).unwrap()
}

fn binary_z(n: usize, seed: u64) -> Vec<u8> {
    let key = StreamKey::root(seed).child(100);
    (0..n).map(|i| key.bernoulli(i as u64, 0.5) as u8).collect()
}

#[test]
fn companion_binning_matches_interval_convention() {
    assert_eq!(
        make_companions(&[17.0, 18.0, 19.0, 25.0], &[18.0, 19.0, 20.0]),
        vec![0, 0, 1, 3]
    );
    assert_eq!(make_companions(&[1.0, 5.0, -2.0], &[]), vec![0, 0, 0]);
}

#[test]
fn decile_cutpoints_fill_bins_evenly() {
    let values: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let spec = CompanionSpec {
        source: "x".into(),
        fixed_cutpoints: vec![],
        quantile_probs: (1..=10).map(|k| k as f64 / 10.0).collect(),
    };
    let cuts = spec.resolve_cutpoints(&values).unwrap();
    assert_eq!(cuts.len(), 10);
    let codes = make_companions(&values, &cuts);
    let mut counts = vec![0usize; 11];
    for &c in &codes {
        counts[c as usize] += 1;
    }
    for bin in 0..10 {
        assert!(
            (counts[bin] as i64 - 10).abs() <= 1,
            "bin {bin} holds {}",
            counts[bin]
        );
    }
    // Q(1.0) is the maximum, so the open top bin is empty.
    assert_eq!(counts[10], 0);
}

#[test]
fn continuous_identity_when_independent_of_z() {
    // Model fitted ignoring z: the marginal empirical CDF itself. The
    // deterministic branch then reproduces every support point exactly.
    let key = StreamKey::root(5);
    let x: Vec<f64> = (0..500).map(|i| key.normal(i as u64) * 2.0 + 1.0).collect();
    let groups = vec!["all".to_string(); x.len()];
    let model = crate::condmodels::fit_empirical_by_group(&x, &groups).unwrap();
    let target = Ecdf::from_samples(&x).unwrap();
    let design = StepDesign::Groups(groups);
    let (adjusted, _) = transform_univariate_keyed(
        &x,
        &design,
        &model,
        &target,
        &StreamKey::root(0),
        Scale::Continuous,
        false,
    )
    .unwrap();
    assert_eq!(adjusted, x);
}

#[test]
fn constant_atomic_column_redraws_from_target() {
    let n = 20_000;
    let x = vec![3.0; n];
    let groups = vec!["all".to_string(); n];
    let model = crate::condmodels::fit_empirical_by_group(&x, &groups).unwrap();
    // target: three atoms with unequal mass
    let mut target_sample = Vec::new();
    target_sample.extend(std::iter::repeat(0.0).take(n / 2));
    target_sample.extend(std::iter::repeat(1.0).take(n / 4));
    target_sample.extend(std::iter::repeat(5.0).take(n - n / 2 - n / 4));
    let target = Ecdf::from_samples(&target_sample).unwrap();
    let design = StepDesign::Groups(groups);
    let (adjusted, _) = transform_univariate_keyed(
        &x,
        &design,
        &model,
        &target,
        &StreamKey::root(42).child(1),
        Scale::Count,
        false,
    )
    .unwrap();
    let d = ks_two_sample(&adjusted, &target_sample);
    assert!(d < 3.0 / (n as f64).sqrt(), "KS {d}");
}

#[test]
fn two_group_gaussian_equalizes_groupwise_distributions() {
    let n = 100_000;
    let key = StreamKey::root(9);
    let z = binary_z(n, 9);
    let x: Vec<f64> = (0..n)
        .map(|i| key.child(1).normal(i as u64) + z[i] as f64)
        .collect();
    let design_mat = Matrix::from_columns(&[
        vec![1.0; n],
        z.iter().map(|&b| b as f64).collect::<Vec<f64>>(),
    ]);
    let model = crate::condmodels::fit_conditional(
        crate::condmodels::Family::GaussianLinear,
        &x,
        &design_mat,
        &Default::default(),
    )
    .unwrap();
    let target = Ecdf::from_samples(&x).unwrap();
    let adjusted = transform_univariate(&x, &design_mat, &model, &target, Scale::Continuous, 1).unwrap();

    let g0: Vec<f64> = adjusted
        .iter()
        .zip(&z)
        .filter(|(_, &zi)| zi == 0)
        .map(|(v, _)| *v)
        .collect();
    let g1: Vec<f64> = adjusted
        .iter()
        .zip(&z)
        .filter(|(_, &zi)| zi == 1)
        .map(|(v, _)| *v)
        .collect();
    let d = ks_two_sample(&g0, &g1);
    assert!(d < 0.01, "groupwise KS {d}");

    // Value-set preservation: adjusted values come from the observed support.
    let target_set: std::collections::BTreeSet<u64> = x.iter().map(|v| v.to_bits()).collect();
    assert!(adjusted.iter().all(|v| target_set.contains(&v.to_bits())));
}

fn count_dataset(n: usize, seed: u64) -> Dataset {
    let key = StreamKey::root(seed);
    let z = binary_z(n, seed);
    let x: Vec<u64> = (0..n)
        .map(|i| {
            let lambda = if z[i] == 1 { 3.0 } else { 1.0 };
            key.child(2).poisson(i as u64, lambda)
        })
        .collect();
    dataset(vec![
        (
            ColumnSpec::new("z", Scale::Binary, Role::Protected),
            ColumnData::Binary(z),
        ),
        (
            ColumnSpec::new("x", Scale::Count, Role::Feature),
            ColumnData::Count(x),
        ),
        (
            ColumnSpec::new("y", Scale::Continuous, Role::Response),
            ColumnData::Continuous((0..n).map(|i| key.child(3).normal(i as u64)).collect()),
        ),
    ])
}

#[test]
fn true_conditional_cdfs_drive_groupwise_ks_to_zero() {
    let n = 20_000;
    let ds = count_dataset(n, 77);
    let x = ds.column("x").unwrap().as_f64();
    let z = ds.column("z").unwrap().as_f64();
    let design_mat = Matrix::from_columns(&[vec![1.0; n], z.clone()]);
    // True model: x | z ~ Poisson(exp(0 + ln(3) z))
    let truth = CondModel::from_parts(
        Params::Poisson {
            coef: vec![0.0, 3.0_f64.ln()],
        },
        crate::condmodels::DesignSpec::unnamed(2, true),
    );
    let target = Ecdf::from_samples(&x).unwrap();
    let adjusted = transform_univariate(&x, &design_mat, &truth, &target, Scale::Count, 3).unwrap();
    let g0: Vec<f64> = adjusted.iter().zip(&z).filter(|(_, &zi)| zi == 0.0).map(|(v, _)| *v).collect();
    let g1: Vec<f64> = adjusted.iter().zip(&z).filter(|(_, &zi)| zi == 1.0).map(|(v, _)| *v).collect();
    let d = ks_two_sample(&g0, &g1);
    assert!(d < 0.03, "groupwise KS {d}");

    // Marginal preservation in distribution for the atomic case.
    let dm = ks_two_sample(&adjusted, &x);
    assert!(dm < 3.0 / (n as f64).sqrt(), "marginal KS {dm}");
}

#[test]
fn rank_preservation_within_fixed_design_row() {
    let n = 4_000;
    let ds = count_dataset(n, 13);
    let plan = ChainPlan::new(
        vec![PlanStep {
            column: "x".into(),
            family: Family::Poisson,
            companions: vec![],
            zero_covariates: true,
        }],
        1,
        11,
    );
    let ensemble = chain_transform(&ds, &plan).unwrap();
    let adjusted = &ensemble.replicates[0].columns[0];
    let x = ds.column("x").unwrap().as_f64();
    let z = ds.column("z").unwrap().as_f64();
    for group in [0.0, 1.0] {
        let mut pairs: Vec<(f64, f64)> = x
            .iter()
            .zip(adjusted)
            .zip(&z)
            .filter(|(_, &zi)| zi == group)
            .map(|((xv, av), _)| (*xv, *av))
            .collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // max adjusted value at x = v must not exceed min adjusted at any v' > v
        let mut i = 0;
        let mut prev_max = f64::NEG_INFINITY;
        while i < pairs.len() {
            let v = pairs[i].0;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            while i < pairs.len() && pairs[i].0 == v {
                lo = lo.min(pairs[i].1);
                hi = hi.max(pairs[i].1);
                i += 1;
            }
            assert!(
                prev_max <= lo,
                "rank violation in group {group}: x={v}, prev max {prev_max}, min {lo}"
            );
            prev_max = hi;
        }
    }
}

#[test]
fn replicate_keying_contract() {
    // Byte-identical replicates when the replicate index is excluded from
    // the draw key; distinct otherwise.
    let n = 2_000;
    let ds = count_dataset(n, 21);
    let x = ds.column("x").unwrap().as_f64();
    let groups: Vec<String> = ds.protected_labels().unwrap();
    let model = crate::condmodels::fit_empirical_by_group(&x, &groups).unwrap();
    let target = Ecdf::from_samples(&x).unwrap();
    let design = StepDesign::Groups(groups);

    let shared_key = StreamKey::root(7).child(STAGE_TRANSFORM).child(0);
    let (rep_a, _) =
        transform_univariate_keyed(&x, &design, &model, &target, &shared_key, Scale::Count, false)
            .unwrap();
    let (rep_b, _) =
        transform_univariate_keyed(&x, &design, &model, &target, &shared_key, Scale::Count, false)
            .unwrap();
    assert_eq!(rep_a, rep_b);

    let keyed_m0 = StreamKey::root(7).child(STAGE_TRANSFORM).child(0).child(0);
    let keyed_m1 = StreamKey::root(7).child(STAGE_TRANSFORM).child(1).child(0);
    let (rep_0, _) =
        transform_univariate_keyed(&x, &design, &model, &target, &keyed_m0, Scale::Count, false)
            .unwrap();
    let (rep_1, _) =
        transform_univariate_keyed(&x, &design, &model, &target, &keyed_m1, Scale::Count, false)
            .unwrap();
    assert_ne!(rep_0, rep_1);
}

#[test]
fn single_step_chain_reduces_to_transform_univariate() {
    let n = 3_000;
    let ds = count_dataset(n, 31);
    let plan = ChainPlan::new(
        vec![PlanStep {
            column: "x".into(),
            family: Family::Poisson,
            companions: vec![],
            zero_covariates: true,
        }],
        1,
        99,
    );
    let chain = chain_transform(&ds, &plan).unwrap();
    let pairwise = pairwise_transform(&ds, &plan).unwrap();
    assert_eq!(chain.replicates[0].columns, pairwise.replicates[0].columns);

    let x = ds.column("x").unwrap().as_f64();
    let z = ds.column("z").unwrap().as_f64();
    let mat = Matrix::from_columns(&[vec![1.0; n], z]);
    let model =
        crate::condmodels::fit_conditional(Family::Poisson, &x, &mat, &Default::default()).unwrap();
    let target = Ecdf::from_samples(&x).unwrap();
    let direct = transform_univariate(&x, &mat, &model, &target, Scale::Count, 99).unwrap();
    assert_eq!(chain.replicates[0].columns[0], direct);
}

#[test]
fn deterministic_across_runs_and_threads() {
    let ds = count_dataset(1_500, 41);
    let plan = ChainPlan::new(
        vec![PlanStep {
            column: "x".into(),
            family: Family::ZeroInflatedPoisson,
            companions: vec![],
            zero_covariates: true,
        }],
        6,
        12345,
    );
    let a = transform_with_mode(&ds, &plan, TransformMode::Mutual, 1).unwrap();
    let b = transform_with_mode(&ds, &plan, TransformMode::Mutual, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_mass_values_error_or_widen() {
    // A Poisson model with a tiny rate gives zero mass (to double precision)
    // to a huge observed count.
    let n = 50;
    let mut counts = vec![0u64; n];
    counts[7] = 400;
    let ds = dataset(vec![
        (
            ColumnSpec::new("z", Scale::Binary, Role::Protected),
            ColumnData::Binary(binary_z(n, 3)),
        ),
        (
            ColumnSpec::new("x", Scale::Count, Role::Feature),
            ColumnData::Count(counts),
        ),
        (
            ColumnSpec::new("y", Scale::Continuous, Role::Response),
            ColumnData::Continuous(vec![0.5; n]),
        ),
    ]);
    let x = ds.column("x").unwrap().as_f64();
    let truth = CondModel::from_parts(
        Params::Poisson { coef: vec![-3.0, 0.0] },
        crate::condmodels::DesignSpec::unnamed(2, true),
    );
    let z = ds.column("z").unwrap().as_f64();
    let mat = Matrix::from_columns(&[vec![1.0; n], z]);
    let target = Ecdf::from_samples(&x).unwrap();
    let err = transform_univariate(&x, &mat, &truth, &target, Scale::Count, 0).unwrap_err();
    match err {
        Error::ZeroMass { row, value } => {
            assert_eq!(row, 7);
            assert_eq!(value, 400.0);
        }
        other => panic!("expected zero-mass error, got {other}"),
    }

    let design = StepDesign::Numeric { matrix: mat, columns: vec![] };
    let (vals, warns) = transform_univariate_keyed(
        &x,
        &design,
        &truth,
        &target,
        &StreamKey::root(0),
        Scale::Count,
        true,
    )
    .unwrap();
    assert_eq!(vals.len(), n);
    assert_eq!(warns.len(), 1);
    assert!(warns[0].contains("row 7"));
}

#[test]
fn plan_validation_rejects_bad_configs() {
    let ds = count_dataset(200, 51);
    let step = |col: &str, fam: Family| PlanStep {
        column: col.into(),
        family: fam,
        companions: vec![],
        zero_covariates: true,
    };

    // unknown column
    let plan = ChainPlan::new(vec![step("nope", Family::Poisson)], 1, 0);
    assert!(matches!(validate_plan(&ds, &plan).unwrap_err(), Error::Config(_)));

    // family incompatible with scale
    let plan = ChainPlan::new(vec![step("x", Family::GaussianLinear)], 1, 0);
    assert!(matches!(validate_plan(&ds, &plan).unwrap_err(), Error::Config(_)));

    // incomplete cover
    let plan = ChainPlan::new(vec![], 1, 0);
    assert!(validate_plan(&ds, &plan).is_err());

    // companion referencing a non-earlier column
    let mut bad = step("x", Family::Poisson);
    bad.companions.push(CompanionSpec {
        source: "x".into(),
        fixed_cutpoints: vec![1.0],
        quantile_probs: vec![],
    });
    let plan = ChainPlan::new(vec![bad], 1, 0);
    assert!(matches!(validate_plan(&ds, &plan).unwrap_err(), Error::Config(_)));

    // zero protected columns
    let no_prot = dataset(vec![
        (
            ColumnSpec::new("x", Scale::Count, Role::Feature),
            ColumnData::Count(vec![1, 2, 3]),
        ),
        (
            ColumnSpec::new("y", Scale::Binary, Role::Response),
            ColumnData::Binary(vec![0, 1, 0]),
        ),
    ]);
    let plan = ChainPlan::new(vec![step("x", Family::Poisson)], 1, 0);
    assert!(matches!(validate_plan(&no_prot, &plan).unwrap_err(), Error::Role(_)));
}

#[test]
fn chained_designs_include_history_and_companions() {
    // Two-step chain: continuous first by grouped ECDF, then a count step
    // whose design carries the adjusted first variable and its companion.
    let n = 2_000;
    let key = StreamKey::root(61);
    let z = binary_z(n, 61);
    let age: Vec<f64> = (0..n)
        .map(|i| 30.0 + 6.0 * key.child(1).normal(i as u64) + 3.0 * z[i] as f64)
        .collect();
    let counts: Vec<u64> = (0..n)
        .map(|i| {
            // zero-heavy counts: structural zeros plus a Poisson component
            let zero_logit = -0.5 + 0.8 * z[i] as f64;
            if key.child(3).uniform(i as u64) < 1.0 / (1.0 + (-zero_logit as f64).exp()) {
                0
            } else {
                let lambda = (0.05 * age[i] - 1.0 + 0.3 * z[i] as f64).exp();
                key.child(2).poisson(i as u64, lambda)
            }
        })
        .collect();
    let ds = dataset(vec![
        (
            ColumnSpec::new("z", Scale::Binary, Role::Protected),
            ColumnData::Binary(z),
        ),
        (
            ColumnSpec::new("age", Scale::Continuous, Role::Feature),
            ColumnData::Continuous(age),
        ),
        (
            ColumnSpec::new("priors", Scale::Count, Role::Feature),
            ColumnData::Count(counts),
        ),
        (
            ColumnSpec::new("y", Scale::Binary, Role::Response),
            ColumnData::Binary(binary_z(n, 62)),
        ),
    ]);
    let plan = ChainPlan::new(
        vec![
            PlanStep {
                column: "age".into(),
                family: Family::EmpiricalByGroup,
                companions: vec![],
                zero_covariates: true,
            },
            PlanStep {
                column: "priors".into(),
                family: Family::ZeroInflatedNegBin,
                companions: vec![CompanionSpec {
                    source: "age".into(),
                    fixed_cutpoints: vec![],
                    quantile_probs: (1..=10).map(|k| k as f64 / 10.0).collect(),
                }],
                zero_covariates: true,
            },
        ],
        2,
        2024,
    );
    let ensemble = chain_transform(&ds, &plan).unwrap();
    assert_eq!(ensemble.replicates.len(), 2);
    let fit = &ensemble.replicates[0].fits[1];
    let names = &fit.model.design.columns;
    assert!(names.iter().any(|c| c == "adj:age"), "{names:?}");
    assert!(names.iter().any(|c| c.starts_with("bin:age=")), "{names:?}");

    // Adjusted counts stay within the observed value set.
    let orig: std::collections::BTreeSet<u64> = ds
        .column("priors")
        .unwrap()
        .as_f64()
        .iter()
        .map(|v| v.to_bits())
        .collect();
    for rep in &ensemble.replicates {
        assert!(rep.columns[1].iter().all(|v| orig.contains(&v.to_bits())));
    }

    // Replicates differ (stochastic steps) but share the deterministic parts.
    assert_ne!(ensemble.replicates[0].columns[1], ensemble.replicates[1].columns[1]);
}

#[test]
fn ensemble_round_trips_replicate_datasets() {
    let ds = count_dataset(300, 71);
    let plan = ChainPlan::new(
        vec![PlanStep {
            column: "x".into(),
            family: Family::Poisson,
            companions: vec![],
            zero_covariates: true,
        }],
        2,
        5,
    );
    let ensemble = chain_transform(&ds, &plan).unwrap();
    let with_y = ensemble.replicate_dataset(0, true).unwrap();
    assert!(with_y.spec("y").is_ok());
    let without_y = ensemble.replicate_dataset(0, false).unwrap();
    assert!(without_y.spec("y").is_err());
    assert_eq!(without_y.n(), 300);
}
