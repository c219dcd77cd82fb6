//! Builds the coset space from a validated configuration and runs the
//! requested checks in dependency order.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use serde_json::json;

use hkt_core::connections::{
    bismut_lambda, btp_predicate, einstein_coefficients, flag_kahler_obstruction,
    hkt_einstein_residual, nabla_curvature_residual, nabla_torsion_residual, strong_residual,
};
use hkt_core::forms::{
    hkt_residual, is_hyperhermitian, is_naturally_reductive, layer_metric, perturbed_metric,
    reference_metric, InvariantMetric,
};
use hkt_core::joyce::{
    coset_space, default_u_frame, hypercomplex_structure, joyce_decompose, verify_hypercomplex,
    CosetSpace, HypercomplexStructure, IsotropySpec,
};
use hkt_core::lie::{build_algebra, Algebra, FactorSpec, Family, C64};

use crate::config::{CheckName, Expected, FrameSpec, JobConfig, MetricConfig, VSpec, VectorConfig};
use crate::report::{CheckResult, Timing, ToolInfo, Verdict, VerdictReport, SCHEMA_VERSION};

/// User-level problems surface with exit code 2, internal ones with 3.
#[derive(Debug)]
pub enum RunError {
    Input(String),
    Internal(String),
}

impl From<hkt_core::Error> for RunError {
    fn from(e: hkt_core::Error) -> RunError {
        use hkt_core::Error::*;
        match e {
            UnknownTypeLabel(_)
            | RankOutOfRange { .. }
            | InvalidIsotropy(_)
            | NonPositiveCoefficient { .. }
            | KNormalization { .. }
            | ProportionalRoots
            | NotLayerMetric => RunError::Input(e.to_string()),
            other => RunError::Internal(other.to_string()),
        }
    }
}

fn to_cartan_vector(v: &VectorConfig, dim: usize) -> Result<DVector<C64>, RunError> {
    if v.len() != dim {
        return Err(RunError::Input(format!(
            "cartan vector has {} coordinates, the model needs {dim}",
            v.len()
        )));
    }
    Ok(DVector::from_fn(dim, |i, _| {
        Complex64::new(v[i][0], v[i][1])
    }))
}

pub struct Job {
    pub coset: CosetSpace,
    pub structure: HypercomplexStructure,
}

/// Builds algebra, decomposition, isotropy and hypercomplex structure.
pub fn build_job(config: &JobConfig) -> Result<Job, RunError> {
    let factors: Vec<FactorSpec> = config
        .algebra
        .factors
        .iter()
        .map(|f| Ok(FactorSpec::new(Family::parse(&f.family)?, f.rank)))
        .collect::<Result<_, hkt_core::Error>>()?;
    let model = build_algebra(&factors, config.algebra.center_dim)?;
    let algebra = Algebra::new(model)?;
    let decomp = joyce_decompose(&algebra);
    let dim = algebra.model.cartan_dim();

    let isotropy = match &config.isotropy {
        None => IsotropySpec::trivial(&algebra, &decomp)?,
        Some(iso) => {
            let v_subspace: Vec<DVector<C64>> = match &iso.v_subspace {
                VSpec::Named(name) if name == "none" => Vec::new(),
                VSpec::Named(name) if name == "center" => (0..algebra.model.center_dim)
                    .map(|z| {
                        let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
                        v[algebra.model.rank + z] = Complex64::new(0.0, 1.0);
                        v
                    })
                    .collect(),
                VSpec::Named(name) => {
                    return Err(RunError::Input(format!("unknown v_subspace `{name}`")))
                }
                VSpec::Explicit(vs) => vs
                    .iter()
                    .map(|v| to_cartan_vector(v, dim))
                    .collect::<Result<_, _>>()?,
            };
            let u_frame = match &iso.u_frame {
                FrameSpec::Named(name) if name == "biinvariant" => {
                    default_u_frame(&algebra, &decomp, iso.m, &v_subspace)?
                }
                FrameSpec::Named(name) => {
                    return Err(RunError::Input(format!("unknown u_frame `{name}`")))
                }
                FrameSpec::Explicit(vs) => vs
                    .iter()
                    .map(|v| to_cartan_vector(v, dim))
                    .collect::<Result<_, _>>()?,
            };
            IsotropySpec::new(iso.m, v_subspace, u_frame)
        }
    };

    let coset = coset_space(&algebra, &decomp, isotropy)?;

    let mut k = HypercomplexStructure::default_k(&coset);
    if let Some(phases) = &config.k_phases {
        if phases.len() != coset.layer_count() {
            return Err(RunError::Input(format!(
                "k_phases has {} entries but there are {} layers",
                phases.len(),
                coset.layer_count()
            )));
        }
        for (kj, phi) in k.iter_mut().zip(phases) {
            *kj *= Complex64::from_polar(1.0, *phi);
        }
    }
    let structure = hypercomplex_structure(&coset, &k)?;

    Ok(Job { coset, structure })
}

fn build_metric(config: &JobConfig, job: &Job) -> Result<InvariantMetric, RunError> {
    let coset = &job.coset;
    let m = coset.layer_count();
    let want = |n: usize, what: &str| -> Result<(), RunError> {
        if n != m {
            Err(RunError::Input(format!(
                "{what} has {n} coefficients but there are {m} layers"
            )))
        } else {
            Ok(())
        }
    };
    Ok(match &config.metric {
        MetricConfig::Named(n) if n == "reference" => reference_metric(coset),
        MetricConfig::Named(n) if n == "einstein" => {
            let sol = einstein_coefficients(coset)?;
            layer_metric(coset, &sol.coeffs)?
        }
        MetricConfig::Named(n) => return Err(RunError::Input(format!("unknown metric `{n}`"))),
        MetricConfig::Layer { layer } => {
            want(layer.len(), "metric.layer")?;
            layer_metric(coset, layer)?
        }
        MetricConfig::Perturbed { perturbed } => {
            want(perturbed.base.len(), "metric.perturbed.base")?;
            let base = layer_metric(coset, &perturbed.base)?;
            let seed = perturbed.seed.unwrap_or(config.seed);
            perturbed_metric(coset, &job.structure, &base, seed, perturbed.size)?
        }
    })
}

/// Runs all requested checks and assembles the report.
pub fn run(config: &JobConfig, preset: Option<&str>) -> Result<VerdictReport, RunError> {
    let start = Instant::now();
    let job = build_job(config)?;
    let metric = build_metric(config, &job)?;
    let tol = config.tolerance;

    let mut results: Vec<CheckResult> = Vec::new();
    let mut timing = Timing::default();
    let mut hkt_pass = None::<bool>;

    for &check in &config.checks {
        let t0 = Instant::now();
        let expected = config.expect.get(&check).copied().unwrap_or(Expected::Pass);
        let mut residuals = BTreeMap::new();
        let mut witnesses = None;
        let mut note = None;

        let verdict = match check {
            CheckName::Hypercomplex => {
                let report = verify_hypercomplex(&job.coset, &job.structure);
                residuals.insert("raw".into(), report.max_residual);
                residuals.insert("i_squared".into(), report.i_squared);
                residuals.insert("j_squared".into(), report.j_squared);
                residuals.insert("anticommutation".into(), report.anticommutation);
                residuals.insert("ad_l_commutes_i".into(), report.ad_l_commutes_i);
                residuals.insert("ad_l_commutes_j".into(), report.ad_l_commutes_j);
                residuals.insert("closure_i".into(), report.closure_i);
                residuals.insert("closure_j".into(), report.closure_j);
                if report.max_residual < tol {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            CheckName::Hkt => {
                let hh = is_hyperhermitian(&metric, &job.structure);
                let r = hkt_residual(&job.coset, &metric, &job.structure);
                residuals.insert("raw".into(), r.raw);
                residuals.insert("relative".into(), r.relative);
                residuals.insert("hyperhermitian".into(), hh.relative);
                let pass = hh.relative < tol && r.relative < tol;
                hkt_pass = Some(pass);
                if pass {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            CheckName::Einstein => {
                if hkt_pass == Some(false) {
                    note = Some("metric is not HKT".into());
                    Verdict::NotApplicable
                } else if metric.layer_coeffs.is_none() {
                    note = Some("requires a layer metric".into());
                    Verdict::NotApplicable
                } else {
                    match hkt_einstein_residual(&job.coset, &metric, &job.structure, tol) {
                        Ok((lambda, r)) => {
                            residuals.insert("raw".into(), r.raw);
                            residuals.insert("relative".into(), r.relative);
                            let sol = einstein_coefficients(&job.coset)?;
                            witnesses = Some(json!({
                                "lambda": lambda,
                                "einstein_coefficients": sol.coeffs,
                            }));
                            if r.raw < tol {
                                Verdict::Pass
                            } else {
                                Verdict::Fail
                            }
                        }
                        Err(hkt_core::Error::NotHkt { .. }) => {
                            note = Some("metric is not HKT".into());
                            Verdict::NotApplicable
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            CheckName::Btp | CheckName::Bas => {
                if metric.layer_coeffs.is_none() {
                    note = Some("requires a layer metric".into());
                    Verdict::NotApplicable
                } else {
                    let model = bismut_lambda(&job.coset, &metric)?;
                    let r = if check == CheckName::Btp {
                        nabla_torsion_residual(&job.coset, &metric, &model)
                    } else {
                        nabla_curvature_residual(&job.coset, &metric, &model)
                    };
                    residuals.insert("raw".into(), r.raw);
                    residuals.insert("relative".into(), r.relative);
                    let pass = r.raw < tol;
                    if check == CheckName::Btp {
                        let coeffs = metric.layer_coeffs.as_ref().unwrap();
                        let predicate = btp_predicate(&job.coset, coeffs);
                        witnesses = Some(json!({ "coefficient_predicate": predicate }));
                        if predicate != pass {
                            return Err(RunError::Internal(
                                "BTP predicate / residual mismatch".into(),
                            ));
                        }
                    }
                    if pass {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    }
                }
            }
            CheckName::Strong => {
                if hkt_pass == Some(false) || metric.layer_coeffs.is_none() {
                    note = Some("requires an HKT layer metric".into());
                    Verdict::NotApplicable
                } else {
                    match strong_residual(&job.coset, &metric, &job.structure, tol) {
                        Ok(report) => {
                            residuals.insert("raw".into(), report.dc.raw);
                            residuals.insert("relative".into(), report.dc.relative);
                            residuals.insert("skew".into(), report.skew_residual);
                            residuals.insert("cross_check".into(), report.cross_check);
                            if report.dc.raw < tol {
                                Verdict::Pass
                            } else {
                                Verdict::Fail
                            }
                        }
                        Err(hkt_core::Error::NotHkt { .. }) => {
                            note = Some("metric is not HKT".into());
                            Verdict::NotApplicable
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            CheckName::NaturallyReductive => {
                let r = is_naturally_reductive(&job.coset, &metric);
                residuals.insert("raw".into(), r.raw);
                residuals.insert("relative".into(), r.relative);
                if r.relative < tol {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            CheckName::FlagObstruction => {
                if metric.layer_coeffs.is_none() {
                    note = Some("requires a layer metric".into());
                    Verdict::NotApplicable
                } else {
                    let witness = flag_kahler_obstruction(&job.coset, &metric);
                    let has_decomposable = job
                        .coset
                        .decomp
                        .layers
                        .iter()
                        .take(job.coset.layer_count())
                        .any(|l| !l.f_roots.is_empty());
                    match &witness {
                        Some(w) => {
                            witnesses = Some(json!({
                                "layer": w.layer,
                                "gamma": job.coset.algebra.model.coords(w.gamma),
                                "complement": job.coset.algebra.model.coords(w.complement),
                                "sum": job.coset.algebra.model.coords(w.sum),
                                "metric_value": w.value,
                            }));
                        }
                        None => {
                            witnesses = Some(json!("none"));
                        }
                    }
                    residuals.insert("raw".into(), 0.0);
                    if witness.is_some() == has_decomposable {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    }
                }
            }
        };

        let matched = verdict.matches(expected);
        timing
            .per_check_ms
            .insert(check.to_string(), t0.elapsed().as_secs_f64() * 1000.0);
        results.push(CheckResult {
            name: check,
            verdict,
            expected,
            matched,
            residuals,
            threshold: tol,
            witnesses,
            note,
        });
    }

    let overall = if results.iter().all(|c| c.matched) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    timing.total_ms = start.elapsed().as_secs_f64() * 1000.0;

    Ok(VerdictReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo {
            name: "hkt",
            version: env!("CARGO_PKG_VERSION"),
        },
        preset: preset.map(|s| s.to_string()),
        config: config.clone(),
        seed: config.seed,
        tolerance: config.tolerance,
        checks: results,
        overall,
        timing,
    })
}

/// Decomposition summary for the `decompose` subcommand.
pub fn decompose_report(config: &JobConfig) -> Result<serde_json::Value, RunError> {
    let factors: Vec<FactorSpec> = config
        .algebra
        .factors
        .iter()
        .map(|f| Ok(FactorSpec::new(Family::parse(&f.family)?, f.rank)))
        .collect::<Result<_, hkt_core::Error>>()?;
    let model = build_algebra(&factors, config.algebra.center_dim)?;
    let algebra = Algebra::new(model)?;
    let decomp = joyce_decompose(&algebra);
    let layers: Vec<serde_json::Value> = decomp
        .layers
        .iter()
        .map(|l| {
            json!({
                "alpha": algebra.model.coords(l.alpha),
                "alpha_norm2": algebra.model.norm2(l.alpha),
                "r_plus_size": l.r_plus.len(),
                "f_dim_complex": l.f_roots.len(),
            })
        })
        .collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "algebra": config.algebra,
        "depth": decomp.depth(),
        "b_dim": decomp.b_dim(),
        "layers": layers,
    }))
}
