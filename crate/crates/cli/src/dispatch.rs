//! Builds each configured experiment and runs it.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use symlab_core::averaging::{build_phi, build_psi, verify_operators};
use symlab_core::group::{build_group, Representation};
use symlab_core::kernel::{build_averaged_kernel, krr_gap_experiment, linear_target, KernelSpec, KrrGapConfig, Target};
use symlab_core::layers::{check_regularisation_bound, equivariance_report, load_matrix, regularizer_value, vc_bound, Activation, LayerSpec};
use symlab_core::linear_gap::{monte_carlo_gap, verify_projection_tensor, verify_wishart, LinearGapConfig};
use symlab_core::orbit::{
    covering_number, equivalence_demo, invariant_target, AveragedKernelKrr, CoverMode, CrossSection, EquivalenceConfig, InvariantFeatureLeastSquares, Learner,
    PointCloud, RawLeastSquares,
};
use symlab_core::report::ResultRow;
use symlab_core::stats::{gaussian_matrix, stream_rng, InputDistribution, Verdict};
use symlab_core::Error;

use crate::config::{Experiment, ExperimentEntry, LearnerSpec, MatrixSource, TargetSpec};
use crate::error::CliError;

/// Rows and verdict of one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub rows: Vec<ResultRow>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentResult {
    pub fn new(kind: String, config_hash: String, seed: u64, rows: Vec<ResultRow>, notes: Vec<String>, wall_time: Duration) -> Self {
        let verdict = Verdict::from_bool(!rows.is_empty() && rows.iter().all(|r| r.verdict.passed()));
        Self { kind, config_hash, seed, verdict, rows, notes, wall_time }
    }
}

/// An experiment with every descriptor built and validated.
pub enum Prepared {
    LinearGap { experiment: &'static str, cfg: LinearGapConfig },
    KernelGap(KrrGapConfig),
    Wishart { n: usize, d: usize, trials: usize, seed: u64 },
    ProjectionTensor { n: usize, d: usize, trials: usize, seed: u64 },
    Operators { rep_in: Representation, rep_out: Representation, samples: usize, seed: u64 },
    Orbit { cross_section: CrossSection, learner: Box<dyn Learner>, target: Target, noise: f64, sizes: Vec<usize>, test_points: usize, trials: usize, seed: u64 },
    Covering { cloud: PointCloud, eps: Vec<f64>, seed: u64 },
    Layers { spec: LayerSpec, samples: usize, seed: u64 },
    Vc { widths: Vec<usize>, reps: Vec<Representation>, expected: Option<f64>, seed: u64 },
    Regularisation { w: DMatrix<f64>, rep_in: Representation, rep_out: Representation, activation: Activation, covariance: Option<DMatrix<f64>>, samples: usize, seed: u64 },
}

fn matrix(source: &MatrixSource, base: &Path) -> Result<DMatrix<f64>, CliError> {
    match source {
        MatrixSource::File(p) => Ok(load_matrix(&base.join(p)).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?),
        MatrixSource::Inline(rows) => {
            let cols = rows.first().map_or(0, Vec::len);
            if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
                return Err(CliError::Config("inline matrix must be a non-empty list of equal-length rows".into()));
            }
            Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
        }
    }
}

fn normalised(v: DVector<f64>) -> DVector<f64> {
    let norm = v.norm();
    if norm > 0.0 {
        v / norm
    } else {
        v
    }
}

fn invariant_theta(rep: &Representation, theta: &Option<Vec<f64>>) -> DVector<f64> {
    match theta {
        Some(t) => DVector::from_column_slice(t),
        None => normalised(build_phi(rep).apply(&DVector::from_element(rep.dim(), 1.0))),
    }
}

/// Builds and validates; every error here is a configuration error.
pub fn prepare(entry: &ExperimentEntry, base: &Path) -> Result<Prepared, CliError> {
    let prepared = match &entry.experiment {
        Experiment::GapLinear { group, rep, theta, n, sigma_x, sigma_xi, trials, seed } => {
            let rep = Representation::build(&build_group(group)?, rep)?;
            let theta = invariant_theta(&rep, theta);
            Prepared::LinearGap { experiment: "gap-linear", cfg: LinearGapConfig::invariant(rep, theta, *n, *sigma_x, *sigma_xi, *trials, *seed)? }
        }
        Experiment::GapEquivariant { group, rep_in, rep_out, theta, n, sigma_x, sigma_xi, trials, seed } => {
            let g = build_group(group)?;
            let (a, b) = (Representation::build(&g, rep_in)?, Representation::build(&g, rep_out)?);
            let theta = match theta {
                Some(rows) => matrix(&MatrixSource::Inline(rows.clone()), base)?,
                None => {
                    let t = build_psi(&a, &b)?.apply(&DMatrix::from_element(a.dim(), b.dim(), 1.0));
                    let norm = t.norm();
                    if norm > 0.0 {
                        t / norm
                    } else {
                        t
                    }
                }
            };
            Prepared::LinearGap { experiment: "gap-equivariant", cfg: LinearGapConfig::new(a, b, theta, *n, *sigma_x, *sigma_xi, *trials, *seed)? }
        }
        Experiment::GapKernel { group, rep, kernel, distribution, theta, mk, n, sigma, rho, trials, eval_points, n_pairs, seed } => {
            let rep = Representation::build(&build_group(group)?, rep)?;
            let dist = distribution.unwrap_or_else(|| InputDistribution::sphere_sqrt_d(rep.dim()));
            let target = linear_target(invariant_theta(&rep, theta));
            let mut spec = KernelSpec::new(kernel.clone(), rep)?;
            if let Some(mk) = mk {
                spec = spec.with_mk(*mk);
            }
            spec.validate(*seed)?;
            let mut cfg = KrrGapConfig::new(spec, target, dist, *n, *sigma, *rho, *trials, *seed);
            if let Some(e) = eval_points {
                cfg.eval_points = *e as usize;
            }
            if let Some(p) = n_pairs {
                cfg.n_pairs = *p as usize;
            }
            cfg.validate()?;
            Prepared::KernelGap(cfg)
        }
        Experiment::VerifyWishart { n, d, trials, seed } => Prepared::Wishart { n: *n, d: *d, trials: *trials, seed: *seed },
        Experiment::VerifyProjectionTensor { n, d, trials, seed } => Prepared::ProjectionTensor { n: *n, d: *d, trials: *trials, seed: *seed },
        Experiment::VerifyOperators { group, rep_in, rep_out, samples, seed } => {
            let g = build_group(group)?;
            let a = Representation::build(&g, rep_in)?;
            let b = match rep_out {
                Some(r) => Representation::build(&g, r)?,
                None => a.clone(),
            };
            Prepared::Operators { rep_in: a, rep_out: b, samples: *samples, seed: *seed }
        }
        Experiment::OrbitEquivalence { cross_section, dim, learner, bandwidth, rho, target, noise, sizes, test_points, trials, seed } => {
            let cs = CrossSection::new(*cross_section, *dim)?;
            let learner: Box<dyn Learner> = match learner {
                LearnerSpec::InvariantLeastSquares => Box::new(InvariantFeatureLeastSquares::new(cs.action())),
                LearnerSpec::RawLeastSquares => Box::new(RawLeastSquares),
                LearnerSpec::AveragedKrr => {
                    let base = symlab_core::kernel::BaseKernel::Gaussian { bandwidth: bandwidth.unwrap_or(1.0) };
                    Box::new(AveragedKernelKrr { kernel: build_averaged_kernel(&KernelSpec::new(base, cs.action().clone())?), rho: rho.unwrap_or(0.1) })
                }
            };
            let d = *dim;
            let target: Target = match target {
                TargetSpec::Radial => Arc::new(|x: &DVector<f64>| x.norm_squared() + x.norm().sin()),
                TargetSpec::AveragedPolynomial => invariant_target(move |x: &DVector<f64>| x[0] * x[1 % d] - 0.5 * x[d - 1] + x[0] * x[0], cs.action()),
            };
            Prepared::Orbit { cross_section: cs, learner, target, noise: *noise, sizes: sizes.clone(), test_points: *test_points, trials: *trials, seed: *seed }
        }
        Experiment::Covering { points, metric, eps, seed } => {
            let metric = metric.unwrap_or_default();
            let cloud = match points {
                MatrixSource::File(p) => PointCloud::from_path(&base.join(p), metric).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
                MatrixSource::Inline(rows) => PointCloud::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect(), metric)?,
            };
            if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
                return Err(CliError::Config("covering: 'eps' must be a non-empty list of positive radii".into()));
            }
            Prepared::Covering { cloud, eps: eps.clone(), seed: *seed }
        }
        Experiment::LayerProject { group, reps, activation, weights, samples, seed } => {
            let g = build_group(group)?;
            let reps = reps.iter().map(|r| Representation::build(&g, r)).collect::<symlab_core::Result<Vec<_>>>()?;
            let spec = match weights {
                None => LayerSpec::random(reps, *activation, *seed)?,
                Some(ws) => {
                    let ws = ws.iter().map(|w| matrix(w, base)).collect::<Result<Vec<_>, _>>()?;
                    let widths = reps.iter().map(Representation::dim).collect();
                    LayerSpec::new(widths, reps, *activation, ws)?
                }
            };
            Prepared::Layers { spec, samples: *samples, seed: *seed }
        }
        Experiment::VcBound { group, reps, widths, expected, seed } => {
            let g = build_group(group)?;
            let reps = reps.iter().map(|r| Representation::build(&g, r)).collect::<symlab_core::Result<Vec<_>>>()?;
            let widths = widths.clone().unwrap_or_else(|| reps.iter().map(Representation::dim).collect());
            Prepared::Vc { widths, reps, expected: *expected, seed: *seed }
        }
        Experiment::RegularisationBound { group, rep_in, rep_out, activation, weights, covariance, samples, seed } => {
            let g = build_group(group)?;
            let (a, b) = (Representation::build(&g, rep_in)?, Representation::build(&g, rep_out)?);
            let w = match weights {
                Some(src) => matrix(src, base)?,
                None => gaussian_matrix(&mut stream_rng(*seed, u64::MAX), b.dim(), a.dim()),
            };
            let covariance = covariance.as_ref().map(|c| matrix(c, base)).transpose()?;
            Prepared::Regularisation { w, rep_in: a, rep_out: b, activation: *activation, covariance, samples: *samples, seed: *seed }
        }
    };
    Ok(prepared)
}

type Rows = (Vec<ResultRow>, Vec<String>);

/// A reported value with no pass/fail threshold.
fn info_row(experiment: &str, label: impl Into<String>, value: f64, seed: u64) -> ResultRow {
    let mut row = ResultRow::new(experiment, label, seed, Verdict::Pass);
    row.mc_mean = Some(value);
    row
}

/// Runs a prepared experiment.
pub fn execute(p: &Prepared) -> symlab_core::Result<Rows> {
    match p {
        Prepared::LinearGap { experiment, cfg } => {
            let report = monte_carlo_gap(cfg)?;
            Ok((vec![ResultRow::from_gap(experiment, &report)], vec![format!("failed trials: {}", report.failed_trials)]))
        }
        Prepared::KernelGap(cfg) => {
            let report = krr_gap_experiment(cfg)?;
            Ok((vec![ResultRow::from_krr("gap-kernel", &report)], vec![format!("switch condition: {:?}", report.switch)]))
        }
        Prepared::Wishart { n, d, trials, seed } => {
            let report = verify_wishart(*n, *d, *trials, *seed)?;
            Ok((vec![ResultRow::from_wishart("verify-wishart", &report, *seed)], vec![format!("max |z| over entries: {:.3}", report.max_z)]))
        }
        Prepared::ProjectionTensor { n, d, trials, seed } => {
            let report = verify_projection_tensor(*n, *d, *trials, *seed)?;
            Ok((ResultRow::from_projection_tensor("verify-projection-tensor", &report, *seed), vec![]))
        }
        Prepared::Operators { rep_in, rep_out, samples, seed } => {
            let checks = verify_operators(rep_in, rep_out, *samples, *seed)?;
            let group = rep_in.group().descriptor().to_string();
            Ok((ResultRow::from_property_checks("verify-operators", &group, &checks, *seed), vec![]))
        }
        Prepared::Orbit { cross_section, learner, target, noise, sizes, test_points, trials, seed } => {
            let cfg = EquivalenceConfig {
                learner: learner.as_ref(),
                cross_section,
                target: target.clone(),
                dist: InputDistribution::standard_normal(cross_section.dim()),
                noise: *noise,
                sizes: sizes.clone(),
                test_points: *test_points,
                trials: *trials,
                seed: *seed,
            };
            match equivalence_demo(&cfg) {
                Ok(report) => {
                    let rows = report
                        .rows
                        .iter()
                        .map(|r| {
                            let mut row = ResultRow::check("orbit-equivalence", learner.name(), r.max_abs_diff, 1e-9, r.max_abs_diff <= 1e-9, *seed)
                                .with_dims(Some(cross_section.dim()), None, Some(r.n));
                            row.mc_se = Some(r.risk.se);
                            row
                        })
                        .collect();
                    Ok((rows, vec![format!("largest risk difference {:e}", report.max_abs_diff)]))
                }
                Err(Error::NonInvariantLearner { deviation }) => {
                    let row = ResultRow::check("orbit-equivalence", format!("{}:non_invariant", learner.name()), deviation, 1e-8, false, *seed);
                    Ok((vec![row], vec![format!("learner flagged as non-invariant (deviation {deviation:e})")]))
                }
                Err(e) => Err(e),
            }
        }
        Prepared::Covering { cloud, eps, seed } => {
            let mut rows = Vec::with_capacity(eps.len());
            for &e in eps {
                let upper = covering_number(cloud, e, CoverMode::GreedyUpper)?;
                let lower = covering_number(cloud, e, CoverMode::PackingLower)?;
                let mut row = ResultRow::check("covering", format!("eps={e:?}"), upper as f64, lower as f64, lower <= upper, *seed);
                row.n = Some(cloud.len());
                row.d = cloud.points().first().map(|p| p.len());
                rows.push(row);
            }
            Ok((rows, vec![]))
        }
        Prepared::Layers { spec, samples, seed } => {
            let raw = equivariance_report(spec, *samples, *seed)?;
            let projected = equivariance_report(&spec.projected()?, *samples, *seed)?;
            let group = spec.reps()[0].group().descriptor().to_string();
            let mut rows: Vec<ResultRow> = raw
                .perp_norms
                .iter()
                .enumerate()
                .map(|(i, v)| info_row("layer-project", format!("layer{}:perp_norm", i + 1), *v, *seed).with_group(&group))
                .collect();
            rows.push(info_row("layer-project", "regularizer", regularizer_value(spec)?, *seed).with_group(&group));
            rows.push(info_row("layer-project", "raw_violation", raw.violation, *seed).with_group(&group));
            rows.push(
                ResultRow::check("layer-project", "projected_violation", projected.violation, 1e-8, projected.violation <= 1e-8, *seed).with_group(&group),
            );
            Ok((rows, vec![]))
        }
        Prepared::Vc { widths, reps, expected, seed } => {
            let v = vc_bound(widths, reps)?;
            let row = match expected {
                Some(e) => ResultRow::check("vc-bound", "bound", v, *e, (v - e).abs() <= 1e-9 * e.abs().max(1.0), *seed),
                None => info_row("vc-bound", "bound", v, *seed),
            };
            let row = row.with_group(reps[0].group().descriptor().to_string());
            Ok((vec![row], vec![]))
        }
        Prepared::Regularisation { w, rep_in, rep_out, activation, covariance, samples, seed } => {
            let r = check_regularisation_bound(w, rep_in, rep_out, *activation, covariance.as_ref(), *samples, *seed)?;
            let group = rep_in.group().descriptor().to_string();
            let mut lhs = ResultRow::new("regularisation-bound", "lhs_vs_middle", *seed, r.verdict).with_group(&group).with_estimate(r.lhs, Some(r.middle));
            lhs.d = Some(rep_in.dim());
            lhs.k = Some(rep_out.dim());
            let right = ResultRow::check("regularisation-bound", "middle_vs_right", r.middle, r.right, r.middle <= r.right * (1.0 + 1e-12), *seed).with_group(&group);
            Ok((vec![lhs, right], vec![]))
        }
    }
}

/// Runs a prepared experiment, turning runtime errors into a failing row.
pub fn run_one(entry: &ExperimentEntry, prepared: &Prepared) -> ExperimentResult {
    let start = Instant::now();
    let kind = entry.experiment.kind();
    let seed = entry.experiment.seed();
    let (rows, notes) = match execute(prepared) {
        Ok(out) => out,
        Err(e) => (vec![ResultRow::new(kind, "error", seed, Verdict::Fail)], vec![e.to_string()]),
    };
    ExperimentResult::new(kind.to_owned(), entry.config_hash(), seed, rows, notes, start.elapsed())
}
