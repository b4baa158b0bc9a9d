//! Subcommand implementations. Each returns the JSON summary printed on stdout.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{Command, RunSpec, FIGURE_GAMMA, FIGURE_LAMBDA};
use super::output::{
    curve_from_rows, num, opt_num, read_csv, render_csv, render_kernel_csv, write_atomic,
    write_json, Curve,
};
use super::CliError;
use crate::baselines::{odp_sum, BaselineMethod, BaselineSpec};
use crate::diagnostics::{compare, is_markovian, master_coefficients};
use crate::kernels::{KernelKind, ReservoirKernel, MAX_TAYLOR_ORDER};
use crate::multiscale::{
    derive_ms_coefficients, ms_singularities, ms_trajectory, MsCoefficients, MsOrder,
};
use crate::trajectory::{AmplitudeTrajectory, Method, PopulationSeries, RunParams, TimeGrid};
use crate::volterra::{lorentzian_trajectory, solve_exact, SolverConfig};

/// `Γ ≥ -tol` counts as non-negative in Markovianity verdicts.
pub const MARKOV_TOLERANCE: f64 = 1e-6;

pub fn run(spec: &RunSpec) -> Result<Value, CliError> {
    match &spec.command {
        Command::Solve => single(spec, Method::Exact),
        Command::Perturb => {
            let method = spec
                .method
                .ok_or_else(|| CliError::Usage("perturb needs --method".into()))?;
            single(spec, method)
        }
        Command::Compare { a, b } => compare_files(spec, a, b),
        Command::Diagnose { input } => diagnose(spec, input.as_deref()),
        Command::Sweep => sweep(spec),
        Command::Figure { number } => figure(spec, *number),
    }
}

/// A computed curve plus what the caller should know about it.
struct Built {
    curve: Curve,
    requested: Method,
    warning: Option<String>,
    coefficients: Option<Value>,
}

fn params(spec: &RunSpec) -> RunParams<f64> {
    RunParams {
        kind: spec.kernel,
        gamma: spec.gamma,
        lambda: spec.lambda,
    }
}

fn grid(spec: &RunSpec) -> Result<TimeGrid<f64>, CliError> {
    Ok(TimeGrid::new(spec.dt(), spec.t_max())?)
}

fn exact(spec: &RunSpec) -> Result<AmplitudeTrajectory<f64>, CliError> {
    let kernel = ReservoirKernel::new(spec.kernel, spec.gamma, spec.lambda)?;
    Ok(solve_exact(
        &kernel,
        &SolverConfig::new(spec.dt(), spec.t_max()),
    )?)
}

fn require_lorentzian(spec: &RunSpec, method: Method) -> Result<(), CliError> {
    if spec.kernel == KernelKind::Lorentzian {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{method} is only defined for the lorentzian kernel, not {}",
            spec.kernel
        )))
    }
}

fn linf(a: &AmplitudeTrajectory<f64>, b: &AmplitudeTrajectory<f64>) -> f64 {
    a.c.iter()
        .zip(&b.c)
        .map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs())
        .fold(0.0, f64::max)
}

fn coefficients_json(
    c: &MsCoefficients<f64>,
    t_max: f64,
    ms1_available: bool,
) -> Result<Value, CliError> {
    let ms0 = ms_singularities(c, c.alpha, MsOrder::Ms0, t_max)?;
    let ms1 = if ms1_available {
        Some(ms_singularities(c, c.alpha, MsOrder::Ms1, t_max)?)
    } else {
        None
    };
    let list = |v: &[f64]| Value::Array(v.iter().map(|&t| num(t)).collect());
    Ok(json!({
        "omega0": num(c.omega0),
        "decay": num(c.decay),
        "a1_over_a0": num(c.a1_over_a0),
        "b1_over_b0": opt_num(c.b1_over_b0),
        "c1": num(c.c1),
        "collapsed_tau": c.collapsed_tau,
        "singularities_ms0": list(&ms0),
        "singularities_ms1": ms1.as_deref().map_or(Value::Null, list),
    }))
}

/// Builds the curve for `method`. `reference` is an already computed exact
/// solve on the same grid, used to validate MS1 on non-Lorentzian kernels.
fn build(
    spec: &RunSpec,
    method: Method,
    reference: Option<&AmplitudeTrajectory<f64>>,
) -> Result<Built, CliError> {
    let grid = grid(spec)?;
    let plain = |curve| Built {
        curve,
        requested: method,
        warning: None,
        coefficients: None,
    };
    match method {
        Method::Exact => Ok(plain(Curve::Amplitude(exact(spec)?))),
        Method::ClosedForm => {
            require_lorentzian(spec, method)?;
            Ok(plain(Curve::Amplitude(lorentzian_trajectory(
                spec.gamma,
                spec.lambda,
                grid,
            )?)))
        }
        Method::Ms0 | Method::Ms1 => {
            let kernel = ReservoirKernel::new(spec.kernel, spec.gamma, spec.lambda)?;
            let taylor = kernel.taylor_coefficients(MAX_TAYLOR_ORDER)?;
            let coeffs = derive_ms_coefficients(&taylor, spec.gamma, spec.lambda)?;
            let alpha = coeffs.alpha;
            let ms0 = || ms_trajectory(&coeffs, MsOrder::Ms0, alpha, grid, params(spec));
            let mut warning = None;
            let mut ms1_available = !coeffs.collapsed_tau;
            let curve = if method == Method::Ms0 {
                ms0()?
            } else if coeffs.collapsed_tau {
                warning = Some(format!(
                    "ms1 unavailable for {}: G1 = 0 collapses the auxiliary scale",
                    spec.kernel
                ));
                ms0()?
            } else {
                let ms1 = ms_trajectory(&coeffs, MsOrder::Ms1, alpha, grid, params(spec))?;
                if spec.kernel == KernelKind::Lorentzian {
                    ms1
                } else {
                    let owned;
                    let exact_ref = match reference {
                        Some(r) => r,
                        None => {
                            owned = exact(spec)?;
                            &owned
                        }
                    };
                    let zeroth = ms0()?;
                    let (e1, e0) = (linf(&ms1, exact_ref), linf(&zeroth, exact_ref));
                    if e1 < e0 {
                        ms1
                    } else {
                        ms1_available = false;
                        warning = Some(format!(
                            "ms1 unavailable for {}: its population error {:.4} does not improve \
                             on ms0 ({:.4})",
                            spec.kernel, e1, e0
                        ));
                        zeroth
                    }
                }
            };
            Ok(Built {
                curve: Curve::Amplitude(curve),
                requested: method,
                warning,
                coefficients: Some(coefficients_json(&coeffs, spec.t_max(), ms1_available)?),
            })
        }
        Method::Odp2 | Method::Odp6 | Method::Gme2 | Method::Tcl2 | Method::Tcl6 => {
            require_lorentzian(spec, method)?;
            let which = BaselineMethod::from_method(method).expect("baseline method");
            let baseline = BaselineSpec::new(which, spec.gamma, spec.lambda)?;
            let curve = match which {
                BaselineMethod::Odp2 | BaselineMethod::Odp6 => Curve::Amplitude(
                    AmplitudeTrajectory::from_fn(grid, method, params(spec), |t| {
                        let (c, slope) = odp_sum(&baseline, t);
                        (c.into(), slope.into())
                    }),
                ),
                _ => Curve::Population(baseline.trace(grid)),
            };
            Ok(plain(curve))
        }
    }
}

fn warn(built: &Built) {
    if let Some(w) = &built.warning {
        eprintln!("warning: {w}; writing {} instead", built.curve.method());
    }
}

fn single(spec: &RunSpec, method: Method) -> Result<Value, CliError> {
    let built = build(spec, method, None)?;
    warn(&built);
    let written = built.curve.method();
    let path = spec.out_file("csv", &format!("{}.csv", written.name()));
    write_atomic(&path, &render_csv(&built.curve.rows(spec.threshold))?)?;
    let mut summary = json!({
        "command": spec.command.name(),
        "kernel": spec.kernel.name(),
        "method": written.name(),
        "requested_method": built.requested.name(),
        "gamma": num(spec.gamma),
        "lambda": num(spec.lambda),
        "dt": num(spec.dt()),
        "t_max": num(spec.t_max()),
        "points": built.curve.times().len(),
        "csv": path.display().to_string(),
        "t_hat": opt_num(built.curve.first_zero()),
        "warning": built.warning,
    });
    if let Some(coeffs) = built.coefficients {
        let coeff_path = path.with_file_name(format!(
            "{}_coefficients.json",
            path.file_stem().and_then(|s| s.to_str()).unwrap_or("ms")
        ));
        write_json(&coeff_path, &coeffs)?;
        summary["coefficients"] = coeffs;
        summary["coefficients_json"] = Value::from(coeff_path.display().to_string());
    }
    Ok(summary)
}

fn load(spec: &RunSpec, path: &Path) -> Result<Curve, CliError> {
    // the file does not record its method; `exact` is a neutral label
    curve_from_rows(&read_csv(path)?, Method::Exact, params(spec))
}

fn compare_files(spec: &RunSpec, a: &Path, b: &Path) -> Result<Value, CliError> {
    let (ca, cb) = (load(spec, a)?, load(spec, b)?);
    let report = compare(&ca, &cb)?;
    let value = json!({
        "a": a.display().to_string(),
        "b": b.display().to_string(),
        "linf_population": num(report.linf_population),
        "l2_population": num(report.l2_population),
        "t_hat_a": opt_num(report.t_hat_a),
        "t_hat_b": opt_num(report.t_hat_b),
        "t_hat_rel_error": opt_num(report.t_hat_rel_error),
        "points": report.points,
    });
    let path = spec.out_file("json", "comparison.json");
    write_json(&path, &value)?;
    let mut summary = value;
    summary["command"] = "compare".into();
    summary["json"] = Value::from(path.display().to_string());
    Ok(summary)
}

/// Diagnostics of an amplitude trajectory as the JSON report.
pub fn diagnostics_json(
    traj: &AmplitudeTrajectory<f64>,
    threshold: f64,
) -> Result<Value, CliError> {
    let coeffs = master_coefficients(traj, threshold)?;
    let verdict = is_markovian(&coeffs, MARKOV_TOLERANCE);
    Ok(json!({
        "markovian": verdict.markovian,
        "negative_intervals": verdict
            .negative_intervals
            .iter()
            .map(|&(a, b)| json!([num(a), num(b)]))
            .collect::<Vec<_>>(),
        "singularities": coeffs.singularities.iter().map(|&t| num(t)).collect::<Vec<_>>(),
        "t_hat": opt_num(coeffs.singularities.first().copied()),
        "threshold": num(threshold),
        "points": traj.len(),
    }))
}

fn diagnose(spec: &RunSpec, input: Option<&Path>) -> Result<Value, CliError> {
    let (curve, stem) = match input {
        Some(path) => (
            load(spec, path)?,
            path.file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("input")
                .to_string(),
        ),
        None => {
            let built = build(spec, spec.method.unwrap_or(Method::Exact), None)?;
            warn(&built);
            let name = built.curve.method().name().to_string();
            (built.curve, name)
        }
    };
    let Curve::Amplitude(traj) = &curve else {
        return Err(CliError::Usage(
            "diagnostics need the amplitude; population-only curves have no re_c/im_c".into(),
        ));
    };
    let report = diagnostics_json(traj, spec.threshold)?;
    let dir = spec.out_dir();
    let json_path = dir.join(format!("{stem}_diagnostics.json"));
    let csv_path = dir.join(format!("{stem}_diagnosed.csv"));
    write_json(&json_path, &report)?;
    write_atomic(&csv_path, &render_csv(&curve.rows(spec.threshold))?)?;
    let mut summary = report;
    summary["command"] = "diagnose".into();
    summary["json"] = Value::from(json_path.display().to_string());
    summary["csv"] = Value::from(csv_path.display().to_string());
    Ok(summary)
}

fn sweep(spec: &RunSpec) -> Result<Value, CliError> {
    let sweep = spec
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("sweep needs --sweep NAME:START:STOP:COUNT".into()))?;
    let method = spec.method.unwrap_or(Method::Exact);
    let dir = spec.out_dir();
    let values = sweep.values();
    let width = values.len().to_string().len().max(3);
    let runs: Vec<Result<Value, CliError>> = values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let point = spec.with_parameter(sweep.parameter, value);
            point.validate()?;
            let built = build(&point, method, None)?;
            warn(&built);
            let name = format!(
                "{}_{}_{:0width$}.csv",
                method.name(),
                sweep.parameter.name(),
                i
            );
            write_atomic(
                &dir.join(&name),
                &render_csv(&built.curve.rows(point.threshold))?,
            )?;
            Ok(json!({
                "index": i,
                "value": num(value),
                "csv": name,
                "method": built.curve.method().name(),
                "gamma": num(point.gamma),
                "lambda": num(point.lambda),
                "dt": num(point.dt()),
                "t_max": num(point.t_max()),
                "t_hat": opt_num(built.curve.first_zero()),
                "warning": built.warning,
            }))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let index = json!({
        "parameter": sweep.parameter.name(),
        "method": method.name(),
        "kernel": spec.kernel.name(),
        "runs": runs,
    });
    let path = dir.join("index.json");
    write_json(&path, &index)?;
    let mut summary = index;
    summary["command"] = "sweep".into();
    summary["index"] = Value::from(path.display().to_string());
    Ok(summary)
}

/// Manifest entry (absent for an unavailable curve) and an optional note.
type JobOutcome = Result<(Option<Value>, Option<String>), CliError>;

struct Job {
    label: String,
    file: String,
    style: &'static str,
    panel: Option<&'static str>,
    kernel: KernelKind,
    method: Option<Method>,
}

fn style(method: Method) -> &'static str {
    match method {
        Method::Exact | Method::ClosedForm => "solid",
        Method::Ms0 | Method::Odp2 | Method::Gme2 => "dashed",
        Method::Ms1 | Method::Odp6 => "dashdot",
        Method::Tcl2 | Method::Tcl6 => "dotted",
    }
}

fn figure(spec: &RunSpec, number: u8) -> Result<Value, CliError> {
    if spec.gamma != FIGURE_GAMMA || spec.lambda != FIGURE_LAMBDA {
        return Err(CliError::Usage(format!(
            "figures use gamma = {FIGURE_GAMMA}, lambda = {FIGURE_LAMBDA}"
        )));
    }
    let dir: PathBuf = match &spec.out {
        Some(p) => p.clone(),
        None => spec.out_dir().join(format!("figure{number}")),
    };
    let curve_job = |kernel: KernelKind, method: Method, panel, prefix: bool| Job {
        label: method.name().into(),
        file: if prefix {
            format!("{}_{}.csv", kernel.name(), method.name())
        } else {
            format!("{}.csv", method.name())
        },
        style: style(method),
        panel,
        kernel,
        method: Some(method),
    };
    let mut jobs = Vec::new();
    match number {
        1 => {
            for m in [
                Method::Exact,
                Method::Odp2,
                Method::Odp6,
                Method::Gme2,
                Method::Tcl2,
                Method::Tcl6,
            ] {
                jobs.push(curve_job(KernelKind::Lorentzian, m, None, false));
            }
        }
        2 => {
            for m in [Method::Exact, Method::Ms0, Method::Ms1] {
                jobs.push(curve_job(KernelKind::Lorentzian, m, None, false));
            }
        }
        _ => {
            let kinds = [
                KernelKind::GaussianError,
                KernelKind::InverseLaw,
                KernelKind::Gaussian,
            ];
            for (kind, panel) in kinds.iter().zip(["a", "b", "c"]) {
                jobs.push(Job {
                    label: format!("{} kernel", kind.name()),
                    file: format!("{}_kernel.csv", kind.name()),
                    style: "solid",
                    panel: Some(panel),
                    kernel: *kind,
                    method: None,
                });
            }
            for (kind, panel) in kinds.iter().zip(["d", "e", "f"]) {
                for m in [Method::Exact, Method::Ms0, Method::Ms1] {
                    jobs.push(curve_job(*kind, m, Some(panel), true));
                }
            }
        }
    }

    // exact solves first: non-Lorentzian MS1 is validated against them
    let kinds: Vec<KernelKind> = {
        let mut k: Vec<KernelKind> = jobs.iter().map(|j| j.kernel).collect();
        k.dedup();
        k
    };
    let exacts: Vec<AmplitudeTrajectory<f64>> = kinds
        .par_iter()
        .map(|&kind| exact(&figure_spec(spec, kind)))
        .collect::<Result<_, _>>()?;
    let reference = |kind: KernelKind| &exacts[kinds.iter().position(|&k| k == kind).unwrap()];

    let outcomes: Vec<JobOutcome> = jobs
        .par_iter()
        .map(|job| {
            let point = figure_spec(spec, job.kernel);
            let entry = |job: &Job| {
                let mut e = json!({
                    "label": job.label,
                    "csv": job.file,
                    "style": job.style,
                    "kernel": job.kernel.name(),
                });
                if let Some(m) = job.method {
                    e["method"] = m.name().into();
                }
                if let Some(p) = job.panel {
                    e["panel"] = p.into();
                }
                e
            };
            let Some(method) = job.method else {
                let kernel = ReservoirKernel::new(job.kernel, point.gamma, point.lambda)?;
                let times = grid(&point)?.times();
                let values = times
                    .iter()
                    .map(|&t| kernel.correlation(t))
                    .collect::<crate::Result<Vec<_>>>()?;
                write_atomic(&dir.join(&job.file), &render_kernel_csv(&times, &values)?)?;
                return Ok((Some(entry(job)), None));
            };
            let built = if method == Method::Exact {
                Built {
                    curve: Curve::Amplitude(reference(job.kernel).clone()),
                    requested: method,
                    warning: None,
                    coefficients: None,
                }
            } else {
                build(&point, method, Some(reference(job.kernel)))?
            };
            if built.curve.method() != method {
                // unavailable approximant: leave it out rather than mislabel ms0
                return Ok((None, built.warning));
            }
            write_atomic(
                &dir.join(&job.file),
                &render_csv(&built.curve.rows(point.threshold))?,
            )?;
            Ok((Some(entry(job)), built.warning))
        })
        .collect();

    let mut curves = Vec::new();
    let mut notes = Vec::new();
    for outcome in outcomes {
        let (entry, note) = outcome?;
        curves.extend(entry);
        notes.extend(note);
    }
    let manifest = json!({
        "figure": number,
        "gamma": num(FIGURE_GAMMA),
        "lambda": num(FIGURE_LAMBDA),
        "initial_population": 1,
        "dt": num(spec.dt()),
        "t_max": num(spec.t_max()),
        "curves": curves,
        "notes": notes,
    });
    let path = dir.join("manifest.json");
    write_json(&path, &manifest)?;
    let mut summary = manifest;
    summary["command"] = "figure".into();
    summary["manifest"] = Value::from(path.display().to_string());
    Ok(summary)
}

fn figure_spec(spec: &RunSpec, kernel: KernelKind) -> RunSpec {
    let mut s = spec.clone();
    s.kernel = kernel;
    s
}
