//! Flags, JSON config files and their merge into a [`RunSpec`].

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use super::CliError;
use crate::kernels::KernelKind;
use crate::trajectory::Method;

/// Parameters of the figure datasets.
pub const FIGURE_GAMMA: f64 = 1.0;
pub const FIGURE_LAMBDA: f64 = 0.1;

#[derive(Parser, Debug, Clone, Default)]
#[command(
    name = "nml",
    version,
    about = "Two-level amplitude dynamics in a structured reservoir",
    long_about = "Exact Volterra solves, multiple-scale approximants, perturbative baselines \
                  and master-equation diagnostics. Results go to CSV/JSON files; a JSON \
                  summary is printed on stdout."
)]
pub struct Cli {
    /// lorentzian, gaussian-error, inverse-law or gaussian
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// exact, closed-form, ms0, ms1, odp2, odp6, gme2, tcl2 or tcl6
    #[arg(long, global = true)]
    pub method: Option<String>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long = "t-max", global = true)]
    pub t_max: Option<f64>,
    /// Output file (`*.csv`, `*.json`) or directory; defaults to $NML_OUT_DIR
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat JSON object keyed by flag names; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "NAME:START:STOP:COUNT")]
    pub sweep: Option<String>,
    /// |C| below which dissipator samples count as singular
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Exact numerical solve
    Solve,
    /// Approximate solution selected by --method
    Perturb,
    /// Compare two trajectory CSVs on population
    Compare { a: PathBuf, b: PathBuf },
    /// Dissipator, shift and Markovianity of a CSV or of a fresh solve
    Diagnose { input: Option<PathBuf> },
    /// One run per value of --sweep
    Sweep,
    /// Datasets behind figure 1, 2 or 3
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        number: u8,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Perturb => "perturb",
            Command::Compare { .. } => "compare",
            Command::Diagnose { .. } => "diagnose",
            Command::Sweep => "sweep",
            Command::Figure { .. } => "figure",
        }
    }
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConfigFile {
    command: Option<String>,
    kernel: Option<String>,
    gamma: Option<f64>,
    lambda: Option<f64>,
    method: Option<String>,
    dt: Option<f64>,
    #[serde(alias = "t_max")]
    t_max: Option<f64>,
    out: Option<PathBuf>,
    sweep: Option<String>,
    threshold: Option<f64>,
    /// Positional arguments of `compare` (two paths) or `diagnose` (one).
    #[serde(default)]
    inputs: Vec<PathBuf>,
    figure: Option<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    Gamma,
    Lambda,
    Dt,
    TMax,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Gamma => "gamma",
            SweepParameter::Lambda => "lambda",
            SweepParameter::Dt => "dt",
            SweepParameter::TMax => "t-max",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Usage(format!(
                "--sweep expects NAME:START:STOP:COUNT, got `{text}`"
            ))
        };
        let parts: Vec<&str> = text.split(':').collect();
        let [name, start, stop, count] = parts[..] else {
            return Err(bad());
        };
        let parameter = match name {
            "gamma" => SweepParameter::Gamma,
            "lambda" => SweepParameter::Lambda,
            "dt" => SweepParameter::Dt,
            "t-max" | "t_max" => SweepParameter::TMax,
            other => {
                return Err(CliError::Usage(format!(
                    "cannot sweep `{other}` (gamma, lambda, dt or t-max)"
                )))
            }
        };
        let start: f64 = start.parse().map_err(|_| bad())?;
        let stop: f64 = stop.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        Ok(Self {
            parameter,
            start,
            stop,
            count,
        })
    }

    /// Evenly spaced values, both ends included.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

/// A fully resolved job.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub kernel: KernelKind,
    pub gamma: f64,
    pub lambda: f64,
    pub method: Option<Method>,
    dt: Option<f64>,
    t_max: Option<f64>,
    pub out: Option<PathBuf>,
    pub sweep: Option<Sweep>,
    pub threshold: f64,
}

impl RunSpec {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => load_config(path)?,
            None => ConfigFile::default(),
        };
        let command = match cli.command {
            Some(c) => c,
            None => command_from_config(&file)?,
        };
        let kernel = match cli.kernel.or(file.kernel) {
            Some(name) => name.parse().map_err(usage)?,
            None => KernelKind::Lorentzian,
        };
        let method = cli
            .method
            .or(file.method)
            .map(|m| m.parse::<Method>())
            .transpose()
            .map_err(usage)?;
        let sweep = cli
            .sweep
            .or(file.sweep)
            .map(|s| Sweep::parse(&s))
            .transpose()?;
        let spec = Self {
            command,
            kernel,
            gamma: cli.gamma.or(file.gamma).unwrap_or(FIGURE_GAMMA),
            lambda: cli.lambda.or(file.lambda).unwrap_or(FIGURE_LAMBDA),
            method,
            dt: cli.dt.or(file.dt),
            t_max: cli.t_max.or(file.t_max),
            out: cli.out.or(file.out),
            sweep,
            threshold: cli
                .threshold
                .or(file.threshold)
                .unwrap_or(crate::diagnostics::SINGULARITY_THRESHOLD),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub(super) fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!(
                    "--{name} must be positive, got {v}"
                )))
            }
        };
        positive("gamma", self.gamma)?;
        positive("lambda", self.lambda)?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if let Some(t) = self.t_max {
            positive("t-max", t)?;
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(CliError::Usage(format!(
                "--threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }

    /// Step size; scales as `1e-3/γ` unless given.
    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(1e-3 / self.gamma)
    }

    /// Horizon; scales as `20/γ` unless given.
    pub fn t_max(&self) -> f64 {
        self.t_max.unwrap_or(20.0 / self.gamma)
    }

    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Self {
        let mut spec = self.clone();
        match parameter {
            SweepParameter::Gamma => spec.gamma = value,
            SweepParameter::Lambda => spec.lambda = value,
            SweepParameter::Dt => spec.dt = Some(value),
            SweepParameter::TMax => spec.t_max = Some(value),
        }
        spec
    }

    /// Base output directory: `--out`, else `$NML_OUT_DIR`, else `.`.
    pub fn out_dir(&self) -> PathBuf {
        match &self.out {
            Some(p) => p.clone(),
            None => default_dir(),
        }
    }

    /// `--out` when it names a file with `extension`, otherwise
    /// `default_name` inside the output directory.
    pub fn out_file(&self, extension: &str, default_name: &str) -> PathBuf {
        match &self.out {
            Some(p) if p.extension().is_some_and(|e| e == extension) => p.clone(),
            Some(p) => p.join(default_name),
            None => default_dir().join(default_name),
        }
    }
}

fn default_dir() -> PathBuf {
    std::env::var_os("NML_OUT_DIR")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn usage(e: crate::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn command_from_config(file: &ConfigFile) -> Result<Command, CliError> {
    let Some(name) = file.command.as_deref() else {
        return Err(CliError::Usage(
            "no subcommand given (solve, perturb, compare, diagnose, sweep, figure)".into(),
        ));
    };
    Ok(match name {
        "solve" => Command::Solve,
        "perturb" => Command::Perturb,
        "sweep" => Command::Sweep,
        "compare" => match &file.inputs[..] {
            [a, b] => Command::Compare {
                a: a.clone(),
                b: b.clone(),
            },
            _ => return Err(CliError::Usage("compare needs exactly two `inputs`".into())),
        },
        "diagnose" => match &file.inputs[..] {
            [] => Command::Diagnose { input: None },
            [one] => Command::Diagnose {
                input: Some(one.clone()),
            },
            _ => return Err(CliError::Usage("diagnose takes at most one input".into())),
        },
        "figure" => match file.figure {
            Some(n @ 1..=3) => Command::Figure { number: n },
            _ => return Err(CliError::Usage("figure needs `figure`: 1, 2 or 3".into())),
        },
        other => return Err(CliError::Usage(format!("unknown command `{other}`"))),
    })
}
