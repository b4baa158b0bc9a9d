//! CSV/JSON serialization shared by every subcommand.
//!
//! Trajectory CSVs carry `t,re_c,im_c,population,gamma_t,s_t`. Population-only
//! curves leave `re_c`/`im_c` empty; `gamma_t`/`s_t` are empty wherever the
//! dissipator is undefined or not computed.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde_json::Value;

use super::CliError;
use crate::diagnostics::{amplitude_derivative, finite_difference};
use crate::trajectory::{
    AmplitudeTrajectory, Method, PopulationSeries, PopulationTrace, RunParams,
};

pub const CSV_HEADER: [&str; 6] = ["t", "re_c", "im_c", "population", "gamma_t", "s_t"];
pub const KERNEL_CSV_HEADER: [&str; 2] = ["t", "correlation"];

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal that reads back as the 12-digit rounding of `x`.
pub fn format_number(x: f64) -> String {
    format!("{:?}", round12(x))
}

/// JSON number rounded like the CSVs; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(round12(x))
    } else {
        Value::Null
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub c: Option<Complex<f64>>,
    pub population: f64,
    pub gamma_t: Option<f64>,
    pub s_t: Option<f64>,
}

/// Rows of an amplitude trajectory, with `Γ`/`S` wherever `|C| ≥ threshold`.
pub fn trajectory_rows(traj: &AmplitudeTrajectory<f64>, threshold: f64) -> Vec<CsvRow> {
    let derivative = amplitude_derivative(traj);
    traj.times
        .iter()
        .zip(&traj.c)
        .zip(&derivative)
        .map(|((&t, &c), d)| {
            let defined = c.norm() >= threshold;
            let ratio = d / c;
            CsvRow {
                t,
                c: Some(c),
                population: c.norm_sqr(),
                gamma_t: defined.then(|| -2.0 * ratio.re),
                s_t: defined.then(|| -2.0 * ratio.im),
            }
        })
        .collect()
}

pub fn trace_rows(trace: &PopulationTrace<f64>) -> Vec<CsvRow> {
    (0..trace.len())
        .map(|i| CsvRow {
            t: trace.times[i],
            c: None,
            population: trace.population[i],
            gamma_t: trace.gamma_t.as_ref().map(|g| g[i]),
            s_t: None,
        })
        .collect()
}

pub fn render_csv(rows: &[CsvRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    let field = |x: Option<f64>| x.map(format_number).unwrap_or_default();
    for r in rows {
        w.write_record([
            format_number(r.t),
            field(r.c.map(|c| c.re)),
            field(r.c.map(|c| c.im)),
            format_number(r.population),
            field(r.gamma_t),
            field(r.s_t),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn render_kernel_csv(times: &[f64], values: &[f64]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(KERNEL_CSV_HEADER)?;
    for (&t, &g) in times.iter().zip(values) {
        w.write_record([format_number(t), format_number(g)])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, CliError> {
    let bad = |msg: String| CliError::Io(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("expected header `{}`", CSV_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let cell = |i: usize| -> Result<Option<f64>, CliError> {
            let text = record.get(i).unwrap_or("").trim();
            if text.is_empty() {
                return Ok(None);
            }
            text.parse()
                .map(Some)
                .map_err(|_| bad(format!("row {}: bad number `{text}`", line + 2)))
        };
        let required = |i: usize| {
            cell(i)?.ok_or_else(|| bad(format!("row {}: missing `{}`", line + 2, CSV_HEADER[i])))
        };
        let c = match (cell(1)?, cell(2)?) {
            (Some(re), Some(im)) => Some(Complex::new(re, im)),
            (None, None) => None,
            _ => return Err(bad(format!("row {}: half an amplitude", line + 2))),
        };
        rows.push(CsvRow {
            t: required(0)?,
            c,
            population: required(3)?,
            gamma_t: cell(4)?,
            s_t: cell(5)?,
        });
    }
    if rows.len() < 2 {
        return Err(bad("fewer than two rows".into()));
    }
    Ok(rows)
}

/// A curve read back from CSV.
#[derive(Clone, Debug)]
pub enum Curve {
    Amplitude(AmplitudeTrajectory<f64>),
    Population(PopulationTrace<f64>),
}

impl Curve {
    pub fn rows(&self, threshold: f64) -> Vec<CsvRow> {
        match self {
            Curve::Amplitude(t) => trajectory_rows(t, threshold),
            Curve::Population(t) => trace_rows(t),
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Curve::Amplitude(t) => t.method,
            Curve::Population(t) => t.method,
        }
    }

    fn series(&self) -> &dyn PopulationSeries<f64> {
        match self {
            Curve::Amplitude(t) => t,
            Curve::Population(t) => t,
        }
    }
}

impl PopulationSeries<f64> for Curve {
    fn times(&self) -> &[f64] {
        self.series().times()
    }

    fn population(&self, i: usize) -> f64 {
        self.series().population(i)
    }

    fn params(&self) -> &RunParams<f64> {
        self.series().params()
    }

    fn first_zero(&self) -> Option<f64> {
        self.series().first_zero()
    }
}

/// Rebuilds a curve from CSV rows. Amplitude rows get `Ċ = -C(Γ + iS)/2`
/// where the dissipator columns are filled and finite differences elsewhere.
pub fn curve_from_rows(
    rows: &[CsvRow],
    method: Method,
    params: RunParams<f64>,
) -> Result<Curve, CliError> {
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Io("CSV times are not strictly increasing".into()));
    }
    let amplitudes: Option<Vec<Complex<f64>>> = rows.iter().map(|r| r.c).collect();
    let Some(c) = amplitudes else {
        if rows.iter().any(|r| r.c.is_some()) {
            return Err(CliError::Io(
                "amplitude columns are only partly filled".into(),
            ));
        }
        let gamma_t: Option<Vec<f64>> = rows.iter().map(|r| r.gamma_t).collect();
        return Ok(Curve::Population(PopulationTrace {
            times,
            population: rows.iter().map(|r| r.population).collect(),
            gamma_t,
            method,
            params,
        }));
    };
    let c_dot = if rows.iter().any(|r| r.gamma_t.is_some()) {
        let spacing = crate::trajectory::mean_spacing(&times);
        let fallback = finite_difference(&c, spacing);
        Some(
            rows.iter()
                .zip(&fallback)
                .map(|(r, fd)| match (r.c, r.gamma_t) {
                    (Some(c), Some(g)) => -c * Complex::new(g, r.s_t.unwrap_or(0.0)) * 0.5,
                    _ => *fd,
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(Curve::Amplitude(AmplitudeTrajectory {
        times,
        c,
        c_dot,
        method,
        params,
        refine_error: None,
    }))
}
