//! Sampled amplitude and population curves.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::scalar::Scalar;

/// How a curve was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    ClosedForm,
    Ms0,
    Ms1,
    Odp2,
    Odp6,
    Gme2,
    Tcl2,
    Tcl6,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Exact,
        Method::ClosedForm,
        Method::Ms0,
        Method::Ms1,
        Method::Odp2,
        Method::Odp6,
        Method::Gme2,
        Method::Tcl2,
        Method::Tcl6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::ClosedForm => "closed-form",
            Method::Ms0 => "ms0",
            Method::Ms1 => "ms1",
            Method::Odp2 => "odp2",
            Method::Odp6 => "odp6",
            Method::Gme2 => "gme2",
            Method::Tcl2 => "tcl2",
            Method::Tcl6 => "tcl6",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::domain("method", format!("unknown method `{s}`")))
    }
}

/// Parameter echo carried by every curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunParams<T> {
    pub kind: KernelKind,
    pub gamma: T,
    pub lambda: T,
}

/// Uniform grid `t_k = k·dt`, `k = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    pub dt: T,
    pub steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(dt: T, t_max: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::domain("dt", format!("must be positive, got {dt}")));
        }
        if !(t_max >= dt) || !t_max.is_finite() {
            return Err(Error::domain(
                "t_max",
                format!("must be finite and at least dt = {dt}, got {t_max}"),
            ));
        }
        let steps = (t_max / dt).round();
        if steps > T::from_f64(1e8).unwrap_or_else(T::max_value) {
            return Err(Error::domain(
                "t_max",
                format!("t_max/dt = {steps} exceeds the 1e8 step limit"),
            ));
        }
        Ok(Self {
            dt,
            steps: steps.to_usize().unwrap_or(0).max(1),
        })
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> T {
        T::from_usize(k).expect("step index representable") * self.dt
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

/// Complex amplitude `C(t)` on a uniform grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTrajectory<T> {
    pub times: Vec<T>,
    pub c: Vec<Complex<T>>,
    /// `Ċ(t)`, absent when the source did not provide it (e.g. a CSV without
    /// dissipator columns).
    pub c_dot: Option<Vec<Complex<T>>>,
    pub method: Method,
    pub params: RunParams<T>,
    /// Richardson estimate of the discretization error, set by a refined solve.
    pub refine_error: Option<T>,
}

impl<T: Scalar> AmplitudeTrajectory<T> {
    /// Samples an analytic `(C, Ċ)` evaluator on `grid`.
    pub fn from_fn<F>(grid: TimeGrid<T>, method: Method, params: RunParams<T>, mut f: F) -> Self
    where
        F: FnMut(T) -> (Complex<T>, Complex<T>),
    {
        let times = grid.times();
        let (c, c_dot) = times.iter().map(|&t| f(t)).unzip();
        Self {
            times,
            c,
            c_dot: Some(c_dot),
            method,
            params,
            refine_error: None,
        }
    }

    pub fn fallible_from_fn<F>(
        grid: TimeGrid<T>,
        method: Method,
        params: RunParams<T>,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(T) -> Result<(Complex<T>, Complex<T>)>,
    {
        let times = grid.times();
        let mut c = Vec::with_capacity(times.len());
        let mut c_dot = Vec::with_capacity(times.len());
        for &t in &times {
            let (v, d) = f(t)?;
            c.push(v);
            c_dot.push(d);
        }
        Ok(Self {
            times,
            c,
            c_dot: Some(c_dot),
            method,
            params,
            refine_error: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `|C(t)|²`, the excited-state population.
    pub fn populations(&self) -> Vec<T> {
        self.c.iter().map(|c| c.norm_sqr()).collect()
    }

    /// True when every sample has a vanishing imaginary part.
    pub fn is_real(&self) -> bool {
        self.c.iter().all(|c| c.im == T::zero())
    }

    /// Mean grid spacing.
    pub fn spacing(&self) -> T {
        mean_spacing(&self.times)
    }
}

/// A population curve without an underlying amplitude (GME and TCL baselines).
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationTrace<T> {
    pub times: Vec<T>,
    pub population: Vec<T>,
    /// Dissipator of the approximate master equation, when the method has one.
    pub gamma_t: Option<Vec<T>>,
    pub method: Method,
    pub params: RunParams<T>,
}

impl<T: Scalar> PopulationTrace<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Anything that can be compared on population: both curve types implement it.
pub trait PopulationSeries<T: Scalar> {
    fn times(&self) -> &[T];
    fn population(&self, i: usize) -> T;
    fn params(&self) -> &RunParams<T>;
    /// First time the state becomes orthogonal to the initial state.
    fn first_zero(&self) -> Option<T>;
}

impl<T: Scalar> PopulationSeries<T> for AmplitudeTrajectory<T> {
    fn times(&self) -> &[T] {
        &self.times
    }

    fn population(&self, i: usize) -> T {
        self.c[i].norm_sqr()
    }

    fn params(&self) -> &RunParams<T> {
        &self.params
    }

    fn first_zero(&self) -> Option<T> {
        crate::diagnostics::minimal_evolution_time(self)
    }
}

impl<T: Scalar> PopulationSeries<T> for PopulationTrace<T> {
    fn times(&self) -> &[T] {
        &self.times
    }

    fn population(&self, i: usize) -> T {
        self.population[i]
    }

    fn params(&self) -> &RunParams<T> {
        &self.params
    }

    /// First sign change (or exact zero) of the population, linearly interpolated.
    fn first_zero(&self) -> Option<T> {
        let p = &self.population;
        if p.first().is_some_and(|v| *v == T::zero()) {
            return Some(self.times[0]);
        }
        p.windows(2).enumerate().find_map(|(i, w)| {
            if w[1] == T::zero() {
                Some(self.times[i + 1])
            } else if (w[0] > T::zero()) != (w[1] > T::zero()) {
                let frac = w[0] / (w[0] - w[1]);
                Some(self.times[i] + frac * (self.times[i + 1] - self.times[i]))
            } else {
                None
            }
        })
    }
}

pub(crate) fn mean_spacing<T: Scalar>(times: &[T]) -> T {
    match times {
        [] | [_] => T::zero(),
        [first, .., last] => (*last - *first) / T::from_usize(times.len() - 1).unwrap(),
    }
}
