//! Master-equation coefficients, non-Markovianity and trajectory comparison.
//!
//! For a pure one-excitation state the reduced dynamics is a time-local
//! master equation with
//!
//! ```text
//! Γ(t) = -2 Re{Ċ/C},   S(t) = -2 Im{Ċ/C}.
//! ```
//!
//! The evolution is Markovian exactly when `Γ(t) ≥ 0` throughout; at zeros
//! of `C` the coefficients are singular and such points are excluded.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::trajectory::{mean_spacing, AmplitudeTrajectory, PopulationSeries};

/// Default `|C|` below which a point is treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-6;

const REFINE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct MasterEqCoefficients<T> {
    /// Grid times with `|C| ≥ threshold`.
    pub times: Vec<T>,
    pub gamma_t: Vec<T>,
    pub s_t: Vec<T>,
    /// Maximal runs of consecutive reported points with `Γ < 0`.
    pub negative_intervals: Vec<(T, T)>,
    /// Refined zeros of `C`.
    pub singularities: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovianVerdict<T> {
    pub markovian: bool,
    pub negative_intervals: Vec<(T, T)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport<T> {
    /// `max |P_a - P_b|` over the shared grid.
    pub linf_population: T,
    /// Root-mean-square of the same difference.
    pub l2_population: T,
    pub t_hat_a: Option<T>,
    pub t_hat_b: Option<T>,
    /// `|t̂_a - t̂_b| / t̂_b`.
    pub t_hat_rel_error: Option<T>,
    pub points: usize,
}

pub fn master_coefficients<T: Scalar>(
    traj: &AmplitudeTrajectory<T>,
    singularity_threshold: T,
) -> Result<MasterEqCoefficients<T>> {
    if traj.len() < 3 {
        return Err(Error::domain(
            "trajectory",
            format!("need at least 3 points, got {}", traj.len()),
        ));
    }
    if !(singularity_threshold > T::zero() && singularity_threshold < T::one()) {
        return Err(Error::domain(
            "threshold",
            format!("must lie in (0, 1), got {singularity_threshold}"),
        ));
    }
    let derivative = amplitude_derivative(traj);
    let two = lit::<T>(2.0);

    let mut out = MasterEqCoefficients {
        times: Vec::new(),
        gamma_t: Vec::new(),
        s_t: Vec::new(),
        negative_intervals: Vec::new(),
        singularities: find_zeros(traj, &derivative, singularity_threshold),
    };
    let mut run: Option<(T, T)> = None;
    let mut last_reported: Option<usize> = None;
    for (i, (c, d)) in traj.c.iter().zip(&derivative).enumerate() {
        if c.norm() < singularity_threshold {
            continue;
        }
        let ratio = d / c;
        let gamma = -two * ratio.re;
        let t = traj.times[i];
        out.times.push(t);
        out.gamma_t.push(gamma);
        out.s_t.push(-two * ratio.im);

        let contiguous = last_reported == Some(i.wrapping_sub(1));
        last_reported = Some(i);
        match (&mut run, gamma < T::zero()) {
            (Some(r), true) if contiguous => r.1 = t,
            (_, true) => {
                if let Some(done) = run.take() {
                    out.negative_intervals.push(done);
                }
                run = Some((t, t));
            }
            (_, false) => {
                if let Some(done) = run.take() {
                    out.negative_intervals.push(done);
                }
            }
        }
    }
    out.negative_intervals.extend(run);
    Ok(out)
}

pub fn is_markovian<T: Scalar>(coeffs: &MasterEqCoefficients<T>, tol: T) -> MarkovianVerdict<T> {
    let negative_intervals = runs_below(&coeffs.times, &coeffs.gamma_t, -tol);
    MarkovianVerdict {
        markovian: negative_intervals.is_empty() && coeffs.singularities.is_empty(),
        negative_intervals,
    }
}

fn runs_below<T: Scalar>(times: &[T], values: &[T], level: T) -> Vec<(T, T)> {
    let mut runs: Vec<(T, T)> = Vec::new();
    let mut open = false;
    for (&t, &v) in times.iter().zip(values) {
        if v < level {
            match runs.last_mut() {
                Some(r) if open => r.1 = t,
                _ => runs.push((t, t)),
            }
            open = true;
        } else {
            open = false;
        }
    }
    runs
}

/// First zero of `C`, i.e. the first time the state is orthogonal to the
/// initial one; `None` when `|C|` stays above [`SINGULARITY_THRESHOLD`].
pub fn minimal_evolution_time<T: Scalar>(traj: &AmplitudeTrajectory<T>) -> Option<T> {
    if traj.len() < 3 {
        return None;
    }
    let derivative = amplitude_derivative(traj);
    find_zeros(traj, &derivative, lit(SINGULARITY_THRESHOLD))
        .first()
        .copied()
}

pub fn compare<T, A, B>(a: &A, b: &B) -> Result<ComparisonReport<T>>
where
    T: Scalar,
    A: PopulationSeries<T> + ?Sized,
    B: PopulationSeries<T> + ?Sized,
{
    let (ga, gb) = (a.params().gamma, b.params().gamma);
    if (ga - gb).abs() > lit::<T>(1e-12) * ga.abs().max(gb.abs()) {
        return Err(Error::domain(
            "gamma",
            format!("trajectories disagree on gamma ({ga} vs {gb})"),
        ));
    }
    if a.times().len() < 2 || b.times().len() < 2 {
        return Err(Error::domain(
            "trajectory",
            "need at least 2 points to compare",
        ));
    }
    let a_is_coarse = mean_spacing(a.times()) >= mean_spacing(b.times());
    let (end_a, end_b) = (*a.times().last().unwrap(), *b.times().last().unwrap());
    let end = end_a.min(end_b);
    let slack = mean_spacing(a.times()).min(mean_spacing(b.times())) * lit(1e-6);
    let (linf, sum_sq, points) = if a_is_coarse {
        accumulate(a, b, end + slack)
    } else {
        accumulate(b, a, end + slack)
    };
    let l2 = (sum_sq / T::from_usize(points.max(1)).unwrap()).sqrt();

    let (t_hat_a, t_hat_b) = (a.first_zero(), b.first_zero());
    let t_hat_rel_error = match (t_hat_a, t_hat_b) {
        (Some(x), Some(y)) if y != T::zero() => Some(((x - y) / y).abs()),
        _ => None,
    };
    Ok(ComparisonReport {
        linf_population: linf,
        l2_population: l2,
        t_hat_a,
        t_hat_b,
        t_hat_rel_error,
        points,
    })
}

/// `(max, sum of squares, count)` of the population difference sampled on
/// the coarse grid up to `end`.
fn accumulate<T, C, F>(coarse: &C, fine: &F, end: T) -> (T, T, usize)
where
    T: Scalar,
    C: PopulationSeries<T> + ?Sized,
    F: PopulationSeries<T> + ?Sized,
{
    let mut linf = T::zero();
    let mut sum_sq = T::zero();
    let mut points = 0usize;
    for (i, &t) in coarse.times().iter().enumerate() {
        if t > end {
            break;
        }
        let diff = (coarse.population(i) - interpolate(fine, t)).abs();
        linf = linf.max(diff);
        sum_sq = sum_sq + diff * diff;
        points += 1;
    }
    (linf, sum_sq, points)
}

/// Linear interpolation of the population at `t` (clamped to the grid).
fn interpolate<T: Scalar, S: PopulationSeries<T> + ?Sized>(series: &S, t: T) -> T {
    let times = series.times();
    let j = times.partition_point(|&x| x <= t);
    if j == 0 {
        return series.population(0);
    }
    if j >= times.len() {
        return series.population(times.len() - 1);
    }
    let (t0, t1) = (times[j - 1], times[j]);
    let (p0, p1) = (series.population(j - 1), series.population(j));
    let w = (t - t0) / (t1 - t0);
    p0 + w * (p1 - p0)
}

/// Stored `Ċ` or, failing that, fourth-order finite differences.
pub fn amplitude_derivative<T: Scalar>(traj: &AmplitudeTrajectory<T>) -> Vec<Complex<T>> {
    match &traj.c_dot {
        Some(d) => d.clone(),
        None => finite_difference(&traj.c, traj.spacing()),
    }
}

/// Fourth-order central differences with one-sided fourth-order stencils at
/// the ends (second order when fewer than five samples exist).
pub fn finite_difference<T: Scalar>(c: &[Complex<T>], h: T) -> Vec<Complex<T>> {
    let n = c.len();
    let k = |x: f64| lit::<T>(x);
    if n < 2 {
        return vec![Complex::new(T::zero(), T::zero()); n];
    }
    if n < 5 {
        return (0..n)
            .map(|i| {
                if i == 0 {
                    (c[1] - c[0]) / h
                } else if i == n - 1 {
                    (c[n - 1] - c[n - 2]) / h
                } else {
                    (c[i + 1] - c[i - 1]) / (k(2.0) * h)
                }
            })
            .collect();
    }
    let denom = k(12.0) * h;
    (0..n)
        .map(|i| {
            let s = if i >= 2 && i + 2 < n {
                -c[i + 2] + c[i + 1] * k(8.0) - c[i - 1] * k(8.0) + c[i - 2]
            } else if i == 0 {
                -c[0] * k(25.0) + c[1] * k(48.0) - c[2] * k(36.0) + c[3] * k(16.0) - c[4] * k(3.0)
            } else if i == 1 {
                -c[0] * k(3.0) - c[1] * k(10.0) + c[2] * k(18.0) - c[3] * k(6.0) + c[4]
            } else if i == n - 1 {
                c[n - 1] * k(25.0) - c[n - 2] * k(48.0) + c[n - 3] * k(36.0) - c[n - 4] * k(16.0)
                    + c[n - 5] * k(3.0)
            } else {
                c[n - 1] * k(3.0) + c[n - 2] * k(10.0) - c[n - 3] * k(18.0) + c[n - 4] * k(6.0)
                    - c[n - 5]
            };
            s / denom
        })
        .collect()
}

/// Cubic Hermite interpolant of `C` on one grid cell.
struct Cell<T> {
    a: T,
    h: T,
    y0: Complex<T>,
    y1: Complex<T>,
    m0: Complex<T>,
    m1: Complex<T>,
}

impl<T: Scalar> Cell<T> {
    fn eval(&self, t: T) -> Complex<T> {
        let s = (t - self.a) / self.h;
        let (two, three) = (lit::<T>(2.0), lit::<T>(3.0));
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        self.y0 * h00 + self.m0 * (h10 * self.h) + self.y1 * h01 + self.m1 * (h11 * self.h)
    }

    fn end(&self) -> T {
        self.a + self.h
    }

    /// Location and value of the smallest `|C|` in the cell.
    fn minimum(&self, real: bool) -> (T, T) {
        let tol = lit::<T>(REFINE_TOLERANCE);
        let half = lit::<T>(0.5);
        if real {
            let (mut lo, mut hi) = (self.a, self.end());
            let (mut flo, fhi) = (self.eval(lo).re, self.eval(hi).re);
            if (flo > T::zero()) != (fhi > T::zero()) {
                for _ in 0..200 {
                    if hi - lo <= tol {
                        break;
                    }
                    let mid = (lo + hi) * half;
                    let fm = self.eval(mid).re;
                    if (fm > T::zero()) == (flo > T::zero()) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                let root = (lo + hi) * half;
                return (root, self.eval(root).norm());
            }
        }
        // golden-section search on |C|
        let inv_phi = lit::<T>(0.618_033_988_749_894_8);
        let (mut lo, mut hi) = (self.a, self.end());
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (self.eval(x1).norm(), self.eval(x2).norm());
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.eval(x1).norm();
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.eval(x2).norm();
            }
        }
        let mut best = ((lo + hi) * half, self.eval((lo + hi) * half).norm());
        for t in [self.a, self.end()] {
            let v = self.eval(t).norm();
            if v < best.1 {
                best = (t, v);
            }
        }
        best
    }
}

/// Zeros of `C`: local minima of `|C|` on the grid refined on the Hermite
/// interpolant, kept when the refined `|C|` falls below `threshold`.
fn find_zeros<T: Scalar>(
    traj: &AmplitudeTrajectory<T>,
    derivative: &[Complex<T>],
    threshold: T,
) -> Vec<T> {
    let n = traj.len();
    let real = traj.is_real();
    let mag: Vec<T> = traj.c.iter().map(|c| c.norm()).collect();
    let cell = |i: usize| Cell {
        a: traj.times[i],
        h: traj.times[i + 1] - traj.times[i],
        y0: traj.c[i],
        y1: traj.c[i + 1],
        m0: derivative[i],
        m1: derivative[i + 1],
    };
    let mut zeros: Vec<T> = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(mag[i] <= mag[i - 1] && mag[i] <= mag[i + 1]) {
            continue;
        }
        let h = traj.times[i + 1] - traj.times[i - 1];
        let slope = derivative[i - 1]
            .norm()
            .max(derivative[i].norm())
            .max(derivative[i + 1].norm());
        if mag[i] > threshold + slope * h {
            continue;
        }
        let (left, right) = (cell(i - 1).minimum(real), cell(i).minimum(real));
        let (t, v) = if left.1 <= right.1 { left } else { right };
        if v < threshold {
            let spacing = h * lit(0.25);
            if zeros.last().is_none_or(|&z| (t - z).abs() > spacing) {
                zeros.push(t);
            }
        }
    }
    zeros
}
