//! Exact amplitude dynamics `Ċ(t) = -∫₀ᵗ G(t-t') C(t') dt'`, `C(0) = 1`.
//!
//! The memory integral uses trapezoidal weights over the stored samples and
//! each step is advanced with an Euler predictor and a trapezoidal corrector
//! (second order overall). Kernel samples `G(k·dt)` are computed once, so a
//! step costs O(n) and a solve O(n²).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kernels::ReservoirKernel;
use crate::scalar::{lit, to_f64, Scalar};
use crate::trajectory::{AmplitudeTrajectory, Method, RunParams, TimeGrid};

/// Allowed overshoot of `|C|` above 1 on a converged solve.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-6;

/// Largest Richardson error estimate accepted when `refine_check` is on.
pub const REFINE_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub dt: T,
    pub t_max: T,
    /// Re-solve at `dt/2` and fail if the two solutions disagree by more than
    /// [`REFINE_TOLERANCE`].
    pub refine_check: bool,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(dt: T, t_max: T) -> Self {
        Self {
            dt,
            t_max,
            refine_check: false,
        }
    }

    /// `dt = 10⁻³/γ`, `t_max = 20/γ`.
    pub fn default_for(gamma: T) -> Self {
        Self::new(lit::<T>(1e-3) / gamma, lit::<T>(20.0) / gamma)
    }

    pub fn with_refine_check(mut self, on: bool) -> Self {
        self.refine_check = on;
        self
    }

    pub fn grid(&self) -> Result<TimeGrid<T>> {
        TimeGrid::new(self.dt, self.t_max)
    }
}

pub fn solve_exact<T: Scalar>(
    kernel: &ReservoirKernel<T>,
    config: &SolverConfig<T>,
) -> Result<AmplitudeTrajectory<T>> {
    let grid = config.grid()?;
    let mut traj = integrate(kernel, grid)?;
    if config.refine_check {
        let fine = integrate(
            kernel,
            TimeGrid {
                dt: grid.dt * lit(0.5),
                steps: grid.steps * 2,
            },
        )?;
        let max_diff = traj
            .c
            .iter()
            .zip(fine.c.iter().step_by(2))
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max);
        let estimate = max_diff * lit(4.0 / 3.0);
        traj.refine_error = Some(estimate);
        if estimate > lit(REFINE_TOLERANCE) {
            return Err(Error::NotConverged {
                estimate: to_f64(estimate),
                tolerance: REFINE_TOLERANCE,
            });
        }
    }
    Ok(traj)
}

fn integrate<T: Scalar>(
    kernel: &ReservoirKernel<T>,
    grid: TimeGrid<T>,
) -> Result<AmplitudeTrajectory<T>> {
    let n = grid.steps;
    let dt = grid.dt;
    let half = lit::<T>(0.5);
    let bound = T::one() + lit::<T>(10.0 * AMPLITUDE_TOLERANCE);

    let g: Vec<T> = (0..=n)
        .map(|k| kernel.correlation_unchecked(grid.time(k)))
        .collect();
    let g0_half = half * g[0] * dt;

    let mut c = Vec::with_capacity(n + 1);
    let mut c_dot = Vec::with_capacity(n + 1);
    c.push(Complex::new(T::one(), T::zero()));
    c_dot.push(Complex::new(T::zero(), T::zero()));

    for k in 1..=n {
        // Memory integral without the (unknown) endpoint term at t_k.
        let mut re = half * g[k] * c[0].re;
        let mut im = half * g[k] * c[0].im;
        for (gk, cj) in g[1..k].iter().rev().zip(&c[1..k]) {
            re = re + *gk * cj.re;
            im = im + *gk * cj.im;
        }
        let history = Complex::new(re * dt, im * dt);

        let prev = c[k - 1];
        let prev_dot = c_dot[k - 1];
        let predicted = prev + prev_dot * dt;
        let predicted_dot = -(history + predicted * g0_half);
        let corrected = prev + (prev_dot + predicted_dot) * (dt * half);
        let corrected_dot = -(history + corrected * g0_half);

        let magnitude = corrected.norm();
        if !(magnitude <= bound) {
            return Err(Error::Instability {
                t: to_f64(grid.time(k)),
                magnitude: to_f64(magnitude),
            });
        }
        c.push(corrected);
        c_dot.push(corrected_dot);
    }

    Ok(AmplitudeTrajectory {
        times: grid.times(),
        c,
        c_dot: Some(c_dot),
        method: Method::Exact,
        params: RunParams {
            kind: kernel.kind(),
            gamma: kernel.gamma(),
            lambda: kernel.lambda(),
        },
        refine_error: None,
    })
}

/// Closed-form Lorentzian amplitude
/// `C(t) = e^{-λt/2}[cos(Dt/2) + (λ/D) sin(Dt/2)]`, `D = √(2γλ - λ²)`.
///
/// Real in every regime; `D` imaginary gives the hyperbolic (weak-coupling)
/// branch and `D = 0` its analytic limit.
pub fn lorentzian_closed_form<T: Scalar>(gamma: T, lambda: T, t: T) -> Result<Complex<T>> {
    Ok(lorentzian_closed_form_with_derivative(gamma, lambda, t)?.0)
}

/// [`lorentzian_closed_form`] together with `Ċ(t)`.
pub fn lorentzian_closed_form_with_derivative<T: Scalar>(
    gamma: T,
    lambda: T,
    t: T,
) -> Result<(Complex<T>, Complex<T>)> {
    if !(t >= T::zero()) {
        return Err(Error::domain("t", format!("must be nonnegative, got {t}")));
    }
    if !(gamma > T::zero()) || !(lambda > T::zero()) {
        return Err(Error::domain(
            "gamma/lambda",
            format!("must be positive, got gamma = {gamma}, lambda = {lambda}"),
        ));
    }
    let d_sq = lit::<T>(2.0) * gamma * lambda - lambda * lambda;
    let (x, v) = damped_response(lambda, d_sq, t);
    Ok((Complex::new(x, T::zero()), Complex::new(v, T::zero())))
}

/// Solution of `ẍ + λẋ + ((λ² + D²)/4) x = 0`, `x(0) = 1`, `ẋ(0) = 0`, as
/// `(x, ẋ)`; `d_sq = D²` may be negative or zero.
pub(crate) fn damped_response<T: Scalar>(lambda: T, d_sq: T, t: T) -> (T, T) {
    let half = lit::<T>(0.5);
    let quarter_stiffness = (lambda * lambda + d_sq) * lit(0.25);
    if d_sq > T::zero() {
        let d = d_sq.sqrt();
        let env = (-lambda * t * half).exp();
        let (s, c) = (d * t * half).sin_cos();
        let x = env * (c + lambda / d * s);
        let v = -lit::<T>(2.0) * quarter_stiffness / d * env * s;
        (x, v)
    } else if d_sq < T::zero() {
        // cosh/sinh written as exponentials so large t cannot overflow
        let kappa = (-d_sq).sqrt();
        let slow = ((kappa - lambda) * t * half).exp();
        let fast = (-(kappa + lambda) * t * half).exp();
        let ratio = lambda / kappa;
        let x = half * (slow * (T::one() + ratio) + fast * (T::one() - ratio));
        let v = -lit::<T>(2.0) * quarter_stiffness / kappa * half * (slow - fast);
        (x, v)
    } else {
        let env = (-lambda * t * half).exp();
        let x = env * (T::one() + lambda * t * half);
        let v = -quarter_stiffness * t * env;
        (x, v)
    }
}

/// Closed-form Lorentzian solution sampled on `grid`.
pub fn lorentzian_trajectory<T: Scalar>(
    gamma: T,
    lambda: T,
    grid: TimeGrid<T>,
) -> Result<AmplitudeTrajectory<T>> {
    AmplitudeTrajectory::fallible_from_fn(
        grid,
        Method::ClosedForm,
        RunParams {
            kind: crate::kernels::KernelKind::Lorentzian,
            gamma,
            lambda,
        },
        |t| lorentzian_closed_form_with_derivative(gamma, lambda, t),
    )
}
