//! Amplitude dynamics of a two-level system coupled to a structured reservoir.
//!
//! The excited-state amplitude obeys the Volterra equation
//!
//! ```text
//! Ċ(t) = -∫₀ᵗ G(t - t') C(t') dt',   C(0) = 1,
//! ```
//!
//! with `G` a reservoir correlation function from [`kernels`]. The crate
//! provides an exact numerical solve ([`volterra`]), the two-scale
//! approximants MS0/MS1 ([`multiscale`]), conventional perturbative
//! baselines ([`baselines`]) and master-equation diagnostics
//! ([`diagnostics`]). The `nml` binary wraps these in a CSV/JSON driver.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the CLI uses.
//!
//! ```
//! use nml::{Kernel, KernelKind, SolverConfig};
//!
//! let kernel = Kernel::new(KernelKind::Lorentzian, 1.0, 0.1).unwrap();
//! let traj = nml::solve_exact(&kernel, &SolverConfig::new(1e-2, 10.0)).unwrap();
//! let closed = nml::lorentzian_closed_form(1.0, 0.1, 10.0).unwrap();
//! assert!((traj.c.last().unwrap() - closed).norm() < 1e-4);
//! ```

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod multiscale;
pub mod scalar;
pub mod special;
pub mod trajectory;
pub mod volterra;

pub use baselines::{BaselineMethod, BaselineSpec};
pub use diagnostics::{
    compare, is_markovian, master_coefficients, minimal_evolution_time, ComparisonReport,
    MarkovianVerdict, MasterEqCoefficients, SINGULARITY_THRESHOLD,
};
pub use error::{Error, Result};
pub use kernels::{KernelKind, KernelTaylor, ReservoirKernel};
pub use multiscale::{
    derive_ms_coefficients, eval_ms0, eval_ms1, gamma_split, ms_singularities, ms_trajectory,
    scale_corrections, MsCoefficients, MsOrder, ScaleCorrections,
};
pub use scalar::Scalar;
pub use trajectory::{
    AmplitudeTrajectory, Method, PopulationSeries, PopulationTrace, RunParams, TimeGrid,
};
pub use volterra::{lorentzian_closed_form, solve_exact, SolverConfig};

pub type Kernel = ReservoirKernel<f64>;
pub type Taylor = KernelTaylor<f64>;
pub type Trajectory = AmplitudeTrajectory<f64>;
pub type Trace = PopulationTrace<f64>;
pub type Coefficients = MsCoefficients<f64>;
pub type MasterCoefficients = MasterEqCoefficients<f64>;
pub type Report = ComparisonReport<f64>;
pub type Grid = TimeGrid<f64>;
pub type Params = RunParams<f64>;
