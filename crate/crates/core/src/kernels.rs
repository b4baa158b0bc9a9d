//! Reservoir memory kernels.
//!
//! Every kernel is stationary and real (on-resonance coupling) and shares the
//! normalization `G(0) = γλ/2`, so that
//!
//! ```text
//! G(Δ) = (γλ/2) · f(λΔ),   f(0) = 1,
//! ```
//!
//! where the dimensionless profile `f` fixes the family:
//!
//! | kind             | f(u)                 |
//! |------------------|----------------------|
//! | `lorentzian`     | `exp(-u)`            |
//! | `gaussian-error` | `erfc(√π·u/2)`       |
//! | `inverse-law`    | `1/(1+u)`            |
//! | `gaussian`       | `exp(-u²)`           |
//!
//! The `√π/2` inside the error-function profile makes its slope at the
//! origin equal to the Lorentzian's.
//!
//! In the dimensionless time `t̃ = γt` with `α² = λ/γ` the kernel becomes
//! `G̃(Δ̃) = (α²/2) f(α²Δ̃) = Σₙ Gₙ α^{2+2n} Δ̃ⁿ`, hence `Gₙ = f⁽ⁿ⁾(0) / (2·n!)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::special::erfc;

/// Highest Taylor order available from [`ReservoirKernel::taylor_coefficients`].
pub const MAX_TAYLOR_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Lorentzian,
    GaussianError,
    InverseLaw,
    Gaussian,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Lorentzian,
        KernelKind::GaussianError,
        KernelKind::InverseLaw,
        KernelKind::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Lorentzian => "lorentzian",
            KernelKind::GaussianError => "gaussian-error",
            KernelKind::InverseLaw => "inverse-law",
            KernelKind::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::domain(
                    "kernel",
                    format!(
                        "unknown kernel `{s}` (expected one of lorentzian, gaussian-error, inverse-law, gaussian)"
                    ),
                )
            })
    }
}

/// A reservoir family with its coupling strength `γ` and spectral width `λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReservoirKernel<T> {
    kind: KernelKind,
    gamma: T,
    lambda: T,
}

impl<T: Scalar> ReservoirKernel<T> {
    pub fn new(kind: KernelKind, gamma: T, lambda: T) -> Result<Self> {
        check_positive("gamma", gamma)?;
        check_positive("lambda", lambda)?;
        Ok(Self {
            kind,
            gamma,
            lambda,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `α = √(λ/γ)`; small α is the strong-coupling regime.
    pub fn alpha(&self) -> T {
        (self.lambda / self.gamma).sqrt()
    }

    /// `G(0) = γλ/2`.
    pub fn peak(&self) -> T {
        self.gamma * self.lambda * lit(0.5)
    }

    /// Correlation function `G(Δ)` at separation `Δ = t - t' ≥ 0`.
    pub fn correlation(&self, dt: T) -> Result<T> {
        if !(dt >= T::zero()) {
            return Err(Error::domain(
                "dt",
                format!("correlation needs a nonnegative separation, got {dt}"),
            ));
        }
        Ok(self.correlation_unchecked(dt))
    }

    pub(crate) fn correlation_unchecked(&self, dt: T) -> T {
        self.peak() * self.shape(self.lambda * dt)
    }

    /// Dimensionless profile `f(u)` with `f(0) = 1`.
    ///
    /// Defined on a neighbourhood of the origin including small negative `u`
    /// (the analytic continuation), which finite-difference checks rely on.
    pub fn shape(&self, u: T) -> T {
        match self.kind {
            KernelKind::Lorentzian => (-u).exp(),
            KernelKind::GaussianError => erfc(u * T::PI().sqrt() * lit(0.5)),
            KernelKind::InverseLaw => (T::one() + u).recip(),
            KernelKind::Gaussian => (-u * u).exp(),
        }
    }

    /// Spectral density `J` as a function of the detuning `ω - ω₀`.
    ///
    /// Only the Lorentzian has a closed, regular density.
    pub fn spectral_density(&self, detuning: T) -> Result<T> {
        match self.kind {
            KernelKind::Lorentzian => {
                let l2 = self.lambda * self.lambda;
                Ok(self.gamma * l2 / (lit::<T>(2.0) * T::PI() * (detuning * detuning + l2)))
            }
            other => Err(Error::unsupported(
                "spectral_density",
                format!("no closed-form spectral density for the {other} kernel"),
            )),
        }
    }

    /// Dimensionless Taylor coefficients `G₀ … G_{order-1}` of the rescaled kernel.
    pub fn taylor_coefficients(&self, order: usize) -> Result<KernelTaylor<T>> {
        if !(1..=MAX_TAYLOR_ORDER).contains(&order) {
            return Err(Error::domain(
                "order",
                format!("Taylor order must lie in 1..={MAX_TAYLOR_ORDER}, got {order}"),
            ));
        }
        let full: [f64; MAX_TAYLOR_ORDER] = match self.kind {
            KernelKind::Lorentzian => [0.5, -0.5, 0.25, -1.0 / 12.0],
            KernelKind::GaussianError => [0.5, -0.5, 0.0, std::f64::consts::PI / 24.0],
            KernelKind::InverseLaw => [0.5, -0.5, 0.5, -0.5],
            KernelKind::Gaussian => [0.5, 0.0, -0.5, 0.0],
        };
        KernelTaylor::new(full[..order].iter().map(|&g| lit(g)).collect())
    }
}

fn check_positive<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

/// Coefficients `Gₙ` of `G̃(Δ̃) = Σ Gₙ α^{2+2n} Δ̃ⁿ`.
///
/// Generic over any number type so that coefficient algebra can also be run
/// in exact rational arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTaylor<T> {
    coefficients: Vec<T>,
}

impl<T> KernelTaylor<T> {
    pub fn new(coefficients: Vec<T>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::domain(
                "order",
                "at least one coefficient is required",
            ));
        }
        Ok(Self { coefficients })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn get(&self, n: usize) -> Option<&T> {
        self.coefficients.get(n)
    }
}
