//! Two-scale (primary `T`, auxiliary `τ`) approximants of the amplitude.
//!
//! With `α² = λ/γ` and kernel Taylor data `{Gₙ}` the leading-order solution is
//!
//! ```text
//! C_MS0(t) = e^{decay·t} cos(ω₀t),        ω₀ = √G₀·γα,  decay = γα²G₁/(2G₀)
//! ```
//!
//! and the first-order solution adds the frequency shift `A₁/A₀` and the
//! in-quadrature term fixed by `Ċ(0) = 0` at order `α²`:
//!
//! ```text
//! C_MS1(t) = e^{decay·t} [cos(ω₁t) + c₁α sin(ω₁t)],  ω₁ = ω₀(1 + (A₁/A₀)α²),
//! c₁ = -G₁/(2G₀^{3/2}).
//! ```
//!
//! The scale-series normalizations `A₀ = B₀ = 1` are implicit: no
//! physical-time quantity depends on them. Only the first corrections
//! `A₁/A₀`, `B₁/B₀` exist here; whether the radius of convergence of the full
//! `{Aₙ}` series marks the non-Markovian regime is left open.

use std::fmt::Debug;

use num_complex::Complex;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelTaylor;
use crate::scalar::{lit, to_f64, Scalar};
use crate::trajectory::{AmplitudeTrajectory, Method, RunParams, TimeGrid};

/// `|G₁|` at or below this counts as zero (collapsed auxiliary scale).
pub const COLLAPSE_TOLERANCE: f64 = 1e-12;

/// Singularity guard band for [`gamma_split`], in units of `ε·|t|`.
pub const GUARD_BAND_ULPS: f64 = 100.0;

const BISECTION_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MsOrder {
    Ms0,
    Ms1,
}

impl MsOrder {
    pub fn method(self) -> Method {
        match self {
            MsOrder::Ms0 => Method::Ms0,
            MsOrder::Ms1 => Method::Ms1,
        }
    }
}

/// First corrections of the two scale series.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleCorrections<T> {
    /// `A₁/A₀ = 3G₁²/(8G₀³) - G₂/G₀²`
    pub a1_over_a0: T,
    /// `B₁/B₀ = -G₁²/G₀³ + 4G₂/G₀² - 6G₃/(G₁G₀)`; `None` when `G₁ = 0`.
    pub b1_over_b0: Option<T>,
}

/// Scale-series corrections from Taylor data, in any field.
///
/// `zero_tol` decides when `G₁` counts as zero; pass an exact zero for
/// rational arithmetic.
pub fn scale_corrections<T>(taylor: &KernelTaylor<T>, zero_tol: T) -> Result<ScaleCorrections<T>>
where
    T: Num + Clone + PartialOrd + Debug,
{
    let g = taylor.coefficients();
    let zero = T::zero();
    let g0 = g[0].clone();
    if g0 <= zero {
        return Err(Error::unsupported(
            "multiple-scale expansion",
            format!("G0 = {g0:?} leaves no oscillatory leading order"),
        ));
    }
    let g1 = g.get(1).cloned().unwrap_or_else(T::zero);
    if g1 > zero_tol {
        return Err(Error::GrowingEnvelope {
            g1: format!("{g1:?}"),
        });
    }
    let collapsed = g1 >= zero - zero_tol.clone();
    let needed = if collapsed { 3 } else { 4 };
    if taylor.order() < needed {
        return Err(Error::domain(
            "order",
            format!(
                "{needed} Taylor coefficients are required (G1 {} 0), got {}",
                if collapsed { "=" } else { "!=" },
                taylor.order()
            ),
        ));
    }
    let g2 = g[2].clone();
    let g0_sq = g0.clone() * g0.clone();
    let g0_cu = g0_sq.clone() * g0.clone();
    let g1_sq = g1.clone() * g1.clone();

    let a1_over_a0 = small::<T>(3) * g1_sq.clone() / (small::<T>(8) * g0_cu.clone())
        - g2.clone() / g0_sq.clone();
    let b1_over_b0 = if collapsed {
        None
    } else {
        let g3 = g[3].clone();
        Some(small::<T>(4) * g2 / g0_sq - g1_sq / g0_cu - small::<T>(6) * g3 / (g1 * g0))
    };
    Ok(ScaleCorrections {
        a1_over_a0,
        b1_over_b0,
    })
}

fn small<T: Num + Clone>(n: u8) -> T {
    (0..n).fold(T::zero(), |acc, _| acc + T::one())
}

/// Derived multiple-scale quantities, in physical time units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsCoefficients<T> {
    pub gamma: T,
    pub alpha: T,
    /// Leading oscillation frequency `√G₀·γα`.
    pub omega0: T,
    /// Envelope exponent `γα²G₁/(2G₀)`, never positive.
    pub decay: T,
    pub a1_over_a0: T,
    pub b1_over_b0: Option<T>,
    /// In-quadrature amplitude of the first-order term.
    pub c1: T,
    /// `G₁ = 0`: the auxiliary scale is trivial.
    pub collapsed_tau: bool,
}

pub fn derive_ms_coefficients<T: Scalar>(
    taylor: &KernelTaylor<T>,
    gamma: T,
    lambda: T,
) -> Result<MsCoefficients<T>> {
    if !(gamma > T::zero()) || !(lambda > T::zero()) {
        return Err(Error::domain(
            "gamma/lambda",
            format!("must be positive, got gamma = {gamma}, lambda = {lambda}"),
        ));
    }
    let corrections = scale_corrections(taylor, lit(COLLAPSE_TOLERANCE))?;
    let g = taylor.coefficients();
    let (g0, g1) = (g[0], g[1]);
    let collapsed = corrections.b1_over_b0.is_none();
    let alpha = (lambda / gamma).sqrt();
    let half = lit::<T>(0.5);
    let (decay, c1) = if collapsed {
        (T::zero(), T::zero())
    } else {
        (
            gamma * alpha * alpha * g1 * half / g0,
            -g1 * half / g0.powf(lit(1.5)),
        )
    };
    Ok(MsCoefficients {
        gamma,
        alpha,
        omega0: g0.sqrt() * gamma * alpha,
        decay,
        a1_over_a0: corrections.a1_over_a0,
        b1_over_b0: corrections.b1_over_b0,
        c1,
        collapsed_tau: collapsed,
    })
}

impl<T: Scalar> MsCoefficients<T> {
    /// `ω₁ = ω₀(1 + (A₁/A₀)α²)`.
    pub fn omega1(&self, alpha: T) -> T {
        self.omega0 * (T::one() + self.a1_over_a0 * alpha * alpha)
    }

    /// Phase frequency and quadrature weight `k` of the oscillatory factor
    /// `cos(ωt) + k sin(ωt)`.
    fn oscillation(&self, order: MsOrder, alpha: T) -> (T, T) {
        match order {
            MsOrder::Ms0 => (self.omega0, T::zero()),
            MsOrder::Ms1 => (self.omega1(alpha), self.c1 * alpha),
        }
    }

    fn require(&self, order: MsOrder) -> Result<()> {
        if order == MsOrder::Ms1 && self.collapsed_tau {
            Err(Error::unsupported(
                "ms1",
                "the first-order quadrature term vanishes when G1 = 0 (collapsed auxiliary scale)",
            ))
        } else {
            Ok(())
        }
    }

    /// Zeros of the oscillatory factor, written as `t_j = (φ* + jπ)/ω`.
    fn root_phase(&self, order: MsOrder, alpha: T) -> Option<(T, T)> {
        let (omega, k) = self.oscillation(order, alpha);
        if omega == T::zero() {
            return None;
        }
        // cos(ωt) + k sin(ωt) = √(1+k²) cos(|ω|t - atan(k·sgn ω))
        let (w, k) = if omega < T::zero() {
            (-omega, -k)
        } else {
            (omega, k)
        };
        Some((w, k.atan() + T::FRAC_PI_2()))
    }

    fn nearest_singularity(&self, order: MsOrder, alpha: T, t: T) -> Option<T> {
        let (w, first) = self.root_phase(order, alpha)?;
        let j = ((w * t - first) / T::PI()).round().max(T::zero());
        Some((first + j * T::PI()) / w)
    }
}

/// Leading-order approximant `e^{decay·t} cos(ω₀t)`.
pub fn eval_ms0<T: Scalar>(coeffs: &MsCoefficients<T>, t: T) -> Complex<T> {
    Complex::new(
        (coeffs.decay * t).exp() * (coeffs.omega0 * t).cos(),
        T::zero(),
    )
}

/// First-order approximant `e^{decay·t}[cos(ω₁t) + c₁α sin(ω₁t)]`.
pub fn eval_ms1<T: Scalar>(coeffs: &MsCoefficients<T>, alpha: T, t: T) -> Result<Complex<T>> {
    Ok(evaluate(coeffs, MsOrder::Ms1, alpha, t)?.0)
}

/// `(C, Ċ)` of either approximant.
pub fn evaluate<T: Scalar>(
    coeffs: &MsCoefficients<T>,
    order: MsOrder,
    alpha: T,
    t: T,
) -> Result<(Complex<T>, Complex<T>)> {
    coeffs.require(order)?;
    let (omega, k) = coeffs.oscillation(order, alpha);
    let env = (coeffs.decay * t).exp();
    let (s, c) = (omega * t).sin_cos();
    let factor = c + k * s;
    let value = env * factor;
    let derivative = coeffs.decay * value + env * omega * (k * c - s);
    Ok((
        Complex::new(value, T::zero()),
        Complex::new(derivative, T::zero()),
    ))
}

pub fn ms_trajectory<T: Scalar>(
    coeffs: &MsCoefficients<T>,
    order: MsOrder,
    alpha: T,
    grid: TimeGrid<T>,
    params: RunParams<T>,
) -> Result<AmplitudeTrajectory<T>> {
    coeffs.require(order)?;
    AmplitudeTrajectory::fallible_from_fn(grid, order.method(), params, |t| {
        evaluate(coeffs, order, alpha, t)
    })
}

/// Dissipator of an approximant split into its primary-scale part and the
/// constant auxiliary-scale part `-2·decay`.
pub fn gamma_split<T: Scalar>(
    coeffs: &MsCoefficients<T>,
    order: MsOrder,
    alpha: T,
    t: T,
) -> Result<(T, T)> {
    coeffs.require(order)?;
    if let Some(at) = coeffs.nearest_singularity(order, alpha, t) {
        if (t - at).abs() <= lit::<T>(GUARD_BAND_ULPS) * T::epsilon() * t.abs() {
            return Err(Error::Singularity {
                t: to_f64(t),
                at: to_f64(at),
            });
        }
    }
    let (omega, k) = coeffs.oscillation(order, alpha);
    let (s, c) = (omega * t).sin_cos();
    let primary = -lit::<T>(2.0) * omega * (k * c - s) / (c + k * s);
    let auxiliary = -lit::<T>(2.0) * coeffs.decay;
    Ok((primary, auxiliary))
}

/// `Γ_MS(t)`, the sum of both parts of [`gamma_split`].
pub fn ms_dissipator<T: Scalar>(
    coeffs: &MsCoefficients<T>,
    order: MsOrder,
    alpha: T,
    t: T,
) -> Result<T> {
    let (p, a) = gamma_split(coeffs, order, alpha, t)?;
    Ok(p + a)
}

/// Dissipator singularities in `(0, t_max]`, ascending.
pub fn ms_singularities<T: Scalar>(
    coeffs: &MsCoefficients<T>,
    alpha: T,
    order: MsOrder,
    t_max: T,
) -> Result<Vec<T>> {
    coeffs.require(order)?;
    match order {
        MsOrder::Ms0 => {
            let w = coeffs.omega0.abs();
            if w == T::zero() {
                return Ok(Vec::new());
            }
            let quarter_period = T::FRAC_PI_2() / w;
            Ok((0..)
                .map(|j| lit::<T>((2 * j + 1) as f64) * quarter_period)
                .take_while(|&t| t <= t_max)
                .collect())
        }
        MsOrder::Ms1 => {
            let (omega, k) = coeffs.oscillation(order, alpha);
            if omega == T::zero() {
                return Ok(Vec::new());
            }
            let f = |t: T| (omega * t).cos() + k * (omega * t).sin();
            let step = T::FRAC_PI_4() / omega.abs();
            Ok(bracket_roots(f, step, t_max))
        }
    }
}

/// Sign changes of `f` on a uniform scan of `[0, t_max]`, each refined by
/// bisection.
fn bracket_roots<T: Scalar>(f: impl Fn(T) -> T, step: T, t_max: T) -> Vec<T> {
    let tol = lit::<T>(BISECTION_TOLERANCE);
    let mut roots = Vec::new();
    let mut a = T::zero();
    let mut fa = f(a);
    while a < t_max {
        let b = (a + step).min(t_max);
        let fb = f(b);
        if (fa > T::zero()) != (fb > T::zero()) {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                if hi - lo <= tol {
                    break;
                }
                let mid = (lo + hi) * lit(0.5);
                let fm = f(mid);
                if (fm > T::zero()) == (flo > T::zero()) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let root = (lo + hi) * lit(0.5);
            if root > T::zero() {
                roots.push(root);
            }
        }
        a = b;
        fa = fb;
    }
    roots
}
