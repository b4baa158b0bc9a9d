//! Traditional perturbative baselines for the Lorentzian reservoir.
//!
//! * ODP: the amplitude expanded in powers of `α²` around `C = 1`, squared.
//! * GME-2: second-order generalized master equation, whose population obeys
//!   `P̈ + λṖ + γλP = 0`.
//! * TCL-2/TCL-6: time-convolutionless master equation with the dissipator
//!   truncated at second or sixth order, integrated in closed form.
//!
//! All five are Lorentzian-specific and none is clamped to `[0, 1]`.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::scalar::{lit, Scalar};
use crate::trajectory::{Method, PopulationTrace, RunParams, TimeGrid};
use crate::volterra::damped_response;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaselineMethod {
    Odp2,
    Odp6,
    Gme2,
    Tcl2,
    Tcl6,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 5] = [
        BaselineMethod::Odp2,
        BaselineMethod::Odp6,
        BaselineMethod::Gme2,
        BaselineMethod::Tcl2,
        BaselineMethod::Tcl6,
    ];

    pub fn method(self) -> Method {
        match self {
            BaselineMethod::Odp2 => Method::Odp2,
            BaselineMethod::Odp6 => Method::Odp6,
            BaselineMethod::Gme2 => Method::Gme2,
            BaselineMethod::Tcl2 => Method::Tcl2,
            BaselineMethod::Tcl6 => Method::Tcl6,
        }
    }

    pub fn from_method(method: Method) -> Option<Self> {
        BaselineMethod::ALL
            .into_iter()
            .find(|b| b.method() == method)
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method().name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineSpec<T> {
    pub method: BaselineMethod,
    pub gamma: T,
    pub lambda: T,
}

/// Coefficients (ascending powers of `t̃ = γt`) of the ODP corrections
/// `C⁽⁰⁾, C⁽²⁾, C⁽⁴⁾, C⁽⁶⁾`.
pub const ODP_POLYNOMIALS: [&[f64]; 4] = [
    &[1.0],
    &[0.0, 0.0, -1.0 / 4.0],
    &[0.0, 0.0, 0.0, 8.0 / 96.0, 1.0 / 96.0],
    &[
        0.0,
        0.0,
        0.0,
        0.0,
        -120.0 / 5760.0,
        -24.0 / 5760.0,
        -1.0 / 5760.0,
    ],
];

impl<T: Scalar> BaselineSpec<T> {
    pub fn new(method: BaselineMethod, gamma: T, lambda: T) -> Result<Self> {
        if !(gamma > T::zero() && gamma.is_finite()) || !(lambda > T::zero() && lambda.is_finite())
        {
            return Err(Error::domain(
                "gamma/lambda",
                format!("must be positive and finite, got gamma = {gamma}, lambda = {lambda}"),
            ));
        }
        Ok(Self {
            method,
            gamma,
            lambda,
        })
    }

    fn expect(&self, allowed: &[BaselineMethod], expected: &'static str) -> Result<()> {
        if allowed.contains(&self.method) {
            Ok(())
        } else {
            Err(Error::MethodMismatch {
                expected,
                found: self.method.method().name(),
            })
        }
    }

    /// Population predicted by the configured method.
    pub fn population(&self, t: T) -> T {
        match self.method {
            BaselineMethod::Odp2 | BaselineMethod::Odp6 => odp_value(self, t),
            BaselineMethod::Gme2 => gme2_value(self, t),
            BaselineMethod::Tcl2 | BaselineMethod::Tcl6 => tcl_population_value(self, t),
        }
    }

    pub fn trace(&self, grid: TimeGrid<T>) -> PopulationTrace<T> {
        let times = grid.times();
        let population = times.iter().map(|&t| self.population(t)).collect();
        let gamma_t = matches!(self.method, BaselineMethod::Tcl2 | BaselineMethod::Tcl6)
            .then(|| times.iter().map(|&t| tcl_gamma_value(self, t)).collect());
        PopulationTrace {
            times,
            population,
            gamma_t,
            method: self.method.method(),
            params: RunParams {
                kind: KernelKind::Lorentzian,
                gamma: self.gamma,
                lambda: self.lambda,
            },
        }
    }
}

fn horner<T: Scalar>(coefficients: &[f64], x: T) -> T {
    coefficients
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x + lit(c))
}

/// `(C⁽⁰⁾ + α²C⁽²⁾ [+ α⁴C⁽⁴⁾ + α⁶C⁽⁶⁾])²`.
pub fn odp_population<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> Result<T> {
    spec.expect(&[BaselineMethod::Odp2, BaselineMethod::Odp6], "odp2|odp6")?;
    Ok(odp_value(spec, t))
}

/// The truncated ODP amplitude before squaring.
pub fn odp_amplitude<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> Result<T> {
    spec.expect(&[BaselineMethod::Odp2, BaselineMethod::Odp6], "odp2|odp6")?;
    Ok(odp_sum(spec, t).0)
}

fn odp_value<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> T {
    let c = odp_sum(spec, t).0;
    c * c
}

/// Truncated amplitude and its time derivative.
pub(crate) fn odp_sum<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> (T, T) {
    let terms = match spec.method {
        BaselineMethod::Odp6 => 4,
        _ => 2,
    };
    let alpha2 = spec.lambda / spec.gamma;
    let tt = spec.gamma * t;
    let mut weight = T::one();
    let (mut value, mut slope) = (T::zero(), T::zero());
    for poly in &ODP_POLYNOMIALS[..terms] {
        let derivative: Vec<f64> = poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect();
        value = value + weight * horner(poly, tt);
        slope = slope + weight * horner(&derivative, tt) * spec.gamma;
        weight = weight * alpha2;
    }
    (value, slope)
}

/// `e^{-λt/2}[cos(D_G t/2) + (λ/D_G) sin(D_G t/2)]`, `D_G = √(4γλ - λ²)`.
///
/// The hyperbolic branch is used when `4γλ < λ²`.
pub fn gme2_population<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> Result<T> {
    spec.expect(&[BaselineMethod::Gme2], "gme2")?;
    Ok(gme2_value(spec, t))
}

fn gme2_value<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> T {
    let d_sq = lit::<T>(4.0) * spec.gamma * spec.lambda - spec.lambda * spec.lambda;
    damped_response(spec.lambda, d_sq, t).0
}

/// Truncated TCL dissipator `Γ_T(t)`.
pub fn tcl_gamma<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> Result<T> {
    spec.expect(&[BaselineMethod::Tcl2, BaselineMethod::Tcl6], "tcl2|tcl6")?;
    Ok(tcl_gamma_value(spec, t))
}

/// `exp(-∫₀ᵗ Γ_T)` with the integral in closed form.
pub fn tcl_population<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> Result<T> {
    spec.expect(&[BaselineMethod::Tcl2, BaselineMethod::Tcl6], "tcl2|tcl6")?;
    Ok(tcl_population_value(spec, t))
}

fn tcl_population_value<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> T {
    (-tcl_integral(spec, t)).exp()
}

fn tcl_gamma_value<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> T {
    let terms = tcl_terms(spec.gamma, spec.lambda, t);
    match spec.method {
        BaselineMethod::Tcl6 => terms[0] + terms[1] + terms[2],
        _ => terms[0],
    }
}

/// `[Γ_T⁽²⁾, Γ_T⁽⁴⁾, Γ_T⁽⁶⁾]` at `t`.
pub fn tcl_terms<T: Scalar>(gamma: T, lambda: T, t: T) -> [T; 3] {
    let two = lit::<T>(2.0);
    let x = lambda * t;
    let e1 = (-x).exp();
    let e2 = (-two * x).exp();
    let e3 = (-lit::<T>(3.0) * x).exp();
    let one_minus_e1 = -(-x).exp_m1();
    let one_minus_e2 = -(-two * x).exp_m1();

    let second = gamma * one_minus_e1;
    let fourth = gamma * gamma / (two * lambda) * (one_minus_e2 - two * x * e1);
    let sixth = gamma * gamma * gamma / (lit::<T>(4.0) * lambda * lambda)
        * (two + e1 - two * x * e1 - two * x * x * e1 - two * e2 - lit::<T>(4.0) * x * e2 - e3);
    [second, fourth, sixth]
}

/// `∫₀ᵗ Γ_T` for the configured truncation.
pub fn tcl_integral<T: Scalar>(spec: &BaselineSpec<T>, t: T) -> T {
    let terms = tcl_term_integrals(spec.gamma, spec.lambda, t);
    match spec.method {
        BaselineMethod::Tcl6 => terms[0] + terms[1] + terms[2],
        _ => terms[0],
    }
}

/// Antiderivatives (from 0) of the three TCL terms.
pub fn tcl_term_integrals<T: Scalar>(gamma: T, lambda: T, t: T) -> [T; 3] {
    let (two, three, four) = (lit::<T>(2.0), lit::<T>(3.0), lit::<T>(4.0));
    let x = lambda * t;
    let e1 = (-x).exp();
    let e2 = (-two * x).exp();
    let om1 = -(-x).exp_m1();
    let om2 = -(-two * x).exp_m1();
    let om3 = -(-three * x).exp_m1();
    // ∫₀ˣ u e^{-u} du, ∫₀ˣ u² e^{-u} du, ∫₀ˣ u e^{-2u} du (dimensionless u = λs)
    let m1 = om1 - x * e1;
    let m2 = two * om1 - (x * x + two * x) * e1;
    let n1 = (om2 - two * x * e2) / four;

    let second = gamma * (t - om1 / lambda);
    let fourth = gamma * gamma / (two * lambda) * (t - om2 / (two * lambda) - two * m1 / lambda);
    let sixth = gamma * gamma * gamma / (four * lambda * lambda)
        * (two * t + om1 / lambda
            - two * m1 / lambda
            - two * m2 / lambda
            - om2 / lambda
            - four * n1 / lambda
            - om3 / (three * lambda));
    [second, fourth, sixth]
}
