//! Complementary error function.
//!
//! Two regimes, both accurate to a few ulp of `f64` in absolute terms:
//!
//! * `|x| < 2.5`: `erfc = 1 - erf` with the positive-term series
//!   `erf(x) = (2/√π) e^{-x²} Σ 2ⁿ x^{2n+1} / (2n+1)!!`, which has no
//!   cancellation between terms.
//! * `x ≥ 2.5`: the Laplace continued fraction
//!   `erfc(x) = e^{-x²}/√π · 1/(x + ½/(x + 1/(x + 3/2/(x + …))))`,
//!   evaluated with the modified Lentz algorithm.
//!
//! Negative arguments use `erfc(-x) = 2 - erfc(x)`.

use crate::scalar::{lit, Scalar};

const SERIES_CUTOFF: f64 = 2.5;
const MAX_TERMS: usize = 500;

pub fn erfc<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return lit::<T>(2.0) - erfc(-x);
    }
    if x < lit(SERIES_CUTOFF) {
        T::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series<T: Scalar>(x: T) -> T {
    let two_x2 = lit::<T>(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term = term * two_x2 / lit::<T>((2 * n + 1) as f64);
        sum = sum + term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    T::FRAC_2_SQRT_PI() * (-x * x).exp() * sum
}

fn erfc_continued_fraction<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = x;
    let mut c = f;
    let mut d = T::zero();
    for n in 1..MAX_TERMS {
        let a = lit::<T>(n as f64 * 0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-x * x).exp() * T::FRAC_2_SQRT_PI() / (f + f)
}
