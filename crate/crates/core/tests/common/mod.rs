#![allow(dead_code)]

use nml::{Kernel, KernelKind};

/// Largest `|∫J(ω)e^{-iωΔ}dω - G(Δ)|` over `Δ ∈ [0, 20/λ]` for the
/// Lorentzian, by the trapezoid rule on `|ω| ≤ 10⁴λ`.
pub fn fourier_round_trip_error(gamma: f64, lambda: f64, samples: usize) -> f64 {
    let kernel = Kernel::new(KernelKind::Lorentzian, gamma, lambda).unwrap();
    let half_width = 1e4 * lambda;
    let horizon = 20.0 / lambda;
    // resolve the fastest oscillation e^{-iωΔ} at Δ = horizon
    let h = (2.0 * std::f64::consts::PI / horizon) / 60.0;
    let n = (2.0 * half_width / h).ceil() as usize;
    let h = 2.0 * half_width / n as f64;
    let density: Vec<f64> = (0..=n)
        .map(|k| kernel.spectral_density(-half_width + k as f64 * h).unwrap())
        .collect();
    (0..samples)
        .map(|i| {
            let delta = horizon * i as f64 / (samples - 1) as f64;
            // J is even, so only the cosine part survives
            let mut sum = 0.0;
            for (k, j) in density.iter().enumerate() {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                sum += w * j * ((-half_width + k as f64 * h) * delta).cos();
            }
            (sum * h - kernel.correlation(delta).unwrap()).abs()
        })
        .fold(0.0, f64::max)
}

/// `(2/D)(π - atan(D/λ))`, `D = √(2γλ - λ²)`: first zero of the Lorentzian amplitude.
pub fn lorentzian_first_zero(gamma: f64, lambda: f64) -> f64 {
    let d = (2.0 * gamma * lambda - lambda * lambda).sqrt();
    2.0 / d * (std::f64::consts::PI - (d / lambda).atan())
}
