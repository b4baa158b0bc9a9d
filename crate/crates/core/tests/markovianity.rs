//! A population revival forces Γ < 0 somewhere (or a singularity), so a
//! non-monotone population must never be classified as Markovian.

use nml::multiscale::MsOrder;
use nml::*;

fn non_monotone(traj: &Trajectory) -> bool {
    traj.populations().windows(2).any(|w| w[1] > w[0] + 1e-12)
}

fn strong_coupling_runs() -> Vec<(String, Trajectory)> {
    let grid = Grid::new(1e-3, 20.0).unwrap();
    let mut runs = Vec::new();
    for kind in KernelKind::ALL {
        let kernel = Kernel::new(kind, 1.0, 0.1).unwrap();
        let params = Params {
            kind,
            gamma: 1.0,
            lambda: 0.1,
        };
        runs.push((
            format!("{kind} exact"),
            solve_exact(&kernel, &SolverConfig::new(1e-3, 20.0)).unwrap(),
        ));
        let coeffs =
            derive_ms_coefficients(&kernel.taylor_coefficients(4).unwrap(), 1.0, 0.1).unwrap();
        for order in [MsOrder::Ms0, MsOrder::Ms1] {
            if let Ok(t) = ms_trajectory(&coeffs, order, coeffs.alpha, grid, params) {
                runs.push((format!("{kind} {}", order.method()), t));
            }
        }
    }
    runs
}

#[test]
fn revivals_are_never_markovian() {
    let runs = strong_coupling_runs();
    assert_eq!(runs.len(), 11, "gaussian has no ms1");
    for (name, traj) in &runs {
        let coeffs = master_coefficients(traj, SINGULARITY_THRESHOLD).unwrap();
        let verdict = is_markovian(&coeffs, 1e-6);
        assert!(
            non_monotone(traj),
            "{name} should revive at these parameters"
        );
        assert!(!verdict.markovian, "{name}");
        for w in coeffs.negative_intervals.windows(2) {
            assert!(w[0].1 < w[1].0, "{name}: intervals overlap");
        }
        for &(a, b) in &coeffs.negative_intervals {
            assert!(0.0 <= a && a <= b && b <= 20.0 + 1e-9);
        }
        assert!(coeffs
            .gamma_t
            .iter()
            .chain(&coeffs.s_t)
            .all(|v| v.is_finite()));
    }
}

#[test]
fn exact_lorentzian_turns_negative_right_after_its_first_zero() {
    let traj = solve_exact(
        &Kernel::new(KernelKind::Lorentzian, 1.0, 0.1).unwrap(),
        &SolverConfig::new(1e-3, 20.0),
    )
    .unwrap();
    let coeffs = master_coefficients(&traj, SINGULARITY_THRESHOLD).unwrap();
    let zero = coeffs.singularities[0];
    assert!((zero - 8.2421).abs() < 1e-3);
    // Γ stays positive while |C| decays toward the zero and is negative
    // during the revival that follows it
    let (start, end) = coeffs.negative_intervals[0];
    assert!(start > zero && start - zero < 2e-3);
    assert!(end > 14.0);
    let before = coeffs
        .times
        .iter()
        .zip(&coeffs.gamma_t)
        .filter(|(t, _)| **t < zero);
    assert!(before.into_iter().all(|(_, g)| *g >= 0.0));
}
