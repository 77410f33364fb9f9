//! Solver behavior on seeded synthetic data.

use mmcsp_core::covariance::covariance_ensemble;
use mmcsp_core::kernel::{objective_gradient, KernelPair};
use mmcsp_core::solvers::{
    csp_initializer, solve_fixed_point, solve_scf, SolveSettings, SolveStatus,
};
use mmcsp_core::synth::{generate, SynthSpec};
use mmcsp_core::CovarianceEnsemble;

fn seed42_ensembles() -> (CovarianceEnsemble, CovarianceEnsemble) {
    let (minus, plus) = generate(&SynthSpec::train(42)).unwrap();
    (
        covariance_ensemble(&minus, false).unwrap(),
        covariance_ensemble(&plus, false).unwrap(),
    )
}

#[test]
fn fixed_point_converges_at_small_radius() {
    let (cm, cp) = seed42_ensembles();
    let pair = KernelPair::from_ensembles(&cm, &cp, 10, 0.5, 0.5).unwrap();
    let x0 = csp_initializer(&pair).unwrap();
    let (filter, trace) = solve_fixed_point(&pair, &x0, &SolveSettings::default()).unwrap();
    assert!(filter.converged);
    assert_eq!(trace.status, SolveStatus::Converged);
}

#[test]
fn fixed_point_fails_at_large_radius() {
    let (cm, cp) = seed42_ensembles();
    let settings = SolveSettings::default();
    let pair = KernelPair::from_ensembles(&cm, &cp, 10, 6.0, 6.0).unwrap();
    let x0 = csp_initializer(&pair).unwrap();
    let (filter, trace) = solve_fixed_point(&pair, &x0, &settings).unwrap();
    assert!(!filter.converged);
    assert_ne!(trace.status, SolveStatus::Converged);
    assert!(trace.iterations.len() <= settings.max_iter + 1);
    // The non-converged result is the best iterate seen, which is at least
    // as good as the initializer.
    let q0 = trace.iterations[0].objective;
    assert!(filter.objective <= q0 + 1e-12);
}

#[test]
fn gradient_vanishes_at_converged_solutions() {
    let (cm, cp) = seed42_ensembles();
    let settings = SolveSettings::default();
    for delta in [0.5, 2.0, 6.0] {
        let pair = KernelPair::from_ensembles(&cm, &cp, 10, delta, delta).unwrap();
        let x0 = csp_initializer(&pair).unwrap();
        let (filter, trace) = solve_scf(&pair, &x0, &settings).unwrap();
        assert!(filter.converged, "delta {delta}");
        assert!(trace.iterations.len() <= settings.max_iter + 1);
        let grad = objective_gradient(&pair, &filter.weights).unwrap();
        let norm = grad.dot(&grad).sqrt();
        assert!(norm <= 1e-6, "delta {delta}: gradient norm {norm}");
    }
}
