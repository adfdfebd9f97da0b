//! Worked examples on the two-mode model in data/two_mode.json.

mod common;

use common::*;
use oqho::asymptotics::{asymptote_error, asymptotics, eigen_asymptote, lyapunov_exponent_sweep};
use oqho::covariance::{energy_rate, steady_covariance, transient_covariance, default_dt};
use oqho::decay::{commutator_kernel, decoherence_time, lyapunov_bound, optimize_bound, NormKind};
use oqho::linalg::{eig_general, Matrix};
use oqho::model::{build_state_space, spectral_structure, validate};

#[test]
fn validates_and_has_expected_spectrum() {
    let model = two_mode();
    let report = validate(&model);
    assert!(report.all_passed(), "{report:?}");
    let spec = spectral_structure(&model).unwrap();
    assert!((spec.omegas[0] - 7.2046).abs() < 5e-4);
    assert!((spec.omegas[1] - 0.3729).abs() < 5e-4);
    assert!((spec.period - 2.0 * std::f64::consts::PI / spec.omegas[1]).abs() < 1e-12);
}

#[test]
fn damping_coefficients() {
    let report = asymptotics(&two_mode()).unwrap();
    // from the printed 4-decimal inputs; see the acceptance suite for the
    // comparison with the published values
    assert!((report.mus[0] - 0.176469).abs() < 1e-6, "{}", report.mus[0]);
    assert!((report.mus[1] - 5.220410).abs() < 1e-6, "{}", report.mus[1]);
    for k in 0..2 {
        assert!((report.mus[k + 2] + report.mus[k]).abs() < 1e-9);
        assert!((report.omega_mu_products[k] - report.omegas[k] * report.mus[k]).abs() < 1e-12);
    }
    assert!(report.verdict.stable);
    assert!((report.verdict.margin - report.mus[0]).abs() < 1e-15);
    let th = report.thresholds.unwrap();
    assert!(th.eps_hat >= th.eps_tilde);
    assert!((report.tau_hat.unwrap() - 1.0 / (0.04 * th.lead_coefficient)).abs() < 1e-9);
}

#[test]
fn sweep_point_at_five_hundredths() {
    let rows = lyapunov_exponent_sweep(&two_mode(), &[0.05]).unwrap();
    assert!((rows[0].asymptotic_approx + 0.0031785).abs() < 5e-4 * 0.0025);
}

#[test]
fn eigenvalue_asymptote_error_shrinks() {
    let model = two_mode();
    let report = asymptotics(&model).unwrap();
    let scaled = |eps: f64| {
        let exact = eig_general(&drift(&model.with_epsilon(eps).unwrap())).unwrap().eigenvalues;
        asymptote_error(&exact, &eigen_asymptote(&report.omegas, &report.mus, eps)) / (eps * eps)
    };
    assert!(scaled(0.01) <= scaled(0.04));
}

#[test]
fn commutator_kernel_decays() {
    let model = two_mode();
    let taus = [10.0, 20.0, 40.0];
    let kernel = commutator_kernel(&model, &taus).unwrap();
    let a = drift(&model);
    let theta_norm = model.theta().frobenius_norm();
    for s in &kernel.samples {
        let oracle = (&taylor_expm(&a.scale(s.tau)) * model.theta()).frobenius_norm();
        assert!((s.norm - oracle).abs() < 1e-10 * theta_norm);
    }
    let norms: Vec<f64> = kernel.samples.iter().map(|s| s.norm).collect();
    assert!(norms[0] < theta_norm && norms[1] < norms[0] && norms[2] < norms[1]);
    assert!(norms[2] < 0.5 * norms[1]);
}

#[test]
fn decoherence_time_matches_dense_grid() {
    let model = two_mode().with_epsilon(0.1).unwrap();
    let result = decoherence_time(&model, NormKind::Frobenius).unwrap();
    let a = drift(&model);
    let theta = model.theta();
    let target = theta.frobenius_norm() / std::f64::consts::E;
    let h = 1e-3;
    let step = taylor_expm(&a.scale(h));
    let mut e = Matrix::identity(4);
    let mut t = 0.0;
    let mut crossing = None;
    for i in 1..1_000_000 {
        e = &step * &e;
        t = i as f64 * h;
        if (&e * theta).frobenius_norm() <= target {
            crossing = Some(t);
            break;
        }
    }
    let grid = crossing.unwrap_or_else(|| panic!("no crossing before {t}"));
    assert!((result.tau_star - grid).abs() <= 2e-3, "{} vs {grid}", result.tau_star);
    assert!((result.ratio - 1.0 / std::f64::consts::E).abs() < 1e-8);
}

#[test]
fn bounds_dominate_decoherence_time() {
    let model = two_mode();
    let tau = decoherence_time(&model, NormKind::Frobenius).unwrap().tau_star;
    let alpha = -max_real(&drift(&model));
    let half = lyapunov_bound(&model, 0.5 * alpha).unwrap();
    let best = optimize_bound(&model, 40).unwrap();
    assert!(half.bound >= tau);
    assert!(best.bound >= tau);
    assert!(best.bound <= half.bound);
    assert!(best.lmi_max_eigenvalue < -1e-10);
}

#[test]
fn steady_covariance_matches_quadrature() {
    let model = two_mode();
    let ss = build_state_space(&model).unwrap();
    let result = steady_covariance(&model).unwrap();
    assert!(result.residual <= 1e-9 * ss.bbt.frobenius_norm().max(1.0));
    assert!(result.psd_quantum);
    let oracle = ale_quadrature(&ss.a, &ss.bbt);
    assert!(result.p.distance(&oracle) < 1e-7);
}

#[test]
fn transient_covariance_converges() {
    let model = two_mode();
    let a = drift(&model);
    let t_end = 50.0 / max_real(&a).abs();
    let steady = steady_covariance(&model).unwrap().p;
    let dt = 0.01;
    assert!(dt > default_dt(&a));
    let trajectory = transient_covariance(&model, &Matrix::zeros(4, 4), t_end, dt).unwrap();
    let (t, last) = trajectory.last().unwrap();
    assert!((t - t_end).abs() <= dt);
    assert!(last.distance(&steady) <= 1e-6);
}

#[test]
fn energy_rate_from_rest() {
    let model = two_mode();
    let ss = build_state_space(&model).unwrap();
    let rate = energy_rate(&model, &Matrix::zeros(4, 4)).unwrap();
    let mut pairing = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            pairing += model.r()[(i, j)] * ss.bbt[(i, j)];
        }
    }
    assert!((rate.value - 0.5 * pairing).abs() < 1e-12);
    assert_eq!(rate.drift_pairing, 0.0);
}
