//! Acceptance criteria 1–8. Runs as a plain binary so that every criterion
//! prints its verdict line, and exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use oqho::asymptotics::{asymptote_error, asymptotics, lyapunov_exponent_sweep, sweep_csv};
use oqho::covariance::{energy_rate, quantum_psd, steady_covariance, weak_coupling_limit};
use oqho::decay::{decoherence_time, lambda_grid, lyapunov_bound_with, optimize_bound, NormKind};
use oqho::interconnect::closed_loop_asymptotics;
use oqho::linalg::{eig_general, expm, solve_lyapunov, sqrtm_spd, symplectic_form, symplectic_unit, Matrix};
use oqho::model::{build_state_space, OscillatorModel};
use oqho::onemode::{exact_covariance, exact_propagator, exact_spectrum, extract_params, weighted_decay};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn golden() -> Outcome {
    let start = Instant::now();
    let model = two_mode();
    let report = asymptotics(&model).unwrap();
    let th = report.thresholds.expect("stable example");
    let got = [
        ("omega_1", report.omegas[0], 7.2046),
        ("omega_2", report.omegas[1], 0.3729),
        ("mu_1", report.mus[0], 0.1765),
        ("mu_2", report.mus[1], 5.2214),
        ("min omega*mu", th.lead_coefficient, 1.2714),
        ("eps_hat", th.eps_hat, 0.2161),
        ("eps_tilde", th.eps_tilde, 0.1746),
    ];
    let elapsed = start.elapsed();
    let mut misses = Vec::new();
    for (name, value, expected) in got {
        if (value - expected).abs() > 5e-4 {
            misses.push(format!("{name} = {value:.6} vs {expected} (|diff| {:.2e})", (value - expected).abs()));
        }
    }
    let fast = elapsed < Duration::from_secs(1);
    if !fast {
        misses.push(format!("runtime {elapsed:?}"));
    }
    let detail = if misses.is_empty() {
        format!("7 values within 5e-4, {elapsed:?}")
    } else {
        misses.join("; ")
    };
    outcome(misses.is_empty(), detail)
}

fn lyapunov_exponent_convergence() -> Outcome {
    let model = two_mode();
    let eps = [0.08, 0.04, 0.02, 0.01];
    let rows = lyapunov_exponent_sweep(&model, &eps).unwrap();
    // rows come back ascending in ε
    let mut scaled: Vec<f64> = rows.iter().map(|r| (r.exact_lyapunov - r.asymptotic_approx).abs() / (r.epsilon * r.epsilon)).collect();
    scaled.reverse();
    let decreasing = strictly_decreasing(&scaled);

    let grid: Vec<f64> = (0..61).map(|i| 0.3 * i as f64 / 60.0).collect();
    let sweep = lyapunov_exponent_sweep(&model, &grid).unwrap();
    let csv = sweep_csv(&sweep);
    let lines = csv.lines().count();
    let nonpositive = sweep.iter().all(|r| r.exact_lyapunov <= 0.0 && r.asymptotic_approx <= 0.0);
    let origin = sweep[0].epsilon == 0.0 && sweep[0].exact_lyapunov == 0.0 && sweep[0].asymptotic_approx == 0.0;
    let lead = asymptotics(&model).unwrap().thresholds.unwrap().lead_coefficient;
    let coefficient = (lead - 1.2714).abs() <= 5e-4;
    outcome(
        decreasing && lines == 62 && nonpositive && origin && coefficient,
        format!("|exact-approx|/eps^2 at eps=0.08..0.01: {}; csv rows {}; both <= 0: {nonpositive}; zero at eps=0: {origin}", sci(&scaled), lines - 1),
    )
}

fn random_one_mode(rng: &mut ChaCha8Rng) -> (OscillatorModel<f64>, f64) {
    loop {
        let theta = rng.gen_range(0.3..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let r = random_spd(rng, 2, 0.3);
        let m = *[2usize, 4].choose(rng).unwrap();
        let mut shape = gaussian(rng, m, 2);
        let eps: f64 = rng.gen_range(0.3..=1.0);
        let build = |shape: &Matrix<f64>| {
            OscillatorModel::with_shape(symplectic_unit().scale(theta), r.clone(), shape.clone(), eps).unwrap()
        };
        let mut model = build(&shape);
        let mut params = extract_params(&model).unwrap();
        if params.gamma < 0.0 {
            // swapping each channel with its conjugate negates 𝕄ᵀJ𝕄
            let h = m / 2;
            shape = Matrix::from_fn(m, 2, |i, j| shape[((i + h) % m, j)]);
            model = build(&shape);
            params = extract_params(&model).unwrap();
        }
        if params.gamma.abs() < 0.05 {
            continue;
        }
        // keep τ_R inside the decoherence-time search horizon of ten periods
        let period = 2.0 * std::f64::consts::PI / params.omega;
        if 1.0 / (eps * eps * params.gamma) > 5.0 * period {
            continue;
        }
        return (model, eps);
    }
}

fn one_mode_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(3);
    let mut worst = [0.0f64; 5];
    for _ in 0..20 {
        let (model, eps) = random_one_mode(&mut rng);
        let params = extract_params(&model).unwrap();
        let a = drift(&model);

        let exact = exact_spectrum(&params, eps);
        let mut general = eig_general(&a).unwrap().eigenvalues;
        general.sort_by(|x, y| y.im.partial_cmp(&x.im).unwrap());
        let spec_err = (exact[0] - general[0]).norm().max((exact[1] - general[1]).norm());

        let tau = rng.gen_range(0.0..5.0);
        let prop_err = exact_propagator(&params, tau, eps).unwrap().distance(&expm(&a.scale(tau)).unwrap());

        let root = sqrtm_spd(model.r()).unwrap();
        let direct = (&(&root * &expm(&a.scale(tau)).unwrap()) * model.theta()).frobenius_norm();
        let wd = weighted_decay(&params, eps, tau).unwrap();
        let decay_err = (wd.value - direct).abs();

        let cov_err = exact_covariance(&params, eps).unwrap().p.distance(&steady_covariance(&model).unwrap().p);

        let tau_star = decoherence_time(&model, NormKind::Weighted).unwrap().tau_star;
        let tau_err = (tau_star - wd.tau_r).abs() / wd.tau_r;

        for (w, e) in worst.iter_mut().zip([spec_err, prop_err, decay_err, cov_err, tau_err]) {
            *w = w.max(e);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst[..4].iter().all(|e| *e <= 1e-9) && worst[4] <= 1e-6 && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "max errors: spectrum {:.1e}, propagator {:.1e}, weighted decay {:.1e}, covariance {:.1e}, tau_R rel {:.1e}; {elapsed:?}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn hurwitz_models() -> Vec<OscillatorModel<f64>> {
    let mut rng = rng(4);
    (0..100).map(|i| random_hurwitz(&mut rng, [2, 4, 6, 8][i % 4], 0.02)).collect()
}

fn ale_oracle(models: &[OscillatorModel<f64>]) -> Outcome {
    let mut worst = 0.0f64;
    let mut psd_failures = 0;
    for model in models {
        let ss = build_state_space(model).unwrap();
        let p = solve_lyapunov(&ss.a, &ss.bbt).unwrap();
        let oracle = ale_quadrature(&ss.a, &ss.bbt);
        worst = worst.max(p.distance(&oracle) / oracle.frobenius_norm().max(1.0));
        if !quantum_psd(&p, model.theta()).unwrap().0 {
            psd_failures += 1;
        }
    }
    outcome(
        worst <= 1e-7 && psd_failures == 0,
        format!("{} models, max ‖P - P_quad‖_F/max(1,‖P_quad‖_F) = {worst:.2e}, P+iΘ PSD failures {psd_failures}", models.len()),
    )
}

fn covariance_limit() -> Outcome {
    let mut rng = rng(5);
    let mut models = vec![two_mode()];
    models.extend((0..10).map(|_| random_admissible(&mut rng, 4, 4, 0.1)));
    let eps = [0.05, 0.025, 0.0125];
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    for (i, model) in models.iter().enumerate() {
        let pi = weak_coupling_limit(model).unwrap().pi;
        let gaps: Vec<f64> = eps
            .iter()
            .map(|&e| steady_covariance(&model.with_epsilon(e).unwrap()).unwrap().p.distance(&pi))
            .collect();
        let ratio = gaps[2] / pi.frobenius_norm();
        worst_ratio = worst_ratio.max(ratio);
        if !strictly_decreasing(&gaps) || ratio >= 0.05 {
            failures.push(format!("model {i}: gaps {}", sci(&gaps)));
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} models, worst ‖P-Π‖/‖Π‖ at eps=0.0125: {worst_ratio:.2e} {}", models.len(), failures.join("; ")),
    )
}

fn bound_validity(models: &[OscillatorModel<f64>]) -> Outcome {
    let mut below = 0;
    let mut worst_scaling = 0.0f64;
    let mut checked = 0;
    for model in models {
        let tau = match decoherence_time(model, NormKind::Frobenius) {
            Ok(t) => t.tau_star,
            Err(oqho::Error::Horizon { .. }) => continue,
            Err(e) => panic!("decoherence time: {e}"),
        };
        checked += 1;
        let best = optimize_bound(model, 24).unwrap();
        if best.bound < tau {
            below += 1;
        }
        let a = drift(model);
        let alpha = -max_real(&a);
        let n = model.n();
        let ss = build_state_space(model).unwrap();
        let p = solve_lyapunov(&ss.a, &ss.bbt).unwrap();
        let theta = model.theta();
        let weights = [
            Matrix::identity(n).scale(1.0 / n as f64),
            p.scale(1.0 / p.trace()),
            (theta * &theta.transpose()).scale(1.0 / (theta * &theta.transpose()).trace()),
        ];
        for lambda in lambda_grid(alpha, 6) {
            for w in &weights {
                let b1 = lyapunov_bound_with(model, lambda, w).unwrap().bound;
                let b7 = lyapunov_bound_with(model, lambda, &w.scale(7.0)).unwrap().bound;
                worst_scaling = worst_scaling.max((b1 - b7).abs());
            }
        }
    }
    outcome(
        below == 0 && worst_scaling <= 1e-10 && checked >= 90,
        format!("{checked} models with finite tau*, bound < tau* in {below}, max |bound(7N) - bound(N)| = {worst_scaling:.1e}"),
    )
}

fn closed_loop_identity() -> Outcome {
    let mut rng = rng(7);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..100 {
        let net = random_network(&mut rng);
        let j = Matrix::block_diag(&[
            &symplectic_form::<f64>(net.subsystems[0].m()).unwrap(),
            &symplectic_form::<f64>(net.subsystems[1].m()).unwrap(),
        ]);
        let two_theta = net.theta.scale(2.0);
        let a = &two_theta * &(&net.r + &(&(&net.m.transpose() * &j) * &net.m));
        let b = &two_theta * &net.m.transpose();
        worst = worst.max((&a - &net.a).max_abs()).max((&b - &net.b).max_abs());

        let cl = closed_loop_asymptotics(&net).unwrap();
        let errs: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&e| {
                let exact = eig_general(&net.at_epsilon(e).unwrap().a).unwrap().eigenvalues;
                asymptote_error(&exact, &cl.lambda_asymptote(e)) / (e * e)
            })
            .collect();
        if !strictly_decreasing(&errs) {
            failures.push(format!("network {i}: {}", sci(&errs)));
        }
    }
    outcome(
        worst <= 1e-12 && failures.is_empty(),
        format!("100 networks, max entrywise identity gap {worst:.1e}, asymptote non-monotone in {} {}", failures.len(), failures.join("; ")),
    )
}

fn energy_balance(models: &[OscillatorModel<f64>]) -> Outcome {
    let mut all: Vec<OscillatorModel<f64>> = models.to_vec();
    all.push(two_mode());
    let mut worst = 0.0f64;
    for model in &all {
        let p = steady_covariance(model).unwrap().p;
        worst = worst.max(energy_rate(model, &p).unwrap().value.abs());
    }
    outcome(worst <= 1e-9, format!("{} Hurwitz models, max |energy rate| = {worst:.1e}", all.len()))
}

fn main() {
    let models = hurwitz_models();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("two-mode golden values", Box::new(golden)),
        ("leading Lyapunov exponent o(eps^2)", Box::new(lyapunov_exponent_convergence)),
        ("one-mode closed forms", Box::new(one_mode_exactness)),
        ("ALE vs quadrature oracle", Box::new(|| ale_oracle(&models))),
        ("covariance weak-coupling limit", Box::new(covariance_limit)),
        ("Lyapunov bound validity", Box::new(|| bound_validity(&models))),
        ("closed-loop identity and asymptote", Box::new(closed_loop_identity)),
        ("steady-state energy balance", Box::new(|| energy_balance(&models))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{name}] {} ({:.2?})",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

