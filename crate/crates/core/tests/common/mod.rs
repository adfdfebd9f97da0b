#![allow(dead_code)]

use oqho::linalg::{eig_general, Matrix};
use oqho::model::{canonical_theta, spectral_structure, ModelFile, OscillatorModel};
use oqho::asymptotics::asymptotics;
use oqho::interconnect::{assemble, ClosedLoopNetwork, SubsystemSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rm = Matrix<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn two_mode_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/two_mode.json")
}

/// The two-mode example model with its stored coupling strength.
pub fn two_mode() -> OscillatorModel<f64> {
    let text = std::fs::read_to_string(two_mode_path()).expect("two_mode.json");
    ModelFile::from_json(&text).unwrap().to_model().unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Rm {
    Matrix::from_fn(rows, cols, |_, _| {
        // Box–Muller
        let u: f64 = rng.gen_range(1e-12..1.0);
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    })
}

/// `GGᵀ/n + shift·I`
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Rm {
    let g = gaussian(rng, n, n);
    &(&g * &g.transpose()).scale(1.0 / n as f64) + &Matrix::identity(n).scale(shift)
}

pub fn max_real(a: &Rm) -> f64 {
    eig_general(a).unwrap().max_real_part()
}

pub fn drift(model: &OscillatorModel<f64>) -> Rm {
    oqho::model::build_state_space(model).unwrap().a
}

/// Random Hurwitz model with canonical Θ and spectral abscissa below
/// `-margin`.
pub fn random_hurwitz(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> OscillatorModel<f64> {
    loop {
        let m = 2 * rng.gen_range(1..=n / 2 + 1);
        let theta = canonical_theta(n).unwrap();
        let r = random_spd(rng, n, 0.5);
        let shape = gaussian(rng, m, n);
        let eps = rng.gen_range(0.2..0.8);
        let model = OscillatorModel::with_shape(theta, r, shape, eps).unwrap();
        if max_real(&drift(&model)) < -margin {
            return model;
        }
    }
}

/// Random model meeting the weak-coupling hypotheses: distinct
/// frequencies with relative gap at least `gap` and all `μ_k > 0`.
pub fn random_admissible(rng: &mut ChaCha8Rng, n: usize, m: usize, gap: f64) -> OscillatorModel<f64> {
    loop {
        let theta = canonical_theta(n).unwrap();
        let r = random_spd(rng, n, 0.5);
        let shape = gaussian(rng, m, n);
        let model = OscillatorModel::with_shape(theta, r, shape, 0.1).unwrap();
        let Ok(spec) = spectral_structure(&model) else { continue };
        let w = spec.positive_omegas();
        let separated = w.windows(2).all(|p| (p[0] - p[1]) > gap * p[0]);
        let Ok(report) = asymptotics(&model) else { continue };
        if separated && report.verdict.stable && report.verdict.margin > 0.05 {
            return model;
        }
    }
}

/// `e^X` by scaling, a 24-term Taylor series and squaring.
pub fn taylor_expm(x: &Rm) -> Rm {
    let n = x.rows();
    let norm = x.norm_1();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let y = x.scale(1.0 / 2f64.powi(s));
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..=24 {
        term = (&term * &y).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Nodes and weights of the `k`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

/// `∫₀^∞ e^{tA} Q e^{tAᵀ} dt` by composite Gauss–Legendre panels, stopped
/// once `‖e^{tA}‖_F² < 1e-14`.
pub fn ale_quadrature(a: &Rm, q: &Rm) -> Rm {
    let n = a.rows();
    let rule = gauss_legendre(10);
    let h = 1.0 / a.frobenius_norm().max(1e-3);
    let nodes: Vec<(Rm, f64)> = rule.iter().map(|&(x, w)| (taylor_expm(&a.scale(x * h)), w * h)).collect();
    let panel = taylor_expm(&a.scale(h));
    let mut e0 = Matrix::identity(n);
    let mut total = Matrix::zeros(n, n);
    for _ in 0..50_000_000usize {
        for (g, w) in &nodes {
            let e = g * &e0;
            total = &total + &(&(&e * q) * &e.transpose()).scale(*w);
        }
        e0 = &panel * &e0;
        let f = e0.frobenius_norm();
        if f * f < 1e-14 {
            break;
        }
    }
    total
}

pub fn random_selection(rng: &mut ChaCha8Rng, m: usize) -> Vec<usize> {
    let h = m / 2;
    let mut pairs: Vec<usize> = (1..=h).collect();
    pairs.shuffle(rng);
    pairs.truncate(rng.gen_range(1..=h));
    pairs.sort();
    pairs.iter().copied().chain(pairs.iter().map(|i| i + h)).collect()
}

/// Random two-oscillator network at ε = 0.04 with positive definite `R₀`
/// and closed-loop frequencies separated by at least 5% relative.
pub fn random_network(rng: &mut ChaCha8Rng) -> ClosedLoopNetwork<f64> {
    loop {
        let dims: Vec<(usize, usize)> = (0..2).map(|_| (*[2, 4].choose(rng).unwrap(), *[2, 4].choose(rng).unwrap())).collect();
        let sel: Vec<Vec<usize>> = dims.iter().map(|&(_, m)| random_selection(rng, m)).collect();
        let specs: Vec<SubsystemSpec<f64>> = (0..2)
            .map(|k| {
                let (n, m) = dims[k];
                SubsystemSpec::new(
                    canonical_theta(n).unwrap().scale(rng.gen_range(0.5..1.5)),
                    random_spd(rng, n, 0.5),
                    gaussian(rng, m, n),
                    gaussian(rng, sel[1 - k].len(), n),
                    sel[k].clone(),
                )
                .unwrap()
            })
            .collect();
        let r12 = gaussian(rng, dims[0].0, dims[1].0).scale(0.2);
        let net = assemble(specs[0].clone(), specs[1].clone(), r12, 0.04).unwrap();
        let Ok(spec) = oqho::model::spectral_structure_of(&net.theta, &net.r0) else { continue };
        let w = spec.positive_omegas();
        if w.windows(2).all(|p| p[0] - p[1] > 0.05 * p[0]) {
            return net;
        }
    }
}
