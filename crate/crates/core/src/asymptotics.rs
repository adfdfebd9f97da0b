//! Weak-coupling eigenvalue asymptotics, the stability verdict and the
//! coupling-strength thresholds derived from them.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::format_sig;
use crate::linalg::{eig_general, symplectic_form, Matrix};
use crate::model::{build_state_space, spectral_structure, OscillatorModel, SpectralStructure};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// `A_ε = A₀ + ε²Ã₁`, `B_ε = ε𝔹`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingDecomposition<T> {
    pub epsilon: T,
    pub shape: Matrix<T>,
    /// `Ã₁ = 2Θ𝕄ᵀJ𝕄`
    pub atilde1: Matrix<T>,
    /// `𝔹 = 2Θ𝕄ᵀ`
    pub bshape: Matrix<T>,
}

impl<T: Real> CouplingDecomposition<T> {
    pub fn new(model: &OscillatorModel<T>) -> Result<Self> {
        let j = symplectic_form::<T>(model.m())?;
        let shape = model.shape().clone();
        let two_theta = model.theta().scale(T::lit(2.0));
        let st = shape.transpose();
        let atilde1 = &two_theta * &(&(&st * &j) * &shape);
        let bshape = &two_theta * &st;
        Ok(Self { epsilon: model.epsilon(), shape, atilde1, bshape })
    }
}

/// `v_k* Q v_k` for every column of `v`.
pub(crate) fn quadratic_forms<T: Real>(v: &Matrix<Complex<T>>, q: &Matrix<Complex<T>>) -> Vec<Complex<T>> {
    (0..v.cols())
        .map(|k| {
            let col = v.column(k);
            let qv = q.mul_vec(&col);
            col.iter().zip(&qv).map(|(a, b)| a.conj() * b).sum()
        })
        .collect()
}

/// Real parts of `−i·forms`, after checking the discarded part is below the
/// quadratic-form tolerance.
pub(crate) fn real_after_rotation<T: Real>(forms: &[Complex<T>], scale: T, what: &'static str) -> Result<Vec<T>> {
    let tol = T::lit(Tolerances::DEFAULT.quadratic_form) * T::one().max(scale);
    forms
        .iter()
        .map(|z| {
            let w = z * Complex::new(T::zero(), -T::one());
            if w.im.abs() > tol {
                Err(Error::Consistency { what, residual: w.im.abs().as_f64() })
            } else {
                Ok(w.re)
            }
        })
        .collect()
}

/// `μ_k = −i v_k* R^{-1/2}𝕄ᵀJ𝕄R^{-1/2} v_k`.
pub fn compute_mus<T: Real>(spectral: &SpectralStructure<T>, shape: &Matrix<T>, j: &Matrix<T>) -> Result<Vec<T>> {
    let n = spectral.n();
    if shape.cols() != n || j.shape() != (shape.rows(), shape.rows()) {
        return Err(Error::Dimension("coupling shape does not match spectral structure".into()));
    }
    let mjm = &(&shape.transpose() * j) * shape;
    let q = &(&spectral.inv_sqrt_r * &mjm) * &spectral.inv_sqrt_r;
    let forms = quadratic_forms(&spectral.v, &q.to_complex());
    real_after_rotation(&forms, q.frobenius_norm(), "μ quadratic form")
}

/// `λ̂_k = ω_k(i − ε²μ_k)`.
pub fn eigen_asymptote<T: Real>(omegas: &[T], mus: &[T], epsilon: T) -> Vec<Complex<T>> {
    let e2 = epsilon * epsilon;
    omegas.iter().zip(mus).map(|(&w, &mu)| Complex::new(-w * e2 * mu, w)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict<T> {
    /// `μ_k > 1e−10` for every `k ≤ n/2`.
    pub stable: bool,
    /// `min_{k ≤ n/2} μ_k`
    pub margin: T,
}

pub fn stability_verdict<T: Real>(mus: &[T]) -> StabilityVerdict<T> {
    let half = &mus[..mus.len() / 2];
    let margin = half.iter().copied().fold(T::infinity(), T::min);
    StabilityVerdict { stable: margin > T::lit(Tolerances::DEFAULT.mu_positive), margin }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds<T> {
    /// `min_{k ≤ n/2} ω_kμ_k`
    pub lead_coefficient: T,
    /// `sqrt(min ω / (2π·lead))`
    pub eps_hat: T,
    /// `1/sqrt(2π·max μ)`
    pub eps_tilde: T,
}

impl<T: Real> Thresholds<T> {
    /// `τ̂(ε) = ε⁻²/lead`
    pub fn tau_hat(&self, epsilon: T) -> T {
        T::one() / (epsilon * epsilon * self.lead_coefficient)
    }
}

/// Thresholds from the positive-frequency half of `(ω, μ)`. Refuses unless
/// every `μ_k`, `k ≤ n/2`, is positive.
pub fn thresholds<T: Real>(omegas: &[T], mus: &[T]) -> Result<Thresholds<T>> {
    let verdict = stability_verdict(mus);
    if !verdict.stable {
        return Err(Error::WeakCouplingUnstable { margin: verdict.margin.as_f64() });
    }
    let half = omegas.len() / 2;
    let lead = (0..half).map(|k| omegas[k] * mus[k]).fold(T::infinity(), T::min);
    let min_omega = omegas[..half].iter().copied().fold(T::infinity(), T::min);
    let max_mu = mus[..half].iter().copied().fold(T::neg_infinity(), T::max);
    let two_pi = T::lit(2.0) * T::PI();
    Ok(Thresholds {
        lead_coefficient: lead,
        eps_hat: (min_omega / (two_pi * lead)).sqrt(),
        eps_tilde: T::one() / (two_pi * max_mu).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport<T> {
    pub epsilon: T,
    pub omegas: Vec<T>,
    pub mus: Vec<T>,
    /// `ω_kμ_k` for `k ≤ n/2`.
    pub omega_mu_products: Vec<T>,
    pub verdict: StabilityVerdict<T>,
    /// Present only when the verdict is stable.
    pub thresholds: Option<Thresholds<T>>,
    /// `τ̂` at the model's `ε`, when thresholds exist and `ε > 0`.
    pub tau_hat: Option<T>,
    /// `ε/ε̂`, how far the model sits from the weak-coupling regime.
    pub eps_ratio: Option<T>,
}

pub fn asymptotics<T: Real>(model: &OscillatorModel<T>) -> Result<AsymptoticsReport<T>> {
    let spectral = spectral_structure(model)?;
    let j = symplectic_form::<T>(model.m())?;
    let mus = compute_mus(&spectral, model.shape(), &j)?;
    Ok(report_from(model.epsilon(), spectral.omegas, mus))
}

pub(crate) fn report_from<T: Real>(epsilon: T, omegas: Vec<T>, mus: Vec<T>) -> AsymptoticsReport<T> {
    let half = omegas.len() / 2;
    let omega_mu_products = (0..half).map(|k| omegas[k] * mus[k]).collect();
    let verdict = stability_verdict(&mus);
    let thresholds = thresholds(&omegas, &mus).ok();
    let tau_hat = thresholds.filter(|_| epsilon > T::zero()).map(|t| t.tau_hat(epsilon));
    let eps_ratio = thresholds.map(|t| epsilon / t.eps_hat);
    AsymptoticsReport { epsilon, omegas, mus, omega_mu_products, verdict, thresholds, tau_hat, eps_ratio }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub epsilon: T,
    /// `ln ρ(e^{A_ε}) = max Re λ(A_ε)`
    pub exact_lyapunov: T,
    /// `−ε²·lead`
    pub asymptotic_approx: T,
}

/// Leading Lyapunov exponent against its weak-coupling approximation, sorted
/// by `ε`. At `ε = 0` the exact value is `0`, since `A₀` has a purely
/// imaginary spectrum.
pub fn lyapunov_exponent_sweep<T: Real>(model: &OscillatorModel<T>, eps_list: &[T]) -> Result<Vec<SweepRow<T>>> {
    if eps_list.iter().any(|e| !(*e >= T::zero())) {
        return Err(Error::Parameter("coupling strengths must be non-negative".into()));
    }
    let report = asymptotics(model)?;
    let lead = report
        .thresholds
        .ok_or(Error::WeakCouplingUnstable { margin: report.verdict.margin.as_f64() })?
        .lead_coefficient;
    let mut eps: Vec<T> = eps_list.to_vec();
    eps.sort_by(|a, b| a.partial_cmp(b).expect("finite ε"));
    eps.into_iter()
        .map(|e| {
            let exact = if e == T::zero() {
                T::zero()
            } else {
                let a = build_state_space(&model.with_epsilon(e)?)?.a;
                eig_general(&a)?.max_real_part()
            };
            Ok(SweepRow { epsilon: e, exact_lyapunov: exact, asymptotic_approx: -e * e * lead })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "epsilon,exact_lyapunov,asymptotic_approx";

pub fn sweep_csv<T: Real>(rows: &[SweepRow<T>]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            format_sig(r.epsilon.as_f64()),
            format_sig(r.exact_lyapunov.as_f64()),
            format_sig(r.asymptotic_approx.as_f64())
        ));
    }
    out
}

/// Assignment of exact eigenvalues to asymptotes minimising the total
/// distance. Returns `p` with `exact[p[k]]` paired to `approx[k]`.
/// Exhaustive up to 8 values, greedy beyond.
pub fn pair_eigenvalues<T: Real>(exact: &[Complex<T>], approx: &[Complex<T>]) -> Vec<usize> {
    let n = approx.len();
    assert_eq!(exact.len(), n, "pairing needs equal counts");
    let dist = |i: usize, k: usize| (exact[i] - approx[k]).norm();
    if n <= 8 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = perm.clone();
        let mut best_cost = T::infinity();
        permute(&mut perm, 0, &mut |p| {
            let cost = p.iter().enumerate().fold(T::zero(), |acc, (k, &i)| acc + dist(i, k));
            if cost < best_cost {
                best_cost = cost;
                best.copy_from_slice(p);
            }
        });
        best
    } else {
        let mut used = vec![false; n];
        let mut out = vec![0; n];
        let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).collect();
        pairs.sort_by(|a, b| dist(a.0, a.1).partial_cmp(&dist(b.0, b.1)).expect("finite distances"));
        let mut taken = vec![false; n];
        for (i, k) in pairs {
            if !used[i] && !taken[k] {
                used[i] = true;
                taken[k] = true;
                out[k] = i;
            }
        }
        out
    }
}

fn permute(p: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}

/// `max_k |λ_{p(k)} − λ̂_k|` under the optimal pairing.
pub fn asymptote_error<T: Real>(exact: &[Complex<T>], approx: &[Complex<T>]) -> T {
    let p = pair_eigenvalues(exact, approx);
    p.iter().enumerate().fold(T::zero(), |m, (k, &i)| m.max((exact[i] - approx[k]).norm()))
}
