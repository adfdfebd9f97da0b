//! Two-point commutator decay, decoherence time and its Lyapunov-inequality
//! upper bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_symmetric, expm, lu, max_real_part, solve_lyapunov, sqrtm_spd, Matrix};
use crate::model::{build_state_space, spectral_structure, OscillatorModel};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Frobenius,
    /// `‖N‖_R = ‖√R N‖_F`
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample<T> {
    pub tau: T,
    pub upsilon: Matrix<T>,
    /// Frobenius norm of `upsilon`.
    pub norm: T,
}

/// `Υ(τ)` evaluated on a list of times.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorKernel<T> {
    pub samples: Vec<KernelSample<T>>,
}

/// `Υ(τ) = e^{τA}Θ` for `τ ≥ 0` and `Θe^{−τAᵀ}` for `τ < 0`.
pub fn commutator_kernel<T: Real>(model: &OscillatorModel<T>, taus: &[T]) -> Result<CommutatorKernel<T>> {
    let a = build_state_space(model)?.a;
    let theta = model.theta();
    let samples = taus
        .iter()
        .map(|&tau| {
            let upsilon = if tau == T::zero() {
                theta.clone()
            } else if tau > T::zero() {
                &expm(&a.scale(tau))? * theta
            } else {
                theta * &expm(&a.transpose().scale(-tau))?
            };
            let norm = upsilon.frobenius_norm();
            Ok(KernelSample { tau, upsilon, norm })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommutatorKernel { samples })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceTimeResult<T> {
    pub tau_star: T,
    pub norm_kind: NormKind,
    /// Final bisection interval `[lo, hi]`, with `tau_star = hi`.
    pub bracket: (T, T),
    /// `‖e^{τ*A}Θ‖ / ‖Θ‖`
    pub ratio: T,
    /// March step used before bisection.
    pub step: T,
}

/// First time at which `‖e^{τA}Θ‖` drops to `‖Θ‖/e`.
///
/// The march step is `T/1000` when the spectral structure exists and
/// `0.01/|max Re λ(A)|` otherwise.
pub fn decoherence_time<T: Real>(model: &OscillatorModel<T>, kind: NormKind) -> Result<DecoherenceTimeResult<T>> {
    let tol = Tolerances::DEFAULT;
    let a = build_state_space(model)?.a;
    let max_re = max_real_part(&a)?;
    if !(max_re < -T::lit(tol.hurwitz)) {
        return Err(Error::NotHurwitz { max_real_part: max_re.as_f64() });
    }
    let step = match spectral_structure(model) {
        Ok(spec) => spec.period / T::lit(tol.steps_per_period),
        Err(_) => T::lit(tol.fallback_step) / max_re.abs(),
    };
    let weight = match kind {
        NormKind::Frobenius => None,
        NormKind::Weighted => Some(sqrtm_spd(model.r())?),
    };
    let mut result = first_crossing(&a, model.theta(), weight.as_ref(), step)?;
    result.norm_kind = kind;
    Ok(result)
}

/// Forward march then bisection for the `1/e` crossing of
/// `‖W e^{τA}Θ‖_F / ‖WΘ‖_F`, with `W = I` when no weight is given.
pub fn first_crossing<T: Real>(
    a: &Matrix<T>,
    theta: &Matrix<T>,
    weight: Option<&Matrix<T>>,
    step: T,
) -> Result<DecoherenceTimeResult<T>> {
    let tol = Tolerances::DEFAULT;
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::Parameter(format!("march step must be positive, got {step}")));
    }
    let norm = |x: &Matrix<T>| match weight {
        Some(w) => (w * x).frobenius_norm(),
        None => x.frobenius_norm(),
    };
    let base = norm(theta);
    if !(base > T::zero()) {
        return Err(Error::Validation("Θ has zero norm".into()));
    }
    let threshold = base / T::one().exp();
    let ratio_at = |tau: T| -> Result<T> { Ok(norm(&(&expm(&a.scale(tau))? * theta)) / base) };

    let stepper = expm(&a.scale(step))?;
    let horizon = tol.horizon_steps as usize;
    let mut current = theta.clone();
    let mut crossing = None;
    for k in 1..=horizon {
        current = &stepper * &current;
        if norm(&current) <= threshold {
            crossing = Some(k);
            break;
        }
    }
    let k = crossing.ok_or(Error::Horizon { horizon: (step * T::lit(horizon as f64)).as_f64() })?;

    let inv_e = T::one() / T::one().exp();
    let mut lo = step * T::lit((k - 1) as f64);
    let mut hi = step * T::lit(k as f64);
    // the accumulated product can drift from a fresh exponential near the threshold
    if ratio_at(hi)? > inv_e {
        lo = hi;
        while ratio_at(hi)? > inv_e {
            hi += step;
            if hi > step * T::lit(horizon as f64 + 1.0) {
                return Err(Error::Horizon { horizon: hi.as_f64() });
            }
        }
    }
    while hi - lo > T::lit(tol.bisection) * hi {
        let mid = T::lit(0.5) * (lo + hi);
        if ratio_at(mid)? <= inv_e {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(DecoherenceTimeResult {
        tau_star: hi,
        norm_kind: if weight.is_some() { NormKind::Weighted } else { NormKind::Frobenius },
        bracket: (lo, hi),
        ratio: ratio_at(hi)?,
        step,
    })
}

/// Which member of the candidate family an `N` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    /// `I/n`
    Identity,
    /// `P/Tr P` with `P` the steady-state covariance.
    SteadyCovariance,
    /// `ΘΘᵀ/Tr(ΘΘᵀ)`
    Commutation,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovBound<T> {
    pub lambda: T,
    #[serde(rename = "N")]
    pub n_matrix: Matrix<T>,
    pub weight: WeightChoice,
    #[serde(rename = "Gamma")]
    pub gamma: Matrix<T>,
    pub bound: T,
    /// Largest eigenvalue of `AΓ + ΓAᵀ + 2λΓ`.
    pub lmi_max_eigenvalue: T,
}

fn decay_margin<T: Real>(a: &Matrix<T>) -> Result<T> {
    let max_re = max_real_part(a)?;
    if !(max_re < -T::lit(Tolerances::DEFAULT.hurwitz)) {
        return Err(Error::NotHurwitz { max_real_part: max_re.as_f64() });
    }
    Ok(-max_re)
}

/// Upper bound on the Frobenius decoherence time at decay rate `λ` with
/// `N = I/n`.
pub fn lyapunov_bound<T: Real>(model: &OscillatorModel<T>, lambda: T) -> Result<LyapunovBound<T>> {
    let n = model.n();
    let mut b = lyapunov_bound_with(model, lambda, &Matrix::identity(n).scale(T::one() / T::lit(n as f64)))?;
    b.weight = WeightChoice::Identity;
    Ok(b)
}

/// Upper bound at rate `λ` for an arbitrary positive definite `N`.
pub fn lyapunov_bound_with<T: Real>(model: &OscillatorModel<T>, lambda: T, n_matrix: &Matrix<T>) -> Result<LyapunovBound<T>> {
    let a = build_state_space(model)?.a;
    let alpha = decay_margin(&a)?;
    if !(lambda > T::zero() && lambda < alpha) {
        return Err(Error::Parameter(format!(
            "decay rate {lambda} outside (0, {alpha})"
        )));
    }
    bound_at(&a, model.theta(), lambda, n_matrix, WeightChoice::Custom)
}

/// Representative of the ray `{σN : σ > 0}` used for the solve: the
/// symmetric part at unit trace, rounded to multiples of `2^-30`. The bound
/// only depends on the ray, and `Γ` is ill-conditioned near `λ → α`, so
/// without the rounding last-bit differences between `N` and `σN` would
/// show up in the bound.
fn canonical_weight<T: Real>(n_matrix: &Matrix<T>) -> Matrix<T> {
    let sym = n_matrix.symmetric_part();
    let tr = sym.trace();
    let grid = T::lit(2f64.powi(30));
    sym.map(|x| (x / tr * grid).round() / grid)
}

fn bound_at<T: Real>(
    a: &Matrix<T>,
    theta: &Matrix<T>,
    lambda: T,
    n_matrix: &Matrix<T>,
    weight: WeightChoice,
) -> Result<LyapunovBound<T>> {
    let n = a.rows();
    if n_matrix.shape() != (n, n) {
        return Err(Error::Dimension(format!("N must be {n}x{n}")));
    }
    if !(n_matrix.trace() > T::zero()) {
        return Err(Error::Parameter("N must be positive definite".into()));
    }
    let n_matrix = &canonical_weight(n_matrix);
    let (n_eigs, _) = eig_symmetric(n_matrix)?;
    if !(n_eigs[n - 1] > T::zero()) {
        return Err(Error::Parameter("N must be positive definite".into()));
    }
    let shifted = a + &Matrix::identity(n).scale(lambda);
    let gamma = solve_lyapunov(&shifted, n_matrix)?;

    let ag = a * &gamma;
    let lmi = &(&ag + &ag.transpose()) + &gamma.scale(T::lit(2.0) * lambda);
    let (lmi_eigs, _) = eig_symmetric(&lmi.symmetric_part())?;
    let lmi_max = lmi_eigs[0];
    if !(lmi_max < -T::lit(1e-10)) {
        return Err(Error::Consistency { what: "Lyapunov inequality", residual: lmi_max.as_f64() });
    }

    let (gamma_eigs, _) = eig_symmetric(&gamma)?;
    let root = sqrtm_spd(&gamma)?;
    let whitened = lu::solve(&root, theta)?;
    let spread = gamma_eigs[0].sqrt() * whitened.frobenius_norm() / theta.frobenius_norm();
    let bound = (T::one() + spread.ln()) / lambda;
    Ok(LyapunovBound { lambda, n_matrix: n_matrix.clone(), weight, gamma, bound, lmi_max_eigenvalue: lmi_max })
}

/// Candidate weights `{I/n, P/Tr P, ΘΘᵀ/Tr(ΘΘᵀ)}`, skipping those that are
/// not positive definite.
fn weight_candidates<T: Real>(model: &OscillatorModel<T>, a: &Matrix<T>, bbt: &Matrix<T>) -> Vec<(WeightChoice, Matrix<T>)> {
    let n = model.n();
    let mut out = vec![(WeightChoice::Identity, Matrix::identity(n).scale(T::one() / T::lit(n as f64)))];
    let mut push_normalized = |choice, x: Matrix<T>| {
        let tr = x.trace();
        if !(tr > T::zero()) {
            return;
        }
        let x = x.scale(T::one() / tr);
        let positive = eig_symmetric(&x)
            .map(|(e, _)| e[n - 1] > T::lit(Tolerances::DEFAULT.psd))
            .unwrap_or(false);
        if positive {
            out.push((choice, x));
        }
    };
    if let Ok(p) = solve_lyapunov(a, bbt) {
        push_normalized(WeightChoice::SteadyCovariance, p);
    }
    let theta = model.theta();
    push_normalized(WeightChoice::Commutation, theta * &theta.transpose());
    out
}

/// Geometric grid of `size` rates ending at `0.999·α`, spanning three decades.
pub fn lambda_grid<T: Real>(alpha: T, size: usize) -> Vec<T> {
    let top = T::lit(0.999) * alpha;
    if size <= 1 {
        return vec![top];
    }
    let span = T::lit(1e-3);
    (0..size)
        .map(|i| top * span.powf(T::lit((size - 1 - i) as f64) / T::lit((size - 1) as f64)))
        .collect()
}

/// Minimises the bound over a λ grid and the candidate weights. Ties go to
/// the smaller λ, then to the earlier candidate.
pub fn optimize_bound<T: Real>(model: &OscillatorModel<T>, grid_size: usize) -> Result<LyapunovBound<T>> {
    if grid_size == 0 {
        return Err(Error::Parameter("λ grid needs at least one point".into()));
    }
    let ss = build_state_space(model)?;
    let alpha = decay_margin(&ss.a)?;
    let candidates = weight_candidates(model, &ss.a, &ss.bbt);
    let mut best: Option<LyapunovBound<T>> = None;
    for lambda in lambda_grid(alpha, grid_size) {
        for (choice, n_matrix) in &candidates {
            let b = bound_at(&ss.a, model.theta(), lambda, n_matrix, *choice)?;
            if best.as_ref().map_or(true, |cur| b.bound < cur.bound) {
                best = Some(b);
            }
        }
    }
    Ok(best.expect("grid is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{symplectic_form, symplectic_unit};
    use crate::model::canonical_theta;

    /// `Θ = ½bJ⊗I`, `R = 0`, `M = I` gives `A = −I`.
    fn negative_identity(n: usize) -> OscillatorModel<f64> {
        OscillatorModel::new(canonical_theta(n).unwrap(), Matrix::zeros(n, n), Matrix::identity(n)).unwrap()
    }

    #[test]
    fn kernel_at_zero_and_reversal() {
        let model = OscillatorModel::new(
            symplectic_unit().scale(0.5),
            Matrix::diag(&[4.0, 1.0]),
            Matrix::identity(2).scale(0.3),
        )
        .unwrap();
        let k = commutator_kernel(&model, &[0.0, 1.3, -1.3]).unwrap();
        assert_eq!(&k.samples[0].upsilon, model.theta());
        let fwd = &k.samples[1].upsilon;
        let back = &k.samples[2].upsilon;
        assert!(back.distance(&fwd.transpose().scale(-1.0)) < 1e-10);
    }

    #[test]
    fn isolated_rotation_preserves_norm() {
        let model = OscillatorModel::new(symplectic_unit().scale(0.5), Matrix::identity(2), Matrix::zeros(2, 2)).unwrap();
        let k = commutator_kernel::<f64>(&model, &[0.0, 0.7, 3.0, 11.0]).unwrap();
        for s in &k.samples {
            assert!((s.norm - k.samples[0].norm).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_decay_time_is_one() {
        let model = negative_identity(4);
        assert!(build_state_space(&model).unwrap().a.distance(&Matrix::identity(4).scale(-1.0)) < 1e-15);
        let t = decoherence_time(&model, NormKind::Frobenius).unwrap();
        assert!((t.tau_star - 1.0).abs() < 1e-8);
        assert!((t.ratio - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn weighted_one_mode_time() {
        // γ = 1 for 𝕄 = I, so τ_R = ε⁻²
        let eps: f64 = 0.5;
        let model = OscillatorModel::with_shape(
            symplectic_unit().scale(0.5),
            Matrix::diag(&[4.0, 1.0]),
            Matrix::identity(2),
            eps,
        )
        .unwrap();
        let t = decoherence_time(&model, NormKind::Weighted).unwrap();
        assert!((t.tau_star - 1.0 / (eps * eps)).abs() < 1e-8, "{}", t.tau_star);
    }

    #[test]
    fn rejects_non_hurwitz() {
        let model = OscillatorModel::new(symplectic_unit().scale(0.5), Matrix::identity(2), Matrix::zeros(2, 2)).unwrap();
        assert!(matches!(decoherence_time(&model, NormKind::Frobenius), Err(Error::NotHurwitz { .. })));
    }

    #[test]
    fn bound_for_scalar_decay() {
        let model = negative_identity(2);
        let b = lyapunov_bound(&model, 0.5).unwrap();
        assert!(b.gamma.distance(&Matrix::identity(2).scale(0.5)) < 1e-14);
        assert!((b.bound - 2.0).abs() < 1e-12);
        let b = lyapunov_bound(&model, 0.999_999).unwrap();
        assert!((b.bound - 1.0).abs() < 1e-5);
        assert!(matches!(lyapunov_bound(&model, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(lyapunov_bound(&model, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn optimized_scalar_bound_sits_at_grid_endpoint() {
        let b = optimize_bound(&negative_identity(2), 30).unwrap();
        assert!((b.lambda - 0.999).abs() < 1e-12);
        assert!((b.bound - 1.0 / 0.999).abs() < 1e-10);
    }

    #[test]
    fn bound_invariant_under_weight_scaling() {
        let j = symplectic_form::<f64>(2).unwrap();
        let r = Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]]).unwrap();
        let shape = Matrix::from_rows(&[[1.0, 0.2], [-0.4, 0.9]]).unwrap();
        let model = OscillatorModel::with_shape(j.scale(0.5), r, shape, 0.6).unwrap();
        let n = Matrix::from_rows(&[[0.7, 0.1], [0.1, 0.3]]).unwrap();
        let alpha = -max_real_part(&build_state_space(&model).unwrap().a).unwrap();
        let a = lyapunov_bound_with(&model, 0.4 * alpha, &n).unwrap();
        let b = lyapunov_bound_with(&model, 0.4 * alpha, &n.scale(7.0)).unwrap();
        assert!((a.bound - b.bound).abs() < 1e-10);
        assert!(a.lmi_max_eigenvalue < 0.0);
    }

    #[test]
    fn grid_is_geometric_and_ends_below_margin() {
        let g = lambda_grid(2.0f64, 4);
        assert_eq!(g.len(), 4);
        assert!((g[3] - 1.998).abs() < 1e-15);
        assert!((g[0] - 1.998e-3).abs() < 1e-15);
        assert!((g[1] / g[0] - g[2] / g[1]).abs() < 1e-12);
    }
}
