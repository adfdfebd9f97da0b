//! Closed forms for a single mode (`n = 2`).
//!
//! The model is first brought to `Θ = ½bJ` by `X₁ ↦ X₁/(2θ)`, i.e.
//! `X' = DX` with `D = diag(1/(2θ), 1)`. All closed forms are evaluated in
//! those coordinates and mapped back.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrtm_spd, sqrtm_spd, symplectic_form, symplectic_unit, Matrix};
use crate::model::{check_pair, OscillatorModel};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneModeParams<T> {
    /// `Θ = θ·bJ` in the input coordinates.
    pub theta: T,
    /// `𝕄ᵀJ𝕄 = γ·bJ` after rescaling.
    pub gamma: T,
    /// `√det R` after rescaling.
    pub omega: T,
    /// `γ/ω`
    pub mu: T,
    /// `(𝕄ᵀJ𝕄)₁₂` and `√det R` before rescaling.
    pub input_gamma: T,
    pub input_omega: T,
    /// Energy matrix `D⁻ᵀRD⁻¹` and shape `𝕄D⁻¹` after rescaling.
    #[serde(rename = "R")]
    pub r: Matrix<T>,
    pub shape: Matrix<T>,
}

impl<T: Real> OneModeParams<T> {
    /// `D = diag(1/(2θ), 1)`
    pub fn rescaling(&self) -> Matrix<T> {
        Matrix::diag(&[T::one() / (T::lit(2.0) * self.theta), T::one()])
    }

    fn rescaling_inverse(&self) -> Matrix<T> {
        Matrix::diag(&[T::lit(2.0) * self.theta, T::one()])
    }

    /// `(Θ, R, 𝕄)` in the input coordinates.
    pub fn recover(&self) -> (Matrix<T>, Matrix<T>, Matrix<T>) {
        let d = self.rescaling();
        let theta = symplectic_unit::<T>().scale(self.theta);
        let r = &(&d.transpose() * &self.r) * &d;
        let shape = &self.shape * &d;
        (theta, r, shape)
    }

    /// `D⁻¹ E D` for a propagator `E` in rescaled coordinates.
    pub fn propagator_to_input(&self, e: &Matrix<T>) -> Matrix<T> {
        &(&self.rescaling_inverse() * e) * &self.rescaling()
    }

    /// `D⁻¹ P D⁻ᵀ` for a covariance `P` in rescaled coordinates.
    pub fn covariance_to_input(&self, p: &Matrix<T>) -> Matrix<T> {
        let di = self.rescaling_inverse();
        &(&di * p) * &di.transpose()
    }

    /// `𝔹 = 2Θ𝕄ᵀ = bJ𝕄ᵀ` in rescaled coordinates.
    pub fn bshape(&self) -> Matrix<T> {
        &symplectic_unit::<T>() * &self.shape.transpose()
    }
}

pub fn extract_params<T: Real>(model: &OscillatorModel<T>) -> Result<OneModeParams<T>> {
    if model.n() != 2 {
        return Err(Error::Dimension(format!("one-mode analysis needs n = 2, got {}", model.n())));
    }
    let (antisymmetric, symmetric, nonsingular, positive) = check_pair(model.theta(), model.r());
    if !antisymmetric || !symmetric {
        return Err(Error::Validation("Θ must be antisymmetric and R symmetric".into()));
    }
    if !nonsingular {
        return Err(Error::Validation("singular CCR matrix (θ = 0)".into()));
    }
    if !positive {
        return Err(Error::Validation("R must be positive definite".into()));
    }
    let j = symplectic_form::<T>(model.m())?;
    let shape = model.shape();
    let theta = model.theta()[(0, 1)];
    let mjm = &(&shape.transpose() * &j) * shape;
    let input_gamma = mjm[(0, 1)];
    let r = model.r();
    let input_omega = (r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)]).sqrt();

    let two_theta = T::lit(2.0) * theta;
    let d_inv = Matrix::diag(&[two_theta, T::one()]);
    let r_c = &(&d_inv.transpose() * r) * &d_inv;
    let shape_c = shape * &d_inv;
    let gamma = two_theta * input_gamma;
    let omega = two_theta.abs() * input_omega;
    Ok(OneModeParams {
        theta,
        gamma,
        omega,
        mu: gamma / omega,
        input_gamma,
        input_omega,
        r: r_c.symmetric_part(),
        shape: shape_c,
    })
}

/// `λ₁,₂ = −ε²γ ± iω`
pub fn exact_spectrum<T: Real>(params: &OneModeParams<T>, epsilon: T) -> [Complex<T>; 2] {
    let re = -epsilon * epsilon * params.gamma;
    [Complex::new(re, params.omega), Complex::new(re, -params.omega)]
}

/// `Σ(t) = e^{t·bJ}`
pub fn rotation<T: Real>(t: T) -> Matrix<T> {
    let (s, c) = t.sin_cos();
    Matrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) | (1, 1) => c,
        (0, 1) => s,
        _ => -s,
    })
}

/// `e^{τA_ε} = e^{−ε²γτ} R^{-1/2} Σ(ωτ) √R`, returned in input coordinates.
pub fn exact_propagator<T: Real>(params: &OneModeParams<T>, tau: T, epsilon: T) -> Result<Matrix<T>> {
    let root = sqrtm_spd(&params.r)?;
    let inv_root = inv_sqrtm_spd(&params.r)?;
    let damping = (-epsilon * epsilon * params.gamma * tau).exp();
    let e = (&(&inv_root * &rotation(params.omega * tau)) * &root).scale(damping);
    Ok(params.propagator_to_input(&e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedDecay<T> {
    /// `‖e^{τA}Θ‖_R / ‖Θ‖_R = e^{−ε²γτ}`
    pub ratio: T,
    /// `‖e^{τA}Θ‖_R`
    pub value: T,
    /// `τ_R = ε⁻²/γ`
    pub tau_r: T,
    /// `1/√(2πμ)`: `ε` must stay below this for the decoherence time to
    /// exceed one period.
    pub eps_bound: T,
}

pub fn weighted_decay<T: Real>(params: &OneModeParams<T>, epsilon: T, tau: T) -> Result<WeightedDecay<T>> {
    if !(params.gamma > T::zero()) {
        return Err(Error::WeakCouplingUnstable { margin: params.mu.as_f64() });
    }
    let (theta, r, _) = params.recover();
    let theta_r = (&sqrtm_spd(&r)? * &theta).frobenius_norm();
    let e2g = epsilon * epsilon * params.gamma;
    let ratio = (-e2g * tau).exp();
    Ok(WeightedDecay {
        ratio,
        value: ratio * theta_r,
        tau_r: T::one() / e2g,
        eps_bound: T::one() / (T::lit(2.0) * T::PI() * params.mu).sqrt(),
    })
}

fn unit_vectors<T: Real>() -> [[Complex<T>; 2]; 2] {
    let h = T::FRAC_1_SQRT_2();
    [
        [Complex::new(h, T::zero()), Complex::new(T::zero(), h)],
        [Complex::new(h, T::zero()), Complex::new(T::zero(), -h)],
    ]
}

/// The two terms of the closed-form invariant covariance, in input
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneModeCovariance<T> {
    #[serde(rename = "P")]
    pub p: Matrix<T>,
    /// `ε`-independent part, equal to the weak-coupling limit.
    #[serde(rename = "Pi")]
    pub pi: Matrix<T>,
    /// `O(ε²)` remainder.
    pub remainder: Matrix<T>,
}

/// `P_ε = (2γ)⁻¹|𝔹ᵀ√R v₁|² R⁻¹ + ε² R^{-1/2} Re((ε²γ − iω)⁻¹ c₁₂ v₁v₂*) R^{-1/2}`
/// with `v₁,₂ = (1, ±i)/√2` and `c₁₂ = v₁*√R𝔹𝔹ᵀ√R v₂`.
pub fn exact_covariance<T: Real>(params: &OneModeParams<T>, epsilon: T) -> Result<OneModeCovariance<T>> {
    if !(params.gamma > T::zero()) {
        return Err(Error::WeakCouplingUnstable { margin: params.mu.as_f64() });
    }
    if !(epsilon > T::zero()) {
        return Err(Error::Parameter(format!("coupling strength must be positive, got {epsilon}")));
    }
    let [v1, v2] = unit_vectors::<T>();
    let root = sqrtm_spd(&params.r)?;
    let inv_root = inv_sqrtm_spd(&params.r)?;
    let bshape = params.bshape();
    let w = (&bshape.transpose() * &root).to_complex();
    let weight: T = w.mul_vec(&v1).iter().map(Complex::norm_sqr).sum();
    let r_inv = &inv_root * &inv_root;
    let pi = r_inv.scale(weight / (T::lit(2.0) * params.gamma));

    let g = (&(&root * &bshape) * &(&bshape.transpose() * &root)).to_complex();
    let gv2 = g.mul_vec(&v2);
    let c12: Complex<T> = v1.iter().zip(&gv2).map(|(a, b)| a.conj() * b).sum();
    let e2 = epsilon * epsilon;
    let factor = c12 / Complex::new(e2 * params.gamma, -params.omega);
    let core = Matrix::from_fn(2, 2, |i, j| (factor * v1[i] * v2[j].conj()).re);
    let remainder = (&(&inv_root * &core) * &inv_root).scale(e2);
    let p = &pi + &remainder;
    Ok(OneModeCovariance {
        p: params.covariance_to_input(&p).symmetric_part(),
        pi: params.covariance_to_input(&pi).symmetric_part(),
        remainder: params.covariance_to_input(&remainder),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::steady_covariance;
    use crate::decay::{decoherence_time, NormKind};
    use crate::linalg::{eig_general, expm};
    use crate::model::build_state_space;

    fn model(theta: f64, r: Matrix<f64>, shape: Matrix<f64>, eps: f64) -> OscillatorModel<f64> {
        OscillatorModel::with_shape(symplectic_unit().scale(theta), r, shape, eps).unwrap()
    }

    #[test]
    fn canonical_example_params() {
        let p = extract_params(&model(0.5, Matrix::diag(&[4.0, 1.0]), Matrix::identity(2), 1.0)).unwrap();
        assert_eq!((p.theta, p.gamma, p.omega, p.mu), (0.5, 1.0, 2.0, 0.5));
        let p = extract_params(&model(0.5, Matrix::identity(2), Matrix::identity(2), 1.0)).unwrap();
        assert_eq!(p.omega, 1.0);
    }

    #[test]
    fn duplicated_channel_pairs_double_gamma() {
        let shape = Matrix::from_rows(&[[1.0, 0.5], [-0.2, 0.7]]).unwrap();
        let a = shape.row(0).to_vec();
        let b = shape.row(1).to_vec();
        let doubled = Matrix::from_rows(&[a.clone(), a, b.clone(), b]).unwrap();
        let single = extract_params(&model(0.5, Matrix::identity(2), shape, 1.0)).unwrap();
        let double = extract_params(&model(0.5, Matrix::identity(2), doubled, 1.0)).unwrap();
        assert!((double.gamma - 2.0 * single.gamma).abs() < 1e-15);
    }

    #[test]
    fn rescaling_round_trips() {
        let r = Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.5]]).unwrap();
        let shape = Matrix::from_rows(&[[1.0, 0.5], [-0.2, 0.7]]).unwrap();
        let m = model(-1.3, r, shape, 0.2);
        let p = extract_params(&m).unwrap();
        let (theta, r, shape) = p.recover();
        assert!(theta.distance(m.theta()) < 1e-12);
        assert!(r.distance(m.r()) < 1e-12);
        assert!(shape.distance(m.shape()) < 1e-12);
    }

    #[test]
    fn singular_and_wrong_size_rejected() {
        assert!(matches!(
            extract_params(&model(0.0, Matrix::identity(2), Matrix::identity(2), 1.0)),
            Err(Error::Validation(_))
        ));
        let big = OscillatorModel::<f64>::new(
            crate::model::canonical_theta(4).unwrap(),
            Matrix::identity(4),
            Matrix::zeros(2, 4),
        )
        .unwrap();
        assert!(matches!(extract_params(&big), Err(Error::Dimension(_))));
    }

    #[test]
    fn spectrum_matches_general_solver() {
        let p = extract_params(&model(0.5, Matrix::diag(&[4.0, 1.0]), Matrix::identity(2), 1.0)).unwrap();
        let s = exact_spectrum(&p, 0.5);
        assert_eq!(s[0], Complex::new(-0.25, 2.0));
        let r = Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.5]]).unwrap();
        let shape = Matrix::from_rows(&[[1.0, 0.5], [-0.2, 0.7]]).unwrap();
        let m = model(0.8, r, shape, 0.6);
        let p = extract_params(&m).unwrap();
        let exact = exact_spectrum(&p, 0.6);
        let general = eig_general(&build_state_space(&m).unwrap().a).unwrap().eigenvalues;
        for (a, b) in exact.iter().zip(&general) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn propagator_matches_expm_and_is_periodic() {
        let r = Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.5]]).unwrap();
        let shape = Matrix::from_rows(&[[1.0, 0.5], [-0.2, 0.7]]).unwrap();
        let m = model(0.8, r, shape, 0.3);
        let p = extract_params(&m).unwrap();
        let a = build_state_space(&m).unwrap().a;
        for tau in [0.0, 0.37, 2.9] {
            let e = exact_propagator(&p, tau, 0.3).unwrap();
            assert!(e.distance(&expm(&a.scale(tau)).unwrap()) < 1e-10);
        }
        let period = 2.0 * std::f64::consts::PI / p.omega;
        let e = exact_propagator(&p, period, 0.0).unwrap();
        assert!(e.distance(&Matrix::identity(2)) < 1e-10);
    }

    #[test]
    fn weighted_decay_examples() {
        let p = extract_params(&model(0.5, Matrix::diag(&[4.0, 1.0]), Matrix::identity(2), 1.0)).unwrap();
        let d = weighted_decay(&p, 0.3, 5.0).unwrap();
        assert!((d.ratio - (-0.45f64).exp()).abs() < 1e-15);
        let at = weighted_decay(&p, 0.3, d.tau_r).unwrap();
        assert!((at.ratio - (-1.0f64).exp()).abs() < 1e-12);
        // at ε = 1/√(2πμ) the ratio after one period is exactly 1/e
        let eps = d.eps_bound;
        let one_period = weighted_decay(&p, eps, std::f64::consts::PI).unwrap();
        assert!((one_period.ratio - (-1.0f64).exp()).abs() < 1e-12);

        let general = decoherence_time(&model(0.5, Matrix::diag(&[4.0, 1.0]), Matrix::identity(2), 0.3), NormKind::Weighted).unwrap();
        assert!((general.tau_star - d.tau_r).abs() < 1e-8);
    }

    #[test]
    fn covariance_matches_lyapunov_solution() {
        let r = Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.5]]).unwrap();
        let shape = Matrix::from_rows(&[[1.0, 0.5], [-0.2, 0.7]]).unwrap();
        for theta in [0.5, 0.8, 1.7] {
            let m = model(theta, r.clone(), shape.clone(), 0.4);
            let p = extract_params(&m).unwrap();
            let closed = exact_covariance(&p, 0.4).unwrap();
            let ale = steady_covariance(&m).unwrap().p;
            assert!(closed.p.distance(&ale) < 1e-9, "θ = {theta}: {}", closed.p.distance(&ale));
        }
    }

    #[test]
    fn unit_model_remainder() {
        // R = I, 𝕄 = I: 𝔹 = bJ and γ = ω = 1
        let m = model(0.5, Matrix::identity(2), Matrix::identity(2), 0.5);
        let p = extract_params(&m).unwrap();
        let c = exact_covariance(&p, 0.5).unwrap();
        let ale = steady_covariance(&m).unwrap().p;
        assert!((&ale - &c.pi).distance(&c.remainder) < 1e-9);
    }
}
