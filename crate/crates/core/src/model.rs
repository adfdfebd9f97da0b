//! Oscillator definition `(Θ, R, M)`, its state-space matrices and the
//! eigenfrequency structure of the uncoupled dynamics.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, inv_sqrtm_spd, lu, min_hermitian_eigenvalue, sqrtm_spd, symplectic_form, Matrix,
};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// Commutation structure of the driving field: `J = bJ ⊗ I_{m/2}` and the
/// Ito matrix `Ω = I_m + iJ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItoStructure<T> {
    pub m: usize,
    pub j: Matrix<T>,
    pub omega: Matrix<Complex<T>>,
}

impl<T: Real> ItoStructure<T> {
    pub fn new(m: usize) -> Result<Self> {
        let j = symplectic_form::<T>(m)?;
        let omega = Matrix::from_fn(m, m, |r, c| {
            Complex::new(if r == c { T::one() } else { T::zero() }, j[(r, c)])
        });
        Ok(Self { m, j, omega })
    }
}

/// `½·bJ ⊗ I_{n/2}`, the CCR matrix of `n/2` position-momentum pairs ordered
/// as `(q₁, …, q_{n/2}, p₁, …, p_{n/2})`.
pub fn canonical_theta<T: Real>(n: usize) -> Result<Matrix<T>> {
    Ok(symplectic_form::<T>(n)?.scale(T::lit(0.5)))
}

/// An open quantum harmonic oscillator.
///
/// The coupling matrix is stored as a shape `𝕄` and a strength `ε` with
/// `M = ε𝕄`. A model given directly by `M` has `𝕄 = M`, `ε = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorModel<T> {
    theta: Matrix<T>,
    r: Matrix<T>,
    shape: Matrix<T>,
    epsilon: T,
}

impl<T: Real> OscillatorModel<T> {
    /// Model with coupling matrix `M` (m×n).
    pub fn new(theta: Matrix<T>, r: Matrix<T>, m: Matrix<T>) -> Result<Self> {
        Self::with_shape(theta, r, m, T::one())
    }

    /// Model with coupling `M = ε·shape`.
    pub fn with_shape(theta: Matrix<T>, r: Matrix<T>, shape: Matrix<T>, epsilon: T) -> Result<Self> {
        let n = theta.rows();
        if !theta.is_square() || r.shape() != (n, n) || shape.cols() != n {
            return Err(Error::Dimension(format!(
                "Θ {}x{}, R {}x{}, coupling {}x{} are inconsistent",
                theta.rows(),
                theta.cols(),
                r.rows(),
                r.cols(),
                shape.rows(),
                shape.cols()
            )));
        }
        if !(epsilon >= T::zero()) || !epsilon.is_finite() {
            return Err(Error::Parameter(format!("coupling strength must be non-negative, got {epsilon}")));
        }
        if !theta.is_finite() || !r.is_finite() || !shape.is_finite() {
            return Err(Error::Validation("model has non-finite entries".into()));
        }
        Ok(Self { theta, r, shape, epsilon })
    }

    pub fn n(&self) -> usize {
        self.theta.rows()
    }

    pub fn m(&self) -> usize {
        self.shape.rows()
    }

    pub fn theta(&self) -> &Matrix<T> {
        &self.theta
    }

    pub fn r(&self) -> &Matrix<T> {
        &self.r
    }

    pub fn shape(&self) -> &Matrix<T> {
        &self.shape
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// The coupling matrix `M = ε𝕄`.
    pub fn coupling(&self) -> Matrix<T> {
        self.shape.scale(self.epsilon)
    }

    /// Same `(Θ, R, 𝕄)` at a different coupling strength.
    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        Self::with_shape(self.theta.clone(), self.r.clone(), self.shape.clone(), epsilon)
    }

    /// The uncoupled model (`M = 0`).
    pub fn isolated(&self) -> Self {
        Self { epsilon: T::zero(), ..self.clone() }
    }

    pub fn ito(&self) -> Result<ItoStructure<T>> {
        ItoStructure::new(self.m())
    }
}

/// Outcome of the individual structural checks on a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub theta_antisymmetric: bool,
    pub r_symmetric: bool,
    pub theta_nonsingular: bool,
    pub r_positive_definite: bool,
    pub n_even: bool,
    pub m_even: bool,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.structure_ok() && self.typical()
    }

    /// Symmetry and parity checks needed to build the state space.
    pub fn structure_ok(&self) -> bool {
        self.theta_antisymmetric && self.r_symmetric && self.n_even && self.m_even
    }

    /// Nonsingular CCR matrix and positive definite energy matrix.
    pub fn typical(&self) -> bool {
        self.theta_nonsingular && self.r_positive_definite
    }

    fn failures(&self) -> Vec<&'static str> {
        let checks = [
            (self.theta_antisymmetric, "Θ not antisymmetric"),
            (self.r_symmetric, "R not symmetric"),
            (self.theta_nonsingular, "Θ singular"),
            (self.r_positive_definite, "R not positive definite"),
            (self.n_even, "n odd"),
            (self.m_even, "m odd"),
        ];
        checks.iter().filter(|(ok, _)| !ok).map(|(_, msg)| *msg).collect()
    }
}

fn structure_residual_ok<T: Real>(residual: T, x: &Matrix<T>) -> bool {
    residual <= T::lit(Tolerances::DEFAULT.structure) * T::one().max(x.frobenius_norm())
}

/// Checks a `(Θ, R)` pair, the parts of validation shared with network
/// assembly.
pub(crate) fn check_pair<T: Real>(theta: &Matrix<T>, r: &Matrix<T>) -> (bool, bool, bool, bool) {
    let tol = Tolerances::DEFAULT;
    let n = theta.rows();
    let theta_antisymmetric = structure_residual_ok(theta.distance(&theta.transpose().scale(-T::one())), theta);
    let r_symmetric = structure_residual_ok(r.distance(&r.transpose()), r);
    let det = lu::det(theta).unwrap_or(T::zero());
    let theta_nonsingular = det.abs() > T::lit(tol.det) * theta.frobenius_norm().powi(n as i32);
    let r_positive_definite = r_symmetric
        && min_hermitian_eigenvalue(&r.symmetric_part().to_complex())
            .map(|l| l > T::zero())
            .unwrap_or(false);
    (theta_antisymmetric, r_symmetric, theta_nonsingular, r_positive_definite)
}

pub fn validate<T: Real>(model: &OscillatorModel<T>) -> ValidationReport {
    let (theta_antisymmetric, r_symmetric, theta_nonsingular, r_positive_definite) =
        check_pair(&model.theta, &model.r);
    ValidationReport {
        theta_antisymmetric,
        r_symmetric,
        theta_nonsingular,
        r_positive_definite,
        n_even: model.n() % 2 == 0,
        m_even: model.m() % 2 == 0,
    }
}

/// Drift and diffusion matrices of the linear QSDE `dX = AX dt + B dW`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace<T> {
    /// `A = 2Θ(R + MᵀJM)`
    pub a: Matrix<T>,
    /// `B = 2ΘMᵀ`
    pub b: Matrix<T>,
    /// `A₀ = 2ΘR`, the isolated dynamics.
    pub a0: Matrix<T>,
    /// `Ã = A − A₀ = 2ΘMᵀJM`
    pub atilde: Matrix<T>,
    /// `BBᵀ = −4ΘMᵀMΘ`
    pub bbt: Matrix<T>,
}

pub fn build_state_space<T: Real>(model: &OscillatorModel<T>) -> Result<StateSpace<T>> {
    let report = validate(model);
    if !report.structure_ok() {
        return Err(Error::Validation(report.failures().join(", ")));
    }
    let j = symplectic_form::<T>(model.m())?;
    let m = model.coupling();
    let mt = m.transpose();
    let two_theta = model.theta.scale(T::lit(2.0));
    let a0 = &two_theta * &model.r;
    let mjm = &(&mt * &j) * &m;
    let a = &two_theta * &(&model.r + &mjm);
    let b = &two_theta * &mt;
    let atilde = &a - &a0;
    let bbt = &b * &b.transpose();
    Ok(StateSpace { a, b, a0, atilde, bbt })
}

/// Eigenfrequencies and eigenvectors of the uncoupled dynamics.
///
/// Ordering: `ω₁ > … > ω_{n/2} > 0` followed by `ω_{k+n/2} = −ω_k`, with
/// `v_{k+n/2} = conj(v_k)`. Each `v_k` (k ≤ n/2) has its first component of
/// magnitude above 1e−8 made real positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStructure<T> {
    pub omegas: Vec<T>,
    /// Unitary matrix with columns `v_k`.
    pub v: Matrix<Complex<T>>,
    /// `S = R^{-1/2} V`, so that `A₀ = iS℧S⁻¹`.
    pub s: Matrix<Complex<T>>,
    /// `T = 2π / min_{k ≤ n/2} ω_k`.
    pub period: T,
    pub sqrt_r: Matrix<T>,
    pub inv_sqrt_r: Matrix<T>,
}

impl<T: Real> SpectralStructure<T> {
    pub fn n(&self) -> usize {
        self.omegas.len()
    }

    /// Positive eigenfrequencies `ω₁ … ω_{n/2}`.
    pub fn positive_omegas(&self) -> &[T] {
        &self.omegas[..self.n() / 2]
    }

    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.v.column(k)
    }

    /// `S⁻¹ = V*√R`.
    pub fn s_inverse(&self) -> Matrix<Complex<T>> {
        &self.v.adjoint() * &self.sqrt_r.to_complex()
    }
}

pub fn spectral_structure<T: Real>(model: &OscillatorModel<T>) -> Result<SpectralStructure<T>> {
    let report = validate(model);
    if !report.theta_antisymmetric || !report.r_symmetric || !report.n_even {
        return Err(Error::Validation(report.failures().join(", ")));
    }
    spectral_structure_of(&model.theta, &model.r)
}

/// Spectral structure of `A₀ = 2ΘR` for an arbitrary antisymmetric `Θ` and
/// symmetric `R`.
pub fn spectral_structure_of<T: Real>(theta: &Matrix<T>, r: &Matrix<T>) -> Result<SpectralStructure<T>> {
    let tol = Tolerances::DEFAULT;
    let n = theta.rows();
    if n % 2 != 0 || r.shape() != theta.shape() {
        return Err(Error::Dimension(format!("spectral structure needs even square Θ, R (n = {n})")));
    }
    let (_, _, theta_nonsingular, r_positive_definite) = check_pair(theta, r);
    if !theta_nonsingular || !r_positive_definite {
        return Err(Error::Validation(
            "spectral structure requires det Θ ≠ 0 and R ≻ 0".into(),
        ));
    }
    let sqrt_r = sqrtm_spd(r)?;
    let inv_sqrt_r = inv_sqrtm_spd(r)?;
    let k = &(&sqrt_r * theta) * &sqrt_r;
    let h = Matrix::from_fn(n, n, |i, j| Complex::new(T::zero(), T::lit(-2.0) * k[(i, j)]));
    let spec = eig_hermitian(&h)?;
    let values = spec.real_values();
    let vectors = spec.eigenvectors.expect("Hermitian solver returns vectors");

    let half = n / 2;
    let mut omegas = vec![T::zero(); n];
    for k in 0..half {
        if !(values[k] > T::zero()) {
            return Err(Error::Validation(format!(
                "eigenfrequency {} is not positive ({})",
                k + 1,
                values[k]
            )));
        }
        omegas[k] = values[k];
        omegas[k + half] = -values[k];
    }

    let scale = omegas.iter().fold(T::zero(), |m, w| m.max(w.abs()));
    let mut closest = (0, 1, T::infinity());
    for j in 0..n {
        for k in j + 1..n {
            let gap = (omegas[j] - omegas[k]).abs();
            if gap < closest.2 {
                closest = (j, k, gap);
            }
        }
    }
    if closest.2 <= T::lit(tol.degeneracy) * scale {
        return Err(Error::Degenerate { j: closest.0 + 1, k: closest.1 + 1, gap: closest.2.as_f64() });
    }

    let mut v = Matrix::<Complex<T>>::zeros(n, n);
    for k in 0..half {
        let mut col = vectors.column(k);
        if let Some(z) = col.iter().find(|z| z.norm() > T::lit(tol.phase)).copied() {
            let phase = z.conj().unscale(z.norm());
            for c in col.iter_mut() {
                *c *= phase;
            }
        }
        let conj: Vec<Complex<T>> = col.iter().map(|z| z.conj()).collect();
        v.set_column(k, &col);
        v.set_column(k + half, &conj);
    }
    let s = &inv_sqrt_r.to_complex() * &v;
    let min_positive = omegas[half - 1];
    let period = T::lit(2.0) * T::PI() / min_positive;
    Ok(SpectralStructure { omegas, v, s, period, sqrt_r, inv_sqrt_r })
}

/// CCR matrix as it appears in model files: the keyword `"canonical"` or an
/// explicit array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Named(String),
    Explicit(Matrix<f64>),
}

impl ThetaSpec {
    pub fn resolve(&self, n: usize) -> Result<Matrix<f64>> {
        match self {
            ThetaSpec::Named(name) if name == "canonical" => canonical_theta(n),
            ThetaSpec::Named(name) => Err(Error::Validation(format!("unknown theta keyword {name:?}"))),
            ThetaSpec::Explicit(m) => Ok(m.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub shape: Matrix<f64>,
    pub epsilon: f64,
}

/// Model file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub m: usize,
    pub theta: ThetaSpec,
    #[serde(rename = "R")]
    pub r: Matrix<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m_matrix: Option<Matrix<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSpec>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("model file: {e}")))
    }

    pub fn to_model(&self) -> Result<OscillatorModel<f64>> {
        let theta = self.theta.resolve(self.n)?;
        let (shape, epsilon) = match (&self.m_matrix, &self.coupling) {
            (Some(m), None) => (m.clone(), 1.0),
            (None, Some(c)) => (c.shape.clone(), c.epsilon),
            _ => {
                return Err(Error::Validation(
                    "model file needs exactly one of `M` or `coupling`".into(),
                ))
            }
        };
        if theta.shape() != (self.n, self.n) || self.r.shape() != (self.n, self.n) || shape.shape() != (self.m, self.n) {
            return Err(Error::Dimension(format!(
                "declared n = {}, m = {} disagree with matrix shapes",
                self.n, self.m
            )));
        }
        OscillatorModel::with_shape(theta, self.r.clone(), shape, epsilon)
    }
}
