//! Coherent feedback interconnection of two oscillators through direct
//! energy coupling and each other's output fields.
//!
//! Subsystem `k` is driven by its own input field `w_k` (coupling `M_k`)
//! and by the output `y_{3−k}` of the other subsystem (coupling `L_k`).
//! The output `y_k = C_k x_k dt + D_k dw_k` selects `p_k` of the `m_k`
//! field quadratures through `D_k`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{quadratic_forms, real_after_rotation, stability_verdict, thresholds, StabilityVerdict, Thresholds};
use crate::covariance::{steady_covariance, CovarianceResult};
use crate::decay::{decoherence_time, optimize_bound, DecoherenceTimeResult, LyapunovBound, NormKind};
use crate::error::{Error, Result};
use crate::linalg::{symplectic_form, Matrix};
use crate::model::{check_pair, spectral_structure_of, OscillatorModel, ThetaSpec};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

/// Selection matrix whose rows are `e_iᵀ` for the given 1-based indices.
/// Every selected `i ≤ m/2` needs its partner `i + m/2` and vice versa.
pub fn selection_matrix<T: Real>(m: usize, indices: &[usize]) -> Result<Matrix<T>> {
    if m % 2 != 0 {
        return Err(Error::Validation(format!("field dimension {m} is odd")));
    }
    let half = m / 2;
    let mut seen = vec![false; m];
    for &i in indices {
        if i == 0 || i > m {
            return Err(Error::Validation(format!("selected row {i} outside 1..={m}")));
        }
        if std::mem::replace(&mut seen[i - 1], true) {
            return Err(Error::Validation(format!("row {i} selected twice")));
        }
    }
    for &i in indices {
        let partner = if i <= half { i + half } else { i - half };
        if !seen[partner - 1] {
            return Err(Error::Validation(format!("row {i} selected without its conjugate row {partner}")));
        }
    }
    if indices.is_empty() {
        return Err(Error::Validation("empty output selection".into()));
    }
    let mut d = Matrix::zeros(indices.len(), m);
    for (r, &i) in indices.iter().enumerate() {
        d[(r, i - 1)] = T::one();
    }
    Ok(d)
}

/// One constituent oscillator with its coupling shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemSpec<T> {
    pub theta: Matrix<T>,
    pub r: Matrix<T>,
    /// `𝕄_k`, `m_k × n_k`
    pub m_shape: Matrix<T>,
    /// `𝕃_k`, `p_{3−k} × n_k`
    pub l_shape: Matrix<T>,
    /// 1-based rows of the `m_k × m_k` identity forming `D_k`.
    pub selection: Vec<usize>,
    /// `D_k`, `p_k × m_k`
    pub d: Matrix<T>,
}

impl<T: Real> SubsystemSpec<T> {
    pub fn new(theta: Matrix<T>, r: Matrix<T>, m_shape: Matrix<T>, l_shape: Matrix<T>, selection: Vec<usize>) -> Result<Self> {
        let n = theta.rows();
        if !theta.is_square() || r.shape() != (n, n) || m_shape.cols() != n || l_shape.cols() != n {
            return Err(Error::Validation("subsystem matrices have inconsistent sizes".into()));
        }
        if n % 2 != 0 {
            return Err(Error::Validation(format!("subsystem dimension {n} is odd")));
        }
        let (antisymmetric, symmetric, _, _) = check_pair(&theta, &r);
        if !antisymmetric || !symmetric {
            return Err(Error::Validation("subsystem Θ must be antisymmetric and R symmetric".into()));
        }
        let d = selection_matrix(m_shape.rows(), &selection)?;
        Ok(Self { theta, r, m_shape, l_shape, selection, d })
    }

    pub fn n(&self) -> usize {
        self.theta.rows()
    }

    pub fn m(&self) -> usize {
        self.m_shape.rows()
    }

    pub fn p(&self) -> usize {
        self.selection.len()
    }
}

/// Per-subsystem matrices of the interconnection at a given `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemMatrices<T> {
    /// `2Θ_k(R_k + M_kᵀJ_kM_k + L_kᵀJ̃_{3−k}L_k)`
    pub a: Matrix<T>,
    /// `2Θ_kM_kᵀ`
    pub b: Matrix<T>,
    /// `2D_kJ_kM_k`
    pub c: Matrix<T>,
    pub d: Matrix<T>,
    /// `2Θ_kL_kᵀ`
    pub e: Matrix<T>,
    /// `2Θ_kR_{k,3−k}`
    pub f: Matrix<T>,
    /// `J̃_k = D_kJ_kD_kᵀ`
    pub jtilde: Matrix<T>,
}

/// The assembled feedback network at coupling strength `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopNetwork<T> {
    pub epsilon: T,
    pub subsystems: [SubsystemSpec<T>; 2],
    pub r12: Matrix<T>,
    pub blocks: [SubsystemMatrices<T>; 2],
    /// Closed-loop drift and diffusion assembled from the subsystem blocks.
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    /// `blockdiag(Θ₁, Θ₂)`
    pub theta: Matrix<T>,
    /// `blockdiag(J₁, J₂)`
    pub j: Matrix<T>,
    /// Closed-loop energy matrix `R = R₀ + ε²𝕊ℝ`.
    pub r: Matrix<T>,
    /// Closed-loop coupling `M = ε𝕊𝕄`.
    pub m: Matrix<T>,
    /// `[[R₁, R₁₂], [R₂₁, R₂]]`
    pub r0: Matrix<T>,
    /// `𝕊ℝ`
    pub sr: Matrix<T>,
    /// `𝕊𝕄`, rows ordered as `(w₁, w₂)`.
    pub sm: Matrix<T>,
    /// The network as a single oscillator. Its field rows are reordered so
    /// that `blockdiag(J₁, J₂)` becomes `bJ ⊗ I_{m/2}`; row `r` of its
    /// shape is row `channel_order[r]` of `sm`.
    pub model: OscillatorModel<T>,
    pub channel_order: Vec<usize>,
}

impl<T: Real> ClosedLoopNetwork<T> {
    pub fn n(&self) -> usize {
        self.theta.rows()
    }

    /// The same network at another coupling strength.
    pub fn at_epsilon(&self, epsilon: T) -> Result<Self> {
        assemble(self.subsystems[0].clone(), self.subsystems[1].clone(), self.r12.clone(), epsilon)
    }
}

fn subsystem_blocks<T: Real>(
    own: &SubsystemSpec<T>,
    other: &SubsystemSpec<T>,
    r_cross: &Matrix<T>,
    epsilon: T,
) -> Result<SubsystemMatrices<T>> {
    let j = symplectic_form::<T>(own.m())?;
    let j_other = symplectic_form::<T>(other.m())?;
    let jtilde_other = &(&other.d * &j_other) * &other.d.transpose();
    let m = own.m_shape.scale(epsilon);
    let l = own.l_shape.scale(epsilon);
    let two_theta = own.theta.scale(T::lit(2.0));
    let inner = &(&own.r + &(&(&m.transpose() * &j) * &m)) + &(&(&l.transpose() * &jtilde_other) * &l);
    Ok(SubsystemMatrices {
        a: &two_theta * &inner,
        b: &two_theta * &m.transpose(),
        c: (&(&own.d * &j) * &m).scale(T::lit(2.0)),
        d: own.d.clone(),
        e: &two_theta * &l.transpose(),
        f: &two_theta * r_cross,
        jtilde: &(&own.d * &j) * &own.d.transpose(),
    })
}

/// Permutation taking `blockdiag(bJ⊗I_{m₁/2}, bJ⊗I_{m₂/2})` to
/// `bJ⊗I_{(m₁+m₂)/2}`: first halves of both blocks, then second halves.
fn channel_order(m1: usize, m2: usize) -> Vec<usize> {
    let (h1, h2) = (m1 / 2, m2 / 2);
    (0..h1)
        .chain(m1..m1 + h2)
        .chain(h1..m1)
        .chain(m1 + h2..m1 + m2)
        .collect()
}

fn check_close<T: Real>(what: &'static str, x: &Matrix<T>, y: &Matrix<T>) -> Result<()> {
    let residual = x.distance(y);
    let scale = T::one().max(x.frobenius_norm());
    if !(residual <= T::lit(Tolerances::DEFAULT.assembly) * scale) {
        return Err(Error::Consistency { what, residual: residual.as_f64() });
    }
    Ok(())
}

/// Builds the closed-loop matrices twice, once from the subsystem blocks
/// and once from the closed-loop `(R, M)`, and refuses to return if they
/// disagree.
pub fn assemble<T: Real>(
    spec1: SubsystemSpec<T>,
    spec2: SubsystemSpec<T>,
    r12: Matrix<T>,
    epsilon: T,
) -> Result<ClosedLoopNetwork<T>> {
    if !(epsilon >= T::zero()) || !epsilon.is_finite() {
        return Err(Error::Parameter(format!("coupling strength must be non-negative, got {epsilon}")));
    }
    let (n1, n2) = (spec1.n(), spec2.n());
    let (m1, m2) = (spec1.m(), spec2.m());
    if r12.shape() != (n1, n2) {
        return Err(Error::Validation(format!("R12 must be {n1}x{n2}")));
    }
    if spec1.l_shape.rows() != spec2.p() || spec2.l_shape.rows() != spec1.p() {
        return Err(Error::Validation("each L shape needs as many rows as the other subsystem's outputs".into()));
    }
    let r21 = r12.transpose();
    let b1 = subsystem_blocks(&spec1, &spec2, &r12, epsilon)?;
    let b2 = subsystem_blocks(&spec2, &spec1, &r21, epsilon)?;

    let a = Matrix::from_blocks(&[
        &[&b1.a, &(&b1.f + &(&b1.e * &b2.c))],
        &[&(&b2.f + &(&b2.e * &b1.c)), &b2.a],
    ])?;
    let b = Matrix::from_blocks(&[&[&b1.b, &(&b1.e * &b2.d)], &[&(&b2.e * &b1.d), &b2.b]])?;

    let theta = Matrix::block_diag(&[&spec1.theta, &spec2.theta]);
    let j = Matrix::block_diag(&[&symplectic_form::<T>(m1)?, &symplectic_form::<T>(m2)?]);
    let (l1, l2) = (spec1.l_shape.scale(epsilon), spec2.l_shape.scale(epsilon));
    let half = T::lit(0.5);
    let upper = &r12 + &(&(&l1.transpose() * &b2.c) + &(&b1.c.transpose() * &l2)).scale(half);
    let r = Matrix::from_blocks(&[&[&spec1.r, &upper], &[&upper.transpose(), &spec2.r]])?;
    let sm = Matrix::from_blocks(&[
        &[&spec1.m_shape, &(&spec1.d.transpose() * &spec2.l_shape)],
        &[&(&spec2.d.transpose() * &spec1.l_shape), &spec2.m_shape],
    ])?;
    let m = sm.scale(epsilon);

    let two_theta = theta.scale(T::lit(2.0));
    let a_check = &two_theta * &(&r + &(&(&m.transpose() * &j) * &m));
    let b_check = &two_theta * &m.transpose();
    check_close("closed-loop drift", &a, &a_check)?;
    check_close("closed-loop diffusion", &b, &b_check)?;

    let r0 = Matrix::from_blocks(&[&[&spec1.r, &r12], &[&r21, &spec2.r]])?;
    let (j1, j2) = (symplectic_form::<T>(m1)?, symplectic_form::<T>(m2)?);
    let (sm1, sm2, sl1, sl2) = (&spec1.m_shape, &spec2.m_shape, &spec1.l_shape, &spec2.l_shape);
    let gain = &(&(&sl1.transpose() * &spec2.d) * &j2) * sm2;
    let loss = &(&(&sm1.transpose() * &j1) * &spec1.d.transpose()) * sl2;
    let sr_upper = &gain - &loss;
    let zero1 = Matrix::zeros(n1, n1);
    let zero2 = Matrix::zeros(n2, n2);
    let sr = Matrix::from_blocks(&[&[&zero1, &sr_upper], &[&sr_upper.transpose(), &zero2]])?;
    check_close("field-mediated energy", &r, &(&r0 + &sr.scale(epsilon * epsilon)))?;

    let order = channel_order(m1, m2);
    let shape = Matrix::from_fn(m1 + m2, n1 + n2, |i, c| sm[(order[i], c)]);
    let model = OscillatorModel::with_shape(theta.clone(), r.clone(), shape, epsilon)?;

    Ok(ClosedLoopNetwork {
        epsilon,
        subsystems: [spec1, spec2],
        r12,
        blocks: [b1, b2],
        a,
        b,
        theta,
        j,
        r,
        m,
        r0,
        sr,
        sm,
        model,
        channel_order: order,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct ClosedLoopAsymptotics<T> {
    pub omegas: Vec<T>,
    pub mus: Vec<T>,
    /// First-order frequency shifts.
    pub sigmas: Vec<T>,
    /// `K = −iV*R₀^{-1/2}𝕊𝕄ᵀJ𝕊𝕄R₀^{-1/2}V`, with `μ` on its diagonal.
    #[serde(rename = "K", serialize_with = "crate::io::serialize_complex_matrix")]
    pub k: Matrix<Complex<T>>,
    /// Positivity of `μ_k`, `k ≤ n/2`. Says nothing about the `σ_k`.
    pub verdict: StabilityVerdict<T>,
    pub thresholds: Option<Thresholds<T>>,
}

impl<T: Real> ClosedLoopAsymptotics<T> {
    /// `λ̂_k = ω_k(i(1 + ε²σ_k) − ε²μ_k)`
    pub fn lambda_asymptote(&self, epsilon: T) -> Vec<Complex<T>> {
        let e2 = epsilon * epsilon;
        (0..self.omegas.len())
            .map(|k| {
                let w = self.omegas[k];
                Complex::new(-w * e2 * self.mus[k], w * (T::one() + e2 * self.sigmas[k]))
            })
            .collect()
    }
}

pub fn closed_loop_asymptotics<T: Real>(network: &ClosedLoopNetwork<T>) -> Result<ClosedLoopAsymptotics<T>> {
    let spectral = spectral_structure_of(&network.theta, &network.r0)?;
    let s = &spectral.inv_sqrt_r;
    let mjm = &(&network.sm.transpose() * &network.j) * &network.sm;
    let q = &(s * &mjm) * s;
    let v = &spectral.v;
    let qv = &(&v.adjoint() * &q.to_complex()) * v;
    let k = qv.scale(Complex::new(T::zero(), -T::one()));
    let herm_residual = k.distance(&k.adjoint());
    if herm_residual > T::lit(Tolerances::DEFAULT.hermitian) * T::one().max(k.frobenius_norm()) {
        return Err(Error::Consistency { what: "K Hermitian", residual: herm_residual.as_f64() });
    }
    let diag: Vec<Complex<T>> = k.diagonal();
    let tol = T::lit(Tolerances::DEFAULT.quadratic_form) * T::one().max(q.frobenius_norm());
    if let Some(z) = diag.iter().find(|z| z.im.abs() > tol) {
        return Err(Error::Consistency { what: "μ quadratic form", residual: z.im.abs().as_f64() });
    }
    let mus: Vec<T> = diag.iter().map(|z| z.re).collect();

    let rt = &(s * &network.sr) * s;
    let forms = quadratic_forms(v, &rt.to_complex());
    let rotated: Vec<Complex<T>> = forms.iter().map(|z| z * Complex::new(T::zero(), T::one())).collect();
    // σ_k = v*Qv with Q symmetric, so i·σ_k is purely imaginary
    let sigmas = real_after_rotation(&rotated, rt.frobenius_norm(), "σ quadratic form")?;

    let verdict = stability_verdict(&mus);
    let thresholds = thresholds(&spectral.omegas, &mus).ok();
    Ok(ClosedLoopAsymptotics { omegas: spectral.omegas, mus, sigmas, k, verdict, thresholds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct ClosedLoopReport<T> {
    pub asymptotics: ClosedLoopAsymptotics<T>,
    pub decoherence_time: DecoherenceTimeResult<T>,
    pub bound: LyapunovBound<T>,
    pub covariance: CovarianceResult<T>,
}

/// Runs the single-oscillator analyses on the assembled network.
pub fn analyze_closed_loop<T: Real>(network: &ClosedLoopNetwork<T>, lambda_grid: usize) -> Result<ClosedLoopReport<T>> {
    let asymptotics = closed_loop_asymptotics(network)?;
    let decoherence_time = decoherence_time(&network.model, NormKind::Frobenius)?;
    let bound = optimize_bound(&network.model, lambda_grid)?;
    let covariance = steady_covariance(&network.model)?;
    Ok(ClosedLoopReport { asymptotics, decoherence_time, bound, covariance })
}

/// Subsystem entry of a network file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemFile {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub theta: ThetaSpec,
    #[serde(rename = "R")]
    pub r: Matrix<f64>,
    #[serde(rename = "Mshape")]
    pub m_shape: Matrix<f64>,
    #[serde(rename = "Lshape")]
    pub l_shape: Matrix<f64>,
    #[serde(rename = "D")]
    pub d: Vec<usize>,
}

/// Network file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub subsystems: Vec<SubsystemFile>,
    #[serde(rename = "R12")]
    pub r12: Matrix<f64>,
    pub epsilon: f64,
}

impl SubsystemFile {
    fn to_spec(&self) -> Result<SubsystemSpec<f64>> {
        let theta = self.theta.resolve(self.n)?;
        if theta.shape() != (self.n, self.n)
            || self.r.shape() != (self.n, self.n)
            || self.m_shape.shape() != (self.m, self.n)
            || self.l_shape.cols() != self.n
            || self.d.len() != self.p
        {
            return Err(Error::Dimension(format!(
                "subsystem declared n = {}, m = {}, p = {} disagrees with its matrices",
                self.n, self.m, self.p
            )));
        }
        SubsystemSpec::new(theta, self.r.clone(), self.m_shape.clone(), self.l_shape.clone(), self.d.clone())
    }
}

impl NetworkFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("network file: {e}")))
    }

    pub fn assemble(&self) -> Result<ClosedLoopNetwork<f64>> {
        let [s1, s2] = self.subsystems.as_slice() else {
            return Err(Error::Validation(format!("expected 2 subsystems, got {}", self.subsystems.len())));
        };
        assemble(s1.to_spec()?, s2.to_spec()?, self.r12.clone(), self.epsilon)
    }
}
