//! Invariant and transient real covariance, its weak-coupling limit and the
//! mean-energy balance.

use num_complex::Complex;
use serde::Serialize;

use crate::asymptotics::{asymptotics, CouplingDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{lyapunov_residual, min_hermitian_eigenvalue, quantum_covariance, solve_lyapunov, Matrix};
use crate::model::{build_state_space, spectral_structure, OscillatorModel};
use crate::scalar::Real;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceResult<T> {
    #[serde(rename = "P")]
    pub p: Matrix<T>,
    /// `‖AP + PAᵀ + BBᵀ‖_F`
    pub residual: T,
    /// `P + iΘ ⪰ 0` up to the shared PSD tolerance.
    pub psd_quantum: bool,
    pub min_quantum_eigenvalue: T,
}

/// Quantum PSD verdict for `P + iΘ` with the offending eigenvalue.
pub fn quantum_psd<T: Real>(p: &Matrix<T>, theta: &Matrix<T>) -> Result<(bool, T)> {
    let q = quantum_covariance(p, theta);
    let min = min_hermitian_eigenvalue(&q)?;
    let ok = min >= -T::lit(Tolerances::DEFAULT.psd) * (T::one() + q.frobenius_norm());
    Ok((ok, min))
}

/// Solution of `AP + PAᵀ + BBᵀ = 0`.
pub fn steady_covariance<T: Real>(model: &OscillatorModel<T>) -> Result<CovarianceResult<T>> {
    let ss = build_state_space(model)?;
    let p = solve_lyapunov(&ss.a, &ss.bbt)?;
    let residual = lyapunov_residual(&ss.a, &p, &ss.bbt);
    let (psd_quantum, min_quantum_eigenvalue) = quantum_psd(&p, model.theta())?;
    Ok(CovarianceResult { p, residual, psd_quantum, min_quantum_eigenvalue })
}

/// Fixed-step RK4 integration of `Ṗ = AP + PAᵀ + Q`, symmetrised after
/// every step.
#[derive(Debug, Clone)]
pub struct CovarianceFlow<T> {
    a: Matrix<T>,
    q: Matrix<T>,
    p: Matrix<T>,
    dt: T,
    steps: usize,
}

impl<T: Real> CovarianceFlow<T> {
    pub fn new(a: Matrix<T>, q: Matrix<T>, p0: Matrix<T>, dt: T) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || q.shape() != (n, n) || p0.shape() != (n, n) {
            return Err(Error::Dimension("covariance flow matrices must share one square shape".into()));
        }
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
        }
        let skew = p0.distance(&p0.transpose());
        if skew > T::lit(Tolerances::DEFAULT.hermitian) * T::one().max(p0.frobenius_norm()) {
            return Err(Error::Validation("initial covariance is not symmetric".into()));
        }
        Ok(Self { a, q, p: p0.symmetric_part(), dt, steps: 0 })
    }

    pub fn for_model(model: &OscillatorModel<T>, p0: Matrix<T>, dt: T) -> Result<Self> {
        let ss = build_state_space(model)?;
        Self::new(ss.a, ss.bbt, p0, dt)
    }

    fn rhs(&self, p: &Matrix<T>) -> Matrix<T> {
        let ap = &self.a * p;
        &(&ap + &ap.transpose()) + &self.q
    }

    pub fn time(&self) -> T {
        self.dt * T::lit(self.steps as f64)
    }

    pub fn state(&self) -> &Matrix<T> {
        &self.p
    }

    pub fn step(&mut self) -> Result<()> {
        let h = self.dt;
        let half = T::lit(0.5) * h;
        let k1 = self.rhs(&self.p);
        let k2 = self.rhs(&(&self.p + &k1.scale(half)));
        let k3 = self.rhs(&(&self.p + &k2.scale(half)));
        let k4 = self.rhs(&(&self.p + &k3.scale(h)));
        let mut incr = &k1 + &k4;
        incr += &(&k2 + &k3).scale(T::lit(2.0));
        let next = &self.p + &incr.scale(h / T::lit(6.0));
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("covariance diverged at t = {}", self.time() + h)));
        }
        self.p = next.symmetric_part();
        self.steps += 1;
        Ok(())
    }
}

impl<T: Real> Iterator for CovarianceFlow<T> {
    type Item = Result<(T, Matrix<T>)>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.step().map(|_| (self.time(), self.p.clone())))
    }
}

/// `0.01/‖A‖_F`
pub fn default_dt<T: Real>(a: &Matrix<T>) -> T {
    T::lit(0.01) / a.frobenius_norm().max(T::min_positive_value())
}

/// Samples `P(t)` at `t = 0, dt, 2dt, …` up to the last multiple of `dt` not
/// exceeding `t_end`.
pub fn transient_covariance<T: Real>(
    model: &OscillatorModel<T>,
    p0: &Matrix<T>,
    t_end: T,
    dt: T,
) -> Result<Vec<(T, Matrix<T>)>> {
    if !(t_end >= T::zero()) {
        return Err(Error::Parameter(format!("end time must be non-negative, got {t_end}")));
    }
    let mut flow = CovarianceFlow::for_model(model, p0.clone(), dt)?;
    let steps = (t_end / dt * (T::one() + T::epsilon())).floor().to_usize().unwrap_or(0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((T::zero(), flow.state().clone()));
    for _ in 0..steps {
        flow.step()?;
        out.push((flow.time(), flow.state().clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeContribution<T> {
    /// 1-based mode index.
    pub k: usize,
    pub omega_mu: T,
    /// `|𝔹ᵀ√R v_k|²`
    pub coupling_weight: T,
    /// `Re(v_k v_k*)`
    pub re_vv: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakCouplingLimit<T> {
    #[serde(rename = "Pi")]
    pub pi: Matrix<T>,
    pub modes: Vec<ModeContribution<T>>,
}

/// `Π = R^{-1/2} Σ_{k ≤ n/2} (ω_kμ_k)⁻¹ |𝔹ᵀ√R v_k|² Re(v_kv_k*) R^{-1/2}`.
pub fn weak_coupling_limit<T: Real>(model: &OscillatorModel<T>) -> Result<WeakCouplingLimit<T>> {
    let report = asymptotics(model)?;
    if report.thresholds.is_none() {
        return Err(Error::WeakCouplingUnstable { margin: report.verdict.margin.as_f64() });
    }
    let spectral = spectral_structure(model)?;
    let bshape = CouplingDecomposition::new(model)?.bshape;
    let n = model.n();
    let btr = (&bshape.transpose() * &spectral.sqrt_r).to_complex();
    let mut sum = Matrix::<T>::zeros(n, n);
    let mut modes = Vec::with_capacity(n / 2);
    for k in 0..n / 2 {
        let v = spectral.vector(k);
        let w = btr.mul_vec(&v);
        let weight: T = w.iter().map(Complex::norm_sqr).sum();
        let re_vv = Matrix::from_fn(n, n, |i, j| (v[i] * v[j].conj()).re);
        let omega_mu = report.omega_mu_products[k];
        sum += &re_vv.scale(weight / omega_mu);
        modes.push(ModeContribution { k: k + 1, omega_mu, coupling_weight: weight, re_vv });
    }
    let pi = (&(&spectral.inv_sqrt_r * &sum) * &spectral.inv_sqrt_r).symmetric_part();
    Ok(WeakCouplingLimit { pi, modes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRate<T> {
    pub value: T,
    /// `⟨ÃᵀR + RÃ, P⟩_F`
    pub drift_pairing: T,
    /// `⟨R, BBᵀ⟩_F`
    pub diffusion_pairing: T,
}

/// Rate of change of the mean energy at covariance `P`.
pub fn energy_rate<T: Real>(model: &OscillatorModel<T>, p: &Matrix<T>) -> Result<EnergyRate<T>> {
    let ss = build_state_space(model)?;
    if p.shape() != (model.n(), model.n()) {
        return Err(Error::Dimension("covariance has the wrong size".into()));
    }
    let r = model.r();
    let ra = r * &ss.atilde;
    let drift = &ra.transpose() + &ra;
    let drift_pairing = drift.frobenius_inner(p);
    let diffusion_pairing = r.frobenius_inner(&ss.bbt);
    Ok(EnergyRate { value: T::lit(0.5) * (drift_pairing + diffusion_pairing), drift_pairing, diffusion_pairing })
}

/// `½⟨R, P⟩_F`
pub fn mean_energy<T: Real>(model: &OscillatorModel<T>, p: &Matrix<T>) -> T {
    T::lit(0.5) * model.r().frobenius_inner(p)
}
