//! Numerical thresholds shared by every module.
//!
//! Tests pin behaviour against these exact values, so they live in one
//! record instead of being scattered as literals.

/// Tolerance and iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative bound on `‖X ∓ Xᵀ‖_F` for (anti)symmetry checks on model data.
    pub structure: f64,
    /// Relative bound on `‖H − H*‖_F` accepted by the Hermitian eigensolver.
    pub hermitian: f64,
    /// `is_hurwitz` requires `max Re λ < −hurwitz`.
    pub hurwitz: f64,
    /// PSD checks accept `λ_min ≥ −psd·(1 + ‖X‖_F)`.
    pub psd: f64,
    /// Nonsingular CCR matrix: `|det Θ| > det·‖Θ‖_Fⁿ`.
    pub det: f64,
    /// Eigenfrequencies closer than `degeneracy·max|ω|` are rejected.
    pub degeneracy: f64,
    /// First eigenvector component above this magnitude is made real positive.
    pub phase: f64,
    /// Strict positivity threshold for the weak-coupling damping coefficients.
    pub mu_positive: f64,
    /// Largest imaginary residue tolerated in quadratic forms that must be real.
    pub quadratic_form: f64,
    /// Relative bracket width at which the decoherence-time bisection stops.
    pub bisection: f64,
    /// Forward-march steps per slowest oscillation period.
    pub steps_per_period: f64,
    /// Maximum forward-march steps before giving up.
    pub horizon_steps: f64,
    /// Step used when no period is available, as a fraction of `1/|max Re λ|`.
    pub fallback_step: f64,
    /// Entrywise bound on the closed-loop assembly identity.
    pub assembly: f64,
    /// QR iteration cap per matrix dimension.
    pub qr_iterations_per_dim: usize,
    /// Sweep cap for the Jacobi eigensolver.
    pub jacobi_sweeps: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        structure: 1e-12,
        hermitian: 1e-10,
        hurwitz: 1e-12,
        psd: 1e-8,
        det: 1e-12,
        degeneracy: 1e-8,
        phase: 1e-8,
        mu_positive: 1e-10,
        quadratic_form: 1e-9,
        bisection: 1e-10,
        steps_per_period: 1000.0,
        horizon_steps: 1e4,
        fallback_step: 0.01,
        assembly: 1e-10,
        qr_iterations_per_dim: 100,
        jacobi_sweeps: 100,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
