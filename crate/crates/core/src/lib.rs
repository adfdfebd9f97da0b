//! Linear quantum harmonic oscillators coupled to external bosonic fields:
//! spectral structure, decoherence time, weak-coupling asymptotics,
//! invariant covariance, the one-mode closed forms and two-oscillator
//! feedback networks.
//!
//! Everything is generic over a [`Real`] scalar. The aliases below fix it
//! to `f64`, which is what the CLI and the tests use.

pub mod asymptotics;
pub mod covariance;
pub mod decay;
pub mod error;
pub mod interconnect;
pub mod io;
pub mod linalg;
pub mod model;
pub mod onemode;
pub mod scalar;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use num_complex::Complex;
pub use scalar::Real;
pub use tolerances::Tolerances;

pub type Complex64 = Complex<f64>;
pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex<f64>>;

pub type Model = model::OscillatorModel<f64>;
pub type StateSpace = model::StateSpace<f64>;
pub type SpectralStructure = model::SpectralStructure<f64>;
pub type AsymptoticsReport = asymptotics::AsymptoticsReport<f64>;
pub type Thresholds = asymptotics::Thresholds<f64>;
pub type SweepRow = asymptotics::SweepRow<f64>;
pub type DecoherenceTimeResult = decay::DecoherenceTimeResult<f64>;
pub type LyapunovBound = decay::LyapunovBound<f64>;
pub type CovarianceResult = covariance::CovarianceResult<f64>;
pub type OneModeParams = onemode::OneModeParams<f64>;
pub type ClosedLoopNetwork = interconnect::ClosedLoopNetwork<f64>;
pub type ClosedLoopReport = interconnect::ClosedLoopReport<f64>;
